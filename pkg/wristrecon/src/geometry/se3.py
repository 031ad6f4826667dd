#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
刚体变换

PoseSE3 表示世界坐标到相机坐标的变换 q = R·p + T。
切空间 Twist6 = (omega, tau)，回缩映射为 (Rodrigues(omega), tau)，
求解器用左乘扰动 compose(se3_exp(xi), pose) 迭代。
旋转以矩阵存储。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..config import GEOMETRY_CONFIG

_SMALL_ANGLE = 1e-8


def _frozen(array, shape) -> np.ndarray:
    out = np.array(array, dtype=np.float64).reshape(shape)
    out.setflags(write=False)
    return out


def hat(w) -> np.ndarray:
    """3 维向量的反对称矩阵 [w]x"""
    wx, wy, wz = np.asarray(w, dtype=np.float64)
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def rodrigues(omega) -> np.ndarray:
    """轴角向量转旋转矩阵，小角度时使用二阶展开"""
    omega = np.asarray(omega, dtype=np.float64)
    theta = float(np.linalg.norm(omega))
    S = hat(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + S + 0.5 * (S @ S)
    return (np.eye(3)
            + S * (np.sin(theta) / theta)
            + (S @ S) * ((1.0 - np.cos(theta)) / theta ** 2))


def project_to_so3(M) -> np.ndarray:
    """极分解: 求离 M 最近的旋转矩阵 (保证 det = +1)"""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=np.float64))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def orthonormality_error(R) -> float:
    """max|RᵀR − I| 与 |det R − 1| 中的较大者"""
    R = np.asarray(R, dtype=np.float64)
    return max(float(np.max(np.abs(R.T @ R - np.eye(3)))), abs(float(np.linalg.det(R)) - 1.0))


@dataclass(frozen=True, eq=False)
class Twist6:
    """切空间向量: 旋转部分 omega (弧度) 与平移部分 tau"""
    omega: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega, (3,)))
        object.__setattr__(self, "tau", _frozen(self.tau, (3,)))
        if not (np.all(np.isfinite(self.omega)) and np.all(np.isfinite(self.tau))):
            raise ValueError("Twist6 含有非有限值")

    @classmethod
    def zero(cls) -> "Twist6":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, xi) -> "Twist6":
        xi = np.asarray(xi, dtype=np.float64).reshape(6)
        return cls(xi[:3], xi[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.tau])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))

    def scaled(self, factor: float) -> "Twist6":
        return Twist6(self.omega * factor, self.tau * factor)


@dataclass(frozen=True, eq=False)
class PoseSE3:
    """世界到相机的刚体变换 (R_w, T_w)"""
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen(self.rotation, (3, 3)))
        object.__setattr__(self, "translation", _frozen(self.translation, (3,)))
        if not (np.all(np.isfinite(self.rotation)) and np.all(np.isfinite(self.translation))):
            raise ValueError("PoseSE3 含有非有限值")
        err = orthonormality_error(self.rotation)
        if err >= GEOMETRY_CONFIG["orthonormal_tol"]:
            raise ValueError(f"旋转矩阵不满足正交性, 误差 {err:.3e}")

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix) -> "PoseSE3":
        """由 3x4 或 4x4 矩阵构造"""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def from_row(cls, values: Iterable[float]) -> "PoseSE3":
        """由 12 个数构造: R 按行展开后接 T"""
        values = np.asarray(list(values), dtype=np.float64)
        if values.shape != (12,):
            raise ValueError(f"位姿需要 12 个数, 实际 {values.size}")
        return cls(values[:9].reshape(3, 3), values[9:])

    def as_row(self) -> np.ndarray:
        return np.concatenate([self.rotation.reshape(9), self.translation])

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    @property
    def camera_center(self) -> np.ndarray:
        """相机中心的世界坐标 C = −RᵀT"""
        return -self.rotation.T @ self.translation

    def allclose(self, other: "PoseSE3", atol: float = 1e-9) -> bool:
        return (np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol)
                and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"PoseSE3(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def se3_exp(t: Twist6) -> PoseSE3:
    """回缩映射: (Rodrigues(omega), tau)"""
    return PoseSE3(rodrigues(t.omega), t.tau)


def compose(a: PoseSE3, b: PoseSE3) -> PoseSE3:
    """先作用 b 再作用 a"""
    return PoseSE3(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(a: PoseSE3) -> PoseSE3:
    """逆变换 (Rᵀ, −RᵀT)"""
    Rt = a.rotation.T
    return PoseSE3(Rt, -Rt @ a.translation)


def retract(pose: PoseSE3, xi) -> PoseSE3:
    """左乘扰动 compose(se3_exp(xi), pose)，结果旋转重新正交化"""
    moved = compose(se3_exp(Twist6.from_vector(xi)), pose)
    return PoseSE3(project_to_so3(moved.rotation), moved.translation)


def look_at(center, target, up=(0.0, 0.0, 1.0)) -> PoseSE3:
    """相机位于 center 看向 target (x 右, y 下, z 前)"""
    center = np.asarray(center, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - center
    forward /= np.linalg.norm(forward)
    up = np.asarray(up, dtype=np.float64)
    if abs(float(forward @ up)) > 0.99:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    R = project_to_so3(np.stack([right, down, forward]))
    return PoseSE3(R, -R @ center)


def relative_to_anchor(pose: PoseSE3, anchor_pose: PoseSE3) -> PoseSE3:
    """把腕部位姿改写到锚点相机坐标系下 (锚点 0 即 ext1 约定)"""
    return compose(pose, invert(anchor_pose))


__all__ = [
    'Twist6', 'PoseSE3', 'hat', 'rodrigues', 'project_to_so3',
    'orthonormality_error', 'se3_exp', 'compose', 'invert', 'retract',
    'look_at', 'relative_to_anchor',
]
