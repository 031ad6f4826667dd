#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
空间投影一致性 (SPC) 损失

L_proj = λ_u·L_u + λ_depth·L_depth
- L_u: S_front 上投影像素与观测腕部像素的 (加权) 平均平方距离，
  normalization = image_diagonal 时再除以 width² + height²
- L_depth: S_back 上深度的 (加权) 平均取负
空集合对应的项记为 0。求和一律用 math.fsum (精确舍入)，
因此结果与轨迹顺序无关且逐位可复现。

梯度对应左乘扰动 pose(ξ) = compose(se3_exp(ξ), pose) 在 ξ = 0 处的导数:
∂q/∂ω = −[q]x, ∂q/∂τ = I。
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import GEOMETRY_CONFIG, SPC_CONFIG
from ..geometry.camera import Intrinsics, transform_to_camera
from ..geometry.se3 import PoseSE3, Twist6
from ..utils.errors import AllSkippedError
from .correspondence import TrackSet

logger = logging.getLogger(__name__)


class SpcConfig(BaseModel):
    """SPC 损失配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_u: float = Field(SPC_CONFIG["lambda_u"], ge=0)
    lambda_depth: float = Field(SPC_CONFIG["lambda_depth"], ge=0)
    normalization: Literal["none", "image_diagonal"] = SPC_CONFIG["normalization"]
    z_eps: float = Field(GEOMETRY_CONFIG["z_eps"], gt=0)

    @model_validator(mode="after")
    def _check_weights(self):
        if not self.lambda_u + self.lambda_depth > 0:
            raise ValueError("lambda_u 与 lambda_depth 不能同时为 0")
        return self


@dataclass(frozen=True)
class SpcBreakdown:
    """损失分解及前后集合规模"""
    l_u: float
    l_depth: float
    l_proj: float
    n_front: int
    n_back: int
    n_skipped: int


@dataclass(frozen=True, eq=False)
class SpcEvaluation:
    """一次求值的全部中间量，供求解器复用"""
    breakdown: SpcBreakdown
    gradient: Optional[np.ndarray]
    gauss_newton: Optional[np.ndarray]
    barrier: float
    barrier_gradient: Optional[np.ndarray]


def _fsum_columns(values: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(values[:, k]) for k in range(values.shape[1])])


def partition_front_back(tracks: TrackSet, pose: PoseSE3,
                         z_eps: float = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """按相机坐标系深度划分: z > z_eps 为前方, z < −z_eps 为后方, 其余跳过; 返回索引数组"""
    if z_eps is None:
        z_eps = GEOMETRY_CONFIG["z_eps"]
    z = transform_to_camera(pose, tracks.points)[:, 2]
    front = z > z_eps
    back = z < -z_eps
    skipped = ~(front | back)
    return np.flatnonzero(front), np.flatnonzero(back), np.flatnonzero(skipped)


def evaluate_spc(tracks: TrackSet, pose: PoseSE3, K: Intrinsics, cfg: SpcConfig,
                 with_gradient: bool = False, with_gauss_newton: bool = False) -> SpcEvaluation:
    """
    计算 SPC 损失，可选梯度、L_u 项的 Gauss-Newton 矩阵与深度屏障

    深度屏障 λ_depth·Σ_back w·(−z) / Σ w 在点跨过 z = 0 时连续，求解器在存在后方点时用它做线搜索。
    """
    q = transform_to_camera(pose, tracks.points)
    z = q[:, 2]
    front = z > cfg.z_eps
    back = z < -cfg.z_eps
    n_front = int(front.sum())
    n_back = int(back.sum())
    n_skipped = len(tracks) - n_front - n_back
    if n_front + n_back == 0:
        error_msg = f"全部 {len(tracks)} 条轨迹的深度都在 ±{cfg.z_eps} 以内"
        logger.error(error_msg)
        raise AllSkippedError(error_msg)

    norm = K.diagonal_sq if cfg.normalization == "image_diagonal" else 1.0
    w = tracks.weights
    grad_terms = []
    gauss_newton = np.zeros((6, 6)) if with_gauss_newton else None

    l_u = 0.0
    if n_front:
        qf = q[front]
        wf = w[front]
        obs = tracks.wrist_pixels[front]
        inv_z = 1.0 / qf[:, 2]
        u = K.fx * qf[:, 0] / qf[:, 2] + K.cx
        v = K.fy * qf[:, 1] / qf[:, 2] + K.cy
        ru = u - obs[:, 0]
        rv = v - obs[:, 1]
        err = (ru * ru + rv * rv) / norm
        w_front = math.fsum(wf)
        l_u = math.fsum(wf * err) / w_front

        if with_gradient or with_gauss_newton:
            coef = cfg.lambda_u * wf / w_front * (2.0 / norm)
            zeros = np.zeros_like(inv_z)
            du = np.stack([K.fx * inv_z, zeros, -K.fx * qf[:, 0] * inv_z * inv_z], axis=1)
            dv = np.stack([zeros, K.fy * inv_z, -K.fy * qf[:, 1] * inv_z * inv_z], axis=1)
            if with_gradient:
                g_q = coef[:, None] * (ru[:, None] * du + rv[:, None] * dv)
                grad_terms.append(np.concatenate([np.cross(qf, g_q), g_q], axis=1))
            if with_gauss_newton:
                J_u = np.concatenate([np.cross(qf, du), du], axis=1)
                J_v = np.concatenate([np.cross(qf, dv), dv], axis=1)
                gauss_newton = (np.einsum("m,mi,mj->ij", coef, J_u, J_u)
                                + np.einsum("m,mi,mj->ij", coef, J_v, J_v))

    l_depth = 0.0
    barrier = 0.0
    barrier_gradient = np.zeros(6) if with_gradient else None
    if n_back:
        qb = q[back]
        wb = w[back]
        w_back = math.fsum(wb)
        l_depth = -math.fsum(wb * qb[:, 2]) / w_back
        w_all = math.fsum(w)
        barrier = -cfg.lambda_depth * math.fsum(wb * qb[:, 2]) / w_all
        if with_gradient:
            e_z = np.zeros_like(qb)
            e_z[:, 2] = -1.0
            g_q = (cfg.lambda_depth * wb / w_back)[:, None] * e_z
            grad_terms.append(np.concatenate([np.cross(qb, g_q), g_q], axis=1))
            g_bar = (cfg.lambda_depth * wb / w_all)[:, None] * e_z
            barrier_gradient = _fsum_columns(np.concatenate([np.cross(qb, g_bar), g_bar], axis=1))

    l_proj = cfg.lambda_u * l_u + cfg.lambda_depth * l_depth
    gradient = None
    if with_gradient:
        gradient = _fsum_columns(np.concatenate(grad_terms, axis=0)) if grad_terms else np.zeros(6)

    breakdown = SpcBreakdown(
        l_u=l_u, l_depth=l_depth, l_proj=l_proj,
        n_front=n_front, n_back=n_back, n_skipped=n_skipped,
    )
    return SpcEvaluation(breakdown, gradient, gauss_newton, barrier, barrier_gradient)


def spc_loss(tracks: TrackSet, pose: PoseSE3, K: Intrinsics, cfg: SpcConfig = None) -> SpcBreakdown:
    """SPC 损失分解"""
    cfg = cfg or SpcConfig()
    return evaluate_spc(tracks, pose, K, cfg).breakdown


def spc_gradient(tracks: TrackSet, pose: PoseSE3, K: Intrinsics, cfg: SpcConfig = None) -> Twist6:
    """L_proj 对位姿切向量 (ω, τ) 的解析梯度，跳过的点贡献为 0"""
    cfg = cfg or SpcConfig()
    return Twist6.from_vector(evaluate_spc(tracks, pose, K, cfg, with_gradient=True).gradient)


__all__ = [
    'SpcConfig', 'SpcBreakdown', 'SpcEvaluation', 'partition_front_back',
    'evaluate_spc', 'spc_loss', 'spc_gradient',
]
