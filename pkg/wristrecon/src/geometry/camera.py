#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
针孔相机模型

像素坐标连续，(0, 0) 为左上角像素的中心。
所有函数既接受单个点 (3,) 也接受批量点 (N, 3)。
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..config import GEOMETRY_CONFIG
from .se3 import PoseSE3


@dataclass(frozen=True)
class Intrinsics:
    """相机内参 K (像素单位)"""
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"焦距必须为正: fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(f"主点 ({self.cx}, {self.cy}) 不在图像 {self.width}x{self.height} 内")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    @property
    def diagonal_sq(self) -> float:
        """图像对角线长度的平方 width² + height²"""
        return float(self.width ** 2 + self.height ** 2)

    def scaled(self, width: int, height: int) -> "Intrinsics":
        """图像缩放到 width x height 后的内参 (按像素中心约定)"""
        sx = width / self.width
        sy = height / self.height
        return replace(
            self,
            fx=self.fx * sx,
            fy=self.fy * sy,
            cx=(self.cx + 0.5) * sx - 0.5,
            cy=(self.cy + 0.5) * sy - 0.5,
            width=width,
            height=height,
        )

    def contains(self, pixels: np.ndarray) -> np.ndarray:
        """四舍五入后的像素中心是否落在图像内"""
        cols, rows = round_half_up(pixels)
        return (cols >= 0) & (cols < self.width) & (rows >= 0) & (rows < self.height)


def round_half_up(pixels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """连续像素坐标取最近像素中心, .5 向上取整; 返回 (列, 行) 整数数组"""
    pixels = np.asarray(pixels, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        idx = np.floor(pixels + 0.5)
    idx = np.clip(np.where(np.isfinite(idx), idx, -1), -1, 2 ** 31).astype(np.int64)
    return idx[..., 0], idx[..., 1]


def transform_to_camera(pose: PoseSE3, p) -> np.ndarray:
    """
    世界点变换到相机坐标系: R·p + T，第三个分量即深度 z

    按列逐元素展开而不走 BLAS，保证同一个点不论批量大小结果都逐位相同。
    """
    p = np.asarray(p, dtype=np.float64)
    R = pose.rotation
    return (p[..., 0, None] * R[:, 0]
            + p[..., 1, None] * R[:, 1]
            + p[..., 2, None] * R[:, 2]
            + pose.translation)


def project(K: Intrinsics, pose: PoseSE3, p, z_eps: float = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    针孔投影

    Returns:
        (pixels, depth, valid): |depth| < z_eps 的点 valid 为 False，
        其像素为 NaN；深度原样返回。相机后方的点照常计算像素。
    """
    if z_eps is None:
        z_eps = GEOMETRY_CONFIG["z_eps"]
    q = transform_to_camera(pose, p)
    depth = q[..., 2]
    valid = np.abs(depth) >= z_eps
    safe = np.where(valid, depth, 1.0)
    u = K.fx * q[..., 0] / safe + K.cx
    v = K.fy * q[..., 1] / safe + K.cy
    pixels = np.stack([u, v], axis=-1)
    pixels = np.where(valid[..., None], pixels, np.nan)
    return pixels, depth, valid


def unproject(K: Intrinsics, pose: PoseSE3, pixels, depth) -> np.ndarray:
    """由像素与深度恢复世界点 (project 的逆)"""
    pixels = np.asarray(pixels, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    x = (pixels[..., 0] - K.cx) / K.fx * depth
    y = (pixels[..., 1] - K.cy) / K.fy * depth
    q = np.stack([x, y, depth], axis=-1)
    return (q - pose.translation) @ pose.rotation


__all__ = ['Intrinsics', 'round_half_up', 'transform_to_camera', 'project', 'unproject']
