#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
DLT 位姿初始化

从 3D-2D 轨迹线性估计投影矩阵 [R|t]，再用 SVD 极分解把旋转块投影到 SO(3)。
不保证所有点位于相机前方。
"""
from __future__ import annotations

import logging

import numpy as np

from ..geometry.camera import Intrinsics
from ..geometry.se3 import PoseSE3, project_to_so3
from ..spc.correspondence import TrackSet
from ..utils.errors import DegenerateConfigurationError

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-8
MIN_TRACKS = 6


def _normalize_points(points: np.ndarray) -> np.ndarray:
    """Hartley 归一化: 质心移到原点, 平均距离 √3; 返回 4x4 相似变换"""
    centroid = points.mean(axis=0)
    spread = np.mean(np.linalg.norm(points - centroid, axis=1))
    scale = np.sqrt(3.0) / spread if spread > 0 else 1.0
    T = np.eye(4)
    T[:3, :3] *= scale
    T[:3, 3] = -scale * centroid
    return T


def linear_init(tracks: TrackSet, K: Intrinsics) -> PoseSE3:
    """
    DLT 初始化

    Raises:
        DegenerateConfigurationError: 轨迹少于 6 条，或设计矩阵的次小奇异值
            相对最大奇异值小于 1e-8 (零空间维数大于 1)
    """
    n = len(tracks)
    if n < MIN_TRACKS:
        error_msg = f"DLT 至少需要 {MIN_TRACKS} 条轨迹, 实际 {n}"
        logger.error(error_msg)
        raise DegenerateConfigurationError(error_msg)

    # 像素转归一化相机坐标
    x = (tracks.wrist_pixels[:, 0] - K.cx) / K.fx
    y = (tracks.wrist_pixels[:, 1] - K.cy) / K.fy

    T_norm = _normalize_points(tracks.points)
    X = np.hstack([tracks.points, np.ones((n, 1))]) @ T_norm.T

    A = np.zeros((2 * n, 12))
    A[0::2, 0:4] = X
    A[0::2, 8:12] = -x[:, None] * X
    A[1::2, 4:8] = X
    A[1::2, 8:12] = -y[:, None] * X

    _, s, Vt = np.linalg.svd(A)
    if s[-2] / s[0] < RANK_TOLERANCE:
        error_msg = f"DLT 设计矩阵秩亏: 相对奇异值 {s[-2] / s[0]:.3e}"
        logger.warning(error_msg)
        raise DegenerateConfigurationError(error_msg)

    P = Vt[-1].reshape(3, 4) @ T_norm
    M = P[:, :3]
    if np.linalg.det(M) < 0:
        P = -P
        M = -M
    scale = float(np.mean(np.linalg.svd(M, compute_uv=False)))
    R = project_to_so3(M)
    t = P[:, 3] / scale
    logger.debug(f"DLT 初始化完成, 尺度 {scale:.6g}")
    return PoseSE3(R, t)


__all__ = ['linear_init']
