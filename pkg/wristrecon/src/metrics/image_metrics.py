#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
图像质量指标与重投影误差

PSNR 动态范围固定为 1.0；两幅完全相同的图像返回 PSNR_IDENTICAL (+inf) 哨兵值，
汇总时单独计数而不参与平均。
SSIM 为单尺度标准定义: 11x11 高斯窗 (σ = 1.5)，K1 = 0.01，K2 = 0.03，
对所有完整窗口位置取平均，多通道逐通道计算后平均 (skimage.metrics.structural_similarity)。
"""
from __future__ import annotations

import logging
import math
from typing import Dict, Iterable

import numpy as np
from skimage.metrics import structural_similarity

from ..config import GEOMETRY_CONFIG
from ..geometry.camera import Intrinsics, transform_to_camera
from ..geometry.se3 import PoseSE3
from ..spc.correspondence import TrackSet
from ..utils.errors import DimensionMismatchError, NoFrontPointsError, TooSmallError

logger = logging.getLogger(__name__)

PSNR_IDENTICAL = math.inf

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 1.0


def _as_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        error_msg = f"图像尺寸不一致: {a.shape} 与 {b.shape}"
        logger.error(error_msg)
        raise DimensionMismatchError(error_msg)
    return a, b


def psnr(a, b) -> float:
    """10·log10(1 / MSE)，MSE 对所有像素和通道取平均"""
    a, b = _as_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return 10.0 * math.log10(DYNAMIC_RANGE ** 2 / mse)


def ssim(a, b) -> float:
    """
    单尺度 SSIM，图像形状 (H, W) 或 (H, W, C)

    Raises:
        DimensionMismatchError: 尺寸不一致
        TooSmallError: min(H, W) < 11
    """
    a, b = _as_pair(a, b)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        error_msg = f"图像 {a.shape[1]}x{a.shape[0]} 小于 SSIM 窗口 {SSIM_WINDOW}"
        logger.error(error_msg)
        raise TooSmallError(error_msg)
    # sigma=1.5 与默认 truncate=3.5 给出 11x11 窗口；结果已裁掉边界，只对完整窗口取平均
    return float(structural_similarity(
        a, b,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=SSIM_K1,
        K2=SSIM_K2,
        data_range=DYNAMIC_RANGE,
        channel_axis=-1,
    ))


def reprojection_rmse(tracks: TrackSet, pose: PoseSE3, K: Intrinsics, z_eps: float = None) -> float:
    """
    前方轨迹上的像素均方根重投影误差 (不归一化、不加权)

    Raises:
        NoFrontPointsError: 没有位于相机前方的轨迹
    """
    if z_eps is None:
        z_eps = GEOMETRY_CONFIG["z_eps"]
    q = transform_to_camera(pose, tracks.points)
    front = q[:, 2] > z_eps
    if not front.any():
        error_msg = f"{len(tracks)} 条轨迹中没有位于相机前方的点"
        logger.error(error_msg)
        raise NoFrontPointsError(error_msg)
    qf = q[front]
    obs = tracks.wrist_pixels[front]
    ru = K.fx * qf[:, 0] / qf[:, 2] + K.cx - obs[:, 0]
    rv = K.fy * qf[:, 1] / qf[:, 2] + K.cy - obs[:, 1]
    return math.sqrt(math.fsum(ru * ru + rv * rv) / int(front.sum()))


def summarize_psnr(values: Iterable[float]) -> Dict[str, float]:
    """
    汇总 PSNR: mean 只平均有限值，identical 为哨兵值个数

    全部为哨兵值时 mean 也是 PSNR_IDENTICAL。
    """
    values = [float(v) for v in values]
    finite = [v for v in values if math.isfinite(v)]
    identical = len(values) - len(finite)
    if identical:
        logger.warning(f"{identical} 帧图像完全相同, PSNR 不参与平均")
    if finite:
        mean = math.fsum(finite) / len(finite)
    else:
        mean = PSNR_IDENTICAL if identical else math.nan
    return {"mean": mean, "identical": identical, "count": len(values)}


__all__ = [
    'PSNR_IDENTICAL', 'psnr', 'ssim', 'reprojection_rmse', 'summarize_psnr',
]
