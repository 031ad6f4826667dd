#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
位姿穷举网格

在中心位姿周围的 6 维切空间规则网格上逐点计算 L_proj，作为求解器正确性的穷举参照。
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from ..config import PERFORMANCE_CONFIG
from ..geometry.camera import Intrinsics
from ..geometry.se3 import PoseSE3, Twist6, compose, se3_exp
from ..spc.correspondence import TrackSet
from ..spc.loss import SpcConfig, spc_loss
from ..utils.errors import AllSkippedError, GridTooLargeError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PoseGrid:
    """网格采样结果: twists (K, 6) 与对应的 l_proj (K,)，全部跳过的采样记为 inf"""
    center: PoseSE3
    twists: np.ndarray
    losses: np.ndarray

    def __len__(self) -> int:
        return len(self.losses)

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.losses))

    @property
    def best_twist(self) -> Twist6:
        return Twist6.from_vector(self.twists[self.best_index])

    @property
    def best_loss(self) -> float:
        return float(self.losses[self.best_index])

    def best_pose(self) -> PoseSE3:
        return compose(se3_exp(self.best_twist), self.center)


def brute_force_pose_grid(tracks: TrackSet, K: Intrinsics, spc_cfg: SpcConfig, center: PoseSE3,
                          extent: float, steps: int, show_progress: bool = None) -> PoseGrid:
    """
    6 维规则网格: 每个轴取 linspace(−extent, extent, steps)；extent = 0 时每个轴只有 0 一个取值

    Raises:
        GridTooLargeError: steps^6 超过上限
    """
    spc_cfg = spc_cfg or SpcConfig()
    if steps < 1 or extent < 0:
        raise InputError(f"网格参数不合法: steps={steps}, extent={extent}")
    limit = PERFORMANCE_CONFIG["grid_limit"]
    if steps ** 6 > limit:
        error_msg = f"网格规模 {steps}^6 = {steps ** 6} 超过上限 {limit}"
        logger.error(error_msg)
        raise GridTooLargeError(error_msg)

    axis = np.zeros(1) if extent == 0 else np.linspace(-extent, extent, steps)
    twists = np.array(list(itertools.product(axis, repeat=6)), dtype=np.float64)
    losses = np.empty(len(twists))
    if show_progress is None:
        show_progress = PERFORMANCE_CONFIG["show_progress"]

    logger.info(f"开始穷举 {len(twists)} 个网格位姿")
    for k, xi in enumerate(tqdm(twists, desc="位姿网格", disable=not show_progress)):
        pose = compose(se3_exp(Twist6.from_vector(xi)), center)
        try:
            losses[k] = spc_loss(tracks, pose, K, spc_cfg).l_proj
        except AllSkippedError:
            losses[k] = np.inf
    grid = PoseGrid(center, twists, losses)
    logger.info(f"网格最小损失 {grid.best_loss:.6e}, 位于 {grid.best_twist.as_vector().tolist()}")
    return grid


__all__ = ['PoseGrid', 'brute_force_pose_grid']
