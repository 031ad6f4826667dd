#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
点云光栅化: 生成腕部视角条件图

每个位于相机前方 (depth > z_eps) 的点以边长 2·radius_px+1 的方块溅射到
四舍五入后的像素中心；逐像素 z-buffer 保留最小深度。
并列规则与顺序无关: 深度在该像素最小深度 depth_test_eps 以内的点中，取编号最小者。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import GEOMETRY_CONFIG, SPLAT_CONFIG
from ..geometry.camera import Intrinsics, project, round_half_up
from ..geometry.pointcloud import PointCloud
from ..geometry.se3 import PoseSE3
from ..utils.errors import InputError, LengthMismatchError
from ..utils.parallel import ordered_map

logger = logging.getLogger(__name__)

_NO_POINT = np.iinfo(np.int64).max


class SplatConfig(BaseModel):
    """溅射配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    radius_px: int = Field(SPLAT_CONFIG["radius_px"], ge=0, le=SPLAT_CONFIG["max_radius_px"])
    depth_test_eps: float = Field(SPLAT_CONFIG["depth_test_eps"], ge=0)


@dataclass(frozen=True, eq=False)
class ConditionMap:
    """单帧条件图: rgb (H, W, 3)，depth (H, W, 0 表示空)，mask (H, W)"""
    rgb: np.ndarray
    depth: np.ndarray
    mask: np.ndarray

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @classmethod
    def empty(cls, height: int, width: int) -> "ConditionMap":
        return cls(np.zeros((height, width, 3)), np.zeros((height, width)), np.zeros((height, width), dtype=bool))

    def equals(self, other: "ConditionMap") -> bool:
        """rgb、depth、mask 逐位相同"""
        return (np.array_equal(self.rgb, other.rgb)
                and np.array_equal(self.depth, other.depth)
                and np.array_equal(self.mask, other.mask))


def _splat_offsets(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    dv, du = np.meshgrid(r, r, indexing="ij")
    return np.stack([du.ravel(), dv.ravel()], axis=1)


def rasterize_nearest(xyz: np.ndarray, pose: PoseSE3, K: Intrinsics, radius_px: int,
                      depth_test_eps: float, z_eps: float = None):
    """
    z-buffer 光栅化，只返回每个像素的获胜点

    Returns:
        (winner, depth): winner 形状 (H, W)，无点覆盖处为 -1；depth 为每个点的相机深度
    """
    if z_eps is None:
        z_eps = GEOMETRY_CONFIG["z_eps"]
    H, W = K.height, K.width
    winner = np.full(H * W, _NO_POINT, dtype=np.int64)
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    if len(xyz) == 0:
        return np.full((H, W), -1, dtype=np.int64), np.zeros(0)

    pixels, depth, _ = project(K, pose, xyz, z_eps)
    cols, rows = round_half_up(pixels)
    keep = (depth > z_eps) & (cols >= 0) & (cols < W) & (rows >= 0) & (rows < H)
    index = np.flatnonzero(keep)
    if index.size:
        offsets = _splat_offsets(radius_px)
        sc = (cols[index][:, None] + offsets[None, :, 0]).ravel()
        sr = (rows[index][:, None] + offsets[None, :, 1]).ravel()
        sp = np.repeat(index, len(offsets))
        inside = (sc >= 0) & (sc < W) & (sr >= 0) & (sr < H)
        pix = sr[inside] * W + sc[inside]
        pid = sp[inside]
        pdepth = depth[pid]

        min_depth = np.full(H * W, np.inf)
        np.minimum.at(min_depth, pix, pdepth)
        candidate = pdepth <= min_depth[pix] + depth_test_eps
        np.minimum.at(winner, pix[candidate], pid[candidate])

    winner[winner == _NO_POINT] = -1
    logger.debug(f"光栅化: {index.size} 个可见点, 覆盖 {int((winner >= 0).sum())} 个像素")
    return winner.reshape(H, W), depth


def render_condition_map(cloud: PointCloud, pose: PoseSE3, K: Intrinsics,
                         splat: SplatConfig = None, z_eps: float = None) -> ConditionMap:
    """把点云渲染为腕部视角条件图"""
    splat = splat or SplatConfig()
    result = ConditionMap.empty(K.height, K.width)
    if len(cloud) == 0:
        return result
    winner, depth = rasterize_nearest(cloud.xyz, pose, K, splat.radius_px, splat.depth_test_eps, z_eps)
    covered = winner >= 0
    result.rgb[covered] = cloud.colors()[winner[covered]]
    result.depth[covered] = depth[winner[covered]]
    result.mask[covered] = True
    return result


def render_sequence(clouds: Union[PointCloud, Sequence[PointCloud]], trajectory: Sequence[PoseSE3],
                    K: Intrinsics, splat: SplatConfig = None, threads: int = 1) -> List[ConditionMap]:
    """
    逐帧渲染条件图序列

    clouds 为单个静态点云或与轨迹等长的逐帧点云列表；帧之间互不依赖。

    Raises:
        LengthMismatchError: 逐帧点云数量与轨迹长度不一致
    """
    trajectory = list(trajectory)
    if not trajectory:
        raise InputError("轨迹至少需要一帧")
    if isinstance(clouds, PointCloud):
        per_frame = [clouds] * len(trajectory)
    else:
        per_frame = list(clouds)
        if len(per_frame) != len(trajectory):
            error_msg = f"逐帧点云数量 {len(per_frame)} 与轨迹长度 {len(trajectory)} 不一致"
            logger.error(error_msg)
            raise LengthMismatchError(error_msg)
    logger.info(f"开始渲染 {len(trajectory)} 帧条件图")
    return ordered_map(
        lambda t: render_condition_map(per_frame[t], trajectory[t], K, splat),
        range(len(trajectory)),
        threads=threads,
    )


__all__ = ['SplatConfig', 'PointCloud', 'ConditionMap', 'rasterize_nearest', 'render_condition_map', 'render_sequence']
