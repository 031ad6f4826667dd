#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
对应关系与三维-二维提升

锚点视角与腕部视角的 2D-2D 匹配 C = {(u_q^j, û_w^j)} 通过锚点逐像素点图
提升为 3D-2D 轨迹 T = {(ŷ_j, û_w^j)}。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..geometry.camera import round_half_up
from ..utils.errors import EmptyResultError, InputError, NegativeIndexError

logger = logging.getLogger(__name__)


def _readonly(array, dtype, shape_tail) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    if out.size == 0:
        out = out.reshape((0,) + shape_tail)
    if out.shape[1:] != shape_tail:
        raise InputError(f"数组形状 {out.shape} 与期望 (M,{','.join(map(str, shape_tail))}) 不符")
    out.setflags(write=False)
    return out


class Correspondence2D2D(NamedTuple):
    """单条锚点-腕部像素匹配"""
    anchor_view_index: int
    anchor_pixel: Tuple[float, float]
    wrist_pixel: Tuple[float, float]


class Track(NamedTuple):
    """单条 3D-2D 轨迹"""
    point: Tuple[float, float, float]
    wrist_pixel: Tuple[float, float]
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    """匹配集合 (数组形式)，line_numbers 记录来源文件行号，内存生成时为 0"""
    view_index: np.ndarray
    anchor_pixels: np.ndarray
    wrist_pixels: np.ndarray
    line_numbers: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "view_index", _readonly(self.view_index, np.int64, ()))
        object.__setattr__(self, "anchor_pixels", _readonly(self.anchor_pixels, np.float64, (2,)))
        object.__setattr__(self, "wrist_pixels", _readonly(self.wrist_pixels, np.float64, (2,)))
        lines = np.zeros(len(self.view_index), dtype=np.int64) if self.line_numbers is None else self.line_numbers
        object.__setattr__(self, "line_numbers", _readonly(lines, np.int64, ()))
        n = len(self.view_index)
        if not (len(self.anchor_pixels) == len(self.wrist_pixels) == len(self.line_numbers) == n):
            raise InputError("匹配集合各字段长度不一致")
        if n and int(self.view_index.min()) < 0:
            bad = int(np.argmax(self.view_index < 0))
            raise NegativeIndexError(f"第 {bad} 条匹配的锚点索引为负: {int(self.view_index[bad])}")

    def __len__(self) -> int:
        return len(self.view_index)

    @classmethod
    def from_records(cls, records: Iterable[Correspondence2D2D]) -> "CorrespondenceSet":
        records = list(records)
        return cls(
            view_index=[r.anchor_view_index for r in records],
            anchor_pixels=[r.anchor_pixel for r in records],
            wrist_pixels=[r.wrist_pixel for r in records],
        )

    def records(self) -> List[Correspondence2D2D]:
        return [
            Correspondence2D2D(int(i), tuple(a), tuple(w))
            for i, a, w in zip(self.view_index, self.anchor_pixels.tolist(), self.wrist_pixels.tolist())
        ]

    def equals(self, other: "CorrespondenceSet") -> bool:
        """逐位比较 (忽略行号)"""
        return (np.array_equal(self.view_index, other.view_index)
                and np.array_equal(self.anchor_pixels, other.anchor_pixels)
                and np.array_equal(self.wrist_pixels, other.wrist_pixels))


@dataclass(frozen=True, eq=False)
class TrackSet:
    """3D-2D 轨迹集合: 世界点、观测到的腕部像素与权重"""
    points: np.ndarray
    wrist_pixels: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "points", _readonly(self.points, np.float64, (3,)))
        object.__setattr__(self, "wrist_pixels", _readonly(self.wrist_pixels, np.float64, (2,)))
        weights = np.ones(len(self.points)) if self.weights is None else self.weights
        object.__setattr__(self, "weights", _readonly(weights, np.float64, ()))
        if not (len(self.points) == len(self.wrist_pixels) == len(self.weights)):
            raise InputError("轨迹集合各字段长度不一致")
        if not np.all(np.isfinite(self.points)):
            raise InputError("轨迹点含有非有限坐标")
        if np.any(self.weights <= 0) or np.any(self.weights > 1):
            raise InputError("轨迹权重必须位于 (0, 1]")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_records(cls, records: Iterable[Track]) -> "TrackSet":
        records = list(records)
        return cls(
            points=[r.point for r in records],
            wrist_pixels=[r.wrist_pixel for r in records],
            weights=[r.weight for r in records],
        )

    def records(self) -> List[Track]:
        return [
            Track(tuple(p), tuple(w), float(c))
            for p, w, c in zip(self.points.tolist(), self.wrist_pixels.tolist(), self.weights)
        ]

    def subset(self, index) -> "TrackSet":
        return TrackSet(self.points[index], self.wrist_pixels[index], self.weights[index])

    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def radius(self) -> float:
        """点云相对质心的最大距离"""
        return float(np.max(np.linalg.norm(self.points - self.centroid(), axis=1)))

    def diameter(self) -> float:
        return 2.0 * self.radius()


@dataclass(frozen=True, eq=False)
class AnchorPointMap:
    """单个锚点视角的稠密逐像素世界点 (H, W, 3) 及有效掩码"""
    points: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        if points.ndim != 3 or points.shape[2] != 3 or valid.shape != points.shape[:2]:
            raise InputError(f"点图形状不合法: points {points.shape}, valid {valid.shape}")
        if not np.all(np.isfinite(points[valid])):
            raise InputError("点图中被标记为有效的条目含有非有限值")
        points.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "valid", valid)

    @property
    def height(self) -> int:
        return self.points.shape[0]

    @property
    def width(self) -> int:
        return self.points.shape[1]


def lift_correspondences(corrs: CorrespondenceSet,
                         anchor_maps: Sequence[AnchorPointMap]) -> Tuple[TrackSet, int]:
    """
    把 2D-2D 匹配提升为 3D-2D 轨迹

    锚点像素取最近的格点 (不做双线性插值，避免在深度不连续处生成虚假点)；
    落在无效条目上的匹配被丢弃并计数。

    Returns:
        (tracks, n_dropped)

    Raises:
        EmptyResultError: 没有任何匹配落在有效条目上
    """
    n = len(corrs)
    if n and int(corrs.view_index.max()) >= len(anchor_maps):
        bad = int(np.argmax(corrs.view_index >= len(anchor_maps)))
        error_msg = f"第 {bad} 条匹配引用了不存在的锚点视角 {int(corrs.view_index[bad])} (共 {len(anchor_maps)} 个)"
        logger.error(error_msg)
        raise InputError(error_msg)

    cols, rows = round_half_up(corrs.anchor_pixels)
    keep = np.zeros(n, dtype=bool)
    points = np.zeros((n, 3))
    for view, point_map in enumerate(anchor_maps):
        sel = np.flatnonzero(corrs.view_index == view)
        if sel.size == 0:
            continue
        c, r = cols[sel], rows[sel]
        inside = (c >= 0) & (c < point_map.width) & (r >= 0) & (r < point_map.height)
        if not np.all(inside):
            bad = int(sel[np.argmin(inside)])
            error_msg = f"第 {bad} 条匹配的锚点像素 {corrs.anchor_pixels[bad].tolist()} 超出图像范围"
            logger.error(error_msg)
            raise InputError(error_msg)
        hit = point_map.valid[r, c]
        keep[sel] = hit
        points[sel[hit]] = point_map.points[r[hit], c[hit]]

    n_dropped = int(n - keep.sum())
    if not keep.any():
        error_msg = f"全部 {n} 条匹配都落在无效点图条目上"
        logger.error(error_msg)
        raise EmptyResultError(error_msg)
    if n_dropped:
        logger.warning(f"丢弃 {n_dropped} 条落在无效点图条目上的匹配")
    logger.info(f"提升得到 {int(keep.sum())} 条 3D-2D 轨迹")
    return TrackSet(points[keep], corrs.wrist_pixels[keep]), n_dropped


__all__ = [
    'Correspondence2D2D', 'Track', 'CorrespondenceSet', 'TrackSet',
    'AnchorPointMap', 'lift_correspondences',
]
