#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
合成场景生成器

生成彩色点云、若干静态锚点相机和腕部相机真值轨迹，并充当匹配头:
给出锚点视角与腕部视角之间的像素匹配。所有随机量都来自 (seed, 用途标签) 的独立随机流。
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import GEOMETRY_CONFIG, SCENE_CONFIG
from ..geometry.camera import Intrinsics, project, transform_to_camera
from ..geometry.pointcloud import PointCloud
from ..geometry.se3 import PoseSE3, look_at, project_to_so3
from ..render.rasterizer import SplatConfig, rasterize_nearest
from ..spc.correspondence import AnchorPointMap, CorrespondenceSet, TrackSet
from ..utils.errors import InfeasibleSceneError, InputError
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

SCENE_CENTER = np.zeros(3)

# 腕部轨迹几何: (半径, 高度)
_ROOM_ORBIT = (0.25, 0.1)
_OUTSIDE_ORBIT = (1.4, 0.7)
_ARC_SPAN = 0.5 * math.pi
_SPLINE_KEYS = 4


class SceneParams(BaseModel):
    """合成场景参数"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_points: int = Field(5000, ge=1)
    scene_kind: Literal["box_room", "random_blobs", "planar"] = "box_room"
    n_anchors: int = Field(2, ge=1)
    trajectory_frames: int = Field(16, ge=1)
    trajectory_kind: Literal["arc", "spline", "static"] = "arc"
    pixel_noise_sigma: float = Field(0.0, ge=0)
    outlier_rate: float = Field(0.0, ge=0, lt=1)
    seed: int = Field(0, ge=0)
    n_correspondences: int = Field(SCENE_CONFIG["n_correspondences"], ge=1)


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """合成场景: 点云、锚点相机与腕部真值轨迹"""
    cloud: PointCloud
    anchor_poses: List[PoseSE3]
    anchor_intrinsics: Intrinsics
    wrist_trajectory: List[PoseSE3]
    wrist_intrinsics: Intrinsics

    @property
    def n_frames(self) -> int:
        return len(self.wrist_trajectory)

    def equals(self, other: "SyntheticScene") -> bool:
        """逐位比较"""
        return (self.cloud.equals(other.cloud)
                and _same_poses(self.anchor_poses, other.anchor_poses)
                and _same_poses(self.wrist_trajectory, other.wrist_trajectory)
                and self.anchor_intrinsics == other.anchor_intrinsics
                and self.wrist_intrinsics == other.wrist_intrinsics)


def _same_poses(a: Sequence[PoseSE3], b: Sequence[PoseSE3]) -> bool:
    return len(a) == len(b) and all(np.array_equal(p.as_row(), q.as_row()) for p, q in zip(a, b))


def default_intrinsics() -> Intrinsics:
    width, height, focal = SCENE_CONFIG["width"], SCENE_CONFIG["height"], SCENE_CONFIG["focal"]
    return Intrinsics(focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height)


# ---------------------------------------------------------------- 点云

def _sample_box_room(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """单位立方体房间的六个面"""
    face = rng.integers(0, 6, size=n)
    xyz = rng.uniform(-0.5, 0.5, size=(n, 3))
    axis = face // 2
    xyz[np.arange(n), axis] = np.where(face % 2 == 0, -0.5, 0.5)
    base = np.array([[0.8, 0.3, 0.3], [0.3, 0.8, 0.3], [0.3, 0.3, 0.8],
                     [0.8, 0.8, 0.3], [0.3, 0.8, 0.8], [0.8, 0.3, 0.8]])
    pattern = 0.5 + 0.5 * np.sin(4.0 * np.pi * xyz)
    return xyz, 0.5 * base[face] + 0.5 * pattern


def _sample_random_blobs(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    n_blobs = 8
    centers = rng.uniform(-0.35, 0.35, size=(n_blobs, 3))
    colors = rng.uniform(0.1, 0.9, size=(n_blobs, 3))
    label = rng.integers(0, n_blobs, size=n)
    xyz = centers[label] + rng.normal(0.0, 0.08, size=(n, 3))
    return xyz, colors[label]


def _sample_planar(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    xyz = np.zeros((n, 3))
    xyz[:, :2] = rng.uniform(-0.5, 0.5, size=(n, 2))
    checker = (np.floor(xyz[:, 0] * 8) + np.floor(xyz[:, 1] * 8)) % 2
    rgb = np.where(checker[:, None] > 0, [0.9, 0.85, 0.7], [0.2, 0.25, 0.4])
    return xyz, rgb


_SAMPLERS = {
    "box_room": _sample_box_room,
    "random_blobs": _sample_random_blobs,
    "planar": _sample_planar,
}


# ---------------------------------------------------------------- 相机

def _front_fraction(cloud: PointCloud, pose: PoseSE3) -> float:
    z = transform_to_camera(pose, cloud.xyz)[:, 2]
    return float(np.mean(z > GEOMETRY_CONFIG["z_eps"]))


def _sample_anchor(rng: np.random.Generator, cloud: PointCloud, index: int) -> PoseSE3:
    """锚点: 距场景中心 2~3, 仰角 15°~60°, 看向中心; 拒绝采样直到至少一半点位于前方"""
    lo_d, hi_d = SCENE_CONFIG["anchor_distance"]
    lo_e, hi_e = np.radians(SCENE_CONFIG["anchor_elevation_deg"])
    for attempt in range(SCENE_CONFIG["max_rejections"]):
        distance = rng.uniform(lo_d, hi_d)
        elevation = rng.uniform(lo_e, hi_e)
        azimuth = rng.uniform(0.0, 2.0 * np.pi)
        center = SCENE_CENTER + distance * np.array([
            np.cos(elevation) * np.cos(azimuth),
            np.cos(elevation) * np.sin(azimuth),
            np.sin(elevation),
        ])
        pose = look_at(center, SCENE_CENTER)
        if _front_fraction(cloud, pose) >= SCENE_CONFIG["min_anchor_visibility"]:
            return pose
        logger.debug(f"锚点 {index} 第 {attempt + 1} 次采样可见比例不足, 重新采样")
    error_msg = f"锚点 {index} 在 {SCENE_CONFIG['max_rejections']} 次采样内无法满足可见性约束"
    logger.error(error_msg)
    raise InfeasibleSceneError(error_msg)


def _orbit(scene_kind: str) -> Tuple[float, float]:
    return _ROOM_ORBIT if scene_kind == "box_room" else _OUTSIDE_ORBIT


def _orbit_pose(radius: float, height: float, angle: float) -> PoseSE3:
    center = np.array([radius * np.cos(angle), radius * np.sin(angle), height])
    return look_at(center, SCENE_CENTER)


def _catmull_rom(keys: np.ndarray, s: float) -> np.ndarray:
    """端点重复的 Catmull-Rom 插值，s ∈ [0, len(keys) − 1]"""
    last = len(keys) - 1
    i = min(int(np.floor(s)), last - 1)
    u = s - i
    p0, p1, p2, p3 = (keys[min(max(j, 0), last)] for j in (i - 1, i, i + 1, i + 2))
    return 0.5 * ((2.0 * p1)
                  + (-p0 + p2) * u
                  + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u ** 2
                  + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u ** 3)


def _wrist_trajectory(rng: np.random.Generator, params: SceneParams) -> List[PoseSE3]:
    radius, height = _orbit(params.scene_kind)
    T = params.trajectory_frames
    start = rng.uniform(0.0, 2.0 * np.pi)

    if params.trajectory_kind == "static":
        return [_orbit_pose(radius, height, start)] * T

    if params.trajectory_kind == "arc":
        step = _ARC_SPAN / (T - 1) if T > 1 else 0.0
        return [_orbit_pose(radius, height, start + step * t) for t in range(T)]

    # spline: 4 个随机关键位姿
    angles = start + np.sort(rng.uniform(0.0, _ARC_SPAN, size=_SPLINE_KEYS))
    heights = height + rng.uniform(-0.2, 0.2, size=_SPLINE_KEYS) * radius
    targets = SCENE_CENTER + rng.uniform(-0.1, 0.1, size=(_SPLINE_KEYS, 3))
    keys = []
    for angle, h, target in zip(angles, heights, targets):
        pose = look_at([radius * np.cos(angle), radius * np.sin(angle), h], target)
        keys.append(np.concatenate([pose.rotation.reshape(9), pose.camera_center]))
    keys = np.array(keys)

    trajectory = []
    for t in range(T):
        s = (_SPLINE_KEYS - 1) * t / (T - 1) if T > 1 else 0.0
        value = _catmull_rom(keys, s)
        R = project_to_so3(value[:9].reshape(3, 3))
        trajectory.append(PoseSE3(R, -R @ value[9:]))
    return trajectory


def generate_scene(params: SceneParams) -> SyntheticScene:
    """
    生成合成场景，同一 seed 逐位可复现

    Raises:
        InfeasibleSceneError: 某个锚点在拒绝采样上限内无法看到至少一半的点
    """
    logger.info(
        f"生成合成场景: {params.scene_kind}, {params.n_points} 个点, "
        f"{params.n_anchors} 个锚点, {params.trajectory_frames} 帧 {params.trajectory_kind} 轨迹, seed={params.seed}"
    )
    xyz, rgb = _SAMPLERS[params.scene_kind](make_rng(params.seed, "oracle.cloud"), params.n_points)
    cloud = PointCloud(xyz, np.clip(rgb, 0.0, 1.0))

    anchor_rng = make_rng(params.seed, "oracle.anchors")
    anchors = [_sample_anchor(anchor_rng, cloud, k) for k in range(params.n_anchors)]
    trajectory = _wrist_trajectory(make_rng(params.seed, "oracle.trajectory"), params)
    K = default_intrinsics()
    return SyntheticScene(cloud, anchors, K, trajectory, K)


# ---------------------------------------------------------------- 点图与匹配

def build_anchor_point_map(cloud: PointCloud, pose: PoseSE3, K: Intrinsics) -> AnchorPointMap:
    """把点云光栅化为逐像素世界点 (半径 0，最近深度，并列取最小编号)"""
    splat = SplatConfig(radius_px=0)
    winner, _ = rasterize_nearest(cloud.xyz, pose, K, splat.radius_px, splat.depth_test_eps)
    valid = winner >= 0
    points = np.zeros((K.height, K.width, 3))
    points[valid] = cloud.xyz[winner[valid]]
    return AnchorPointMap(points, valid)


def build_anchor_maps(scene: SyntheticScene) -> List[AnchorPointMap]:
    return [build_anchor_point_map(scene.cloud, pose, scene.anchor_intrinsics) for pose in scene.anchor_poses]


def generate_correspondences(scene: SyntheticScene, frame_index: int,
                             params: SceneParams) -> Tuple[CorrespondenceSet, TrackSet, PoseSE3]:
    """
    为第 frame_index 帧生成锚点-腕部匹配

    点在锚点视角中可见，当且仅当它在该锚点的点图中占据自己的像素 (提升后恰好得到原点)；
    在腕部视角中可见，当且仅当位于相机前方且投影落在图像内。
    腕部像素 = 精确投影 + N(0, σ²) 噪声，其中 round(outlier_rate·M) 条替换为图像内均匀随机像素。

    Returns:
        (correspondences, tracks, ground_truth_pose)

    Raises:
        InfeasibleSceneError: 共视点少于 6 个
    """
    if not 0 <= frame_index < scene.n_frames:
        raise InputError(f"帧索引 {frame_index} 超出轨迹长度 {scene.n_frames}")
    gt = scene.wrist_trajectory[frame_index]
    Kw, Ka = scene.wrist_intrinsics, scene.anchor_intrinsics
    xyz = scene.cloud.xyz
    n = len(xyz)

    # seen_by[k, i]: 点 i 在锚点 k 的点图中占据像素
    seen_by = np.zeros((len(scene.anchor_poses), n), dtype=bool)
    anchor_pixels = np.zeros((len(scene.anchor_poses), n, 2))
    for k, pose in enumerate(scene.anchor_poses):
        winner, _ = rasterize_nearest(xyz, pose, Ka, 0, SplatConfig().depth_test_eps)
        seen_by[k, winner[winner >= 0]] = True
        anchor_pixels[k] = project(Ka, pose, xyz)[0]

    wrist_pixels, depth, _ = project(Kw, gt, xyz)
    in_wrist = (depth > GEOMETRY_CONFIG["z_eps"]) & Kw.contains(wrist_pixels)
    candidates = np.flatnonzero(in_wrist & seen_by.any(axis=0))
    if len(candidates) < SCENE_CONFIG["min_covisible"]:
        error_msg = f"第 {frame_index} 帧只有 {len(candidates)} 个共视点, 至少需要 {SCENE_CONFIG['min_covisible']} 个"
        logger.error(error_msg)
        raise InfeasibleSceneError(error_msg)

    M = min(params.n_correspondences, len(candidates))
    if M < params.n_correspondences:
        logger.warning(f"第 {frame_index} 帧共视点 {len(candidates)} 个, 少于请求的 {params.n_correspondences} 个")

    select_rng = make_rng(params.seed, f"oracle.correspondences.{frame_index}.select")
    chosen = select_rng.choice(candidates, size=M, replace=False)
    views = np.array([select_rng.choice(np.flatnonzero(seen_by[:, i])) for i in chosen], dtype=np.int64)

    observed = wrist_pixels[chosen].copy()
    if params.pixel_noise_sigma > 0:
        noise_rng = make_rng(params.seed, f"oracle.correspondences.{frame_index}.noise")
        observed += noise_rng.normal(0.0, params.pixel_noise_sigma, size=observed.shape)
    n_outliers = int(math.floor(params.outlier_rate * M + 0.5))
    if n_outliers:
        outlier_rng = make_rng(params.seed, f"oracle.correspondences.{frame_index}.outliers")
        replaced = outlier_rng.choice(M, size=n_outliers, replace=False)
        observed[replaced, 0] = outlier_rng.uniform(-0.5, Kw.width - 0.5, size=n_outliers)
        observed[replaced, 1] = outlier_rng.uniform(-0.5, Kw.height - 0.5, size=n_outliers)

    corrs = CorrespondenceSet(views, anchor_pixels[views, chosen], observed)
    tracks = TrackSet(xyz[chosen], observed)
    logger.info(f"第 {frame_index} 帧生成 {M} 条匹配, 其中外点 {n_outliers} 条")
    return corrs, tracks, gt


__all__ = [
    'SceneParams', 'SyntheticScene', 'default_intrinsics', 'generate_scene',
    'build_anchor_point_map', 'build_anchor_maps', 'generate_correspondences',
]
