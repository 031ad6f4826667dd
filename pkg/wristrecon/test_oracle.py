"""
合成场景与位姿网格测试
"""
import math

import numpy as np
import pytest

from src.config import SCENE_CONFIG
from src.geometry.camera import transform_to_camera
from src.geometry.se3 import Twist6, compose, se3_exp
from src.oracle.pose_grid import brute_force_pose_grid
from src.oracle.scene import (
    SceneParams,
    build_anchor_maps,
    default_intrinsics,
    generate_correspondences,
    generate_scene,
)
from src.solver.pose_solver import solve_wrist_pose
from src.spc.correspondence import lift_correspondences
from src.spc.loss import SpcConfig
from src.utils.errors import GridTooLargeError, InfeasibleSceneError, InputError


def test_scene_is_deterministic(box_params, box_scene):
    """测试同一参数逐位复现, 不同种子得到不同场景"""
    again = generate_scene(box_params)
    assert again.equals(box_scene)
    other = generate_scene(box_params.model_copy(update={"seed": 43}))
    assert not other.equals(box_scene)


@pytest.mark.parametrize("kind", ["box_room", "random_blobs", "planar"])
def test_scene_kinds(kind):
    """测试三种点云类型都能生成, 颜色位于 [0, 1]"""
    params = SceneParams(n_points=2000, scene_kind=kind, trajectory_frames=3, seed=1)
    scene = generate_scene(params)
    assert len(scene.cloud) == 2000
    assert scene.n_frames == 3
    assert scene.cloud.rgb.min() >= 0.0 and scene.cloud.rgb.max() <= 1.0
    assert scene.wrist_intrinsics == default_intrinsics()
    for pose in scene.anchor_poses:
        z = transform_to_camera(pose, scene.cloud.xyz)[:, 2]
        assert np.mean(z > 0) >= SCENE_CONFIG["min_anchor_visibility"]
        distance = np.linalg.norm(pose.camera_center)
        assert 2.0 - 1e-9 <= distance <= 3.0 + 1e-9


@pytest.mark.parametrize("kind", ["arc", "spline", "static"])
def test_trajectory_kinds(kind):
    """测试三种轨迹类型的帧数, 静态轨迹每帧相同"""
    params = SceneParams(n_points=500, trajectory_kind=kind, trajectory_frames=6, seed=2)
    trajectory = generate_scene(params).wrist_trajectory
    assert len(trajectory) == 6
    same = all(np.array_equal(p.as_row(), trajectory[0].as_row()) for p in trajectory)
    assert same == (kind == "static")


def test_infeasible_scene(monkeypatch):
    """测试锚点可见性约束无法满足时报 InfeasibleSceneError"""
    monkeypatch.setitem(SCENE_CONFIG, "min_anchor_visibility", 1.01)
    with pytest.raises(InfeasibleSceneError):
        generate_scene(SceneParams(n_points=200, seed=0))


def test_correspondences_lift_to_exact_points(box_scene, box_params, noiseless_frame):
    """测试匹配经锚点点图提升后恰好得到原始点"""
    corrs, tracks, _ = noiseless_frame
    lifted, n_dropped = lift_correspondences(corrs, build_anchor_maps(box_scene))
    assert n_dropped == 0
    assert np.array_equal(lifted.points, tracks.points)
    assert np.array_equal(lifted.wrist_pixels, tracks.wrist_pixels)
    assert len(tracks) == min(box_params.n_correspondences, len(tracks))
    assert corrs.view_index.max() < box_params.n_anchors


def test_correspondences_deterministic(box_scene, box_params):
    """测试同一帧的匹配可复现"""
    a, _, _ = generate_correspondences(box_scene, 1, box_params)
    b, _, _ = generate_correspondences(box_scene, 1, box_params)
    assert a.equals(b)


def test_outliers_and_noise(box_scene, box_params, noiseless_frame):
    """测试外点条数为 round(rate·M), 噪声只扰动腕部像素"""
    _, clean, _ = noiseless_frame
    params = box_params.model_copy(update={"outlier_rate": 0.1})
    corrs, tracks, _ = generate_correspondences(box_scene, 0, params)
    M = len(tracks)
    changed = np.any(tracks.wrist_pixels != clean.wrist_pixels, axis=1)
    assert int(changed.sum()) == math.floor(0.1 * M + 0.5)
    assert np.array_equal(tracks.points, clean.points)
    K = box_scene.wrist_intrinsics
    outliers = tracks.wrist_pixels[changed]
    assert np.all((outliers[:, 0] >= -0.5) & (outliers[:, 0] < K.width - 0.5))

    noisy = box_params.model_copy(update={"pixel_noise_sigma": 1.0})
    _, tracks, _ = generate_correspondences(box_scene, 0, noisy)
    residual = tracks.wrist_pixels - clean.wrist_pixels
    assert np.std(residual) == pytest.approx(1.0, rel=0.15)
    assert np.array_equal(tracks.points, clean.points)


def test_frame_index_out_of_range(box_scene, box_params):
    """测试帧索引越界"""
    with pytest.raises(InputError):
        generate_correspondences(box_scene, box_scene.n_frames, box_params)


def test_pose_grid_minimum_at_center(K, noiseless_frame):
    """测试以真值为中心的网格在零切向量处取得最小损失 0"""
    _, tracks, gt = noiseless_frame
    subset = tracks.subset(np.arange(60))
    grid = brute_force_pose_grid(subset, K, SpcConfig(), gt, extent=0.05, steps=3)
    assert len(grid) == 3 ** 6
    assert grid.best_loss == 0.0
    assert grid.best_twist.norm() == 0.0
    assert grid.best_pose().allclose(gt, atol=0.0)


def test_pose_grid_bounds_solver(K, noiseless_frame):
    """测试求解器结果不差于偏心网格上的穷举最优"""
    _, tracks, gt = noiseless_frame
    subset = tracks.subset(np.arange(60))
    center = compose(se3_exp(Twist6([0.02, -0.01, 0.015], [0.01, 0.0, -0.01])), gt)
    grid = brute_force_pose_grid(subset, K, SpcConfig(), center, extent=0.03, steps=3)
    estimate = solve_wrist_pose(subset, K, init=center)
    assert estimate.final_loss.l_proj <= grid.best_loss


def test_pose_grid_arguments(K, noiseless_frame):
    """测试零范围网格与超限网格"""
    _, tracks, gt = noiseless_frame
    subset = tracks.subset(np.arange(20))
    grid = brute_force_pose_grid(subset, K, SpcConfig(), gt, extent=0.0, steps=7)
    assert len(grid) == 1
    assert grid.best_loss == 0.0
    with pytest.raises(GridTooLargeError):
        brute_force_pose_grid(subset, K, SpcConfig(), gt, extent=0.1, steps=20)
    with pytest.raises(InputError):
        brute_force_pose_grid(subset, K, SpcConfig(), gt, extent=-1.0, steps=3)


@pytest.mark.slow
def test_pose_grid_fine(K, noiseless_frame):
    """验收: 9^6 网格的最优点与求解器一致"""
    _, tracks, gt = noiseless_frame
    subset = tracks.subset(np.arange(60))
    grid = brute_force_pose_grid(subset, K, SpcConfig(), gt, extent=0.04, steps=9, show_progress=True)
    assert grid.best_twist.norm() == 0.0
