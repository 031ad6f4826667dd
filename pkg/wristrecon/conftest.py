"""
测试公共夹具
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
sys.path.insert(0, str(Path(__file__).parent))

from src.geometry.camera import Intrinsics  # noqa: E402
from src.oracle.scene import SceneParams, generate_correspondences, generate_scene  # noqa: E402


@pytest.fixture
def K():
    """默认 640x480 内参"""
    return Intrinsics(500.0, 500.0, 319.5, 239.5, 640, 480)


@pytest.fixture
def small_K():
    return Intrinsics(40.0, 40.0, 15.5, 11.5, 32, 24)


@pytest.fixture(scope="session")
def box_params():
    return SceneParams(n_points=5000, scene_kind="box_room", trajectory_frames=4, seed=42)


@pytest.fixture(scope="session")
def box_scene(box_params):
    return generate_scene(box_params)


@pytest.fixture(scope="session")
def noiseless_frame(box_scene, box_params):
    """box_room 场景第 0 帧的无噪声匹配: (corrs, tracks, gt_pose)"""
    return generate_correspondences(box_scene, 0, box_params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
