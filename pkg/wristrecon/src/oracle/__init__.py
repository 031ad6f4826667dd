"""
合成场景与穷举参照模块
"""

from .pose_grid import PoseGrid, brute_force_pose_grid
from .scene import (
    SceneParams,
    SyntheticScene,
    build_anchor_maps,
    build_anchor_point_map,
    default_intrinsics,
    generate_correspondences,
    generate_scene,
)

__all__ = [
    'PoseGrid', 'brute_force_pose_grid', 'SceneParams', 'SyntheticScene',
    'build_anchor_maps', 'build_anchor_point_map', 'default_intrinsics',
    'generate_correspondences', 'generate_scene',
]
