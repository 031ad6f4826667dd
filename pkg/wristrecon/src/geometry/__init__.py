"""
几何模块: 相机模型、刚体变换与针孔投影
"""

from .camera import Intrinsics, project, round_half_up, transform_to_camera, unproject
from .pointcloud import PointCloud
from .se3 import (
    PoseSE3,
    Twist6,
    compose,
    hat,
    invert,
    look_at,
    project_to_so3,
    relative_to_anchor,
    retract,
    rodrigues,
    se3_exp,
)

__all__ = [
    'Intrinsics', 'project', 'round_half_up', 'transform_to_camera', 'unproject', 'PointCloud',
    'PoseSE3', 'Twist6', 'compose', 'hat', 'invert', 'look_at', 'project_to_so3',
    'relative_to_anchor', 'retract', 'rodrigues', 'se3_exp',
]
