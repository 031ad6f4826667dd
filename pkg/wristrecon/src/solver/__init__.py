"""
求解模块: DLT 初始化、SPC 最小化与多起点搜索
"""

from .linear_init import linear_init
from .pose_solver import PoseEstimate, SolverConfig, multi_start, random_start_pose, solve_wrist_pose

__all__ = ['linear_init', 'PoseEstimate', 'SolverConfig', 'multi_start', 'random_start_pose', 'solve_wrist_pose']
