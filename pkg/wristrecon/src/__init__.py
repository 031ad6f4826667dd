"""
WristRecon 腕部视角重建工具包 - 主包
"""

__version__ = "1.0.0"
__author__ = "WristRecon Team"
__description__ = "腕部相机位姿估计 (SPC 损失最小化) 与条件图渲染"
