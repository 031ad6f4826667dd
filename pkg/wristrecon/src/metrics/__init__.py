"""
指标模块: 位姿误差、PSNR/SSIM 与重投影误差
"""

from .image_metrics import PSNR_IDENTICAL, psnr, reprojection_rmse, ssim, summarize_psnr
from .pose_metrics import PoseError, pose_error, summarize_pose_errors

__all__ = [
    'PSNR_IDENTICAL', 'psnr', 'reprojection_rmse', 'ssim', 'summarize_psnr',
    'PoseError', 'pose_error', 'summarize_pose_errors',
]
