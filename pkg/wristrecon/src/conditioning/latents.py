"""
潜变量拼接: 腕部潜变量与条件图潜变量沿通道维拼接，(T, C, H, W) 扩展为 (T, 2C, H, W)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..config import CONDITIONING_CONFIG
from ..utils.errors import InputError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LatentFrame:
    """单帧潜变量: z_w 为腕部潜变量, z_c 为条件潜变量, 形状均为 (C, H', W')"""
    z_w: np.ndarray
    z_c: np.ndarray

    def __post_init__(self):
        z_w = np.asarray(self.z_w)
        z_c = np.asarray(self.z_c)
        if z_w.ndim != 3 or z_w.shape != z_c.shape:
            error_msg = f"潜变量形状不一致: z_w {z_w.shape}, z_c {z_c.shape}"
            logger.error(error_msg)
            raise ShapeMismatchError(error_msg)
        if not (np.all(np.isfinite(z_w)) and np.all(np.isfinite(z_c))):
            raise InputError("潜变量含有非有限值")
        object.__setattr__(self, "z_w", z_w)
        object.__setattr__(self, "z_c", z_c)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.z_w.shape)


def latent_shape(height: int, width: int, channels: int = None, scale: int = None) -> Tuple[int, int, int]:
    """图像尺寸对应的潜变量形状 (C, H / scale, W / scale)"""
    channels = channels or CONDITIONING_CONFIG["latent_channels"]
    scale = scale or CONDITIONING_CONFIG["latent_scale"]
    if height % scale or width % scale:
        error_msg = f"图像尺寸 {width}x{height} 不能被潜变量缩放倍数 {scale} 整除"
        logger.error(error_msg)
        raise ShapeMismatchError(error_msg)
    return channels, height // scale, width // scale


def concat_latents(frame: LatentFrame) -> np.ndarray:
    """通道 0..C 为 z_w, C..2C 为 z_c"""
    return np.concatenate([frame.z_w, frame.z_c], axis=0)


def concat_latents_sequence(frames: Sequence[LatentFrame]) -> np.ndarray:
    """T 帧拼接结果堆叠为 (T, 2C, H', W')"""
    frames = list(frames)
    if not frames:
        raise InputError("潜变量序列为空")
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        error_msg = f"潜变量序列中各帧形状不一致: {sorted(shapes)}"
        logger.error(error_msg)
        raise ShapeMismatchError(error_msg)
    return np.stack([concat_latents(f) for f in frames], axis=0)


__all__ = ['LatentFrame', 'latent_shape', 'concat_latents', 'concat_latents_sequence']
