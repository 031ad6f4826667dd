#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
位姿误差
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..geometry.se3 import PoseSE3
from ..utils.errors import LengthMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoseError:
    """测地旋转误差 (度) 与平移误差 (场景单位)"""
    rotation_deg: float
    translation: float


def pose_error(a: PoseSE3, b: PoseSE3) -> PoseError:
    """rotation_deg = arccos((tr(Ra·Rbᵀ) − 1) / 2)，参数截断到 [−1, 1]; translation = ‖Ta − Tb‖"""
    cos_angle = (float(np.trace(a.rotation @ b.rotation.T)) - 1.0) / 2.0
    cos_angle = min(1.0, max(-1.0, cos_angle))
    return PoseError(
        rotation_deg=math.degrees(math.acos(cos_angle)),
        translation=float(np.linalg.norm(a.translation - b.translation)),
    )


def summarize_pose_errors(estimated: Sequence[PoseSE3], reference: Sequence[PoseSE3]) -> Dict[str, object]:
    """逐帧位姿误差及其中位数、最大值"""
    if len(estimated) != len(reference):
        error_msg = f"估计轨迹 {len(estimated)} 帧, 参考轨迹 {len(reference)} 帧"
        logger.error(error_msg)
        raise LengthMismatchError(error_msg)
    errors: List[PoseError] = [pose_error(a, b) for a, b in zip(estimated, reference)]
    rotation = [e.rotation_deg for e in errors]
    translation = [e.translation for e in errors]
    return {
        "rotation_deg": rotation,
        "translation": translation,
        "rotation_deg_median": float(np.median(rotation)) if errors else math.nan,
        "rotation_deg_max": max(rotation) if errors else math.nan,
        "translation_median": float(np.median(translation)) if errors else math.nan,
        "translation_max": max(translation) if errors else math.nan,
    }


__all__ = ['PoseError', 'pose_error', 'summarize_pose_errors']
