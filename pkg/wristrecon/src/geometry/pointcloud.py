"""
彩色点云容器
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.errors import InputError


@dataclass(frozen=True, eq=False)
class PointCloud:
    """彩色点云: xyz (N, 3)，rgb (N, 3) 取值 [0, 1] 或 None"""
    xyz: np.ndarray
    rgb: Optional[np.ndarray] = None

    def __post_init__(self):
        xyz = np.array(self.xyz, dtype=np.float64).reshape(-1, 3)
        xyz.setflags(write=False)
        object.__setattr__(self, "xyz", xyz)
        if self.rgb is not None:
            rgb = np.array(self.rgb, dtype=np.float64).reshape(-1, 3)
            if rgb.shape != xyz.shape:
                raise InputError(f"颜色数组形状 {rgb.shape} 与坐标 {xyz.shape} 不一致")
            rgb.setflags(write=False)
            object.__setattr__(self, "rgb", rgb)

    def __len__(self) -> int:
        return len(self.xyz)

    def colors(self) -> np.ndarray:
        """颜色数组，无颜色时为白色"""
        return self.rgb if self.rgb is not None else np.ones_like(self.xyz)

    def subset(self, index) -> "PointCloud":
        return PointCloud(self.xyz[index], None if self.rgb is None else self.rgb[index])

    def equals(self, other: "PointCloud") -> bool:
        if not np.array_equal(self.xyz, other.xyz):
            return False
        if self.rgb is None or other.rgb is None:
            return self.rgb is None and other.rgb is None
        return np.array_equal(self.rgb, other.rgb)
