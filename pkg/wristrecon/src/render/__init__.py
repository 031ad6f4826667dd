"""
渲染模块: 点云到腕部视角条件图
"""

from .rasterizer import (
    ConditionMap,
    PointCloud,
    SplatConfig,
    rasterize_nearest,
    render_condition_map,
    render_sequence,
)

__all__ = ['ConditionMap', 'PointCloud', 'SplatConfig', 'rasterize_nearest', 'render_condition_map', 'render_sequence']
