"""
PLY 点云读写 (plyfile)

支持 ascii 与 binary_little_endian；vertex 元素只允许 x, y, z (float/double)
和可选的 red, green, blue (uchar)。颜色归一化到 [0, 1]。
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from plyfile import PlyData, PlyElement, PlyListProperty, PlyParseError

from ..geometry.pointcloud import PointCloud
from ..utils.errors import IoFailureError, ParseError, UnsupportedPropertyError

logger = logging.getLogger(__name__)

COORDINATES = ("x", "y", "z")
COLORS = ("red", "green", "blue")
_COORD_TYPES = {"f4", "f8"}


def _check_properties(vertex, path: Path) -> bool:
    """校验 vertex 属性，返回是否带颜色"""
    names = []
    for prop in vertex.properties:
        if isinstance(prop, PlyListProperty):
            raise UnsupportedPropertyError(f"{path}: 不支持列表属性 '{prop.name}'")
        if prop.name in COORDINATES:
            if prop.val_dtype.lstrip("<>=") not in _COORD_TYPES:
                raise UnsupportedPropertyError(f"{path}: 坐标属性 '{prop.name}' 的类型 {prop.val_dtype} 不受支持")
        elif prop.name in COLORS:
            if prop.val_dtype.lstrip("<>=") != "u1":
                raise UnsupportedPropertyError(f"{path}: 颜色属性 '{prop.name}' 必须为 uchar")
        else:
            raise UnsupportedPropertyError(f"{path}: 不支持的属性 '{prop.name}'")
        names.append(prop.name)
    missing = [name for name in COORDINATES if name not in names]
    if missing:
        raise ParseError(f"缺少坐标属性 {missing}", path)
    has_color = [name in names for name in COLORS]
    if any(has_color) and not all(has_color):
        raise UnsupportedPropertyError(f"{path}: 颜色属性必须同时包含 red, green, blue")
    return all(has_color)


def load_point_cloud(path: Union[str, Path]) -> Tuple[PointCloud, int]:
    """
    读取 PLY 点云，坐标非有限的点被剔除

    Returns:
        (cloud, n_rejected)

    Raises:
        ParseError: 文件损坏 (带行号或元素行偏移)
        UnsupportedPropertyError: 出现不支持的属性或类型
    """
    path = Path(path)
    try:
        ply = PlyData.read(str(path))
    except PlyParseError as exc:
        error_msg = f"PLY 解析失败: {exc}"
        logger.error(f"{path}: {error_msg}")
        raise ParseError(error_msg, path, line=getattr(exc, "line", None), offset=getattr(exc, "row", None)) from exc
    except OSError as exc:
        raise ParseError(f"无法读取文件: {exc}", path) from exc

    if "vertex" not in [element.name for element in ply.elements]:
        raise ParseError("缺少 vertex 元素", path)
    vertex = ply["vertex"]
    has_color = _check_properties(vertex, path)

    data = vertex.data
    xyz = np.stack([np.asarray(data[name], dtype=np.float64) for name in COORDINATES], axis=1)
    rgb = None
    if has_color:
        rgb = np.stack([np.asarray(data[name], dtype=np.float64) for name in COLORS], axis=1) / 255.0

    finite = np.all(np.isfinite(xyz), axis=1)
    n_rejected = int((~finite).sum())
    if n_rejected:
        logger.warning(f"{path}: 剔除 {n_rejected} 个坐标非有限的点")
        xyz = xyz[finite]
        rgb = None if rgb is None else rgb[finite]
    logger.info(f"读取点云 {path}: {len(xyz)} 个点, 颜色: {has_color}")
    return PointCloud(xyz, rgb), n_rejected


def save_point_cloud(cloud: PointCloud, path: Union[str, Path], binary: bool = False) -> Path:
    """写出 PLY 点云，坐标为 double，颜色四舍五入到 uchar"""
    path = Path(path)
    fields = [(name, "f8") for name in COORDINATES]
    if cloud.rgb is not None:
        fields += [(name, "u1") for name in COLORS]
    vertices = np.empty(len(cloud), dtype=fields)
    for k, name in enumerate(COORDINATES):
        vertices[name] = cloud.xyz[:, k]
    if cloud.rgb is not None:
        rgb8 = np.floor(np.clip(cloud.rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
        for k, name in enumerate(COLORS):
            vertices[name] = rgb8[:, k]
    ply = PlyData([PlyElement.describe(vertices, "vertex")], text=not binary, byte_order="<")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        ply.write(str(path))
    except OSError as exc:
        error_msg = f"写入点云失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    logger.info(f"点云已保存: {path} ({len(cloud)} 个点)")
    return path


__all__ = ['load_point_cloud', 'save_point_cloud']
