"""
条件图文件读写

- stem.png: 8 位 RGB，取值 round_half_up(value·255)
- stem.depth.pfm: 灰度 PFM，尺度行 "-1.0" (小端 float32)，像素行自下而上
- stem.mask.png: 8 位灰度，0 或 255
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image

from ..render.rasterizer import ConditionMap
from ..utils.errors import IoFailureError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def condition_paths(stem: PathLike) -> Tuple[Path, Path, Path]:
    stem = str(stem)
    return Path(stem + ".png"), Path(stem + ".depth.pfm"), Path(stem + ".mask.png")


def to_uint8(values: np.ndarray) -> np.ndarray:
    """[0, 1] 浮点转 8 位, .5 向上取整"""
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def pfm_bytes(depth: np.ndarray) -> bytes:
    depth = np.asarray(depth, dtype=np.float64)
    height, width = depth.shape
    header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
    return header + np.ascontiguousarray(np.flipud(depth)).astype("<f4").tobytes()


def write_pfm(depth: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    path.write_bytes(pfm_bytes(depth))
    return path


def read_pfm(path: PathLike) -> np.ndarray:
    """读取 PFM (灰度 Pf 或彩色 PF)，返回自上而下的 float64 数组"""
    path = Path(path)
    data = path.read_bytes()
    lines = []
    offset = 0
    for _ in range(3):
        end = data.find(b"\n", offset)
        if end < 0:
            raise ParseError("PFM 头部不完整", path, offset=offset)
        lines.append(data[offset:end].decode("ascii", errors="replace").strip())
        offset = end + 1
    kind, size, scale_text = lines
    if kind not in ("Pf", "PF"):
        raise ParseError(f"未知的 PFM 类型 '{kind}'", path, line=1)
    try:
        width, height = (int(v) for v in size.split())
        scale = float(scale_text)
    except ValueError:
        raise ParseError(f"PFM 头部格式错误: '{size}' / '{scale_text}'", path, line=2) from None
    channels = 3 if kind == "PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    expected = width * height * channels * 4
    if len(data) - offset != expected:
        raise ParseError(f"PFM 数据长度 {len(data) - offset} 与期望 {expected} 不符", path, offset=offset)
    values = np.frombuffer(data, dtype=dtype, offset=offset).astype(np.float64)
    shape = (height, width, channels) if channels == 3 else (height, width)
    return np.flipud(values.reshape(shape)).copy()


def write_condition_outputs(cmap: ConditionMap, stem: PathLike) -> Tuple[Path, Path, Path]:
    """
    写出条件图三个文件，返回 (rgb, depth, mask) 路径

    Raises:
        IoFailureError: 写入失败
    """
    rgb_path, depth_path, mask_path = condition_paths(stem)
    try:
        rgb_path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(to_uint8(cmap.rgb)).save(rgb_path, format="PNG")
        write_pfm(np.where(cmap.mask, cmap.depth, 0.0), depth_path)
        Image.fromarray(np.where(cmap.mask, 255, 0).astype(np.uint8)).save(mask_path, format="PNG")
    except OSError as exc:
        error_msg = f"写入条件图失败: {stem}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    logger.debug(f"条件图已保存: {rgb_path}")
    return rgb_path, depth_path, mask_path


def read_condition_outputs(stem: PathLike) -> ConditionMap:
    """读回条件图; rgb 为 8 位量化后的值"""
    rgb_path, depth_path, mask_path = condition_paths(stem)
    try:
        with Image.open(rgb_path) as image:
            rgb = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
        with Image.open(mask_path) as image:
            mask = np.asarray(image.convert("L")) > 127
    except OSError as exc:
        raise ParseError(f"无法读取条件图: {exc}", rgb_path) from exc
    depth = read_pfm(depth_path)
    return ConditionMap(rgb, depth, mask)


def read_rgb(path: PathLike) -> np.ndarray:
    """读取 8 位 RGB 图像为 [0, 1] 浮点"""
    try:
        with Image.open(path) as image:
            return np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
    except OSError as exc:
        raise ParseError(f"无法读取图像: {exc}", path) from exc


__all__ = [
    'condition_paths', 'to_uint8', 'pfm_bytes', 'write_pfm', 'read_pfm',
    'write_condition_outputs', 'read_condition_outputs', 'read_rgb',
]
