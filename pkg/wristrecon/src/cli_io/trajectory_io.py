"""
轨迹文件读写: 每行一个位姿，12 个数 (R 按行展开, 然后 T)，空白或逗号分隔，'#' 注释
"""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from ..config import GEOMETRY_CONFIG
from ..geometry.se3 import PoseSE3, orthonormality_error, project_to_so3
from ..utils.errors import IoFailureError, ParseError

logger = logging.getLogger(__name__)

_SEPARATOR = re.compile(r"[,\s]+")


def load_trajectory(path: Union[str, Path]) -> List[PoseSE3]:
    """
    读取轨迹

    旋转矩阵的正交误差超过 1e-9 但小于 1e-3 时投影到 SO(3) 并给出警告，更大时报错。

    Raises:
        ParseError: 字段个数、数值格式或正交性错误 (带行号)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"无法读取文件: {exc}", path) from exc

    poses: List[PoseSE3] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        fields = [f for f in _SEPARATOR.split(content) if f]
        if len(fields) != 12:
            raise ParseError(f"位姿需要 12 个数, 实际 {len(fields)} 个", path, line_no)
        try:
            values = np.array([float(f) for f in fields])
        except ValueError:
            raise ParseError(f"数值格式错误: '{content}'", path, line_no) from None
        if not np.all(np.isfinite(values)):
            raise ParseError("位姿含有非有限值", path, line_no)

        R = values[:9].reshape(3, 3)
        err = orthonormality_error(R)
        if err >= GEOMETRY_CONFIG["orthonormal_tol"]:
            if err >= GEOMETRY_CONFIG["trajectory_fix_tol"]:
                raise ParseError(f"旋转矩阵正交误差 {err:.3e} 过大", path, line_no)
            logger.warning(f"{path} 第 {line_no} 行: 旋转矩阵正交误差 {err:.3e}, 已投影到 SO(3)")
            R = project_to_so3(R)
        poses.append(PoseSE3(R, values[9:]))

    logger.info(f"读取轨迹 {path}: {len(poses)} 帧")
    return poses


def save_trajectory(poses: Sequence[PoseSE3], path: Union[str, Path], header: str = None) -> Path:
    path = Path(path)
    rows = [f"# {header}"] if header else []
    rows += [" ".join(repr(float(v)) for v in pose.as_row()) for pose in poses]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    except OSError as exc:
        error_msg = f"写入轨迹失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    return path


__all__ = ['load_trajectory', 'save_trajectory']
