"""
匹配文件读写

每行一条: anchor_view_index, u_q, v_q, u_w, v_w (逗号分隔)；'#' 之后为注释，空行忽略。
"""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import List, Union

from ..spc.correspondence import CorrespondenceSet
from ..utils.errors import IoFailureError, NegativeIndexError, ParseError

logger = logging.getLogger(__name__)

HEADER = "# anchor_view_index, u_q, v_q, u_w, v_w"
N_FIELDS = 5


def load_correspondences(path: Union[str, Path]) -> CorrespondenceSet:
    """
    读取匹配文件，保留顺序与行号

    Raises:
        ParseError: 字段个数或数值格式错误 (带行号)
        NegativeIndexError: 锚点索引为负 (带行号)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"无法读取文件: {exc}", path) from exc

    views: List[int] = []
    anchors: List[List[float]] = []
    wrists: List[List[float]] = []
    lines: List[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        fields = [f.strip() for f in content.split(",")]
        if len(fields) != N_FIELDS:
            raise ParseError(f"需要 {N_FIELDS} 个字段, 实际 {len(fields)} 个", path, line_no)
        try:
            view = int(fields[0])
        except ValueError:
            raise ParseError(f"锚点索引不是整数: '{fields[0]}'", path, line_no) from None
        if view < 0:
            error_msg = f"{path} 第 {line_no} 行: 锚点索引为负: {view}"
            logger.error(error_msg)
            raise NegativeIndexError(error_msg)
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise ParseError(f"像素坐标格式错误: '{content}'", path, line_no) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"像素坐标非有限: '{content}'", path, line_no)
        views.append(view)
        anchors.append(values[:2])
        wrists.append(values[2:])
        lines.append(line_no)

    logger.info(f"读取匹配文件 {path}: {len(views)} 条")
    return CorrespondenceSet(views, anchors, wrists, line_numbers=lines)


def save_correspondences(corrs: CorrespondenceSet, path: Union[str, Path]) -> Path:
    """写出匹配文件，浮点数使用最短可往返表示"""
    path = Path(path)
    rows = [HEADER]
    for view, a, w in zip(corrs.view_index.tolist(), corrs.anchor_pixels.tolist(), corrs.wrist_pixels.tolist()):
        rows.append(", ".join([str(view)] + [repr(float(v)) for v in (*a, *w)]))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    except OSError as exc:
        error_msg = f"写入匹配文件失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    return path


__all__ = ['load_correspondences', 'save_correspondences']
