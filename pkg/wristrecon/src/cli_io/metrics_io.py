"""
指标报告: name=value 文本与排序键 JSON

非有限浮点数写作 inf / -inf / nan (JSON 中为字符串)，其余浮点数使用最短可往返表示。
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from ..utils.errors import IoFailureError, ParseError

logger = logging.getLogger(__name__)

UNAVAILABLE = "unavailable"


def format_value(value) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def _json_safe(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    return value


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        error_msg = f"写入报告失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    return path


def write_key_values(values: Mapping[str, object], path: Union[str, Path]) -> Path:
    """每行一个 name=value，按写入顺序"""
    lines = [f"{name}={format_value(value)}" for name, value in values.items()]
    return _write(Path(path), "\n".join(lines) + "\n")


def read_key_values(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    values: Dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        if "=" not in raw:
            raise ParseError(f"缺少 '=': '{raw}'", path, line_no)
        name, value = raw.split("=", 1)
        values[name.strip()] = value.strip()
    return values


def write_json(data: Mapping[str, object], path: Union[str, Path]) -> Path:
    text = json.dumps(_json_safe(dict(data)), sort_keys=True, indent=2, ensure_ascii=False)
    return _write(Path(path), text + "\n")


def write_metrics(summary: Mapping[str, object], per_frame: Mapping[str, object],
                  out_dir: Union[str, Path]):
    """写出 metrics.txt (汇总) 与 metrics.json (汇总 + 逐帧)"""
    out_dir = Path(out_dir)
    txt = write_key_values(summary, out_dir / "metrics.txt")
    js = write_json({**summary, "per_frame": dict(per_frame)}, out_dir / "metrics.json")
    logger.info(f"指标报告已保存: {txt}")
    return txt, js


__all__ = [
    'UNAVAILABLE', 'format_value', 'write_key_values', 'read_key_values',
    'write_json', 'write_metrics',
]
