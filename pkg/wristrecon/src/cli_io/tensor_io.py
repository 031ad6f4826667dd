"""
二进制张量容器

布局 (小端):
    magic "WRTC" | uint32 版本 (1) | uint32 张量个数
    每个张量: uint16 名字长度 | UTF-8 名字 | uint8 dtype 代码 | uint8 维数 | 维数 x uint64 各维大小 | 行优先数据

dtype 代码: 1 float32, 2 float64, 3 int64, 4 uint8
"""
from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from ..conditioning.tokens import EmbeddingTable, TokenBundle
from ..spc.correspondence import AnchorPointMap
from ..utils.errors import InputError, IoFailureError, ParseError

logger = logging.getLogger(__name__)

MAGIC = b"WRTC"
VERSION = 1
DTYPE_CODES = {
    np.dtype("float32"): 1,
    np.dtype("float64"): 2,
    np.dtype("int64"): 3,
    np.dtype("uint8"): 4,
}
CODE_DTYPES = {code: dtype.newbyteorder("<") for dtype, code in DTYPE_CODES.items()}

PathLike = Union[str, Path]


def encode_tensors(tensors: Mapping[str, np.ndarray]) -> bytes:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, array in tensors.items():
        array = np.asarray(array)
        if array.dtype == np.bool_:
            array = array.astype(np.uint8)
        if array.dtype not in DTYPE_CODES:
            raise InputError(f"张量 '{name}' 的类型 {array.dtype} 不受支持")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(struct.pack("<BB", DTYPE_CODES[array.dtype], array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(np.ascontiguousarray(array).astype(array.dtype.newbyteorder("<")).tobytes())
    return b"".join(chunks)


def decode_tensors(data: bytes, path: PathLike = None) -> Dict[str, np.ndarray]:
    """
    Raises:
        ParseError: 魔数、版本或长度不符 (带字节偏移)
    """
    def take(fmt: str, offset: int):
        size = struct.calcsize(fmt)
        if offset + size > len(data):
            raise ParseError("张量容器提前结束", path, offset=offset)
        return struct.unpack_from(fmt, data, offset), offset + size

    if data[:4] != MAGIC:
        raise ParseError(f"魔数错误: {data[:4]!r}", path, offset=0)
    (version, count), offset = take("<II", 4)
    if version != VERSION:
        raise ParseError(f"不支持的容器版本 {version}", path, offset=4)

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,), offset = take("<H", offset)
        if offset + name_len > len(data):
            raise ParseError("张量名被截断", path, offset=offset)
        name = data[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (code, rank), start = take("<BB", offset)
        if code not in CODE_DTYPES:
            raise ParseError(f"未知的 dtype 代码 {code}", path, offset=offset)
        shape, offset = take(f"<{rank}Q", start)
        dtype = CODE_DTYPES[code]
        n_bytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if offset + n_bytes > len(data):
            raise ParseError(f"张量 '{name}' 数据被截断", path, offset=offset)
        if n_bytes:
            array = np.frombuffer(data, dtype=dtype, count=n_bytes // dtype.itemsize, offset=offset)
            tensors[name] = array.reshape(shape).astype(dtype.newbyteorder("="))
        else:
            tensors[name] = np.zeros(shape, dtype=dtype.newbyteorder("="))
        offset += n_bytes
    if offset != len(data):
        raise ParseError(f"容器末尾有 {len(data) - offset} 字节多余数据", path, offset=offset)
    return tensors


def save_tensors(tensors: Mapping[str, np.ndarray], path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_tensors(tensors))
    except OSError as exc:
        error_msg = f"写入张量容器失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    return path


def load_tensors(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"无法读取文件: {exc}", path) from exc
    return decode_tensors(data, path)


# ---------------------------------------------------------------- 领域对象

def save_anchor_point_map(point_map: AnchorPointMap, path: PathLike) -> Path:
    return save_tensors({"points": point_map.points, "valid": point_map.valid.astype(np.uint8)}, path)


def load_anchor_point_map(path: PathLike) -> AnchorPointMap:
    tensors = load_tensors(path)
    if "points" not in tensors or "valid" not in tensors:
        raise ParseError("点图容器需要 'points' 与 'valid' 两个张量", path)
    return AnchorPointMap(tensors["points"].astype(np.float64), tensors["valid"] != 0)


def save_embedding_table(table: EmbeddingTable, path: PathLike) -> Path:
    return save_tensors(table.to_tensors(), path)


def load_embedding_table(path: PathLike) -> EmbeddingTable:
    return EmbeddingTable.from_tensors(load_tensors(path))


def save_token_bundle(bundle: TokenBundle, path: PathLike) -> Path:
    return save_tensors({"clip_tokens": bundle.clip_tokens, "text_tokens": bundle.text_tokens}, path)


__all__ = [
    'MAGIC', 'VERSION', 'encode_tensors', 'decode_tensors', 'save_tensors', 'load_tensors',
    'save_anchor_point_map', 'load_anchor_point_map', 'save_embedding_table',
    'load_embedding_table', 'save_token_bundle',
]
