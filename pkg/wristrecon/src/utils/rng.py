"""
确定性随机数

每个 (seed, 用途标签) 对应一条独立的随机流，标签用 crc32 做稳定哈希
(绝不能用 Python 内置 hash()，它在每个进程中都是随机化的)。
生成器固定为 numpy 的 PCG64，跨平台逐位一致。
"""
from __future__ import annotations

import zlib

import numpy as np

_SEED_MASK = (1 << 64) - 1


def tag_hash(tag: str) -> int:
    """用途标签的稳定 32 位哈希"""
    return zlib.crc32(str(tag).encode("utf-8")) & 0xFFFFFFFF


def make_rng(seed: int, tag: str) -> np.random.Generator:
    """为 (seed, tag) 创建独立的 PCG64 生成器"""
    sequence = np.random.SeedSequence([int(seed) & _SEED_MASK, tag_hash(tag)])
    return np.random.Generator(np.random.PCG64(sequence))


__all__ = ['make_rng', 'tag_hash']
