#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
条件 token 组装

c = [W_c·e_{t,i} + p_temporal[t] + p_view[i] ; W_t·text[j] + p_text[j]]
视觉 token 按帧优先、视角其次排列 (t 外层, i 内层)，文本 token 接在全部视觉 token 之后。
位置编码一律相加，不沿特征维拼接；视觉与文本共享同一维度 d。

图像编码器由 stub_encode 代替: 分块平均池化后乘以固定种子的随机投影矩阵。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..config import CONDITIONING_CONFIG
from ..utils.errors import ShapeMismatchError, TokenBudgetError, TooSmallError
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

TABLE_FIELDS = ("temporal", "view", "text_pos", "proj_clip", "proj_text")


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """位置编码与投影矩阵 (读入或由种子生成的常量，不训练)"""
    temporal: np.ndarray   # (T, d)
    view: np.ndarray       # (N, d)
    text_pos: np.ndarray   # (L, d)
    proj_clip: np.ndarray  # (d, d_c)
    proj_text: np.ndarray  # (d, d_text)

    def __post_init__(self):
        for name in TABLE_FIELDS:
            value = np.array(getattr(self, name), dtype=np.float64)
            if value.ndim != 2:
                raise ShapeMismatchError(f"嵌入表 {name} 必须是二维数组, 实际形状 {value.shape}")
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        dims = {name: getattr(self, name).shape[1] for name in ("temporal", "view", "text_pos")}
        dims.update(proj_clip=self.proj_clip.shape[0], proj_text=self.proj_text.shape[0])
        if len(set(dims.values())) != 1:
            error_msg = f"嵌入表的共享维度 d 不一致: {dims}"
            logger.error(error_msg)
            raise ShapeMismatchError(error_msg)

    @property
    def d(self) -> int:
        return self.proj_clip.shape[0]

    @property
    def d_c(self) -> int:
        return self.proj_clip.shape[1]

    @property
    def d_text(self) -> int:
        return self.proj_text.shape[1]

    @classmethod
    def seeded(cls, n_views: int, n_frames: int, n_text: int, d: int = None, d_c: int = None,
               d_text: int = None, seed: int = 0) -> "EmbeddingTable":
        """由种子生成的常量表，投影矩阵按输入维度 1/√n 缩放"""
        d = d or CONDITIONING_CONFIG["d"]
        d_c = d_c or CONDITIONING_CONFIG["d_c"]
        d_text = d_text or CONDITIONING_CONFIG["d_text"]
        shapes = {
            "temporal": (n_frames, d),
            "view": (n_views, d),
            "text_pos": (n_text, d),
            "proj_clip": (d, d_c),
            "proj_text": (d, d_text),
        }
        values = {}
        for name, shape in shapes.items():
            rng = make_rng(seed, f"conditioning.embedding.{name}")
            scale = 1.0 / np.sqrt(shape[1]) if name.startswith("proj") else 1.0
            values[name] = rng.normal(0.0, scale, size=shape)
        return cls(**values)

    def to_tensors(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in TABLE_FIELDS}

    @classmethod
    def from_tensors(cls, tensors: Dict[str, np.ndarray]) -> "EmbeddingTable":
        missing = [name for name in TABLE_FIELDS if name not in tensors]
        if missing:
            raise ShapeMismatchError(f"嵌入表缺少张量: {missing}")
        return cls(**{name: tensors[name] for name in TABLE_FIELDS})


@dataclass(frozen=True, eq=False)
class TokenBundle:
    """条件 token: clip_tokens (N·T, d) 与 text_tokens (L, d)"""
    clip_tokens: np.ndarray
    text_tokens: np.ndarray
    d: int
    n_views: int = 0
    n_frames: int = 0
    order: Tuple[str, str] = field(default=("frame", "view"))

    @property
    def tokens(self) -> np.ndarray:
        return np.concatenate([self.clip_tokens, self.text_tokens], axis=0)

    @property
    def n_tokens(self) -> int:
        return len(self.clip_tokens) + len(self.text_tokens)

    def clip_token(self, t: int, i: int) -> np.ndarray:
        """第 t 帧第 i 个视角的视觉 token"""
        return self.clip_tokens[t * self.n_views + i]

    def shape_report(self) -> Dict[str, object]:
        return {
            "n_views": self.n_views,
            "n_frames": self.n_frames,
            "n_text": len(self.text_tokens),
            "n_tokens": self.n_tokens,
            "d": self.d,
            "clip_tokens": list(self.clip_tokens.shape),
            "text_tokens": list(self.text_tokens.shape),
            "order": "frame-major, view-minor; text last",
        }


def stub_projection(n_inputs: int, d_c: int) -> np.ndarray:
    """stub_encode 使用的固定随机投影 (d_c, n_inputs)"""
    rng = make_rng(CONDITIONING_CONFIG["stub_seed"], f"conditioning.stub.{n_inputs}.{d_c}")
    return rng.normal(0.0, 1.0 / np.sqrt(n_inputs), size=(d_c, n_inputs))


def pool_patches(image: np.ndarray, grid: int = None) -> np.ndarray:
    """把图像平均池化为 grid x grid 个块, 按 (行块, 列块, 通道) 展平"""
    grid = grid or CONDITIONING_CONFIG["stub_grid"]
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    H, W = image.shape[:2]
    if H < grid or W < grid:
        error_msg = f"图像 {W}x{H} 小于分块网格 {grid}x{grid}"
        logger.error(error_msg)
        raise TooSmallError(error_msg)
    pooled = [
        block.mean(axis=(0, 1))
        for rows in np.array_split(image, grid, axis=0)
        for block in np.array_split(rows, grid, axis=1)
    ]
    return np.concatenate(pooled)


def stub_encode(image, d_c: int = None) -> np.ndarray:
    """图像编码器替身: 分块平均池化后做固定随机投影, 输出 d_c 维向量"""
    d_c = d_c or CONDITIONING_CONFIG["d_c"]
    patches = pool_patches(image)
    return stub_projection(len(patches), d_c) @ patches


def assemble_condition_tokens(features, text, tables: EmbeddingTable) -> TokenBundle:
    """
    组装条件 token

    Args:
        features: (N, T, d_c)，features[i, t] 为第 i 个视角第 t 帧的图像特征 e_{t,i}
        text: (L, d_text) 文本特征
        tables: 嵌入表，位置编码行数不少于 T、N、L

    Raises:
        ShapeMismatchError: 形状与嵌入表不一致
        TokenBudgetError: N·T + L 超过 token 上限
    """
    features = np.asarray(features, dtype=np.float64)
    text = np.asarray(text, dtype=np.float64)
    if text.ndim == 1 and text.size == 0:
        text = text.reshape(0, tables.d_text)

    if features.ndim != 3 or features.shape[2] != tables.d_c:
        error_msg = f"图像特征形状 {features.shape} 与投影矩阵输入维度 d_c={tables.d_c} 不符"
        logger.error(error_msg)
        raise ShapeMismatchError(error_msg)
    if text.ndim != 2 or text.shape[1] != tables.d_text:
        error_msg = f"文本特征形状 {text.shape} 与投影矩阵输入维度 d_text={tables.d_text} 不符"
        logger.error(error_msg)
        raise ShapeMismatchError(error_msg)

    N, T, _ = features.shape
    L = text.shape[0]
    if T > len(tables.temporal) or N > len(tables.view) or L > len(tables.text_pos):
        error_msg = (f"位置编码不足: 需要 T={T}, N={N}, L={L}, 实际 "
                     f"{len(tables.temporal)}, {len(tables.view)}, {len(tables.text_pos)}")
        logger.error(error_msg)
        raise ShapeMismatchError(error_msg)
    n_tokens = N * T + L
    if n_tokens > CONDITIONING_CONFIG["max_tokens"]:
        error_msg = f"条件 token 数 {n_tokens} 超过上限 {CONDITIONING_CONFIG['max_tokens']}"
        logger.error(error_msg)
        raise TokenBudgetError(error_msg)

    # (N, T, d_c) -> (T·N, d_c)，t 外层 i 内层
    frame_major = features.transpose(1, 0, 2).reshape(T * N, tables.d_c)
    positional = np.repeat(tables.temporal[:T], N, axis=0) + np.tile(tables.view[:N], (T, 1))
    clip_tokens = frame_major @ tables.proj_clip.T + positional
    text_tokens = text @ tables.proj_text.T + tables.text_pos[:L]
    logger.debug(f"组装条件 token: {N} 个视角 x {T} 帧 + {L} 个文本 token")
    return TokenBundle(clip_tokens, text_tokens, tables.d, n_views=N, n_frames=T)


__all__ = [
    'EmbeddingTable', 'TokenBundle', 'stub_projection', 'pool_patches',
    'stub_encode', 'assemble_condition_tokens',
]
