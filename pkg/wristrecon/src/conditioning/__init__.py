"""
条件编码模块: 潜变量拼接与条件 token 组装 (只做形状层面的数组运算)
"""

from .latents import LatentFrame, concat_latents, concat_latents_sequence, latent_shape
from .tokens import (
    EmbeddingTable,
    TokenBundle,
    assemble_condition_tokens,
    pool_patches,
    stub_encode,
    stub_projection,
)

__all__ = [
    'LatentFrame', 'concat_latents', 'concat_latents_sequence', 'latent_shape',
    'EmbeddingTable', 'TokenBundle', 'assemble_condition_tokens', 'pool_patches',
    'stub_encode', 'stub_projection',
]
