# 公共工具: 异常、确定性随机数、并行映射
__all__ = ['errors', 'rng', 'parallel']
