#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义

所有面向用户的错误都继承 WristReconError，并携带命令行退出码:
- 2: 输入/解析错误
- 3: 数值失败 (NonFinite / AllSkipped 等)
- 4: 场景不可行
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union


class WristReconError(Exception):
    """工具包异常基类"""

    exit_code = 1


# ---------------------------------------------------------------- 输入错误

class InputError(WristReconError, ValueError):
    """输入或解析错误"""

    exit_code = 2


class ParseError(InputError):
    """带位置信息的解析错误"""

    def __init__(self, message: str, path: Union[str, Path, None] = None,
                 line: Optional[int] = None, offset: Optional[int] = None):
        self.path = None if path is None else Path(path)
        self.line = line
        self.offset = offset
        where = []
        if self.path is not None:
            where.append(str(self.path))
        if line is not None:
            where.append(f"第 {line} 行")
        if offset is not None:
            where.append(f"偏移 {offset}")
        super().__init__(f"{' '.join(where)}: {message}" if where else message)


class UnsupportedPropertyError(InputError):
    """PLY 属性不受支持"""


class NegativeIndexError(InputError):
    """锚点视角索引为负"""


class ShapeMismatchError(InputError):
    """数组形状不一致"""


class DimensionMismatchError(InputError):
    """图像尺寸不一致"""


class TooSmallError(InputError):
    """图像过小，无法计算窗口统计量"""


class LengthMismatchError(InputError):
    """序列长度不一致"""


class GridTooLargeError(InputError):
    """穷举网格规模超限"""


class EmptyResultError(InputError):
    """结果为空"""


class TokenBudgetError(InputError):
    """条件 token 数超过上限"""


class IoFailureError(InputError):
    """文件写入失败"""


# ---------------------------------------------------------------- 数值错误

class NumericalError(WristReconError, ArithmeticError):
    """数值失败"""

    exit_code = 3


class AllSkippedError(NumericalError):
    """所有轨迹点的深度都落在 z_eps 以内"""


class NonFiniteError(NumericalError):
    """损失或梯度出现非有限值"""


class DegenerateConfigurationError(NumericalError):
    """DLT 设计矩阵秩亏"""


class NoFrontPointsError(NumericalError):
    """没有位于相机前方的点"""


class SolverFailedError(NumericalError):
    """多起点求解全部失败"""

    def __init__(self, message: str, failures: Sequence[Exception] = ()):
        self.failures = list(failures)
        super().__init__(message)


# ---------------------------------------------------------------- 场景错误

class InfeasibleSceneError(WristReconError):
    """无法满足可见性约束的合成场景"""

    exit_code = 4


__all__ = [
    'WristReconError', 'InputError', 'ParseError', 'UnsupportedPropertyError',
    'NegativeIndexError', 'ShapeMismatchError', 'DimensionMismatchError',
    'TooSmallError', 'LengthMismatchError', 'GridTooLargeError',
    'EmptyResultError', 'TokenBudgetError', 'IoFailureError',
    'NumericalError', 'AllSkippedError', 'NonFiniteError',
    'DegenerateConfigurationError', 'NoFrontPointsError', 'SolverFailedError',
    'InfeasibleSceneError',
]
