"""
并行执行辅助

joblib 线程后端，结果按提交顺序返回，因此输出与线程数无关。
"""
from __future__ import annotations

import logging
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed
from tqdm import tqdm

from ..config import PERFORMANCE_CONFIG

logger = logging.getLogger(__name__)

T = TypeVar("T")


def resolve_threads(threads: Optional[int]) -> int:
    """线程数: None 取配置默认值，且至少为 1"""
    if threads is None:
        threads = PERFORMANCE_CONFIG["threads"]
    return max(1, int(threads))


def ordered_map(func: Callable[..., T], items: Iterable, threads: Optional[int] = None,
                desc: Optional[str] = None, show_progress: Optional[bool] = None) -> List[T]:
    """按输入顺序并行映射，show_progress 为真时显示 tqdm 进度条"""
    items = list(items)
    n_jobs = resolve_threads(threads)
    if show_progress is None:
        show_progress = PERFORMANCE_CONFIG["show_progress"]
    bar = {"total": len(items), "desc": desc, "disable": not show_progress}
    if n_jobs == 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, **bar)]
    logger.debug(f"并行执行 {len(items)} 个任务, 线程数: {n_jobs}")
    results = Parallel(n_jobs=n_jobs, prefer="threads", return_as="generator")(
        delayed(func)(item) for item in items
    )
    return list(tqdm(results, **bar))


__all__ = ['ordered_map', 'resolve_threads']
