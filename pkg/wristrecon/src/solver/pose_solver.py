#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
腕部相机位姿求解器

直接最小化 SPC 损失 L_proj，替代学习得到的腕部回归头。

迭代 pose ← compose(se3_exp(−α·d), pose)，每步对旋转做极分解重新正交化:
1. 可行化阶段: 存在后方点且 λ_depth > 0 时，线搜索的评价函数为连续的深度屏障
   λ_depth·Σ_back w·(−z)/Σ w，方向取其梯度，把后方点推到相机前方；
2. 主阶段: Armijo 回溯线搜索 L_proj，方向为梯度，或经 L_u 的阻尼 Gauss-Newton 矩阵预条件后的梯度；
   会让点跑到相机后方的步长被拒绝，已接受迭代的 L_proj 单调不增。
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.transform import Rotation

from ..config import SOLVER_CONFIG
from ..geometry.camera import Intrinsics
from ..geometry.se3 import PoseSE3, project_to_so3, retract
from ..spc.correspondence import TrackSet
from ..spc.loss import SpcBreakdown, SpcConfig, SpcEvaluation, evaluate_spc
from ..utils.errors import (
    DegenerateConfigurationError,
    NonFiniteError,
    SolverFailedError,
    WristReconError,
)
from ..utils.parallel import ordered_map
from ..utils.rng import make_rng
from .linear_init import linear_init

logger = logging.getLogger(__name__)


class SolverConfig(BaseModel):
    """求解器配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iterations: int = Field(SOLVER_CONFIG["max_iterations"], ge=1)
    step_tolerance: float = Field(SOLVER_CONFIG["step_tolerance"], gt=0)
    loss_tolerance: float = Field(SOLVER_CONFIG["loss_tolerance"], gt=0)
    initial_step: float = Field(SOLVER_CONFIG["initial_step"], gt=0)
    line_search: Literal["backtracking", "fixed"] = SOLVER_CONFIG["line_search"]
    preconditioner: Literal["gauss_newton", "none"] = SOLVER_CONFIG["preconditioner"]
    max_step_norm: float = Field(SOLVER_CONFIG["max_step_norm"], gt=0)
    n_starts: int = Field(SOLVER_CONFIG["n_starts"], ge=1)
    seed: int = Field(SOLVER_CONFIG["seed"], ge=0)
    threads: int = Field(1, ge=1)


@dataclass(frozen=True, eq=False)
class PoseEstimate:
    """位姿估计结果"""
    pose: PoseSE3
    final_loss: SpcBreakdown
    iterations: int
    converged: bool
    start_index: int = 0
    # 初值与每个被接受的迭代: (位姿, 损失分解)
    history: Tuple[Tuple[PoseSE3, SpcBreakdown], ...] = ()


def _check_finite(evaluation: SpcEvaluation) -> None:
    values = [evaluation.breakdown.l_proj, evaluation.barrier]
    if evaluation.gradient is not None:
        values.extend(evaluation.gradient.tolist())
    if not all(math.isfinite(v) for v in values):
        error_msg = "损失或梯度出现非有限值, 输入可能已损坏"
        logger.error(error_msg)
        raise NonFiniteError(error_msg)


def _direction(evaluation: SpcEvaluation, feasibility: bool, solver_cfg: SolverConfig) -> np.ndarray:
    """下降方向 d (实际步长为 −α·d)"""
    if feasibility:
        return evaluation.barrier_gradient
    g = evaluation.gradient
    H = evaluation.gauss_newton
    if solver_cfg.preconditioner == "none" or H is None or evaluation.breakdown.n_front == 0:
        return g
    damping = 1e-9 * max(float(np.trace(H)) / 6.0, 1e-300)
    try:
        d = np.linalg.solve(H + damping * np.eye(6), g)
    except np.linalg.LinAlgError:
        return g
    # 预条件后仍须是下降方向
    if not np.all(np.isfinite(d)) or float(g @ d) <= 0.0:
        return g
    return d


def solve_wrist_pose(tracks: TrackSet, K: Intrinsics, spc_cfg: SpcConfig = None,
                     solver_cfg: SolverConfig = None, init: PoseSE3 = None,
                     start_index: int = 0) -> PoseEstimate:
    """
    从初始位姿出发最小化 L_proj

    Raises:
        AllSkippedError: 由 SPC 损失传出
        NonFiniteError: 损失或梯度非有限
    """
    spc_cfg = spc_cfg or SpcConfig()
    solver_cfg = solver_cfg or SolverConfig()
    pose = init if init is not None else PoseSE3.identity()
    use_gn = solver_cfg.preconditioner == "gauss_newton"

    def evaluate(p: PoseSE3) -> SpcEvaluation:
        ev = evaluate_spc(tracks, p, K, spc_cfg, with_gradient=True, with_gauss_newton=use_gn)
        _check_finite(ev)
        return ev

    current = evaluate(pose)
    history = [(pose, current.breakdown)]
    best_pose, best = pose, current
    alpha_prev = solver_cfg.initial_step
    stall = 0
    converged = False
    iteration = 0

    for iteration in range(1, solver_cfg.max_iterations + 1):
        b = current.breakdown
        feasibility = b.n_back > 0 and spc_cfg.lambda_depth > 0
        merit = current.barrier if feasibility else b.l_proj
        if not feasibility and b.l_proj == 0.0:
            converged = True
            iteration -= 1
            break

        d = _direction(current, feasibility, solver_cfg)
        slope = float(d @ (current.barrier_gradient if feasibility else current.gradient))
        if use_gn and not feasibility:
            alpha = solver_cfg.initial_step
        else:
            alpha = min(2.0 * alpha_prev, 1e12) if solver_cfg.line_search == "backtracking" else solver_cfg.initial_step

        d_norm = float(np.linalg.norm(d))
        if alpha * d_norm > solver_cfg.max_step_norm:
            alpha = solver_cfg.max_step_norm / d_norm if d_norm > 0 else alpha
        if alpha * d_norm < solver_cfg.step_tolerance:
            converged = True
            iteration -= 1
            break

        accepted = None
        for _ in range(SOLVER_CONFIG["max_halvings"]):
            candidate_pose = retract(pose, -alpha * d)
            candidate = evaluate(candidate_pose)
            cb = candidate.breakdown
            if solver_cfg.line_search == "fixed":
                accepted = (candidate_pose, candidate)
                break
            if feasibility:
                ok = candidate.barrier <= merit - SOLVER_CONFIG["armijo_c"] * alpha * slope
            else:
                ok = (cb.n_back <= b.n_back
                      and cb.l_proj <= merit - SOLVER_CONFIG["armijo_c"] * alpha * slope)
            if ok:
                accepted = (candidate_pose, candidate)
                break
            alpha *= SOLVER_CONFIG["shrink"]

        if accepted is None:
            logger.debug(f"第 {iteration} 次迭代线搜索失败, 停止")
            iteration -= 1
            break

        step_norm = alpha * d_norm
        pose, previous, current = accepted[0], current, accepted[1]
        alpha_prev = alpha
        history.append((pose, current.breakdown))
        logger.debug(
            f"迭代 {iteration}: L_proj={current.breakdown.l_proj:.6e}, "
            f"前方 {current.breakdown.n_front}, 后方 {current.breakdown.n_back}, 步长 {step_norm:.3e}"
        )

        key = (current.breakdown.n_back, current.breakdown.l_proj)
        if key <= (best.breakdown.n_back, best.breakdown.l_proj):
            best_pose, best = pose, current

        if step_norm < solver_cfg.step_tolerance:
            converged = True
            break
        if not feasibility and previous.breakdown.n_back == 0:
            prev_loss = previous.breakdown.l_proj
            decrease = (prev_loss - current.breakdown.l_proj) / max(prev_loss, 1e-300)
            stall = stall + 1 if decrease < solver_cfg.loss_tolerance else 0
            if stall >= SOLVER_CONFIG["stall_iterations"]:
                converged = True
                break

    logger.info(
        f"起点 {start_index} 求解结束: 迭代 {iteration} 次, L_proj={best.breakdown.l_proj:.6e}, "
        f"后方点 {best.breakdown.n_back}, 收敛: {converged}"
    )
    return PoseEstimate(best_pose, best.breakdown, iteration, converged, start_index, tuple(history))


def random_start_pose(tracks: TrackSet, seed: int, start_index: int) -> PoseSE3:
    """随机起点: 旋转在 SO(3) 上均匀, 相机中心在 1.5 倍点云半径的球内均匀"""
    rng = make_rng(seed, f"solver.start.{start_index}")
    R = project_to_so3(Rotation.random(random_state=rng).as_matrix())
    radius = SOLVER_CONFIG["start_radius_scale"] * tracks.radius()
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    center = tracks.centroid() + direction * radius * rng.uniform() ** (1.0 / 3.0)
    return PoseSE3(R, -R @ center)


def multi_start(tracks: TrackSet, K: Intrinsics, spc_cfg: SpcConfig = None,
                solver_cfg: SolverConfig = None) -> PoseEstimate:
    """
    多起点求解

    起点 0 为 DLT 初始化 (退化时改用随机位姿)，其余 n_starts − 1 个为由 seed 决定的随机位姿；
    返回 l_proj 最小的结果，相同时取起点编号最小者。
    """
    spc_cfg = spc_cfg or SpcConfig()
    solver_cfg = solver_cfg or SolverConfig()

    inits: List[PoseSE3] = []
    try:
        inits.append(linear_init(tracks, K))
    except DegenerateConfigurationError:
        logger.warning("DLT 初始化退化, 起点 0 改用随机位姿")
        inits.append(random_start_pose(tracks, solver_cfg.seed, 0))
    inits.extend(random_start_pose(tracks, solver_cfg.seed, k) for k in range(1, solver_cfg.n_starts))

    def run(index: int):
        try:
            return solve_wrist_pose(tracks, K, spc_cfg, solver_cfg, inits[index], start_index=index)
        except WristReconError as exc:
            logger.warning(f"起点 {index} 失败: {exc}")
            return exc

    results = ordered_map(run, range(len(inits)), threads=solver_cfg.threads)
    estimates: List[PoseEstimate] = [r for r in results if isinstance(r, PoseEstimate)]
    if not estimates:
        failures = [r for r in results if isinstance(r, Exception)]
        error_msg = f"全部 {len(failures)} 个起点求解失败"
        logger.error(error_msg)
        raise SolverFailedError(error_msg, failures)
    return min(estimates, key=lambda e: (e.final_loss.l_proj, e.start_index))


__all__ = ['SolverConfig', 'PoseEstimate', 'solve_wrist_pose', 'random_start_pose', 'multi_start']
