#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口

    wristrecon [--config 清单] [--seed N] [--threads N] [--out 目录] [--log-level 级别] 子命令

子命令: synth, solve-pose, render-condition, eval, tokens
退出码: 0 成功, 2 输入/解析错误, 3 数值失败, 4 场景不可行
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
from pydantic import ValidationError

from ..config import CONDITIONING_CONFIG, APP_CONFIG, PERFORMANCE_CONFIG, AppSettings, setup_logging
from ..conditioning.tokens import EmbeddingTable, assemble_condition_tokens
from ..geometry.se3 import relative_to_anchor
from ..metrics.image_metrics import psnr, reprojection_rmse, ssim, summarize_psnr
from ..metrics.pose_metrics import summarize_pose_errors
from ..oracle.scene import generate_scene
from ..render.rasterizer import render_sequence
from ..solver.pose_solver import multi_start
from ..spc.correspondence import lift_correspondences
from ..utils.errors import InputError, LengthMismatchError, WristReconError
from ..utils.parallel import ordered_map
from .camera_config import load_camera_config
from .condition_io import read_rgb, write_condition_outputs
from .correspondence_io import load_correspondences
from .manifest import RunManifest, load_manifest
from .metrics_io import UNAVAILABLE, write_json, write_key_values, write_metrics
from .ply_io import load_point_cloud
from .scene_export import export_scene, frame_stem
from .tensor_io import load_anchor_point_map, load_embedding_table, load_tensors, save_token_bundle
from .trajectory_io import load_trajectory, save_trajectory

logger = logging.getLogger(__name__)

CONDITION_DIR = "condition_maps"
ESTIMATED_TRAJECTORY = "trajectory_est.txt"


@dataclass(frozen=True)
class RunContext:
    """清单与命令行参数合并后的运行上下文"""
    manifest: RunManifest
    seed: int
    seed_override: Optional[int]
    threads: int
    out_dir: Path
    show_progress: bool = False


class WristReconGroup(click.Group):
    """把工具包异常映射为退出码"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except WristReconError as exc:
            logger.error(f"{type(exc).__name__}: {exc}")
            click.echo(f"错误: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            logger.error(f"参数校验失败: {exc}")
            click.echo(f"错误: 参数校验失败: {exc}", err=True)
            ctx.exit(InputError.exit_code)


def _require(value, what: str):
    if value is None or (isinstance(value, (list, tuple)) and not value):
        error_msg = f"缺少输入: {what} (命令行参数或清单 inputs 中给出)"
        logger.error(error_msg)
        raise InputError(error_msg)
    return value


def _wrist_intrinsics(cameras_path: Path):
    cameras = load_camera_config(cameras_path)
    return cameras, cameras.intrinsics(cameras.wrist())


@click.group(cls=WristReconGroup)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="运行清单 (YAML)")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="随机种子")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="线程数上限")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="输出目录")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="日志级别")
@click.option("--progress/--no-progress", "show_progress", default=None, help="显示逐帧进度条")
@click.version_option(APP_CONFIG["version"], prog_name="wristrecon")
@click.pass_context
def cli(ctx: click.Context, config_path, seed, threads, out_dir, log_level, show_progress):
    """WristRecon 腕部视角重建工具包"""
    setup_logging(log_level)
    manifest = load_manifest(config_path) if config_path else RunManifest().resolved(Path.cwd())
    threads = threads or manifest.threads or AppSettings().threads
    ctx.obj = RunContext(
        manifest=manifest,
        seed=manifest.seed if seed is None else seed,
        seed_override=seed,
        threads=max(1, int(threads)),
        out_dir=out_dir if out_dir is not None else manifest.output_dir,
        show_progress=PERFORMANCE_CONFIG["show_progress"] if show_progress is None else show_progress,
    )
    logger.debug(f"运行上下文: seed={ctx.obj.seed}, threads={ctx.obj.threads}, out={ctx.obj.out_dir}")


# ---------------------------------------------------------------- synth

@cli.command()
@click.option("--points", type=click.IntRange(min=1), default=None, help="点数")
@click.option("--frames", type=click.IntRange(min=1), default=None, help="轨迹帧数")
@click.option("--anchors", type=click.IntRange(min=1), default=None, help="锚点相机数")
@click.option("--scene-kind", type=click.Choice(["box_room", "random_blobs", "planar"]), default=None)
@click.option("--trajectory-kind", type=click.Choice(["arc", "spline", "static"]), default=None)
@click.option("--noise", type=float, default=None, help="像素噪声标准差")
@click.option("--outlier-rate", type=float, default=None, help="外点比例")
@click.option("--correspondences", "n_correspondences", type=click.IntRange(min=1), default=None,
              help="每帧匹配数")
@click.pass_obj
def synth(run: RunContext, points, frames, anchors, scene_kind, trajectory_kind, noise, outlier_rate,
          n_correspondences):
    """生成合成场景并导出全部输入文件与 manifest.yaml"""
    overrides = {
        "n_points": points,
        "trajectory_frames": frames,
        "n_anchors": anchors,
        "scene_kind": scene_kind,
        "trajectory_kind": trajectory_kind,
        "pixel_noise_sigma": noise,
        "outlier_rate": outlier_rate,
        "n_correspondences": n_correspondences,
        "seed": run.seed_override,
    }
    current = run.manifest.scene.model_dump()
    current.update({k: v for k, v in overrides.items() if v is not None})
    params = type(run.manifest.scene).model_validate(current)

    scene = generate_scene(params)
    base = run.manifest.model_copy(update={"seed": params.seed, "threads": run.manifest.threads})
    export_scene(scene, run.out_dir, params, base=base, threads=run.threads)
    click.echo(f"场景已导出: {run.out_dir} ({scene.n_frames} 帧, {len(scene.cloud)} 个点)")


# ---------------------------------------------------------------- solve-pose

@cli.command("solve-pose")
@click.option("--cameras", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--anchor-map", "anchor_maps", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              multiple=True, help="锚点点图 (按锚点顺序, 可重复)")
@click.option("--correspondences", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              multiple=True, help="每帧匹配文件 (按帧顺序, 可重复)")
@click.option("--relative-to-anchor", "anchor_index", type=click.IntRange(min=0), default=None,
              help="额外输出相对第 k 个锚点相机坐标系的轨迹")
@click.pass_obj
def solve_pose(run: RunContext, cameras, anchor_maps, correspondences, anchor_index):
    """逐帧提升匹配并最小化 SPC 损失, 输出估计轨迹与求解报告"""
    inputs = run.manifest.inputs
    cameras_path = _require(cameras or inputs.cameras, "cameras")
    map_paths = _require(list(anchor_maps) or inputs.anchor_maps, "anchor_maps")
    corr_paths = _require(list(correspondences) or inputs.correspondences, "correspondences")

    camera_config, K = _wrist_intrinsics(cameras_path)
    point_maps = [load_anchor_point_map(p) for p in map_paths]
    spc_cfg = run.manifest.spc
    solver_cfg = run.manifest.solver.model_copy(update={"seed": run.seed, "threads": 1})
    logger.info(f"开始求解 {len(corr_paths)} 帧腕部位姿, 每帧 {solver_cfg.n_starts} 个起点")

    def solve_frame(t: int):
        tracks, n_dropped = lift_correspondences(load_correspondences(corr_paths[t]), point_maps)
        estimate = multi_start(tracks, K, spc_cfg, solver_cfg)
        return estimate, len(tracks), n_dropped

    results = ordered_map(solve_frame, range(len(corr_paths)), threads=run.threads,
                          desc="逐帧求解", show_progress=run.show_progress)
    trajectory = [estimate.pose for estimate, _, _ in results]

    out_dir = run.out_dir
    save_trajectory(trajectory, out_dir / ESTIMATED_TRAJECTORY, header="R (row-major) T")
    if anchor_index is not None:
        anchors = camera_config.anchors()
        if anchor_index >= len(anchors):
            raise InputError(f"锚点索引 {anchor_index} 超出范围 (共 {len(anchors)} 个)")
        anchor_pose = camera_config.pose(anchors[anchor_index])
        save_trajectory([relative_to_anchor(p, anchor_pose) for p in trajectory],
                        out_dir / f"trajectory_est_anchor{anchor_index}.txt",
                        header=f"relative to anchor {anchor_index}")

    frames = []
    for t, (estimate, n_tracks, n_dropped) in enumerate(results):
        b = estimate.final_loss
        frames.append({
            "frame": t,
            "l_proj": b.l_proj,
            "l_u": b.l_u,
            "l_depth": b.l_depth,
            "n_front": b.n_front,
            "n_back": b.n_back,
            "n_skipped": b.n_skipped,
            "iterations": estimate.iterations,
            "converged": estimate.converged,
            "start_index": estimate.start_index,
            "n_tracks": n_tracks,
            "n_dropped": n_dropped,
        })
    summary = {
        "frames": len(frames),
        "converged_frames": sum(f["converged"] for f in frames),
        "l_proj_max": max(f["l_proj"] for f in frames),
        "n_back_max": max(f["n_back"] for f in frames),
        "n_dropped_total": sum(f["n_dropped"] for f in frames),
    }
    write_key_values(summary, out_dir / "solve_report.txt")
    write_json({**summary, "per_frame": frames}, out_dir / "solve_report.json")
    click.echo(f"位姿求解完成: {len(frames)} 帧, 收敛 {summary['converged_frames']} 帧")


# ---------------------------------------------------------------- render-condition

@cli.command("render-condition")
@click.option("--cloud", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--cameras", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--trajectory", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="位姿轨迹, 默认为输出目录下的估计轨迹")
@click.pass_obj
def render_condition(run: RunContext, cloud, cameras, trajectory):
    """沿轨迹把点云渲染为条件图序列"""
    inputs = run.manifest.inputs
    cloud_path = _require(cloud or inputs.cloud, "cloud")
    cameras_path = _require(cameras or inputs.cameras, "cameras")
    trajectory_path = trajectory or inputs.trajectory or run.out_dir / ESTIMATED_TRAJECTORY

    point_cloud, _ = load_point_cloud(cloud_path)
    _, K = _wrist_intrinsics(cameras_path)
    poses = load_trajectory(trajectory_path)
    maps = render_sequence(point_cloud, poses, K, run.manifest.splat, threads=run.threads)
    for t, cmap in enumerate(maps):
        write_condition_outputs(cmap, run.out_dir / CONDITION_DIR / frame_stem(t))
    click.echo(f"条件图渲染完成: {len(maps)} 帧 -> {run.out_dir / CONDITION_DIR}")


# ---------------------------------------------------------------- eval

def _frame_images(directory: Path) -> List[Path]:
    return sorted(p for p in directory.glob("frame_*.png") if not p.name.endswith(".mask.png"))


def _image_metrics(pred_dir: Path, ref_dir: Path, threads: int):
    pred = _frame_images(pred_dir)
    ref = _frame_images(ref_dir)
    if [p.name for p in pred] != [r.name for r in ref]:
        error_msg = f"条件图序列不一致: {pred_dir} 有 {len(pred)} 帧, {ref_dir} 有 {len(ref)} 帧"
        logger.error(error_msg)
        raise LengthMismatchError(error_msg)
    if not pred:
        raise InputError(f"{pred_dir} 中没有条件图")

    def score(t: int):
        a, b = read_rgb(pred[t]), read_rgb(ref[t])
        return psnr(a, b), ssim(a, b)

    return ordered_map(score, range(len(pred)), threads=threads)


@cli.command("eval")
@click.option("--pred-trajectory", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--ref-trajectory", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--pred-maps", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.option("--ref-maps", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.pass_obj
def evaluate(run: RunContext, pred_trajectory, ref_trajectory, pred_maps, ref_maps):
    """计算位姿误差、PSNR/SSIM 与重投影误差, 写出 metrics.txt 与 metrics.json"""
    inputs = run.manifest.inputs
    estimated_default = run.out_dir / ESTIMATED_TRAJECTORY
    pred_trajectory = pred_trajectory or (estimated_default if estimated_default.exists() else None)
    ref_trajectory = ref_trajectory or inputs.reference_trajectory
    maps_default = run.out_dir / CONDITION_DIR
    pred_maps = pred_maps or (maps_default if maps_default.is_dir() else None)
    ref_maps = ref_maps or inputs.reference_maps

    summary = {}
    per_frame = {}
    evaluated = False

    predicted_poses = load_trajectory(pred_trajectory) if pred_trajectory else None
    if predicted_poses is not None and ref_trajectory:
        poses = summarize_pose_errors(predicted_poses, load_trajectory(ref_trajectory))
        summary["rotation_deg"] = poses["rotation_deg_median"]
        summary["translation"] = poses["translation_median"]
        summary["rotation_deg_max"] = poses["rotation_deg_max"]
        summary["translation_max"] = poses["translation_max"]
        per_frame["rotation_deg"] = poses["rotation_deg"]
        per_frame["translation"] = poses["translation"]
        evaluated = True
    else:
        summary["rotation_deg"] = summary["translation"] = UNAVAILABLE

    if pred_maps and ref_maps:
        scores = _image_metrics(Path(pred_maps), Path(ref_maps), run.threads)
        psnr_values = [s[0] for s in scores]
        ssim_values = [s[1] for s in scores]
        psnr_summary = summarize_psnr(psnr_values)
        summary["psnr_mean"] = psnr_summary["mean"]
        summary["psnr_identical"] = psnr_summary["identical"]
        summary["ssim_mean"] = math.fsum(ssim_values) / len(ssim_values)
        per_frame["psnr"] = psnr_values
        per_frame["ssim"] = ssim_values
        evaluated = True
    else:
        summary["psnr_mean"] = summary["psnr_identical"] = summary["ssim_mean"] = UNAVAILABLE

    if predicted_poses is not None and inputs.cameras and inputs.anchor_maps and inputs.correspondences:
        if len(inputs.correspondences) != len(predicted_poses):
            raise LengthMismatchError(
                f"匹配文件 {len(inputs.correspondences)} 个, 估计轨迹 {len(predicted_poses)} 帧")
        _, K = _wrist_intrinsics(inputs.cameras)
        point_maps = [load_anchor_point_map(p) for p in inputs.anchor_maps]

        def rmse(t: int) -> float:
            tracks, _ = lift_correspondences(load_correspondences(inputs.correspondences[t]), point_maps)
            return reprojection_rmse(tracks, predicted_poses[t], K, run.manifest.spc.z_eps)

        rmse_values = ordered_map(rmse, range(len(predicted_poses)), threads=run.threads)
        summary["reprojection_rmse"] = math.fsum(rmse_values) / len(rmse_values)
        per_frame["reprojection_rmse"] = rmse_values
    else:
        summary["reprojection_rmse"] = UNAVAILABLE

    if not evaluated:
        raise InputError("没有可评估的内容: 需要一对轨迹或一对条件图目录")
    summary["fvd"] = UNAVAILABLE
    summary["lpips"] = UNAVAILABLE
    write_metrics(summary, per_frame, run.out_dir)
    for name in ("rotation_deg", "translation", "psnr_mean", "ssim_mean", "reprojection_rmse"):
        click.echo(f"{name}={summary[name]}")


# ---------------------------------------------------------------- tokens

@cli.command()
@click.option("--features", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="特征容器: features (N, T, d_c), 可选 text (L, d_text)")
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="嵌入表容器, 缺省时由种子生成")
@click.pass_obj
def tokens(run: RunContext, features, embeddings):
    """组装条件 token 并输出形状报告"""
    inputs = run.manifest.inputs
    features_path = _require(features or inputs.features, "features")
    embeddings_path = embeddings or inputs.embeddings

    tensors = load_tensors(features_path)
    if "features" not in tensors:
        raise InputError(f"{features_path} 中缺少 'features' 张量")
    image_features = tensors["features"].astype(np.float64)
    if image_features.ndim != 3:
        raise InputError(f"features 必须是 (N, T, d_c) 三维张量, 实际形状 {image_features.shape}")
    text = tensors.get("text")
    d_text = text.shape[-1] if text is not None else CONDITIONING_CONFIG["d_text"]
    if text is None:
        text = np.zeros((0, d_text))

    if embeddings_path:
        table = load_embedding_table(embeddings_path)
    else:
        n_views, n_frames, d_c = image_features.shape
        table = EmbeddingTable.seeded(n_views, n_frames, len(text), d_c=d_c, d_text=d_text, seed=run.seed)
    bundle = assemble_condition_tokens(image_features, text, table)

    save_token_bundle(bundle, run.out_dir / "tokens.wrtc")
    write_json(bundle.shape_report(), run.out_dir / "token_report.json")
    click.echo(f"条件 token: {bundle.n_tokens} 个, 维度 {bundle.d}")


def main():
    """控制台脚本入口"""
    cli(prog_name="wristrecon")


__all__ = ['cli', 'main', 'RunContext']
