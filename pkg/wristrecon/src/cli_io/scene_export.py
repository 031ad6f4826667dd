"""
合成场景导出

把合成场景写成命令行各子命令可直接读取的文件，并生成可运行的 manifest.yaml:

    cloud.ply                      点云
    cameras.yaml                   锚点内外参与腕部内参
    trajectory_gt.txt              腕部真值轨迹
    anchor_maps/anchor_K.wrtc      锚点逐像素点图
    correspondences/frame_T.txt    每帧的锚点-腕部匹配
    gt_condition_maps/frame_T.*    真值位姿下的条件图
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

from ..oracle.scene import SceneParams, SyntheticScene, build_anchor_maps, generate_correspondences
from ..render.rasterizer import render_sequence
from ..utils.parallel import ordered_map
from .camera_config import CameraConfig, save_camera_config
from .condition_io import write_condition_outputs
from .correspondence_io import save_correspondences
from .manifest import MANIFEST_NAME, InputPaths, RunManifest, save_manifest
from .ply_io import save_point_cloud
from .tensor_io import save_anchor_point_map
from .trajectory_io import save_trajectory

logger = logging.getLogger(__name__)


def frame_stem(index: int) -> str:
    return f"frame_{index:04d}"


def export_scene(scene: SyntheticScene, out_dir: Union[str, Path], params: SceneParams,
                 base: RunManifest = None, threads: int = 1) -> RunManifest:
    """导出场景并写出 manifest.yaml，返回清单 (路径相对 out_dir)"""
    out_dir = Path(out_dir)
    base = base or RunManifest()
    out_dir.mkdir(parents=True, exist_ok=True)

    save_point_cloud(scene.cloud, out_dir / "cloud.ply", binary=True)
    cameras = CameraConfig.build(
        anchors=[(f"ext{k + 1}", scene.anchor_intrinsics, pose) for k, pose in enumerate(scene.anchor_poses)],
        wrist=("wrist", scene.wrist_intrinsics),
    )
    save_camera_config(cameras, out_dir / "cameras.yaml")
    save_trajectory(scene.wrist_trajectory, out_dir / "trajectory_gt.txt", header="R (row-major) T")

    anchor_paths = []
    for k, point_map in enumerate(build_anchor_maps(scene)):
        relative = Path("anchor_maps") / f"anchor_{k}.wrtc"
        save_anchor_point_map(point_map, out_dir / relative)
        anchor_paths.append(relative)

    def export_frame(t: int) -> Path:
        corrs, _, _ = generate_correspondences(scene, t, params)
        relative = Path("correspondences") / f"{frame_stem(t)}.txt"
        save_correspondences(corrs, out_dir / relative)
        return relative

    corr_paths = ordered_map(export_frame, range(scene.n_frames), threads=threads)

    maps = render_sequence(scene.cloud, scene.wrist_trajectory, scene.wrist_intrinsics, base.splat, threads=threads)
    for t, cmap in enumerate(maps):
        write_condition_outputs(cmap, out_dir / "gt_condition_maps" / frame_stem(t))

    manifest = base.model_copy(update={
        "inputs": InputPaths(
            cloud=Path("cloud.ply"),
            cameras=Path("cameras.yaml"),
            anchor_maps=anchor_paths,
            correspondences=corr_paths,
            reference_trajectory=Path("trajectory_gt.txt"),
            reference_maps=Path("gt_condition_maps"),
        ),
        "scene": params,
        "seed": params.seed,
        "output_dir": Path("results"),
    })
    save_manifest(manifest, out_dir / MANIFEST_NAME)
    logger.info(f"合成场景已导出到 {out_dir}: {scene.n_frames} 帧, {len(anchor_paths)} 个锚点")
    return manifest


__all__ = ['frame_stem', 'export_scene']
