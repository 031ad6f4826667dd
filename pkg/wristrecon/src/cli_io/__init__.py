"""
文件格式、配置与命令行
"""

from .camera_config import CameraConfig, load_camera_config, save_camera_config
from .condition_io import read_condition_outputs, read_pfm, write_condition_outputs, write_pfm
from .correspondence_io import load_correspondences, save_correspondences
from .manifest import InputPaths, RunManifest, load_manifest, save_manifest
from .metrics_io import read_key_values, write_json, write_key_values, write_metrics
from .ply_io import load_point_cloud, save_point_cloud
from .scene_export import export_scene
from .tensor_io import (
    load_anchor_point_map,
    load_embedding_table,
    load_tensors,
    save_anchor_point_map,
    save_embedding_table,
    save_tensors,
    save_token_bundle,
)
from .trajectory_io import load_trajectory, save_trajectory

__all__ = [
    'CameraConfig', 'load_camera_config', 'save_camera_config',
    'read_condition_outputs', 'read_pfm', 'write_condition_outputs', 'write_pfm',
    'load_correspondences', 'save_correspondences',
    'InputPaths', 'RunManifest', 'load_manifest', 'save_manifest',
    'read_key_values', 'write_json', 'write_key_values', 'write_metrics',
    'load_point_cloud', 'save_point_cloud', 'export_scene',
    'load_anchor_point_map', 'load_embedding_table', 'load_tensors',
    'save_anchor_point_map', 'save_embedding_table', 'save_tensors', 'save_token_bundle',
    'load_trajectory', 'save_trajectory',
]
