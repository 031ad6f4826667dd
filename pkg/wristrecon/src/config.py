"""
系统配置文件
包含腕部视角重建工具包的所有默认配置选项
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Any, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

# 基础配置
BASE_DIR = Path(__file__).parent.parent.absolute()
TEMPLATES_DIR = BASE_DIR.parent / "templates"

# 应用配置
APP_CONFIG = {
    "title": "WristRecon 腕部视角重建工具包",
    "version": "1.0.0",
    "description": "基于空间投影一致性的腕部相机位姿估计与条件图渲染",
    "author": "WristRecon Team",
}

# 几何配置
GEOMETRY_CONFIG = {
    "z_eps": 1e-6,  # |深度| 低于该值的点既不属于前方也不属于后方
    "orthonormal_tol": 1e-9,
    "trajectory_fix_tol": 1e-3,  # 轨迹文件中可被投影修正的最大正交误差
}

# SPC 损失配置
SPC_CONFIG = {
    "lambda_u": 1.0,
    "lambda_depth": 0.1,
    "normalization": "image_diagonal",
}

# 位姿求解配置
SOLVER_CONFIG = {
    "max_iterations": 500,
    "step_tolerance": 1e-10,
    "loss_tolerance": 1e-12,
    "initial_step": 1.0,
    "line_search": "backtracking",
    "preconditioner": "gauss_newton",
    "max_step_norm": 0.5,
    "n_starts": 1,
    "seed": 0,
    "armijo_c": 1e-4,
    "shrink": 0.5,
    "max_halvings": 60,
    "stall_iterations": 3,
    "start_radius_scale": 1.5,
}

# 点云渲染配置
SPLAT_CONFIG = {
    "radius_px": 1,
    "depth_test_eps": 1e-9,
    "max_radius_px": 16,
}

# 合成场景配置
SCENE_CONFIG = {
    "width": 640,
    "height": 480,
    "focal": 500.0,
    "anchor_distance": (2.0, 3.0),
    "anchor_elevation_deg": (15.0, 60.0),
    "max_rejections": 100,
    "min_anchor_visibility": 0.5,
    "min_covisible": 6,
    "n_correspondences": 1000,
}

# 条件编码配置
CONDITIONING_CONFIG = {
    "d": 64,
    "d_c": 512,
    "d_text": 4096,
    "max_tokens": 512,
    "latent_scale": 8,
    "latent_channels": 16,
    "stub_grid": 4,
    "stub_seed": 20240917,
}

# 系统日志配置
LOG_CONFIG = {
    "level": "INFO",
    "file": None,
    "max_size": 10 * 1024 * 1024,  # 10MB
    "backup_count": 5,
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}

# 性能配置
PERFORMANCE_CONFIG = {
    "threads": 1,
    "grid_limit": 10 ** 7,
    "show_progress": False,
}

# 导出所有配置
CONFIG = {
    "app": APP_CONFIG,
    "geometry": GEOMETRY_CONFIG,
    "spc": SPC_CONFIG,
    "solver": SOLVER_CONFIG,
    "splat": SPLAT_CONFIG,
    "scene": SCENE_CONFIG,
    "conditioning": CONDITIONING_CONFIG,
    "log": LOG_CONFIG,
    "performance": PERFORMANCE_CONFIG,
}


class AppSettings(BaseSettings):
    """环境变量覆盖项 (前缀 WRISTRECON_，可写入 .env)"""

    model_config = SettingsConfigDict(env_prefix="WRISTRECON_", env_file=".env", extra="ignore")

    log_level: str = LOG_CONFIG["level"]
    log_file: Optional[Path] = LOG_CONFIG["file"]
    threads: int = PERFORMANCE_CONFIG["threads"]


def get_config(section: str = None):
    """获取配置"""
    if section:
        return CONFIG.get(section, {})
    return CONFIG


def update_config(section: str, key: str, value: Any):
    """更新配置"""
    if section in CONFIG:
        CONFIG[section][key] = value
        return True
    return False


def setup_logging(level: Optional[str] = None, log_file: Optional[Path] = None) -> None:
    """配置根日志记录器，只在入口处调用一次"""
    settings = AppSettings()
    level = (level or settings.log_level or LOG_CONFIG["level"]).upper()
    log_file = log_file or settings.log_file

    handlers: list = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(
            logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=LOG_CONFIG["max_size"],
                backupCount=LOG_CONFIG["backup_count"],
                encoding="utf-8",
            )
        )
    logging.basicConfig(level=level, format=LOG_CONFIG["format"], handlers=handlers, force=True)
