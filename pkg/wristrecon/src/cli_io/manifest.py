"""
运行清单 (YAML)

清单中的相对路径以清单文件所在目录为基准解析。
优先级: config.py 默认值 < 环境变量 < 清单 < 命令行参数。
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..oracle.scene import SceneParams
from ..render.rasterizer import SplatConfig
from ..solver.pose_solver import SolverConfig
from ..spc.loss import SpcConfig
from ..utils.errors import ParseError
from .camera_config import read_yaml, write_yaml

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"


class InputPaths(BaseModel):
    """输入文件; correspondences 每帧一个文件, anchor_maps 每个锚点一个"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cloud: Optional[Path] = None
    cameras: Optional[Path] = None
    anchor_maps: List[Path] = Field(default_factory=list)
    correspondences: List[Path] = Field(default_factory=list)
    trajectory: Optional[Path] = None
    reference_trajectory: Optional[Path] = None
    reference_maps: Optional[Path] = None
    features: Optional[Path] = None
    embeddings: Optional[Path] = None

    def resolved(self, base_dir: Path) -> "InputPaths":
        def fix(p):
            if p is None:
                return None
            return p if p.is_absolute() else base_dir / p

        update = {}
        for name, value in self:
            update[name] = [fix(p) for p in value] if isinstance(value, list) else fix(value)
        return self.model_copy(update=update)


class RunManifest(BaseModel):
    """一次运行的全部输入与配置，可完整序列化"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    inputs: InputPaths = Field(default_factory=InputPaths)
    scene: SceneParams = Field(default_factory=SceneParams)
    spc: SpcConfig = Field(default_factory=SpcConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    splat: SplatConfig = Field(default_factory=SplatConfig)
    seed: int = Field(0, ge=0)
    threads: Optional[int] = Field(None, ge=1)
    output_dir: Path = Path("out")

    def resolved(self, base_dir: Union[str, Path]) -> "RunManifest":
        base_dir = Path(base_dir)
        output_dir = self.output_dir if self.output_dir.is_absolute() else base_dir / self.output_dir
        return self.model_copy(update={"inputs": self.inputs.resolved(base_dir), "output_dir": output_dir})


def load_manifest(path: Union[str, Path]) -> RunManifest:
    """
    Raises:
        ParseError: YAML 格式错误或字段校验失败
    """
    path = Path(path)
    try:
        manifest = RunManifest.model_validate(read_yaml(path))
    except ValidationError as exc:
        error_msg = f"运行清单校验失败: {exc}"
        logger.error(f"{path}: {error_msg}")
        raise ParseError(error_msg, path) from exc
    logger.info(f"读取运行清单 {path}")
    return manifest.resolved(path.parent)


def save_manifest(manifest: RunManifest, path: Union[str, Path]) -> Path:
    return write_yaml(manifest.model_dump(mode="json"), path)


__all__ = ['MANIFEST_NAME', 'InputPaths', 'RunManifest', 'load_manifest', 'save_manifest']
