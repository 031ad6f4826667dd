"""
相机配置 (YAML)

cameras:
  - name: ext1
    role: anchor
    intrinsics: {fx: 500.0, fy: 500.0, cx: 319.5, cy: 239.5, width: 640, height: 480}
    extrinsics: {rotation: [9 个数, 按行], translation: [3 个数]}
resize_to: [320, 240]   # 可选，载入时按像素中心约定缩放内参
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..geometry.camera import Intrinsics
from ..geometry.se3 import PoseSE3
from ..utils.errors import InputError, IoFailureError, ParseError

logger = logging.getLogger(__name__)


class IntrinsicsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(gt=0)
    height: int = Field(gt=0)


class ExtrinsicsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rotation: List[float] = Field(min_length=9, max_length=9)
    translation: List[float] = Field(min_length=3, max_length=3)


class CameraEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    role: Literal["anchor", "wrist"]
    intrinsics: IntrinsicsModel
    extrinsics: Optional[ExtrinsicsModel] = None


class CameraConfig(BaseModel):
    """相机配置，未知字段一律拒绝"""

    model_config = ConfigDict(extra="forbid")

    cameras: List[CameraEntry]
    resize_to: Optional[Tuple[int, int]] = None

    def anchors(self) -> List[CameraEntry]:
        return [c for c in self.cameras if c.role == "anchor"]

    def wrist(self) -> CameraEntry:
        wrists = [c for c in self.cameras if c.role == "wrist"]
        if len(wrists) != 1:
            raise InputError(f"相机配置需要且只能有一个 wrist 相机, 实际 {len(wrists)} 个")
        return wrists[0]

    def intrinsics(self, entry: CameraEntry) -> Intrinsics:
        """内参；配置了 resize_to 时返回缩放后的内参"""
        try:
            K = Intrinsics(**entry.intrinsics.model_dump())
        except ValueError as exc:
            raise InputError(f"相机 '{entry.name}' 内参不合法: {exc}") from exc
        if self.resize_to is not None:
            K = K.scaled(*self.resize_to)
        return K

    def pose(self, entry: CameraEntry) -> PoseSE3:
        if entry.extrinsics is None:
            raise InputError(f"相机 '{entry.name}' 没有外参")
        try:
            return PoseSE3.from_row(list(entry.extrinsics.rotation) + list(entry.extrinsics.translation))
        except ValueError as exc:
            raise InputError(f"相机 '{entry.name}' 外参不合法: {exc}") from exc

    @classmethod
    def build(cls, anchors: List[Tuple[str, Intrinsics, PoseSE3]], wrist: Tuple[str, Intrinsics]) -> "CameraConfig":
        def intrinsics_model(K: Intrinsics) -> IntrinsicsModel:
            return IntrinsicsModel(fx=K.fx, fy=K.fy, cx=K.cx, cy=K.cy, width=K.width, height=K.height)

        entries = [
            CameraEntry(
                name=name,
                role="anchor",
                intrinsics=intrinsics_model(K),
                extrinsics=ExtrinsicsModel(
                    rotation=pose.rotation.reshape(9).tolist(),
                    translation=pose.translation.tolist(),
                ),
            )
            for name, K, pose in anchors
        ]
        entries.append(CameraEntry(name=wrist[0], role="wrist", intrinsics=intrinsics_model(wrist[1])))
        return cls(cameras=entries)


def _yaml_error(exc: yaml.YAMLError, path: Path) -> ParseError:
    mark = getattr(exc, "problem_mark", None)
    line = mark.line + 1 if mark is not None else None
    return ParseError(f"YAML 格式错误: {getattr(exc, 'problem', exc)}", path, line=line)


def read_yaml(path: Union[str, Path]) -> dict:
    """读取 YAML 映射，格式错误转为 ParseError"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise _yaml_error(exc, path) from exc
    except OSError as exc:
        raise ParseError(f"无法读取文件: {exc}", path) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("顶层必须是映射", path, line=1)
    return data


def write_yaml(data: dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, sort_keys=True, allow_unicode=True)
    except OSError as exc:
        error_msg = f"写入 YAML 失败: {path}: {exc}"
        logger.error(error_msg)
        raise IoFailureError(error_msg) from exc
    return path


def load_camera_config(path: Union[str, Path]) -> CameraConfig:
    """
    Raises:
        ParseError: YAML 格式错误或字段校验失败
    """
    path = Path(path)
    try:
        config = CameraConfig.model_validate(read_yaml(path))
    except ValidationError as exc:
        error_msg = f"相机配置校验失败: {exc}"
        logger.error(f"{path}: {error_msg}")
        raise ParseError(error_msg, path) from exc
    logger.info(f"读取相机配置 {path}: {len(config.cameras)} 个相机")
    return config


def save_camera_config(config: CameraConfig, path: Union[str, Path]) -> Path:
    return write_yaml(config.model_dump(mode="json", exclude_none=True), path)


__all__ = [
    'IntrinsicsModel', 'ExtrinsicsModel', 'CameraEntry', 'CameraConfig',
    'read_yaml', 'write_yaml', 'load_camera_config', 'save_camera_config',
]
