"""
配置测试: 分节配置读写、环境变量覆盖与日志初始化
"""
import logging

from src.config import (
    SCENE_CONFIG,
    SPC_CONFIG,
    AppSettings,
    get_config,
    setup_logging,
    update_config,
)
from src.spc.loss import SpcConfig


def test_get_config():
    """测试按节读取配置"""
    assert get_config("spc") is SPC_CONFIG
    assert get_config("missing") == {}
    assert set(get_config()) >= {"geometry", "spc", "solver", "splat", "scene", "conditioning", "log"}


def test_update_config(monkeypatch):
    """测试更新配置项, 未知节返回 False"""
    monkeypatch.setitem(SCENE_CONFIG, "max_rejections", SCENE_CONFIG["max_rejections"])
    assert update_config("scene", "max_rejections", 3)
    assert get_config("scene")["max_rejections"] == 3
    assert not update_config("nope", "key", 1)


def test_models_take_defaults_from_config():
    """测试配置模型的默认值来自 config.py"""
    cfg = SpcConfig()
    assert cfg.lambda_u == SPC_CONFIG["lambda_u"]
    assert cfg.lambda_depth == SPC_CONFIG["lambda_depth"]
    assert cfg.normalization == SPC_CONFIG["normalization"]


def test_app_settings_from_environment(monkeypatch):
    """测试 WRISTRECON_ 前缀的环境变量覆盖默认值"""
    monkeypatch.setenv("WRISTRECON_THREADS", "6")
    monkeypatch.setenv("WRISTRECON_LOG_LEVEL", "DEBUG")
    settings = AppSettings()
    assert settings.threads == 6
    assert settings.log_level == "DEBUG"


def test_setup_logging_with_file(tmp_path):
    """测试日志同时输出到轮转文件"""
    log_file = tmp_path / "logs" / "run.log"
    root = logging.getLogger()
    old_level = root.level
    try:
        setup_logging("debug", log_file)
        assert root.level == logging.DEBUG
        logging.getLogger("src.test").debug("写入日志文件")
        for handler in root.handlers:
            handler.flush()
        text = log_file.read_text(encoding="utf-8")
        assert "src.test - DEBUG - 写入日志文件" in text
    finally:
        root.setLevel(old_level)
        for handler in list(root.handlers):
            if not type(handler).__module__.startswith("_pytest"):
                root.removeHandler(handler)
                handler.close()
