"""
命令行端到端测试: synth -> solve-pose -> render-condition -> eval, 退出码与线程无关性
"""
import json
import logging

import numpy as np
import pytest
from click.testing import CliRunner

import src.cli_io.cli as cli_module
from src.cli_io.cli import cli
from src.cli_io.metrics_io import read_key_values
from src.cli_io.tensor_io import load_tensors, save_tensors
from src.config import APP_CONFIG, SCENE_CONFIG
from src.utils.errors import NonFiniteError

SMALL_SCENE = ["--points", "4000", "--frames", "3", "--correspondences", "300"]


@pytest.fixture(autouse=True)
def reset_logging():
    """CliRunner 结束后关闭其输出流, 清掉入口处安装的日志处理器"""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if not type(handler).__module__.startswith("_pytest"):
            root.removeHandler(handler)


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    return runner.invoke(cli, args, catch_exceptions=False)


def _synth(runner, out_dir, *extra):
    result = _invoke(runner, ["--out", str(out_dir), "--seed", "7", "synth", *SMALL_SCENE, *extra])
    assert result.exit_code == 0, result.output
    return out_dir / "manifest.yaml"


def test_version(runner):
    """测试 --version"""
    result = _invoke(runner, ["--version"])
    assert result.exit_code == 0
    assert APP_CONFIG["version"] in result.output


def test_end_to_end(runner, tmp_path):
    """测试完整流程: 无噪声合成场景的位姿与条件图都被精确复原"""
    manifest = _synth(runner, tmp_path / "scene")
    for command in ("solve-pose", "render-condition", "eval"):
        result = _invoke(runner, ["--config", str(manifest), command])
        assert result.exit_code == 0, result.output

    results = tmp_path / "scene" / "results"
    assert (results / "trajectory_est.txt").is_file()
    assert (results / "solve_report.txt").is_file()
    for t in range(3):
        assert (results / "condition_maps" / f"frame_{t:04d}.depth.pfm").is_file()

    metrics = read_key_values(results / "metrics.txt")
    assert float(metrics["rotation_deg"]) < 1e-3
    assert float(metrics["translation"]) < 1e-3
    assert float(metrics["psnr_mean"]) >= 30.0
    assert float(metrics["ssim_mean"]) >= 0.95
    assert float(metrics["reprojection_rmse"]) < 1e-3
    assert metrics["fvd"] == "unavailable"
    assert metrics["lpips"] == "unavailable"

    report = json.loads((results / "metrics.json").read_text())
    assert len(report["per_frame"]["rotation_deg"]) == 3
    solve = read_key_values(results / "solve_report.txt")
    assert solve["frames"] == "3"
    assert solve["n_back_max"] == "0"


def test_relative_to_anchor(runner, tmp_path):
    """测试额外输出相对锚点的轨迹, 锚点索引越界时退出码为 2"""
    manifest = _synth(runner, tmp_path / "scene")
    result = _invoke(runner, ["--config", str(manifest), "solve-pose", "--relative-to-anchor", "1"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "scene" / "results" / "trajectory_est_anchor1.txt").is_file()

    result = _invoke(runner, ["--config", str(manifest), "solve-pose", "--relative-to-anchor", "5"])
    assert result.exit_code == 2


def _tree(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_thread_count_does_not_change_outputs(runner, tmp_path):
    """测试 --threads 1、4、8 下 synth、solve-pose 与 render-condition 的输出逐字节相同"""
    trees = []
    for threads in ("1", "4", "8"):
        out_dir = tmp_path / f"t{threads}"
        result = _invoke(runner, ["--out", str(out_dir), "--seed", "3", "--threads", threads, "synth", *SMALL_SCENE])
        assert result.exit_code == 0, result.output
        for command in ("solve-pose", "render-condition"):
            result = _invoke(runner, ["--config", str(out_dir / "manifest.yaml"), "--threads", threads, command])
            assert result.exit_code == 0, result.output
        inputs = ["cloud.ply", "cameras.yaml", "trajectory_gt.txt", "correspondences/frame_0002.txt",
                  "anchor_maps/anchor_0.wrtc", "gt_condition_maps/frame_0001.png"]
        trees.append(({name: (out_dir / name).read_bytes() for name in inputs}, _tree(out_dir / "results")))

    first_inputs, first_results = trees[0]
    assert "condition_maps/frame_0002.png" in first_results
    assert "condition_maps/frame_0002.depth.pfm" in first_results
    assert "solve_report.json" in first_results
    for inputs, results in trees[1:]:
        assert inputs == first_inputs
        assert results.keys() == first_results.keys()
        for name in first_results:
            assert results[name] == first_results[name], name


def test_progress_bar_on_request(runner, tmp_path):
    """测试 --progress 打开逐帧求解进度条, 默认不显示"""
    manifest = _synth(runner, tmp_path / "scene")
    result = _invoke(runner, ["--config", str(manifest), "solve-pose"])
    assert result.exit_code == 0, result.output
    assert "逐帧求解" not in result.output
    result = _invoke(runner, ["--config", str(manifest), "--progress", "solve-pose"])
    assert result.exit_code == 0, result.output
    assert "逐帧求解" in result.output


def test_missing_inputs_exit_code(runner, tmp_path):
    """测试缺少输入时退出码为 2"""
    result = _invoke(runner, ["--out", str(tmp_path), "solve-pose"])
    assert result.exit_code == 2
    result = _invoke(runner, ["--out", str(tmp_path), "eval"])
    assert result.exit_code == 2


def test_corrupt_input_exit_code(runner, tmp_path):
    """测试匹配文件损坏时退出码为 2"""
    manifest = _synth(runner, tmp_path / "scene")
    (tmp_path / "scene" / "correspondences" / "frame_0001.txt").write_text("0, 1, 2\n")
    result = _invoke(runner, ["--config", str(manifest), "solve-pose"])
    assert result.exit_code == 2
    assert "frame_0001.txt" in result.output


def test_invalid_parameter_exit_code(runner, tmp_path):
    """测试参数校验失败时退出码为 2"""
    result = _invoke(runner, ["--out", str(tmp_path), "synth", "--outlier-rate", "1.5"])
    assert result.exit_code == 2


def test_infeasible_scene_exit_code(runner, tmp_path, monkeypatch):
    """测试场景不可行时退出码为 4"""
    monkeypatch.setitem(SCENE_CONFIG, "min_anchor_visibility", 1.01)
    result = _invoke(runner, ["--out", str(tmp_path), "synth", "--points", "200"])
    assert result.exit_code == 4


def test_numerical_failure_exit_code(runner, tmp_path, monkeypatch):
    """测试数值失败时退出码为 3"""
    manifest = _synth(runner, tmp_path / "scene")

    def broken(*args, **kwargs):
        raise NonFiniteError("损失非有限")

    monkeypatch.setattr(cli_module, "multi_start", broken)
    result = _invoke(runner, ["--config", str(manifest), "solve-pose"])
    assert result.exit_code == 3


def test_tokens_command(runner, tmp_path):
    """测试 tokens 子命令输出 token 容器与形状报告"""
    rng = np.random.default_rng(0)
    features = tmp_path / "features.wrtc"
    save_tensors({"features": rng.normal(size=(2, 3, 16)), "text": rng.normal(size=(4, 8))}, features)
    out_dir = tmp_path / "out"
    result = _invoke(runner, ["--out", str(out_dir), "tokens", "--features", str(features)])
    assert result.exit_code == 0, result.output

    tokens = load_tensors(out_dir / "tokens.wrtc")
    assert tokens["clip_tokens"].shape == (6, 64)
    assert tokens["text_tokens"].shape == (4, 64)
    report = json.loads((out_dir / "token_report.json").read_text())
    assert report["n_tokens"] == 10

    oversized = tmp_path / "big.wrtc"
    save_tensors({"features": np.zeros((2, 300, 4))}, oversized)
    result = _invoke(runner, ["--out", str(out_dir), "tokens", "--features", str(oversized)])
    assert result.exit_code == 2


@pytest.mark.slow
def test_end_to_end_full_length(runner, tmp_path):
    """验收: 16 帧默认场景的完整流程"""
    out_dir = tmp_path / "scene"
    result = _invoke(runner, ["--out", str(out_dir), "--seed", "1", "--threads", "4", "synth"])
    assert result.exit_code == 0, result.output
    manifest = out_dir / "manifest.yaml"
    for command in ("solve-pose", "render-condition", "eval"):
        result = _invoke(runner, ["--config", str(manifest), command])
        assert result.exit_code == 0, result.output
    metrics = read_key_values(out_dir / "results" / "metrics.txt")
    assert float(metrics["rotation_deg"]) < 1e-3
    assert float(metrics["psnr_mean"]) >= 30.0
