"""
SPC 模块测试: 匹配提升、前后划分、损失与解析梯度
"""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from naive_reference import finite_difference_gradient, naive_spc_loss
from src.geometry.se3 import PoseSE3, project_to_so3
from src.spc.correspondence import (
    AnchorPointMap,
    Correspondence2D2D,
    CorrespondenceSet,
    Track,
    TrackSet,
    lift_correspondences,
)
from src.spc.loss import SpcConfig, evaluate_spc, partition_front_back, spc_gradient, spc_loss
from src.utils.errors import AllSkippedError, EmptyResultError, InputError, NegativeIndexError


def _mixed_problem(rng, K, n=40, back_fraction=0.3):
    """相机坐标系中 |z| ≥ 0.5 的随机点 (前后混合), 观测像素随机"""
    R = project_to_so3(Rotation.random(random_state=rng).as_matrix())
    T = rng.normal(size=3)
    pose = PoseSE3(R, T)
    q = np.column_stack([rng.uniform(-1.0, 1.0, n), rng.uniform(-1.0, 1.0, n), rng.uniform(0.5, 3.0, n)])
    q[rng.uniform(size=n) < back_fraction, 2] *= -1.0
    points = (q - T) @ R
    pixels = np.column_stack([rng.uniform(0, K.width, n), rng.uniform(0, K.height, n)])
    weights = rng.uniform(0.1, 1.0, n)
    return TrackSet(points, pixels, weights), pose


def _tiny_map():
    points = np.zeros((2, 3, 3))
    points[0, 0] = [1.0, 2.0, 3.0]
    points[1, 2] = [4.0, 5.0, 6.0]
    valid = np.zeros((2, 3), dtype=bool)
    valid[0, 0] = valid[1, 2] = True
    return AnchorPointMap(points, valid)


# ---------------------------------------------------------------- 提升

def test_lift_nearest_pixel():
    """测试提升取最近格点, 无效条目被丢弃并计数"""
    corrs = CorrespondenceSet.from_records([
        Correspondence2D2D(0, (0.4, 0.2), (10.0, 11.0)),
        Correspondence2D2D(0, (1.6, 0.5), (12.0, 13.0)),
        Correspondence2D2D(0, (1.0, 0.0), (14.0, 15.0)),
    ])
    tracks, n_dropped = lift_correspondences(corrs, [_tiny_map()])
    assert n_dropped == 1
    assert tracks.points.tolist() == [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]
    assert tracks.wrist_pixels.tolist() == [[10.0, 11.0], [12.0, 13.0]]
    assert tracks.weights.tolist() == [1.0, 1.0]


def test_lift_all_invalid():
    """测试全部落在无效条目时报 EmptyResultError"""
    corrs = CorrespondenceSet([0, 0], [[1.0, 0.0], [2.0, 0.0]], [[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(EmptyResultError):
        lift_correspondences(corrs, [_tiny_map()])


def test_lift_bad_view_and_pixel():
    """测试引用不存在的视角或像素越界时报输入错误"""
    with pytest.raises(InputError):
        lift_correspondences(CorrespondenceSet([1], [[0.0, 0.0]], [[0.0, 0.0]]), [_tiny_map()])
    with pytest.raises(InputError):
        lift_correspondences(CorrespondenceSet([0], [[2.6, 0.0]], [[0.0, 0.0]]), [_tiny_map()])


def test_negative_view_index():
    """测试负的锚点索引"""
    with pytest.raises(NegativeIndexError):
        CorrespondenceSet([0, -1], [[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [1.0, 1.0]])


def test_record_conversion():
    """测试记录类型与数组容器互转"""
    records = [Track((0.0, 1.0, 2.0), (3.0, 4.0), 0.5), Track((5.0, 6.0, 7.0), (8.0, 9.0), 1.0)]
    tracks = TrackSet.from_records(records)
    assert tracks.records() == records
    assert len(tracks.subset([1])) == 1
    corrs = CorrespondenceSet.from_records([Correspondence2D2D(2, (1.0, 2.0), (3.0, 4.0))])
    assert corrs.records() == [Correspondence2D2D(2, (1.0, 2.0), (3.0, 4.0))]


def test_trackset_validation():
    """测试权重必须位于 (0, 1], 坐标必须有限"""
    with pytest.raises(InputError):
        TrackSet([[0.0, 0.0, 1.0]], [[0.0, 0.0]], [0.0])
    with pytest.raises(InputError):
        TrackSet([[0.0, 0.0, 1.0]], [[0.0, 0.0]], [1.5])
    with pytest.raises(InputError):
        TrackSet([[0.0, np.nan, 1.0]], [[0.0, 0.0]])
    with pytest.raises(InputError):
        AnchorPointMap(np.zeros((2, 2, 3)), np.zeros((2, 3), dtype=bool))


# ---------------------------------------------------------------- 损失

def test_spc_config_validation():
    """测试两个权重不能同时为 0, 未知字段被拒绝"""
    with pytest.raises(ValidationError):
        SpcConfig(lambda_u=0.0, lambda_depth=0.0)
    with pytest.raises(ValidationError):
        SpcConfig(gamma=1.0)
    assert SpcConfig().lambda_depth == 0.1


def test_partition(K):
    """测试按深度划分前方、后方与跳过的点"""
    tracks = TrackSet([[0.0, 0.0, 2.0], [0.0, 0.0, -1.0], [0.3, 0.2, 0.0], [0.0, 0.0, 5e-7]],
                      np.zeros((4, 2)))
    front, back, skipped = partition_front_back(tracks, PoseSE3.identity())
    assert front.tolist() == [0]
    assert back.tolist() == [1]
    assert skipped.tolist() == [2, 3]
    b = spc_loss(tracks, PoseSE3.identity(), K)
    assert (b.n_front, b.n_back, b.n_skipped) == (1, 1, 2)
    front, _, skipped = partition_front_back(tracks, PoseSE3.identity(), z_eps=1e-7)
    assert front.tolist() == [0, 3]
    assert skipped.tolist() == [2]


def test_loss_matches_naive(K, rng):
    """测试向量化损失与逐点累加的参照实现一致"""
    for normalization in ("image_diagonal", "none"):
        cfg = SpcConfig(lambda_u=0.7, lambda_depth=0.3, normalization=normalization)
        for _ in range(10):
            tracks, pose = _mixed_problem(rng, K)
            expected = naive_spc_loss(tracks.points, tracks.wrist_pixels, tracks.weights,
                                      pose.rotation, pose.translation, K,
                                      lambda_u=0.7, lambda_depth=0.3, normalization=normalization)
            b = spc_loss(tracks, pose, K, cfg)
            assert b.l_proj == pytest.approx(expected, rel=1e-12)
            assert b.l_proj == pytest.approx(0.7 * b.l_u + 0.3 * b.l_depth, rel=1e-15)
            assert b.l_depth > 0 or b.n_back == 0


def test_loss_permutation_invariant(K, rng):
    """测试损失与轨迹顺序无关 (逐位相同)"""
    tracks, pose = _mixed_problem(rng, K, n=200)
    order = rng.permutation(len(tracks))
    a = spc_loss(tracks, pose, K)
    b = spc_loss(tracks.subset(order), pose, K)
    assert a == b


def test_duplicate_track_equals_double_weight(K, rng):
    """测试重复一条轨迹等价于把它的权重加倍 (两项损失与梯度)"""
    tracks, pose = _mixed_problem(rng, K, n=60)
    weights = rng.uniform(0.1, 0.5, len(tracks))
    tracks = TrackSet(tracks.points, tracks.wrist_pixels, weights)
    front, back, _ = partition_front_back(tracks, pose)
    picked = [int(front[0]), int(back[0])]

    doubled = weights.copy()
    doubled[picked] *= 2.0
    a = evaluate_spc(TrackSet(tracks.points, tracks.wrist_pixels, doubled), pose, K, SpcConfig(),
                     with_gradient=True)
    order = np.concatenate([np.arange(len(tracks)), picked])
    b = evaluate_spc(tracks.subset(order), pose, K, SpcConfig(), with_gradient=True)

    assert b.breakdown.l_u == pytest.approx(a.breakdown.l_u, rel=1e-12)
    assert b.breakdown.l_depth == pytest.approx(a.breakdown.l_depth, rel=1e-12)
    assert b.breakdown.l_proj == pytest.approx(a.breakdown.l_proj, rel=1e-12)
    np.testing.assert_allclose(b.gradient, a.gradient, rtol=1e-12, atol=1e-12 * np.abs(a.gradient).max())


def test_normalization_scale(K, rng):
    """测试 image_diagonal 归一化即除以 W² + H²"""
    tracks, pose = _mixed_problem(rng, K)
    plain = spc_loss(tracks, pose, K, SpcConfig(normalization="none"))
    scaled = spc_loss(tracks, pose, K, SpcConfig(normalization="image_diagonal"))
    assert scaled.l_u == pytest.approx(plain.l_u / K.diagonal_sq, rel=1e-12)
    assert scaled.l_depth == plain.l_depth


def test_empty_sets_contribute_zero(K):
    """测试空集合对应的项为 0"""
    front_only = TrackSet([[0.0, 0.0, 2.0]], [[319.5, 239.5]])
    b = spc_loss(front_only, PoseSE3.identity(), K)
    assert (b.l_u, b.l_depth, b.l_proj) == (0.0, 0.0, 0.0)
    back_only = TrackSet([[0.0, 0.0, -2.0]], [[0.0, 0.0]])
    b = spc_loss(back_only, PoseSE3.identity(), K)
    assert b.l_u == 0.0 and b.l_depth == 2.0 and b.l_proj == pytest.approx(0.2)


def test_all_skipped(K):
    """测试所有点都在 z_eps 以内时报 AllSkippedError"""
    tracks = TrackSet([[0.1, 0.0, 0.0], [0.0, 0.2, 1e-9]], np.zeros((2, 2)))
    with pytest.raises(AllSkippedError):
        spc_loss(tracks, PoseSE3.identity(), K)


def test_noiseless_ground_truth_is_zero(K, noiseless_frame):
    """测试无噪声匹配在真值位姿处损失恰为 0"""
    _, tracks, gt = noiseless_frame
    b = spc_loss(tracks, gt, K)
    assert b.l_proj == 0.0
    assert b.n_back == 0 and b.n_front == len(tracks)
    assert spc_gradient(tracks, gt, K).norm() == 0.0


# ---------------------------------------------------------------- 梯度

def test_gradient_matches_finite_differences(K, rng):
    """测试解析梯度与中心差分一致 (远离前后划分边界)"""
    for normalization in ("image_diagonal", "none"):
        cfg = SpcConfig(normalization=normalization)
        for _ in range(20):
            tracks, pose = _mixed_problem(rng, K)
            analytic = spc_gradient(tracks, pose, K, cfg).as_vector()
            numeric = finite_difference_gradient(tracks.points, tracks.wrist_pixels, tracks.weights, pose, K,
                                                 normalization=normalization)
            scale = max(np.max(np.abs(numeric)), 1e-12)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-5 * scale)


@pytest.mark.slow
def test_gradient_sweep(K):
    """验收: 1000 个随机 (场景, 位姿) 样本上解析梯度逐分量与中心差分一致"""
    rng = np.random.default_rng(2024)
    for i in range(1000):
        normalization = "image_diagonal" if i % 2 == 0 else "none"
        tracks, pose = _mixed_problem(rng, K)
        analytic = spc_gradient(tracks, pose, K, SpcConfig(normalization=normalization)).as_vector()
        numeric = finite_difference_gradient(tracks.points, tracks.wrist_pixels, tracks.weights, pose, K,
                                             normalization=normalization)
        scale = max(np.max(np.abs(numeric)), 1e-12)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-5 * scale)


def test_gradient_ignores_skipped(K, rng):
    """测试跳过的点对梯度没有贡献"""
    tracks, _ = _mixed_problem(rng, K)
    pose = PoseSE3.identity()
    q_tracks = TrackSet(np.vstack([tracks.points, [[0.3, 0.2, 0.0]]]),
                        np.vstack([tracks.wrist_pixels, [[5.0, 5.0]]]),
                        np.append(tracks.weights, 1.0))
    base = spc_gradient(tracks, pose, K).as_vector()
    with_skipped = spc_gradient(q_tracks, pose, K).as_vector()
    assert np.array_equal(base, with_skipped)


def test_gauss_newton_matrix(K, rng):
    """测试 Gauss-Newton 矩阵对称半正定"""
    tracks, pose = _mixed_problem(rng, K, back_fraction=0.0)
    H = evaluate_spc(tracks, pose, K, SpcConfig(), with_gauss_newton=True).gauss_newton
    np.testing.assert_allclose(H, H.T, atol=1e-12 * np.abs(H).max())
    assert np.linalg.eigvalsh(H).min() > -1e-10 * np.abs(H).max()
