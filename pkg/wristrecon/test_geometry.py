"""
几何模块测试: 刚体变换、回缩映射与针孔投影
"""
import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.geometry.camera import Intrinsics, project, round_half_up, transform_to_camera, unproject
from src.geometry.se3 import (
    PoseSE3,
    Twist6,
    compose,
    invert,
    look_at,
    orthonormality_error,
    project_to_so3,
    relative_to_anchor,
    retract,
    rodrigues,
    se3_exp,
)


def _random_pose(rng):
    R = Rotation.random(random_state=rng).as_matrix()
    return PoseSE3(project_to_so3(R), rng.normal(size=3))


def test_rodrigues_matches_scipy(rng):
    """测试 Rodrigues 公式与 scipy 旋转向量一致"""
    for _ in range(50):
        omega = rng.normal(size=3) * rng.uniform(0.0, 3.0)
        expected = Rotation.from_rotvec(omega).as_matrix()
        np.testing.assert_allclose(rodrigues(omega), expected, atol=1e-12)


def test_rodrigues_small_angle():
    """测试极小角度走二阶展开分支"""
    omega = np.array([1e-10, -2e-10, 3e-10])
    R = rodrigues(omega)
    np.testing.assert_allclose(R, Rotation.from_rotvec(omega).as_matrix(), atol=1e-15)
    assert np.array_equal(rodrigues(np.zeros(3)), np.eye(3))


def test_project_to_so3_fixes_reflection():
    """测试极分解总是返回 det = +1 的旋转"""
    M = np.diag([1.0, 1.0, -1.0]) + 1e-3
    R = project_to_so3(M)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
    assert orthonormality_error(R) < 1e-12


def test_pose_rejects_invalid_rotation():
    """测试非正交旋转与非有限值被拒绝"""
    with pytest.raises(ValueError):
        PoseSE3(np.diag([1.0, 1.0, 1.01]), np.zeros(3))
    with pytest.raises(ValueError):
        PoseSE3(np.eye(3), [0.0, np.nan, 0.0])
    with pytest.raises(ValueError):
        PoseSE3.from_row([1.0] * 11)


def test_pose_row_roundtrip(rng):
    """测试 12 个数的行表示与 4x4 矩阵表示"""
    pose = _random_pose(rng)
    assert np.array_equal(PoseSE3.from_row(pose.as_row()).as_row(), pose.as_row())
    assert PoseSE3.from_matrix(pose.as_matrix()).allclose(pose, atol=0.0)


def test_compose_and_invert(rng):
    """测试 compose(a, invert(a)) 为单位变换, compose 满足结合律"""
    a, b, c = (_random_pose(rng) for _ in range(3))
    assert compose(a, invert(a)).allclose(PoseSE3.identity(), atol=1e-12)
    assert compose(invert(a), a).allclose(PoseSE3.identity(), atol=1e-12)
    assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), atol=1e-12)

    p = rng.normal(size=3)
    direct = transform_to_camera(a, transform_to_camera(b, p))
    np.testing.assert_allclose(transform_to_camera(compose(a, b), p), direct, atol=1e-12)


def test_retract_is_left_perturbation(rng):
    """测试 retract(pose, ξ) = compose(se3_exp(ξ), pose)"""
    pose = _random_pose(rng)
    xi = rng.normal(size=6) * 0.1
    expected = compose(se3_exp(Twist6.from_vector(xi)), pose)
    moved = retract(pose, xi)
    assert moved.allclose(expected, atol=1e-12)
    assert orthonormality_error(moved.rotation) < 1e-12
    assert retract(pose, np.zeros(6)).allclose(pose, atol=1e-14)


def test_twist_vector_helpers():
    """测试切向量的展开、范数与缩放"""
    t = Twist6.from_vector([3.0, 0.0, 0.0, 0.0, 4.0, 0.0])
    assert t.norm() == 5.0
    assert np.array_equal(t.scaled(2.0).as_vector(), [6.0, 0.0, 0.0, 0.0, 8.0, 0.0])
    assert Twist6.zero().norm() == 0.0
    with pytest.raises(ValueError):
        Twist6([np.inf, 0.0, 0.0], np.zeros(3))


def test_look_at_points_forward():
    """测试 look_at 相机把目标放在光轴上"""
    center = np.array([2.0, 1.0, 1.5])
    pose = look_at(center, np.zeros(3))
    q = transform_to_camera(pose, np.zeros(3))
    np.testing.assert_allclose(q[:2], [0.0, 0.0], atol=1e-12)
    assert q[2] == pytest.approx(np.linalg.norm(center))
    np.testing.assert_allclose(pose.camera_center, center, atol=1e-12)


def test_look_at_straight_down():
    """测试视线与 up 向量平行时仍能构造相机"""
    pose = look_at([0.0, 0.0, 3.0], np.zeros(3))
    assert transform_to_camera(pose, np.zeros(3))[2] == pytest.approx(3.0)


def test_relative_to_anchor(rng):
    """测试相对锚点位姿: 锚点自身为单位变换, 锚点坐标系下的点坐标一致"""
    anchor = _random_pose(rng)
    wrist = _random_pose(rng)
    assert relative_to_anchor(anchor, anchor).allclose(PoseSE3.identity(), atol=1e-12)

    relative = relative_to_anchor(wrist, anchor)
    p_world = rng.normal(size=3)
    p_anchor = transform_to_camera(anchor, p_world)
    np.testing.assert_allclose(transform_to_camera(relative, p_anchor),
                               transform_to_camera(wrist, p_world), atol=1e-12)


def test_round_half_up():
    """测试像素取整: .5 向上取整"""
    cols, rows = round_half_up(np.array([[0.5, -0.5], [1.49, 2.5], [-0.51, 0.0]]))
    assert cols.tolist() == [1, 1, -1]
    assert rows.tolist() == [0, 3, 0]


def test_intrinsics_validation():
    """测试内参校验"""
    with pytest.raises(ValueError):
        Intrinsics(0.0, 500.0, 319.5, 239.5, 640, 480)
    with pytest.raises(ValueError):
        Intrinsics(500.0, 500.0, 640.0, 239.5, 640, 480)
    K = Intrinsics(500, 500, 319.5, 239.5, 640, 480)
    assert K.diagonal_sq == 640.0 ** 2 + 480.0 ** 2
    np.testing.assert_array_equal(K.matrix, [[500, 0, 319.5], [0, 500, 239.5], [0, 0, 1]])


def test_intrinsics_scaled(K):
    """测试按像素中心约定缩放内参"""
    half = K.scaled(320, 240)
    assert (half.fx, half.fy) == (250.0, 250.0)
    assert (half.cx, half.cy) == (159.5, 119.5)
    assert (half.width, half.height) == (320, 240)
    # 缩放后同一点的像素坐标满足 u' = (u + 0.5)·s − 0.5
    pose = look_at([0.0, -2.0, 0.5], np.zeros(3))
    p = np.array([0.1, 0.2, -0.1])
    u = project(K, pose, p)[0]
    u_half = project(half, pose, p)[0]
    np.testing.assert_allclose(u_half, (u + 0.5) * 0.5 - 0.5, atol=1e-12)


def test_project_unproject_roundtrip(K, rng):
    """测试投影与反投影互逆"""
    pose = look_at([1.0, -2.5, 1.0], np.zeros(3))
    p = rng.uniform(-0.5, 0.5, size=(100, 3))
    pixels, depth, valid = project(K, pose, p)
    assert valid.all()
    np.testing.assert_allclose(unproject(K, pose, pixels, depth), p, atol=1e-12)


def test_project_degenerate_depth(K):
    """测试深度接近 0 的点被标记为无效, 像素为 NaN; 相机后方的点照常投影"""
    pose = PoseSE3.identity()
    pixels, depth, valid = project(K, pose, np.array([[0.1, 0.1, 0.0], [0.1, 0.1, -1.0], [0.1, 0.1, 1e-7]]))
    assert valid.tolist() == [False, True, False]
    assert np.all(np.isnan(pixels[0])) and np.all(np.isnan(pixels[2]))
    np.testing.assert_allclose(pixels[1], [500.0 * 0.1 / -1.0 + 319.5, 500.0 * 0.1 / -1.0 + 239.5])
    assert depth.tolist() == [0.0, -1.0, 1e-7]


def test_project_batch_matches_single(K, rng):
    """测试批量投影与逐点投影逐位一致"""
    pose = _random_pose(rng)
    p = rng.normal(size=(37, 3)) + [0.0, 0.0, 5.0]
    batch = project(K, pose, p)[0]
    for k in range(len(p)):
        single = project(K, pose, p[k])[0]
        assert np.array_equal(single, batch[k], equal_nan=True)
