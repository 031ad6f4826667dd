"""
测试用的朴素参照实现

逐点、逐像素的直白循环，只依赖 numpy/scipy 与库里的值类型 (PoseSE3, Intrinsics, PointCloud)，
用来和向量化实现逐位或按容差比对。
"""
import math

import numpy as np
from scipy.spatial.transform import Rotation


def _camera_point(R, T, p):
    """R·p + T，逐分量按 x, y, z 列顺序累加"""
    return [
        p[0] * R[k][0] + p[1] * R[k][1] + p[2] * R[k][2] + T[k]
        for k in range(3)
    ]


def naive_render(xyz, rgb, pose, K, radius_px=1, depth_test_eps=1e-9, z_eps=1e-6):
    """
    双重循环渲染器: 先收集每个像素上的候选 (深度, 编号)，再逐像素挑选获胜点

    Returns:
        (rgb (H, W, 3), depth (H, W), mask (H, W))
    """
    R = pose.rotation.tolist()
    T = pose.translation.tolist()
    H, W = K.height, K.width
    candidates = {}
    for index, p in enumerate(np.asarray(xyz, dtype=np.float64).tolist()):
        q = _camera_point(R, T, p)
        z = q[2]
        if not z > z_eps:
            continue
        u = K.fx * q[0] / z + K.cx
        v = K.fy * q[1] / z + K.cy
        col = math.floor(u + 0.5)
        row = math.floor(v + 0.5)
        if not (0 <= col < W and 0 <= row < H):
            continue
        for dr in range(-radius_px, radius_px + 1):
            for dc in range(-radius_px, radius_px + 1):
                r, c = row + dr, col + dc
                if 0 <= r < H and 0 <= c < W:
                    candidates.setdefault((r, c), []).append((z, index))

    out_rgb = np.zeros((H, W, 3))
    out_depth = np.zeros((H, W))
    out_mask = np.zeros((H, W), dtype=bool)
    colors = np.ones((len(xyz), 3)) if rgb is None else np.asarray(rgb, dtype=np.float64)
    for (r, c), entries in candidates.items():
        nearest = min(z for z, _ in entries)
        winner = min(i for z, i in entries if z <= nearest + depth_test_eps)
        out_rgb[r, c] = colors[winner]
        out_depth[r, c] = [z for z, i in entries if i == winner][0]
        out_mask[r, c] = True
    return out_rgb, out_depth, out_mask


def naive_spc_loss(points, pixels, weights, R, T, K, lambda_u=1.0, lambda_depth=0.1,
                   normalization="image_diagonal", z_eps=1e-6):
    """逐条轨迹累加的 SPC 损失，R、T 为普通数组 (不要求正交)"""
    R = np.asarray(R, dtype=np.float64).tolist()
    T = np.asarray(T, dtype=np.float64).tolist()
    norm = float(K.width ** 2 + K.height ** 2) if normalization == "image_diagonal" else 1.0
    front_terms, front_weights = [], []
    back_terms, back_weights = [], []
    for p, obs, w in zip(np.asarray(points).tolist(), np.asarray(pixels).tolist(), np.asarray(weights).tolist()):
        q = _camera_point(R, T, p)
        z = q[2]
        if z > z_eps:
            u = K.fx * q[0] / z + K.cx
            v = K.fy * q[1] / z + K.cy
            front_terms.append(w * (((u - obs[0]) ** 2 + (v - obs[1]) ** 2) / norm))
            front_weights.append(w)
        elif z < -z_eps:
            back_terms.append(w * z)
            back_weights.append(w)
    l_u = math.fsum(front_terms) / math.fsum(front_weights) if front_terms else 0.0
    l_depth = -math.fsum(back_terms) / math.fsum(back_weights) if back_terms else 0.0
    return lambda_u * l_u + lambda_depth * l_depth


def perturbed(pose, xi):
    """左乘扰动后的 (R, T)，旋转由 scipy 的旋转向量给出"""
    xi = np.asarray(xi, dtype=np.float64)
    dR = Rotation.from_rotvec(xi[:3]).as_matrix()
    return dR @ pose.rotation, dR @ pose.translation + xi[3:]


def finite_difference_gradient(points, pixels, weights, pose, K, h=1e-6, **loss_kwargs):
    """L_proj 对左乘扰动切向量的中心差分梯度"""
    grad = np.zeros(6)
    for k in range(6):
        step = np.zeros(6)
        step[k] = h
        plus = naive_spc_loss(points, pixels, weights, *perturbed(pose, step), K, **loss_kwargs)
        minus = naive_spc_loss(points, pixels, weights, *perturbed(pose, -step), K, **loss_kwargs)
        grad[k] = (plus - minus) / (2.0 * h)
    return grad


def quaternion_angle_deg(Ra, Rb):
    """两个旋转之间的测地角 (度)，经四元数计算"""
    x, y, z, w = (Rotation.from_matrix(Ra).inv() * Rotation.from_matrix(Rb)).as_quat()
    return math.degrees(2.0 * math.atan2(math.sqrt(x * x + y * y + z * z), abs(w)))


def _gaussian_weights(size=11, sigma=1.5):
    center = (size - 1) / 2.0
    g = [math.exp(-((i - center) ** 2) / (2.0 * sigma ** 2)) for i in range(size)]
    total = sum(g)
    g = [v / total for v in g]
    return [[gi * gj for gj in g] for gi in g]


def naive_ssim(a, b, size=11, sigma=1.5, k1=0.01, k2=0.03):
    """单通道 SSIM，逐窗口逐像素累加"""
    a = np.asarray(a, dtype=np.float64).tolist()
    b = np.asarray(b, dtype=np.float64).tolist()
    window = _gaussian_weights(size, sigma)
    c1, c2 = k1 ** 2, k2 ** 2
    H, W = len(a), len(a[0])
    scores = []
    for top in range(H - size + 1):
        for left in range(W - size + 1):
            mx = my = sxx = syy = sxy = 0.0
            for i in range(size):
                for j in range(size):
                    g = window[i][j]
                    x = a[top + i][left + j]
                    y = b[top + i][left + j]
                    mx += g * x
                    my += g * y
                    sxx += g * x * x
                    syy += g * y * y
                    sxy += g * x * y
            vx = sxx - mx * mx
            vy = syy - my * my
            cov = sxy - mx * my
            scores.append(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return sum(scores) / len(scores)
