"""
最低阶 Raviart-Thomas (RT0) 单元。

局部基函数 φ_k(x) = σ_k |e_k| / (2|T|) · (x - p_k)，p_k 为与局部边 k 相对的顶点，
σ_k 为三角形在该边上的方向符号。φ_k 在边 k 上的法向分量恒为 σ_k，
在另两条边上为 0；div φ_k = σ_k |e_k| / |T| 为常数。
自由度因此是边上的法向通量密度 u·n_e。
"""

from functools import lru_cache
from typing import Tuple
import numpy as np
from src.mesh.triangle_mesh import TriangleMesh
from src.fem.quadrature import MESH_CACHE_SIZE, QuadratureRule, physical_points

Geometry = Tuple[float, np.ndarray, np.ndarray]


def _local_edge_length(coords: np.ndarray, k: int) -> float:
    return float(np.linalg.norm(coords[(k + 2) % 3] - coords[(k + 1) % 3]))


def rt0_basis_eval(geometry: Geometry, local_edge: int, point: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """在重心坐标 point 处求局部基函数 φ_{local_edge} 的值

    Args:
        geometry: triangle_geometry 返回的 (面积, 顶点坐标, 重心坐标梯度)
        local_edge: 局部边编号 0..2
        point: 重心坐标 (3,)
        sign: 方向符号 σ

    Raises:
        ValueError: 三角形退化
    """
    area, coords, _ = geometry
    if not area > 0.0:
        raise ValueError(f"退化三角形，面积为 {area}")
    if local_edge not in (0, 1, 2):
        raise IndexError(f"局部边编号越界: {local_edge}")
    x = np.asarray(point, dtype=float) @ coords
    scale = sign * _local_edge_length(coords, local_edge) / (2.0 * area)
    return scale * (x - coords[local_edge])


def rt0_basis_divergence(geometry: Geometry, local_edge: int, sign: float = 1.0) -> float:
    area, coords, _ = geometry
    if not area > 0.0:
        raise ValueError(f"退化三角形，面积为 {area}")
    return sign * _local_edge_length(coords, local_edge) / area


def local_edge_lengths(mesh: TriangleMesh) -> np.ndarray:
    """(T, 3) 每个三角形局部边长"""
    return mesh.edge_lengths[mesh.tri_edges]


def rt0_divergences(mesh: TriangleMesh) -> np.ndarray:
    """(T, 3) 局部基函数的散度 σ_k |e_k| / |T|"""
    return mesh.tri_signs * local_edge_lengths(mesh) / mesh.areas[:, None]


@lru_cache(maxsize=MESH_CACHE_SIZE)
def rt0_tabulate(mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
    """所有局部基函数在求积点上的值，形状 (T, 3, Q, 2)"""
    pts = physical_points(mesh, rule)
    scale = mesh.tri_signs * local_edge_lengths(mesh) / (2.0 * mesh.areas[:, None])
    phi = scale[:, :, None, None] * (pts[:, None, :, :] - mesh.tri_coords[:, :, None, :])
    phi.setflags(write=False)
    return phi


def eval_rt0(mesh: TriangleMesh, values: np.ndarray, t: int, point: np.ndarray) -> np.ndarray:
    """RT0 场在三角形 t 内重心坐标 point 处的值"""
    if not 0 <= t < mesh.n_triangles:
        raise IndexError(f"三角形编号越界: {t}")
    coords = mesh.tri_coords[t]
    geometry = (float(mesh.areas[t]), coords, mesh.grads[t])
    result = np.zeros(2)
    for k in range(3):
        coefficient = values[mesh.tri_edges[t, k]]
        if coefficient != 0.0:
            result += coefficient * rt0_basis_eval(geometry, k, point, mesh.tri_signs[t, k])
    return result
