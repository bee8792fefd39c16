"""
三角形与线段上的 Gauss 求积公式。

三角形求积点用重心坐标 (λ0, λ1, λ2) 给出，权重之和为 1，
因此 ∫_T g dx ≈ |T| Σ_q w_q g(x_q)。七点公式为 Dunavant/Hammer-Stroud
的五次精确公式，权重与坐标取闭式值。
"""

from dataclasses import dataclass
from functools import lru_cache
import numpy as np
from src.mesh.triangle_mesh import TriangleMesh

SUPPORTED_DEGREES = (1, 2, 5)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    degree: int
    points: np.ndarray   # (Q, 3) 重心坐标
    weights: np.ndarray  # (Q,)

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class EdgeRule:
    """[0, 1] 上的求积，x(s) = (1-s) a + s b"""

    points: np.ndarray
    weights: np.ndarray


def _orbit(a: float, b: float) -> np.ndarray:
    return np.array([[a, b, b], [b, a, b], [b, b, a]])


@lru_cache(maxsize=None)
def quadrature_rule(degree: int) -> QuadratureRule:
    """返回对 degree 次多项式精确的三角形求积公式

    Raises:
        ValueError: 不支持的精度
    """
    if degree == 1:
        points = np.array([[1.0, 1.0, 1.0]]) / 3.0
        weights = np.array([1.0])
    elif degree == 2:
        points = _orbit(2.0 / 3.0, 1.0 / 6.0)
        weights = np.full(3, 1.0 / 3.0)
    elif degree == 5:
        s15 = np.sqrt(15.0)
        a1, b1 = (9.0 - 2.0 * s15) / 21.0, (6.0 + s15) / 21.0
        a2, b2 = (9.0 + 2.0 * s15) / 21.0, (6.0 - s15) / 21.0
        w1, w2 = (155.0 + s15) / 1200.0, (155.0 - s15) / 1200.0
        points = np.vstack([np.full((1, 3), 1.0 / 3.0), _orbit(a1, b1), _orbit(a2, b2)])
        weights = np.array([0.225, w1, w1, w1, w2, w2, w2])
    else:
        raise ValueError(f"不支持的求积精度: {degree}，可选 {SUPPORTED_DEGREES}")
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(degree=degree, points=points, weights=weights)


@lru_cache(maxsize=None)
def edge_gauss_rule() -> EdgeRule:
    """三点 Gauss-Legendre 公式（五次精确），权重之和为 1"""
    r = 0.5 * np.sqrt(3.0 / 5.0)
    points = np.array([0.5 - r, 0.5, 0.5 + r])
    weights = np.array([5.0, 8.0, 5.0]) / 18.0
    points.setflags(write=False)
    weights.setflags(write=False)
    return EdgeRule(points=points, weights=weights)


# 以网格为键的缓存只保留最近几套网格，N=200 的表很大
MESH_CACHE_SIZE = 4


@lru_cache(maxsize=MESH_CACHE_SIZE)
def physical_points(mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
    """将求积点映射到每个物理三角形，返回 (T, Q, 2)"""
    pts = np.einsum("qk,tkd->tqd", rule.points, mesh.tri_coords)
    pts.setflags(write=False)
    return pts


def element_integrals(mesh: TriangleMesh, values: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """逐单元积分，values 形状为 (T, Q)，返回 (T,)"""
    return mesh.areas * (values @ rule.weights)


def integrate(mesh: TriangleMesh, values: np.ndarray, rule: QuadratureRule) -> float:
    """全域积分；np.sum 按编号顺序成对求和，结果可复现"""
    return float(np.sum(element_integrals(mesh, values, rule)))


def integrate_function(mesh: TriangleMesh, fn, rule: QuadratureRule) -> float:
    """对解析标量函数 fn(x, y) 在 Ω 上积分"""
    pts = physical_points(mesh, rule)
    return integrate(mesh, np.asarray(fn(pts[..., 0], pts[..., 1]), dtype=float), rule)


def edge_points(mesh: TriangleMesh, edges: np.ndarray, rule: EdgeRule) -> np.ndarray:
    """边上求积点坐标 (len(edges), Q, 2)，参数方向为低编号顶点 -> 高编号顶点"""
    a = mesh.vertices[mesh.edges[edges, 0]]
    b = mesh.vertices[mesh.edges[edges, 1]]
    s = rule.points[None, :, None]
    return (1.0 - s) * a[:, None, :] + s * b[:, None, :]
