from typing import Optional
import numpy as np
from src.mesh.triangle_mesh import TriangleMesh
from src.fem.fields import AnalyticFunction, DiscreteField
from src.fem.quadrature import QuadratureRule, quadrature_rule, physical_points, integrate

# 误差与停止准则统一使用五次公式，保证两种格式的数值可比
NORM_DEGREE = 5


def _squared(values: np.ndarray, is_vector: bool) -> np.ndarray:
    return np.einsum("tqd,tqd->tq", values, values) if is_vector else values * values


def l2_norm_squared(mesh: TriangleMesh, field: DiscreteField, rule: Optional[QuadratureRule] = None) -> float:
    rule = rule or quadrature_rule(NORM_DEGREE)
    field.check(mesh)
    return integrate(mesh, _squared(field.evaluate(mesh, rule), field.is_vector), rule)


def l2_norm(mesh: TriangleMesh, field: DiscreteField, rule: Optional[QuadratureRule] = None) -> float:
    """离散场的 L²(Ω) 范数"""
    return float(np.sqrt(l2_norm_squared(mesh, field, rule)))


def exact_values(mesh: TriangleMesh, exact: AnalyticFunction, rule: QuadratureRule) -> np.ndarray:
    pts = physical_points(mesh, rule)
    return np.asarray(exact(pts[..., 0], pts[..., 1]), dtype=float)


def l2_error_squared(
    mesh: TriangleMesh,
    field: DiscreteField,
    exact: AnalyticFunction,
    rule: Optional[QuadratureRule] = None,
    shift: float = 0.0,
) -> float:
    """‖field + shift - exact‖²，shift 只对标量场有意义（压力均值平移）"""
    rule = rule or quadrature_rule(NORM_DEGREE)
    field.check(mesh)
    diff = field.evaluate(mesh, rule) + shift - exact_values(mesh, exact, rule)
    return integrate(mesh, _squared(diff, field.is_vector), rule)


def l2_error_vs_exact(
    mesh: TriangleMesh,
    field: DiscreteField,
    exact: AnalyticFunction,
    rule: Optional[QuadratureRule] = None,
) -> float:
    """离散场与解析函数之差的 L²(Ω) 范数"""
    return float(np.sqrt(l2_error_squared(mesh, field, exact, rule)))


def exact_norm_squared(
    mesh: TriangleMesh, exact: AnalyticFunction, is_vector: bool, rule: Optional[QuadratureRule] = None
) -> float:
    rule = rule or quadrature_rule(NORM_DEGREE)
    return integrate(mesh, _squared(exact_values(mesh, exact, rule), is_vector), rule)


def mean_value(mesh: TriangleMesh, field: DiscreteField, rule: Optional[QuadratureRule] = None) -> float:
    """标量场在 Ω 上的平均值"""
    rule = rule or quadrature_rule(NORM_DEGREE)
    return integrate(mesh, field.evaluate(mesh, rule), rule) / float(np.sum(mesh.areas))
