"""
人工解算例目录。

四个算例都取 μ = ρ = 1、K = I：Ex1FA/Ex2FA 给法向通量边界条件（格式一），
Ex1SA/Ex2SA 给齐次压力边界条件（格式二）。f 由 u + β|u|u + ∇p 的闭式拼出，
∇p 为手工求导结果，由 consistency_check 用复步长微分独立校验。
KepsCase 没有解析解：f = 0，b = 1，渗透率在子区域内为 ε_K。
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional
import numpy as np
from src.mesh.triangle_mesh import Side, build_unit_square_mesh, boundary_edges_on_side
from src.fem.quadrature import quadrature_rule, edge_gauss_rule, edge_points, integrate_function
from src.fem.nonlinearity import forchheimer_drag
from src.cases.permeability import PermeabilityField
from src.models.experiment_models import ConsistencyReport
from src.utils.log import get_logger

logger = get_logger(__name__)

ScalarFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
VectorFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

CASE_NAMES = ("Ex1FA", "Ex2FA", "Ex1SA", "Ex2SA", "KepsCase")
SCHEME_OF_CASE = {
    "Ex1FA": "gradp",
    "Ex2FA": "gradp",
    "Ex1SA": "mixed",
    "Ex2SA": "mixed",
    "KepsCase": "mixed",
}

_COMPLEX_STEP = 1e-30


def _zeros(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def _vector(a, b):
    a, b = np.broadcast_arrays(a, b)
    return np.stack([a, b], axis=-1)


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    name: str
    scheme: str
    gamma: float
    beta: float
    b: ScalarFunction
    permeability: PermeabilityField = field(default_factory=PermeabilityField.identity)
    exact_u: Optional[VectorFunction] = None
    exact_p: Optional[ScalarFunction] = None
    grad_p: Optional[VectorFunction] = None
    # 格式一的法向通量 g_u = u·n，按边界给出
    boundary_flux: Dict[Side, ScalarFunction] = field(default_factory=dict)
    mu: float = 1.0
    rho: float = 1.0

    @property
    def has_exact(self) -> bool:
        return self.exact_u is not None and self.exact_p is not None

    def f(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """f = (μ/ρ)K⁻¹u + (β/ρ)|u|u + ∇p；无解析解时 f = 0"""
        if self.exact_u is None or self.grad_p is None:
            return _vector(_zeros(x, y), _zeros(x, y))
        u = self.exact_u(x, y)
        kinv = self.permeability.inverse_at(x, y)[..., None]
        return (
            self.mu / self.rho * kinv * u
            + self.beta / self.rho * forchheimer_drag(u)
            + self.grad_p(x, y)
        )

    def darcy_f(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """β = 0 时的右端 (μ/ρ)K⁻¹u + ∇p，Darcy 初值问题用这份数据"""
        if self.exact_u is None or self.grad_p is None:
            return _vector(_zeros(x, y), _zeros(x, y))
        kinv = self.permeability.inverse_at(x, y)[..., None]
        return self.mu / self.rho * kinv * self.exact_u(x, y) + self.grad_p(x, y)

    def flux(self, side: Side) -> ScalarFunction:
        if side not in self.boundary_flux:
            raise ValueError(f"算例 {self.name} 没有 {side.value} 上的通量数据")
        return self.boundary_flux[side]


def _ex1_velocity(gamma: float) -> VectorFunction:
    def u(x, y):
        return gamma * _vector(np.exp(x) * np.sin(np.pi * y), np.exp(x) * np.cos(np.pi * y) / np.pi)

    return u


def _ex2_velocity(gamma: float) -> VectorFunction:
    def u(x, y):
        return gamma * _vector(x * np.exp(np.pi * y), y * np.exp(np.pi * x))

    return u


def _ex2_source(gamma: float) -> ScalarFunction:
    def b(x, y):
        return gamma * (np.exp(np.pi * x) + np.exp(np.pi * y))

    return b


def _ex1fa(gamma: float, beta: float) -> ManufacturedCase:
    flux = {
        # x=0 处外法向为 -e_x
        Side.LEFT: lambda x, y: -gamma * np.sin(np.pi * y),
        Side.RIGHT: lambda x, y: gamma * np.e * np.sin(np.pi * y),
        Side.BOTTOM: lambda x, y: -gamma / np.pi * np.exp(x),
        Side.TOP: lambda x, y: -gamma / np.pi * np.exp(x),
    }
    return ManufacturedCase(
        name="Ex1FA",
        scheme="gradp",
        gamma=gamma,
        beta=beta,
        b=_zeros,
        exact_u=_ex1_velocity(gamma),
        exact_p=lambda x, y: np.cos(np.pi * x) * np.cos(np.pi * y),
        grad_p=lambda x, y: _vector(
            -np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
            -np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
        ),
        boundary_flux=flux,
    )


def _ex2fa(gamma: float, beta: float) -> ManufacturedCase:
    flux = {
        Side.LEFT: _zeros,
        Side.BOTTOM: _zeros,
        Side.RIGHT: lambda x, y: gamma * np.exp(np.pi * y),
        Side.TOP: lambda x, y: gamma * np.exp(np.pi * x),
    }
    return ManufacturedCase(
        name="Ex2FA",
        scheme="gradp",
        gamma=gamma,
        beta=beta,
        b=_ex2_source(gamma),
        exact_u=_ex2_velocity(gamma),
        exact_p=lambda x, y: x * y ** 2 - y * x ** 2,
        grad_p=lambda x, y: _vector(y ** 2 - 2.0 * x * y, 2.0 * x * y - x ** 2),
        boundary_flux=flux,
    )


def _ex1sa(gamma: float, beta: float) -> ManufacturedCase:
    return ManufacturedCase(
        name="Ex1SA",
        scheme="mixed",
        gamma=gamma,
        beta=beta,
        b=_zeros,
        exact_u=_ex1_velocity(gamma),
        exact_p=lambda x, y: 10.0 * np.sin(np.pi * x) * np.sin(np.pi * y),
        grad_p=lambda x, y: _vector(
            10.0 * np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
            10.0 * np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
        ),
    )


def _ex2sa(gamma: float, beta: float) -> ManufacturedCase:
    return ManufacturedCase(
        name="Ex2SA",
        scheme="mixed",
        gamma=gamma,
        beta=beta,
        b=_ex2_source(gamma),
        exact_u=_ex2_velocity(gamma),
        exact_p=lambda x, y: 10.0 * (x - x ** 2) * (y - y ** 2),
        grad_p=lambda x, y: _vector(
            10.0 * (1.0 - 2.0 * x) * (y - y ** 2),
            10.0 * (x - x ** 2) * (1.0 - 2.0 * y),
        ),
    )


def keps_case(eps_k: float, beta: float = 10.0) -> ManufacturedCase:
    """间断渗透率算例：f = 0，b = 1，K 在 Ω₀ 上为 ε_K·I

    Raises:
        ValueError: eps_k <= 0
    """
    if not eps_k > 0.0:
        raise ValueError(f"ε_K 必须为正，当前为 {eps_k}")
    return ManufacturedCase(
        name="KepsCase",
        scheme="mixed",
        gamma=0.0,
        beta=beta,
        b=lambda x, y: np.ones(np.broadcast(x, y).shape),
        permeability=PermeabilityField.discontinuous(eps_k),
    )


_BUILDERS = {
    "Ex1FA": _ex1fa,
    "Ex2FA": _ex2fa,
    "Ex1SA": _ex1sa,
    "Ex2SA": _ex2sa,
}


def make_case(name: str, gamma: float = 1.0, beta: float = 10.0, eps_k: float = 1e6) -> ManufacturedCase:
    """按名称构造算例

    Raises:
        ValueError: 未知的算例名称
    """
    if name == "KepsCase":
        return keps_case(eps_k, beta)
    if name not in _BUILDERS:
        raise ValueError(f"未知的算例: {name}，可选 {', '.join(CASE_NAMES)}")
    return _BUILDERS[name](float(gamma), float(beta))


def consistency_check(
    case: ManufacturedCase, n_points: int = 1000, seed: int = 0, tol: float = 1e-10
) -> ConsistencyReport:
    """在随机内点上检查 f - (μ/ρ)K⁻¹u - (β/ρ)|u|u - ∇p = 0 与 div u - b = 0

    导数用复步长微分从 u、p 的闭式独立求出；残差按 1 + |f|、1 + |b| 归一化。
    """
    if not case.has_exact:
        raise ValueError(f"算例 {case.name} 没有解析解，无法做一致性检查")

    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n_points, 2))
    x, y = pts[:, 0], pts[:, 1]
    step = 1j * _COMPLEX_STEP

    dp_dx = np.imag(case.exact_p(x + step, y)) / _COMPLEX_STEP
    dp_dy = np.imag(case.exact_p(x, y + step)) / _COMPLEX_STEP
    div_u = (
        np.imag(case.exact_u(x + step, y)[:, 0]) / _COMPLEX_STEP
        + np.imag(case.exact_u(x, y + step)[:, 1]) / _COMPLEX_STEP
    )

    u = case.exact_u(x, y)
    f = case.f(x, y)
    kinv = case.permeability.inverse_at(x, y)[:, None]
    momentum = (
        f
        - case.mu / case.rho * kinv * u
        - case.beta / case.rho * forchheimer_drag(u)
        - np.column_stack([dp_dx, dp_dy])
    )
    momentum_res = np.linalg.norm(momentum, axis=1) / (1.0 + np.linalg.norm(f, axis=1))
    b = case.b(x, y)
    divergence_res = np.abs(div_u - b) / (1.0 + np.abs(b))

    failing = np.flatnonzero((momentum_res > tol) | (divergence_res > tol))
    report = ConsistencyReport(
        case=case.name,
        n_points=n_points,
        tol=tol,
        max_momentum_residual=float(momentum_res.max()),
        max_divergence_residual=float(divergence_res.max()),
        failing_points=[(float(pts[i, 0]), float(pts[i, 1])) for i in failing],
    )
    if not report.passed:
        logger.warning(f"算例 {case.name} 一致性检查失败: {len(failing)}/{n_points} 个点超出容差")
    return report


def compatibility_defect(case: ManufacturedCase, n: int = 64) -> float:
    """∫_Γ g_u ds - ∫_Ω b dx，格式一算例应为 0"""
    if set(case.boundary_flux) != set(Side):
        raise ValueError(f"算例 {case.name} 没有完整的通量边界数据")
    mesh = build_unit_square_mesh(n)
    rule = edge_gauss_rule()
    boundary = 0.0
    for side in Side:
        edges = np.asarray(boundary_edges_on_side(mesh, side))
        pts = edge_points(mesh, edges, rule)
        values = np.asarray(case.flux(side)(pts[..., 0], pts[..., 1]), dtype=float)
        boundary += float(np.sum(mesh.edge_lengths[edges] * (values @ rule.weights)))
    return boundary - integrate_function(mesh, case.b, quadrature_rule(5))
