"""
格式一：P0 速度 / P1 压力，法向通量边界条件，罚参数 -ε。

未知量排列为 [u_0x, u_0y, u_1x, u_1y, ..., p_0, ..., p_{V-1}]，
即三角形 t 的速度分量 c 位于 2t + c，顶点 k 的压力位于 2T + k。
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple
import numpy as np
from src.config import config
from src.mesh.triangle_mesh import TriangleMesh, Side, boundary_edges_on_side
from src.fem.fields import P0VectorField, P1ScalarField
from src.fem.quadrature import (
    quadrature_rule,
    physical_points,
    edge_gauss_rule,
    edge_points,
    integrate_function,
)
from src.fem.norms import (
    l2_norm,
    l2_norm_squared,
    l2_error_squared,
    exact_norm_squared,
    mean_value,
    NORM_DEGREE,
)
from src.cases.manufactured import ManufacturedCase
from src.cases.permeability import PermeabilityField
from src.linalg.sparse import AssemblyPattern, SparseMatrix, SparseSolver
from src.models.experiment_models import IterationReport
from src.schemes.picard import picard_loop, relative_increment, resolve_tolerances
from src.utils.log import get_logger

logger = get_logger(__name__)

AnalyticFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class GradPSystemSpec:
    mesh: TriangleMesh
    f: AnalyticFunction
    b: AnalyticFunction
    g_u: Dict[Side, AnalyticFunction] = field(default_factory=dict)
    permeability: PermeabilityField = field(default_factory=PermeabilityField.identity)
    mu: float = 1.0
    rho: float = 1.0
    beta: float = 0.0
    alpha: float = 0.0
    penalty_eps: float = 1e-8
    # Darcy 初值问题的右端，None 表示沿用 f
    darcy_f: Optional[AnalyticFunction] = None

    def __post_init__(self):
        if not self.penalty_eps > 0.0:
            raise ValueError(f"罚参数必须大于0，当前为 {self.penalty_eps}")
        if not (self.mu > 0.0 and self.rho > 0.0):
            raise ValueError(f"μ 与 ρ 必须为正: μ={self.mu}, ρ={self.rho}")
        if self.beta < 0.0:
            raise ValueError(f"β 不能为负，当前为 {self.beta}")
        if self.alpha < 0.0:
            raise ValueError(f"α 不能为负，当前为 {self.alpha}")

    @classmethod
    def from_case(
        cls,
        mesh: TriangleMesh,
        case: ManufacturedCase,
        alpha: float,
        penalty_eps: Optional[float] = None,
    ) -> "GradPSystemSpec":
        if case.scheme != "gradp" or set(case.boundary_flux) != set(Side):
            raise ValueError(f"算例 {case.name} 不适用于格式一（需要四条边上的通量数据）")
        return cls(
            mesh=mesh,
            f=case.f,
            darcy_f=case.darcy_f,
            b=case.b,
            g_u=dict(case.boundary_flux),
            permeability=case.permeability,
            mu=case.mu,
            rho=case.rho,
            beta=case.beta,
            alpha=alpha,
            penalty_eps=config.solver["penalty"] if penalty_eps is None else penalty_eps,
        )


@dataclass
class GradPState:
    u: P0VectorField
    p: P1ScalarField

    @classmethod
    def zeros(cls, mesh: TriangleMesh) -> "GradPState":
        return cls(P0VectorField.zeros(mesh), P1ScalarField.zeros(mesh))

    def check(self, mesh: TriangleMesh) -> None:
        self.u.check(mesh)
        self.p.check(mesh)


class GradPAssembler:
    """一次 Picard 运行内复用的组装器

    稀疏结构、耦合块、压力质量块和与 u_prev 无关的右端项在构造时算好，
    每次迭代只更新速度对角块和 α(u_prev, v)。
    """

    def __init__(self, spec: GradPSystemSpec):
        self.spec = spec
        mesh = spec.mesh
        T, V = mesh.n_triangles, mesh.n_vertices
        self.n_velocity = 2 * T
        self.dimension = 2 * T + V
        tri = mesh.triangles
        areas = mesh.areas

        velocity = np.arange(2 * T)

        # (∇p, v) 与 (∇q, u)：对 t, c, k 展开
        t_c = np.repeat(np.arange(T), 6)
        c_c = np.tile(np.repeat([0, 1], 3), T)
        k_c = np.tile([0, 1, 2], 2 * T)
        u_rows = 2 * t_c + c_c
        p_cols = 2 * T + tri[t_c, k_c]
        coupling = areas[t_c] * mesh.grads[t_c, k_c, c_c]

        # -ε(p, q)，P1 局部质量矩阵 |T|/12 (1 + δ_ij)
        t_m = np.repeat(np.arange(T), 9)
        i_m = np.tile(np.repeat([0, 1, 2], 3), T)
        j_m = np.tile([0, 1, 2], 3 * T)
        mass = -spec.penalty_eps * areas[t_m] / 12.0 * (1.0 + (i_m == j_m))

        rows = np.concatenate([velocity, u_rows, p_cols, 2 * T + tri[t_m, i_m]])
        cols = np.concatenate([velocity, p_cols, u_rows, 2 * T + tri[t_m, j_m]])
        self._values = np.concatenate([np.zeros(2 * T), coupling, coupling, mass])
        self.pattern = AssemblyPattern(rows, cols, self.dimension)

        self._kinv = spec.permeability.element_inverse(mesh)
        self._rhs_fixed = self._fixed_rhs()

    def _fixed_rhs(self) -> np.ndarray:
        spec = self.spec
        mesh = spec.mesh
        rule = quadrature_rule(5)
        pts = physical_points(mesh, rule)
        rhs = np.zeros(self.dimension)

        f_vals = np.asarray(spec.f(pts[..., 0], pts[..., 1]), dtype=float)
        rhs[: self.n_velocity] = (mesh.areas[:, None] * np.einsum("tqd,q->td", f_vals, rule.weights)).ravel()

        # -(b, λ_k)
        b_vals = np.asarray(spec.b(pts[..., 0], pts[..., 1]), dtype=float)
        local = mesh.areas[:, None] * ((b_vals * rule.weights) @ rule.points)
        pressure = -np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)

        # ∫_Γ g_u q ds，边上 λ_a = 1 - s, λ_b = s
        edge_rule = edge_gauss_rule()
        for side, g in spec.g_u.items():
            edges = np.asarray(boundary_edges_on_side(mesh, side), dtype=np.int64)
            if edges.size == 0:
                continue
            epts = edge_points(mesh, edges, edge_rule)
            g_vals = np.asarray(g(epts[..., 0], epts[..., 1]), dtype=float) * edge_rule.weights
            lengths = mesh.edge_lengths[edges]
            load_a = lengths * (g_vals @ (1.0 - edge_rule.points))
            load_b = lengths * (g_vals @ edge_rule.points)
            pressure += np.bincount(mesh.edges[edges, 0], weights=load_a, minlength=mesh.n_vertices)
            pressure += np.bincount(mesh.edges[edges, 1], weights=load_b, minlength=mesh.n_vertices)

        rhs[self.n_velocity:] = pressure
        return rhs

    @property
    def pressure_load(self) -> np.ndarray:
        """压力行右端 -(b, q) + ∫_Γ g_u q ds"""
        return self._rhs_fixed[self.n_velocity:]

    def assemble(self, u_prev: P0VectorField) -> Tuple[SparseMatrix, np.ndarray]:
        spec = self.spec
        mesh = spec.mesh
        u_prev.check(mesh)
        speed = np.linalg.norm(u_prev.values, axis=1)
        diagonal = mesh.areas * (
            spec.alpha + spec.mu / spec.rho * self._kinv + spec.beta / spec.rho * speed
        )
        values = self._values.copy()
        values[: self.n_velocity] = np.repeat(diagonal, 2)

        rhs = self._rhs_fixed.copy()
        if spec.alpha != 0.0:
            rhs[: self.n_velocity] += spec.alpha * (mesh.areas[:, None] * u_prev.values).ravel()
        return self.pattern.matrix(values), rhs

    def split(self, x: np.ndarray) -> GradPState:
        return GradPState(P0VectorField(x[: self.n_velocity]), P1ScalarField(x[self.n_velocity:]))


def assemble_gradp(spec: GradPSystemSpec, u_prev: P0VectorField) -> Tuple[SparseMatrix, np.ndarray]:
    """组装带罚的线性化系统"""
    return GradPAssembler(spec).assemble(u_prev)


def darcy_initial_guess_gradp(spec: GradPSystemSpec) -> GradPState:
    """β = α = 0 的 Darcy 问题的解，作为 Picard 迭代的初值；右端取 spec.darcy_f"""
    darcy = replace(spec, alpha=0.0, beta=0.0, f=spec.darcy_f or spec.f)
    assembler = GradPAssembler(darcy)
    A, rhs = assembler.assemble(P0VectorField.zeros(spec.mesh))
    return assembler.split(SparseSolver().solve(A, rhs))


def err_l(mesh: TriangleMesh, new: GradPState, old: GradPState) -> float:
    """相邻两次迭代的相对 L² 增量"""
    return relative_increment(
        l2_norm_squared(mesh, new.u - old.u),
        l2_norm_squared(mesh, new.p - old.p),
        l2_norm_squared(mesh, new.u),
        l2_norm_squared(mesh, new.p),
    )


def picard_iterate_gradp(
    spec: GradPSystemSpec,
    init: GradPState,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Tuple[GradPState, IterationReport]:
    tol, max_iter = resolve_tolerances(tol, max_iter)
    mesh = spec.mesh
    init.check(mesh)
    assembler = GradPAssembler(spec)
    solver = SparseSolver()

    def step(state: GradPState) -> GradPState:
        A, rhs = assembler.assemble(state.u)
        return assembler.split(solver.solve(A, rhs))

    return picard_loop(
        step,
        init,
        err_l=lambda new, old: err_l(mesh, new, old),
        increment=lambda new, old: l2_norm(mesh, new.u - old.u),
        tol=tol,
        max_iter=max_iter,
        scheme="gradp",
        alpha=spec.alpha,
    )


def err_vs_exact_gradp(state: GradPState, case: ManufacturedCase, mesh: TriangleMesh) -> float:
    """相对解析解的组合 L² 误差；压力先平移到与解析压力同均值"""
    if not case.has_exact:
        raise ValueError(f"算例 {case.name} 没有解析解")
    rule = quadrature_rule(NORM_DEGREE)
    exact_mean = integrate_function(mesh, case.exact_p, rule) / float(np.sum(mesh.areas))
    shift = exact_mean - mean_value(mesh, state.p, rule)
    numerator = l2_error_squared(mesh, state.u, case.exact_u, rule) + l2_error_squared(
        mesh, state.p, case.exact_p, rule, shift=shift
    )
    denominator = exact_norm_squared(mesh, case.exact_u, True, rule) + exact_norm_squared(
        mesh, case.exact_p, False, rule
    )
    return float(np.sqrt(numerator / denominator))


def pressure_row_residual(spec: GradPSystemSpec, state: GradPState) -> np.ndarray:
    """每个压力基函数上的约束残差 (∇q, u) + (b, q) - ∫_Γ g_u q ds"""
    assembler = GradPAssembler(spec)
    mesh = spec.mesh
    local = mesh.areas[:, None] * np.einsum("tkd,td->tk", mesh.grads, state.u.values)
    coupling = np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)
    return coupling - assembler.pressure_load
