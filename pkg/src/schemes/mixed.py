"""
格式二：RT0 速度 / P0 压力，压力边界条件（自然条件），罚参数 +ε。

未知量排列为 [u_e0, ..., u_{E-1}, p_0, ..., p_{T-1}]：
边 e 的法向通量位于 e，三角形 t 的压力位于 E + t。
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple
import numpy as np
from src.config import config
from src.mesh.triangle_mesh import TriangleMesh
from src.fem.fields import RT0Field, P0ScalarField
from src.fem.quadrature import quadrature_rule, physical_points, edge_gauss_rule, edge_points
from src.fem.rt0 import rt0_tabulate, local_edge_lengths
from src.fem.norms import l2_norm, l2_norm_squared, l2_error_squared, exact_norm_squared, NORM_DEGREE
from src.cases.manufactured import ManufacturedCase
from src.cases.permeability import PermeabilityField
from src.linalg.sparse import AssemblyPattern, SparseMatrix, SparseSolver
from src.models.experiment_models import IterationReport
from src.schemes.picard import picard_loop, relative_increment, resolve_tolerances
from src.utils.log import get_logger

logger = get_logger(__name__)

AnalyticFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# 速度块里 |u_prev| 在单元内逐点变化，统一用五次公式
MASS_DEGREE = 5


@dataclass(frozen=True, eq=False)
class MixedSystemSpec:
    mesh: TriangleMesh
    f: AnalyticFunction
    b: AnalyticFunction
    permeability: PermeabilityField = field(default_factory=PermeabilityField.identity)
    mu: float = 1.0
    rho: float = 1.0
    beta: float = 0.0
    alpha: float = 0.0
    penalty_eps: float = 1e-8
    # Darcy 初值问题的右端，None 表示沿用 f
    darcy_f: Optional[AnalyticFunction] = None
    # 压力边界值，None 表示 g_p = 0
    g_p: Optional[AnalyticFunction] = None

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
    ) -> "MixedSystemSpec":
        if case.scheme != "mixed":
            raise ValueError(f"算例 {case.name} 不适用于格式二")
        return cls(
            mesh=mesh,
            f=case.f,
            darcy_f=case.darcy_f,
            b=case.b,
            permeability=case.permeability,
            mu=case.mu,
            rho=case.rho,
            beta=case.beta,
            alpha=alpha,
            penalty_eps=config.solver["penalty"] if penalty_eps is None else penalty_eps,
        )


@dataclass
class MixedState:
    u: RT0Field
    p: P0ScalarField

    @classmethod
    def zeros(cls, mesh: TriangleMesh) -> "MixedState":
        return cls(RT0Field.zeros(mesh), P0ScalarField.zeros(mesh))

    def check(self, mesh: TriangleMesh) -> None:
        self.u.check(mesh)
        self.p.check(mesh)


def boundary_edge_signs(mesh: TriangleMesh) -> np.ndarray:
    """每条边上 外法向·全局法向 的符号，内部边的值没有意义"""
    signs = np.zeros(mesh.n_edges)
    signs[mesh.tri_edges.ravel()] = mesh.tri_signs.ravel()
    return signs


class MixedAssembler:
    """一次 Picard 运行内复用的组装器

    局部基函数两两点积 φ_k·φ_l 在求积点上预先制表，每次迭代只需重新加权。
    """

    def __init__(self, spec: MixedSystemSpec):
        self.spec = spec
        mesh = spec.mesh
        E, T = mesh.n_edges, mesh.n_triangles
        self.n_velocity = E
        self.dimension = E + T
        self.rule = quadrature_rule(MASS_DEGREE)
        self._phi = rt0_tabulate(mesh, self.rule)
        # (T, 3, 3, Q)
        self._products = np.einsum("tkqd,tlqd->tklq", self._phi, self._phi)
        self._plain_mass = mesh.areas[:, None, None] * (self._products @ self.rule.weights)

        tri_edges = mesh.tri_edges
        t_v = np.repeat(np.arange(T), 9)
        k_v = np.tile(np.repeat([0, 1, 2], 3), T)
        l_v = np.tile([0, 1, 2], 3 * T)
        v_rows = tri_edges[t_v, k_v]
        v_cols = tri_edges[t_v, l_v]

        # -(p, div v) 与 (q, div u)，|T|·div φ_k = σ_k |e_k|
        t_d = np.repeat(np.arange(T), 3)
        e_d = tri_edges.ravel()
        flux = (mesh.tri_signs * local_edge_lengths(mesh)).ravel()

        p_diag = E + np.arange(T)
        rows = np.concatenate([v_rows, e_d, E + t_d, p_diag])
        cols = np.concatenate([v_cols, E + t_d, e_d, p_diag])
        self._n_mass = v_rows.shape[0]
        self._values = np.concatenate(
            [np.zeros(self._n_mass), -flux, flux, spec.penalty_eps * mesh.areas]
        )
        self.pattern = AssemblyPattern(rows, cols, self.dimension)

        self._kinv = spec.permeability.element_inverse(mesh)
        self._rhs_fixed = self._fixed_rhs()

    def _fixed_rhs(self) -> np.ndarray:
        spec = self.spec
        mesh = spec.mesh
        rule = self.rule
        pts = physical_points(mesh, rule)
        rhs = np.zeros(self.dimension)

        f_vals = np.asarray(spec.f(pts[..., 0], pts[..., 1]), dtype=float)
        local = mesh.areas[:, None] * np.einsum("tqd,tkqd,q->tk", f_vals, self._phi, rule.weights)
        velocity = np.bincount(mesh.tri_edges.ravel(), weights=local.ravel(), minlength=mesh.n_edges)

        # -∫_Γ g_p v·n ds，边界边上基函数的外法向分量为 σ
        if spec.g_p is not None:
            edge_rule = edge_gauss_rule()
            edges = np.asarray([e for e, _ in mesh.boundary_edges], dtype=np.int64)
            epts = edge_points(mesh, edges, edge_rule)
            g_vals = np.asarray(spec.g_p(epts[..., 0], epts[..., 1]), dtype=float)
            velocity[edges] -= boundary_edge_signs(mesh)[edges] * mesh.edge_lengths[edges] * (
                g_vals @ edge_rule.weights
            )

        rhs[: self.n_velocity] = velocity
        b_vals = np.asarray(spec.b(pts[..., 0], pts[..., 1]), dtype=float)
        rhs[self.n_velocity:] = mesh.areas * (b_vals @ rule.weights)
        return rhs

    def velocity_block(self, u_prev: RT0Field) -> np.ndarray:
        """逐单元 3×3 块 ∫_T c(x) φ_k·φ_l，c = α + (μ/ρ)K⁻¹ + (β/ρ)|u_prev(x)|"""
        spec = self.spec
        mesh = spec.mesh
        constant = spec.alpha + spec.mu / spec.rho * self._kinv
        block = constant[:, None, None] * self._plain_mass
        if spec.beta != 0.0:
            speed = np.linalg.norm(u_prev.evaluate(mesh, self.rule), axis=-1)
            weighted = mesh.areas[:, None] * speed * self.rule.weights
            block = block + spec.beta / spec.rho * np.einsum("tklq,tq->tkl", self._products, weighted)
        return block

    def assemble(self, u_prev: RT0Field) -> Tuple[SparseMatrix, np.ndarray]:
        spec = self.spec
        mesh = spec.mesh
        u_prev.check(mesh)
        values = self._values.copy()
        values[: self._n_mass] = self.velocity_block(u_prev).ravel()

        rhs = self._rhs_fixed.copy()
        if spec.alpha != 0.0:
            local = np.einsum("tkl,tl->tk", self._plain_mass, u_prev.values[mesh.tri_edges])
            rhs[: self.n_velocity] += spec.alpha * np.bincount(
                mesh.tri_edges.ravel(), weights=local.ravel(), minlength=mesh.n_edges
            )
        return self.pattern.matrix(values), rhs

    def split(self, x: np.ndarray) -> MixedState:
        return MixedState(RT0Field(x[: self.n_velocity]), P0ScalarField(x[self.n_velocity:]))


def assemble_mixed(spec: MixedSystemSpec, u_prev: RT0Field) -> Tuple[SparseMatrix, np.ndarray]:
    """组装带罚的线性化混合系统"""
    return MixedAssembler(spec).assemble(u_prev)


def darcy_initial_guess_mixed(spec: MixedSystemSpec) -> MixedState:
    darcy = replace(spec, alpha=0.0, beta=0.0, f=spec.darcy_f or spec.f)
    assembler = MixedAssembler(darcy)
    A, rhs = assembler.assemble(RT0Field.zeros(spec.mesh))
    return assembler.split(SparseSolver().solve(A, rhs))


def err_l(mesh: TriangleMesh, new: MixedState, old: MixedState) -> float:
    return relative_increment(
        l2_norm_squared(mesh, new.u - old.u),
        l2_norm_squared(mesh, new.p - old.p),
        l2_norm_squared(mesh, new.u),
        l2_norm_squared(mesh, new.p),
    )


def picard_iterate_mixed(
    spec: MixedSystemSpec,
    init: MixedState,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Tuple[MixedState, IterationReport]:
    tol, max_iter = resolve_tolerances(tol, max_iter)
    mesh = spec.mesh
    init.check(mesh)
    assembler = MixedAssembler(spec)
    solver = SparseSolver()

    def step(state: MixedState) -> MixedState:
        A, rhs = assembler.assemble(state.u)
        return assembler.split(solver.solve(A, rhs))

    return picard_loop(
        step,
        init,
        err_l=lambda new, old: err_l(mesh, new, old),
        increment=lambda new, old: l2_norm(mesh, new.u - old.u),
        tol=tol,
        max_iter=max_iter,
        scheme="mixed",
        alpha=spec.alpha,
    )


def divergence_residual(state: MixedState, spec: MixedSystemSpec) -> float:
    """‖div u_h - Π₀ b‖_{L²}，Π₀ b 为 b 的逐单元平均"""
    mesh = spec.mesh
    rule = quadrature_rule(5)
    pts = physical_points(mesh, rule)
    b_mean = np.asarray(spec.b(pts[..., 0], pts[..., 1]), dtype=float) @ rule.weights
    diff = state.u.divergence(mesh) - b_mean
    return float(np.sqrt(np.sum(mesh.areas * diff * diff)))


def err_vs_exact_mixed(state: MixedState, case: ManufacturedCase, mesh: TriangleMesh) -> float:
    """相对解析解的组合 L² 误差，压力不做平移"""
    if not case.has_exact:
        raise ValueError(f"算例 {case.name} 没有解析解")
    rule = quadrature_rule(NORM_DEGREE)
    numerator = l2_error_squared(mesh, state.u, case.exact_u, rule) + l2_error_squared(
        mesh, state.p, case.exact_p, rule
    )
    denominator = exact_norm_squared(mesh, case.exact_u, True, rule) + exact_norm_squared(
        mesh, case.exact_p, False, rule
    )
    return float(np.sqrt(numerator / denominator))
