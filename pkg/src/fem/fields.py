from abc import ABC, abstractmethod
from typing import Callable, Type, TypeVar
import numpy as np
from src.mesh.triangle_mesh import TriangleMesh
from src.fem.quadrature import QuadratureRule, edge_gauss_rule, edge_points
from src.fem.rt0 import rt0_tabulate, rt0_divergences

# 解析函数约定：fn(x, y) 接收同形状数组；标量函数返回同形状数组，
# 向量函数返回在最后一维堆叠的 (..., 2) 数组
AnalyticFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

F = TypeVar("F", bound="DiscreteField")


class DiscreteField(ABC):
    """有限元离散场的公共接口"""

    is_vector: bool = False
    # 自由度本身是二维向量（P0 速度）；RT0 的自由度是标量
    nodal_vector: bool = False

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=float)

    @classmethod
    @abstractmethod
    def size_for(cls, mesh: TriangleMesh) -> int:
        pass

    @abstractmethod
    def evaluate(self, mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
        """在所有单元求积点上求值：标量场 (T, Q)，向量场 (T, Q, 2)"""

    @classmethod
    def zeros(cls: Type[F], mesh: TriangleMesh) -> F:
        shape = (cls.size_for(mesh), 2) if cls.nodal_vector else (cls.size_for(mesh),)
        return cls(np.zeros(shape))

    def check(self, mesh: TriangleMesh) -> None:
        if self.values.shape[0] != self.size_for(mesh):
            raise ValueError(
                f"{type(self).__name__} 长度 {self.values.shape[0]} 与网格不匹配，"
                f"应为 {self.size_for(mesh)}"
            )

    def __sub__(self: F, other: F) -> F:
        if type(other) is not type(self):
            raise TypeError(f"不能相减: {type(self).__name__} 与 {type(other).__name__}")
        return type(self)(self.values - other.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.values.shape[0]})"


class P0VectorField(DiscreteField):
    """逐单元常向量，速度空间 X_{u,h}"""

    is_vector = True
    nodal_vector = True

    def __init__(self, values: np.ndarray):
        super().__init__(values)
        self.values = self.values.reshape(-1, 2)

    @classmethod
    def size_for(cls, mesh: TriangleMesh) -> int:
        return mesh.n_triangles

    def evaluate(self, mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
        return np.broadcast_to(self.values[:, None, :], (mesh.n_triangles, rule.n_points, 2))

    @classmethod
    def interpolate(cls, mesh: TriangleMesh, fn: AnalyticFunction) -> "P0VectorField":
        c = mesh.centroids
        return cls(np.asarray(fn(c[:, 0], c[:, 1]), dtype=float))


class P1ScalarField(DiscreteField):
    """连续分片线性标量，压力空间 M_{u,h}"""

    @classmethod
    def size_for(cls, mesh: TriangleMesh) -> int:
        return mesh.n_vertices

    def evaluate(self, mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
        return self.values[mesh.triangles] @ rule.points.T

    @classmethod
    def interpolate(cls, mesh: TriangleMesh, fn: AnalyticFunction) -> "P1ScalarField":
        v = mesh.vertices
        return cls(np.asarray(fn(v[:, 0], v[:, 1]), dtype=float))


class RT0Field(DiscreteField):
    """每条边一个法向通量自由度，速度空间 X_{p,h}"""

    is_vector = True

    @classmethod
    def size_for(cls, mesh: TriangleMesh) -> int:
        return mesh.n_edges

    def evaluate(self, mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
        phi = rt0_tabulate(mesh, rule)
        return np.einsum("tk,tkqd->tqd", self.values[mesh.tri_edges], phi)

    def divergence(self, mesh: TriangleMesh) -> np.ndarray:
        """逐单元散度 (T,)"""
        return np.einsum("tk,tk->t", self.values[mesh.tri_edges], rt0_divergences(mesh))

    @classmethod
    def interpolate(cls, mesh: TriangleMesh, fn: AnalyticFunction) -> "RT0Field":
        """自由度取边上法向分量的平均值（三点 Gauss）"""
        rule = edge_gauss_rule()
        pts = edge_points(mesh, np.arange(mesh.n_edges), rule)
        vals = np.asarray(fn(pts[..., 0], pts[..., 1]), dtype=float)
        normal = np.einsum("eqd,ed->eq", vals, mesh.edge_normals)
        return cls(normal @ rule.weights)


class P0ScalarField(DiscreteField):
    """逐单元常数，压力空间 M_{p,h}"""

    @classmethod
    def size_for(cls, mesh: TriangleMesh) -> int:
        return mesh.n_triangles

    def evaluate(self, mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
        return np.broadcast_to(self.values[:, None], (mesh.n_triangles, rule.n_points))

    @classmethod
    def interpolate(cls, mesh: TriangleMesh, fn: AnalyticFunction) -> "P0ScalarField":
        c = mesh.centroids
        return cls(np.asarray(fn(c[:, 0], c[:, 1]), dtype=float))
