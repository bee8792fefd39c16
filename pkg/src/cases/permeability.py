from dataclasses import dataclass
from typing import Tuple
import numpy as np
from src.mesh.triangle_mesh import TriangleMesh

# 间断渗透率的子区域 Ω₀ = [x0, x1] × [y0, y1]
DEFAULT_REGION: Tuple[float, float, float, float] = (0.25, 0.5, 0.25, 0.75)


@dataclass(frozen=True)
class PermeabilityField:
    """各向同性渗透率 K(x) = k(x)·I

    kind 取 identity、scalar 或 discontinuous；discontinuous 在 Ω₀ 内取 value，
    其余区域取 1。
    """

    kind: str = "identity"
    value: float = 1.0
    region: Tuple[float, float, float, float] = DEFAULT_REGION

    def __post_init__(self):
        if self.kind not in ("identity", "scalar", "discontinuous"):
            raise ValueError(f"未知的渗透率类型: {self.kind}")
        if not self.value > 0.0:
            raise ValueError(f"渗透率必须为正，当前为 {self.value}")
        x0, x1, y0, y1 = self.region
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"无效的子区域: {self.region}")

    @classmethod
    def identity(cls) -> "PermeabilityField":
        return cls()

    @classmethod
    def scalar(cls, k: float) -> "PermeabilityField":
        return cls(kind="scalar", value=float(k))

    @classmethod
    def discontinuous(
        cls, eps_k: float, region: Tuple[float, float, float, float] = DEFAULT_REGION
    ) -> "PermeabilityField":
        return cls(kind="discontinuous", value=float(eps_k), region=tuple(region))

    def in_region(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x0, x1, y0, y1 = self.region
        return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def value_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        if self.kind == "identity":
            return np.ones(np.broadcast(x, y).shape)
        if self.kind == "scalar":
            return np.full(np.broadcast(x, y).shape, self.value)
        return np.where(self.in_region(np.real(x), np.real(y)), self.value, 1.0)

    def inverse_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """K⁻¹(x) 的标量系数"""
        return 1.0 / self.value_at(x, y)

    def element_inverse(self, mesh: TriangleMesh) -> np.ndarray:
        """逐单元常数 K⁻¹，在三角形重心取值，形状 (T,)"""
        c = mesh.centroids
        return self.inverse_at(c[:, 0], c[:, 1])

    @property
    def bounds(self) -> Tuple[float, float]:
        """(K_m, K_M)"""
        if self.kind == "identity":
            return 1.0, 1.0
        if self.kind == "scalar":
            return self.value, self.value
        return min(1.0, self.value), max(1.0, self.value)
