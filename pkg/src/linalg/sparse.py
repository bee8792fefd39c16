from dataclasses import dataclass
from typing import List, Optional, Tuple, Union
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from src.config import config
from src.utils.log import get_logger

logger = get_logger(__name__)

ArrayLike = Union[np.ndarray, List[float], float, int]


class SparseIndexError(IndexError):
    """三元组下标越界"""


class DimensionMismatchError(ValueError):
    """矩阵与向量维数不一致"""


class SingularMatrixError(RuntimeError):
    """结构奇异或数值奇异"""


class TripletBuffer:
    """(row, col, value) 三元组累加缓冲区，允许重复下标，压缩时求和

    缓冲区只在单个线程内使用。
    """

    def __init__(self, dimension: int):
        if dimension < 0:
            raise ValueError(f"维数不能为负: {dimension}")
        self.dimension = int(dimension)
        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._values: List[np.ndarray] = []

    def add(self, rows: ArrayLike, cols: ArrayLike, values: ArrayLike) -> None:
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64)).ravel()
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64)).ravel()
        values = np.broadcast_to(np.asarray(values, dtype=float), rows.shape).ravel()
        if not rows.shape == cols.shape == values.shape:
            raise DimensionMismatchError(
                f"三元组长度不一致: rows={rows.shape}, cols={cols.shape}, values={values.shape}"
            )
        self._rows.append(rows)
        self._cols.append(cols)
        self._values.append(np.array(values))

    def _concat(self, chunks: List[np.ndarray], dtype) -> np.ndarray:
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=dtype)

    @property
    def rows(self) -> np.ndarray:
        return self._concat(self._rows, np.int64)

    @property
    def cols(self) -> np.ndarray:
        return self._concat(self._cols, np.int64)

    @property
    def values(self) -> np.ndarray:
        return self._concat(self._values, float)

    def __len__(self) -> int:
        return int(sum(chunk.shape[0] for chunk in self._rows))


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """按行压缩存储的方阵（CSR），每行列下标严格递增"""

    dimension: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_scipy(cls, matrix: sp.spmatrix) -> "SparseMatrix":
        csr = sp.csr_matrix(matrix)
        csr.sum_duplicates()
        csr.sort_indices()
        if csr.shape[0] != csr.shape[1]:
            raise DimensionMismatchError(f"矩阵不是方阵: {csr.shape}")
        return cls(csr.shape[0], csr.indptr.copy(), csr.indices.copy(), csr.data.copy())

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets),
            shape=(self.dimension, self.dimension),
        )

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def get(self, i: int, j: int) -> float:
        start, end = self.row_offsets[i], self.row_offsets[i + 1]
        pos = np.searchsorted(self.col_indices[start:end], j)
        if pos < end - start and self.col_indices[start + pos] == j:
            return float(self.values[start + pos])
        return 0.0

    def toarray(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return self.to_scipy() @ x


def compress(buf: TripletBuffer) -> SparseMatrix:
    """将三元组压缩为 CSR，重复项求和

    Raises:
        SparseIndexError: 下标越界
    """
    rows, cols, values = buf.rows, buf.cols, buf.values
    n = buf.dimension
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise SparseIndexError(
            f"三元组下标越界: 行 [{rows.min()}, {rows.max()}], 列 [{cols.min()}, {cols.max()}], 维数 {n}"
        )
    return AssemblyPattern(rows, cols, n).matrix(values)


class AssemblyPattern:
    """固定稀疏结构的“符号分析”

    Picard 迭代中三元组的位置不变、只有数值改变：构造时一次性求出 CSR 结构
    和三元组到存储槽的映射，之后每步只做一次 bincount。
    """

    def __init__(self, rows: np.ndarray, cols: np.ndarray, dimension: int):
        self.dimension = int(dimension)
        keys = np.asarray(rows, dtype=np.int64) * self.dimension + np.asarray(cols, dtype=np.int64)
        unique_keys, self._slots = np.unique(keys, return_inverse=True)
        self._slots = self._slots.ravel()
        self.n_triplets = keys.shape[0]
        row_of = unique_keys // max(self.dimension, 1)
        self.col_indices = unique_keys % max(self.dimension, 1)
        self.row_offsets = np.zeros(self.dimension + 1, dtype=np.int64)
        np.cumsum(np.bincount(row_of, minlength=self.dimension), out=self.row_offsets[1:])

    @property
    def nnz(self) -> int:
        return int(self.col_indices.shape[0])

    def matrix(self, values: np.ndarray) -> SparseMatrix:
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.n_triplets:
            raise DimensionMismatchError(f"数值长度 {values.shape[0]} 与结构 {self.n_triplets} 不一致")
        data = np.bincount(self._slots, weights=values, minlength=self.nnz)
        return SparseMatrix(self.dimension, self.row_offsets, self.col_indices, data)


def _check_dimensions(A: SparseMatrix, *vectors: np.ndarray) -> None:
    for v in vectors:
        if v.ndim != 1 or v.shape[0] != A.dimension:
            raise DimensionMismatchError(f"向量形状 {v.shape} 与矩阵维数 {A.dimension} 不一致")


def residual_norm(A: SparseMatrix, x: np.ndarray, rhs: np.ndarray) -> float:
    """‖A x − rhs‖∞"""
    x = np.asarray(x, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    _check_dimensions(A, x, rhs)
    if A.dimension == 0:
        return 0.0
    return float(np.max(np.abs(A @ x - rhs)))


class SparseSolver:
    """带主元的稀疏 LU 直接求解（SuperLU）

    同一求解器在稀疏结构不变时复用第一次分解得到的列置换，之后每次只做
    NATURAL 序的数值分解；结构变化或复用后残差不达标时重新做列排序。
    单个求解器只在一个线程中使用；不同系统可以并发求解。
    """

    RESIDUAL_FACTOR = 1e-10
    # 复用列置换的解残差超过 RESIDUAL_FACTOR 界的这个倍数时重新排序
    REORDER_FACTOR = 1e4

    def __init__(self, permc_spec: Optional[str] = None, refinement_steps: int = 2):
        self.permc_spec = permc_spec or config.get("SOLVER.permc_spec", "COLAMD")
        self.refinement_steps = refinement_steps
        self.factorizations = 0
        self.analyses = 0
        self._ordering: Optional[np.ndarray] = None
        self._structure: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def _same_structure(self, csc) -> bool:
        if self._structure is None:
            return False
        indptr, indices = self._structure
        return np.array_equal(indptr, csc.indptr) and np.array_equal(indices, csc.indices)

    def _factorize(self, csc, reuse: bool):
        """返回 (lu, q)；q 非 None 时分解的是 csc[:, q]"""
        if reuse and self._ordering is not None and self._same_structure(csc):
            q = self._ordering
            try:
                lu = splu(csc[:, q].tocsc(), permc_spec="NATURAL")
                self.factorizations += 1
                return lu, q
            except RuntimeError as e:
                logger.debug(f"复用列置换的分解失败，重新排序: {str(e)}")
        try:
            lu = splu(csc, permc_spec=self.permc_spec)
        except RuntimeError as e:
            raise SingularMatrixError(f"矩阵分解失败（奇异）: {str(e)}") from e
        # Pr·A·Pc = L·U，等价于以 NATURAL 序分解 A[:, argsort(perm_c)]
        self._ordering = np.argsort(lu.perm_c)
        self._structure = (csc.indptr.copy(), csc.indices.copy())
        self.analyses += 1
        self.factorizations += 1
        return lu, None

    @staticmethod
    def _apply(lu, q: Optional[np.ndarray], r: np.ndarray) -> np.ndarray:
        y = lu.solve(r)
        if q is None:
            return y
        x = np.empty_like(y)
        x[q] = y
        return x

    def solve(self, A: SparseMatrix, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        _check_dimensions(A, rhs)
        if A.dimension == 0:
            return np.zeros(0)

        csc = A.to_scipy().tocsc()
        bound = self.RESIDUAL_FACTOR * (1.0 + float(np.max(np.abs(rhs))))
        x, res, reused = self._solve_once(csc, rhs, bound, reuse=True)
        if reused and not res <= self.REORDER_FACTOR * bound:
            logger.debug(f"复用列置换后残差为 {res:.3e}，重新排序后再分解")
            x, res, _ = self._solve_once(csc, rhs, bound, reuse=False)
        if not np.all(np.isfinite(x)):
            raise SingularMatrixError("求解结果包含非有限值，矩阵数值奇异")
        if res > bound:
            logger.debug(f"迭代改进后残差仍为 {res:.3e}（界 {bound:.3e}）")
        return x

    def _solve_once(self, csc, rhs: np.ndarray, bound: float, reuse: bool):
        lu, q = self._factorize(csc, reuse)
        x = self._apply(lu, q, rhs)
        res = np.inf
        for step in range(self.refinement_steps + 1):
            if not np.all(np.isfinite(x)):
                break
            r = rhs - csc @ x
            res = float(np.max(np.abs(r)))
            if res <= bound or step == self.refinement_steps:
                break
            # 迭代改进：复用同一分解
            x = x + self._apply(lu, q, r)
        return x, res, q is not None


def solve(A: SparseMatrix, rhs: np.ndarray) -> np.ndarray:
    """求解 A x = rhs

    Raises:
        DimensionMismatchError: 维数不一致
        SingularMatrixError: 结构或数值奇异
    """
    return SparseSolver().solve(A, rhs)
