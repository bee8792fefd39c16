from src.linalg.sparse import (
    TripletBuffer,
    SparseMatrix,
    AssemblyPattern,
    SparseSolver,
    SparseIndexError,
    DimensionMismatchError,
    SingularMatrixError,
    compress,
    solve,
    residual_norm,
)

__all__ = [
    "TripletBuffer",
    "SparseMatrix",
    "AssemblyPattern",
    "SparseSolver",
    "SparseIndexError",
    "DimensionMismatchError",
    "SingularMatrixError",
    "compress",
    "solve",
    "residual_norm",
]
