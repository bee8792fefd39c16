from enum import Enum
from pathlib import Path
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union
import numpy as np
from src.utils.log import get_logger

logger = get_logger(__name__)


class Side(str, Enum):
    """单位正方形的四条边界"""

    LEFT = "x=0"
    RIGHT = "x=1"
    BOTTOM = "y=0"
    TOP = "y=1"

    @property
    def outward_normal(self) -> Tuple[float, float]:
        return {
            Side.LEFT: (-1.0, 0.0),
            Side.RIGHT: (1.0, 0.0),
            Side.BOTTOM: (0.0, -1.0),
            Side.TOP: (0.0, 1.0),
        }[self]


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """单位正方形 (0,1)² 上的结构化三角剖分

    拓扑数组全部在构造时确定，之后只读，可在多线程间共享。
    局部边 k 与局部顶点 k 相对：edge_k = (v[k+1], v[k+2])。
    """

    n_divisions: int
    vertices: np.ndarray          # (V, 2)
    triangles: np.ndarray         # (T, 3)，逆时针
    edges: np.ndarray             # (E, 2)，较小的顶点编号在前
    tri_edges: np.ndarray         # (T, 3)，局部边 -> 全局边编号
    tri_signs: np.ndarray         # (T, 3)，外法向与全局法向一致为 +1
    boundary_edges: List[Tuple[int, Side]]
    h: float
    # 派生几何量
    areas: np.ndarray = field(repr=False)          # (T,)
    grads: np.ndarray = field(repr=False)          # (T, 3, 2) 重心坐标梯度
    edge_lengths: np.ndarray = field(repr=False)   # (E,)
    edge_normals: np.ndarray = field(repr=False)   # (E, 2) 全局单位法向

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def tri_coords(self) -> np.ndarray:
        """每个三角形的顶点坐标 (T, 3, 2)"""
        return self.vertices[self.triangles]

    @property
    def centroids(self) -> np.ndarray:
        return self.tri_coords.mean(axis=1)

    def interior_edge_mask(self) -> np.ndarray:
        mask = np.ones(self.n_edges, dtype=bool)
        for edge, _ in self.boundary_edges:
            mask[edge] = False
        return mask

    def edge_triangles(self) -> Dict[int, List[Tuple[int, int]]]:
        """全局边 -> [(三角形, 局部边)]"""
        incidence: Dict[int, List[Tuple[int, int]]] = {}
        for t in range(self.n_triangles):
            for k in range(3):
                incidence.setdefault(int(self.tri_edges[t, k]), []).append((t, k))
        return incidence


def _side_of(p0: np.ndarray, p1: np.ndarray) -> Side:
    if p0[0] == 0.0 and p1[0] == 0.0:
        return Side.LEFT
    if p0[0] == 1.0 and p1[0] == 1.0:
        return Side.RIGHT
    if p0[1] == 0.0 and p1[1] == 0.0:
        return Side.BOTTOM
    if p0[1] == 1.0 and p1[1] == 1.0:
        return Side.TOP
    raise ValueError(f"边 {p0}-{p1} 不在边界上")


def build_unit_square_mesh(n: int) -> TriangleMesh:
    """构造 N×N 网格，每个小正方形沿左下-右上对角线切成两个三角形

    Args:
        n: 每条边的剖分段数，必须 >= 1

    Returns:
        TriangleMesh: 顶点按行优先编号，三角形与边按构造顺序编号
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"网格剖分数必须是正整数，当前为: {n}")
    n = int(n)

    grid = np.linspace(0.0, 1.0, n + 1)
    xs, ys = np.meshgrid(grid, grid)
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    def vid(i: int, j: int) -> int:
        return j * (n + 1) + i

    triangles = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            triangles.append((a, b, c))
            triangles.append((a, c, d))
    triangles = np.asarray(triangles, dtype=np.int64)

    # 按构造顺序为边编号
    edge_index: Dict[Tuple[int, int], int] = {}
    edges: List[Tuple[int, int]] = []
    tri_edges = np.empty_like(triangles)
    for t, tri in enumerate(triangles):
        for k in range(3):
            v0, v1 = int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
            key = (min(v0, v1), max(v0, v1))
            if key not in edge_index:
                edge_index[key] = len(edges)
                edges.append(key)
            tri_edges[t, k] = edge_index[key]
    edges = np.asarray(edges, dtype=np.int64)

    # 全局法向：低编号->高编号的切向量逆时针旋转 90°
    tangents = vertices[edges[:, 1]] - vertices[edges[:, 0]]
    edge_lengths = np.linalg.norm(tangents, axis=1)
    edge_normals = np.column_stack([-tangents[:, 1], tangents[:, 0]]) / edge_lengths[:, None]

    # 逆时针三角形上的外法向：局部边切向量顺时针旋转 90°
    coords = vertices[triangles]
    local_tangents = np.roll(coords, -2, axis=1) - np.roll(coords, -1, axis=1)
    outward = np.stack([local_tangents[..., 1], -local_tangents[..., 0]], axis=-1)
    tri_signs = np.sign(np.einsum("tkd,tkd->tk", outward, edge_normals[tri_edges]))

    areas, grads = _triangle_geometry_batch(coords)

    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    boundary_edges = [
        (int(e), _side_of(vertices[edges[e, 0]], vertices[edges[e, 1]]))
        for e in np.flatnonzero(counts == 1)
    ]

    mesh = TriangleMesh(
        n_divisions=n,
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        tri_edges=tri_edges,
        tri_signs=tri_signs,
        boundary_edges=boundary_edges,
        h=float(np.sqrt(2.0) / n),
        areas=areas,
        grads=grads,
        edge_lengths=edge_lengths,
        edge_normals=edge_normals,
    )
    for arr in (vertices, triangles, edges, tri_edges, tri_signs, areas, grads, edge_lengths, edge_normals):
        arr.setflags(write=False)

    logger.info(
        f"网格构造完成: N={n}, 顶点 {mesh.n_vertices}, 三角形 {mesh.n_triangles}, "
        f"边 {mesh.n_edges}, 边界边 {len(boundary_edges)}"
    )
    return mesh


def _triangle_geometry_batch(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """批量计算面积与重心坐标梯度，coords 形状为 (T, 3, 2)"""
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * det
    # grad λ_k = rot(v_{k+2} - v_{k+1}) / (2|T|)，rot(a,b) = (-b,a)
    opposite = np.roll(coords, -2, axis=1) - np.roll(coords, -1, axis=1)
    grads = np.stack([-opposite[..., 1], opposite[..., 0]], axis=-1) / det[:, None, None]
    return areas, grads


def triangle_geometry(
    mesh_or_coords: Union[TriangleMesh, np.ndarray], t: int = 0
) -> Tuple[float, np.ndarray, np.ndarray]:
    """单个三角形的面积、顶点坐标与重心坐标梯度

    既可以传入网格和三角形编号，也可以直接传入 (3, 2) 顶点坐标。
    """
    if isinstance(mesh_or_coords, TriangleMesh):
        if not 0 <= t < mesh_or_coords.n_triangles:
            raise IndexError(f"三角形编号越界: {t}")
        coords = np.asarray(mesh_or_coords.vertices[mesh_or_coords.triangles[t]], dtype=float)
    else:
        coords = np.asarray(mesh_or_coords, dtype=float)
        if coords.shape != (3, 2):
            raise ValueError(f"顶点坐标形状必须是 (3, 2)，当前为 {coords.shape}")
    areas, grads = _triangle_geometry_batch(coords[None])
    if areas[0] <= 0.0:
        raise ValueError(f"退化或顺时针三角形，面积为 {areas[0]}")
    return float(areas[0]), coords, grads[0]


def boundary_edges_on_side(mesh: TriangleMesh, side: Union[Side, str]) -> List[int]:
    """返回指定边界上的全局边编号（按编号递增）"""
    side = Side(side)
    return [edge for edge, tag in mesh.boundary_edges if tag is side]


def dump_mesh(mesh: TriangleMesh, path: Union[str, Path]) -> Path:
    """将网格写成纯文本，仅用于调试与绘图

    格式：分别以 "# vertices"、"# triangles"、"# edges" 开头的三个段落，
    边的 tag 为边界名或 interior。
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tags = {edge: side.value for edge, side in mesh.boundary_edges}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# vertices {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"# triangles {mesh.n_triangles}\n")
        for v0, v1, v2 in mesh.triangles:
            fh.write(f"{v0} {v1} {v2}\n")
        fh.write(f"# edges {mesh.n_edges}\n")
        for e, (v0, v1) in enumerate(mesh.edges):
            fh.write(f"{v0} {v1} {tags.get(e, 'interior')}\n")
    logger.info(f"网格已导出: {path}")
    return path
