from math import factorial
import numpy as np
import pytest
from src.mesh.triangle_mesh import build_unit_square_mesh, triangle_geometry
from src.fem.quadrature import (
    MESH_CACHE_SIZE,
    SUPPORTED_DEGREES,
    physical_points,
    quadrature_rule,
    edge_gauss_rule,
    integrate_function,
)
from src.fem.rt0 import rt0_basis_eval, rt0_basis_divergence, eval_rt0, rt0_divergences, rt0_tabulate
from src.fem.fields import P0VectorField, P1ScalarField, RT0Field, P0ScalarField
from src.fem.norms import l2_norm, l2_error_vs_exact, mean_value
from src.fem.nonlinearity import forchheimer_drag

REFERENCE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.mark.parametrize("degree", SUPPORTED_DEGREES)
def test_weights_sum_to_one(degree):
    rule = quadrature_rule(degree)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(rule.points.sum(axis=1), 1.0, atol=1e-15)


@pytest.mark.parametrize("degree", SUPPORTED_DEGREES)
def test_monomials_integrated_exactly(degree):
    rule = quadrature_rule(degree)
    # 参考三角形上 x = λ1, y = λ2
    x, y = rule.points[:, 1], rule.points[:, 2]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            approx = 0.5 * np.sum(rule.weights * x ** a * y ** b)
            assert approx == pytest.approx(exact, rel=1e-13)


def test_unsupported_degree():
    with pytest.raises(ValueError):
        quadrature_rule(3)


def test_edge_rule_exact_to_degree_five():
    rule = edge_gauss_rule()
    for k in range(6):
        assert np.sum(rule.weights * rule.points ** k) == pytest.approx(1.0 / (k + 1), rel=1e-14)


def test_integrate_function_on_mesh(mesh4):
    assert integrate_function(mesh4, lambda x, y: x * y, quadrature_rule(2)) == pytest.approx(0.25)
    assert integrate_function(mesh4, lambda x, y: x ** 2 * y ** 3, quadrature_rule(5)) == pytest.approx(1.0 / 12.0)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_rt0_normal_component_duality(k):
    geometry = triangle_geometry(REFERENCE)
    area, coords, _ = geometry
    for j in range(3):
        a, b = coords[(j + 1) % 3], coords[(j + 2) % 3]
        tangent = b - a
        outward = np.array([tangent[1], -tangent[0]]) / np.linalg.norm(tangent)
        for s in (0.0, 0.3, 0.5, 1.0):
            point = np.zeros(3)
            point[(j + 1) % 3], point[(j + 2) % 3] = 1.0 - s, s
            value = rt0_basis_eval(geometry, k, point) @ outward
            assert value == pytest.approx(1.0 if j == k else 0.0, abs=1e-14)


def test_rt0_divergence_reference():
    geometry = triangle_geometry(REFERENCE)
    assert rt0_basis_divergence(geometry, 0) == pytest.approx(np.sqrt(2.0) / 0.5)
    assert rt0_basis_divergence(geometry, 1, sign=-1.0) == pytest.approx(-2.0)


def test_rt0_basis_errors():
    geometry = triangle_geometry(REFERENCE)
    with pytest.raises(IndexError):
        rt0_basis_eval(geometry, 3, np.ones(3) / 3)
    with pytest.raises(ValueError):
        rt0_basis_eval((0.0, REFERENCE, np.zeros((3, 2))), 0, np.ones(3) / 3)


def _barycentric_in(mesh, t, weights_by_vertex):
    point = np.zeros(3)
    for k, v in enumerate(mesh.triangles[t]):
        point[k] = weights_by_vertex.get(int(v), 0.0)
    return point


def test_rt0_normal_flux_continuity(mesh4, rng):
    values = rng.normal(size=mesh4.n_edges)
    interior = [(e, inc) for e, inc in mesh4.edge_triangles().items() if len(inc) == 2]
    chosen = rng.choice(len(interior), size=20, replace=False)
    for i in chosen:
        edge, incident = interior[i]
        v0, v1 = mesh4.edges[edge]
        for s in (0.2, 0.5, 0.9):
            weights = {int(v0): 1.0 - s, int(v1): s}
            normals = [
                eval_rt0(mesh4, values, t, _barycentric_in(mesh4, t, weights)) @ mesh4.edge_normals[edge]
                for t, _ in incident
            ]
            assert normals[0] == pytest.approx(normals[1], abs=1e-12)
            assert normals[0] == pytest.approx(values[edge], abs=1e-12)


def test_rt0_interpolates_constants_exactly(mesh4):
    field = RT0Field.interpolate(mesh4, lambda x, y: np.stack(np.broadcast_arrays(1.5, -0.5 + 0 * x), axis=-1))
    values = field.evaluate(mesh4, quadrature_rule(5))
    np.testing.assert_allclose(values[..., 0], 1.5, atol=1e-12)
    np.testing.assert_allclose(values[..., 1], -0.5, atol=1e-12)
    np.testing.assert_allclose(field.divergence(mesh4), 0.0, atol=1e-11)


def test_rt0_interpolant_of_radial_field(mesh4):
    field = RT0Field.interpolate(mesh4, lambda x, y: np.stack([x, y], axis=-1))
    np.testing.assert_allclose(field.divergence(mesh4), 2.0, atol=1e-11)
    assert l2_error_vs_exact(mesh4, field, lambda x, y: np.stack([x, y], axis=-1)) < 1e-12


def test_rt0_divergence_table(mesh4):
    np.testing.assert_allclose(
        np.abs(rt0_divergences(mesh4)) * mesh4.areas[:, None],
        mesh4.edge_lengths[mesh4.tri_edges],
    )


def test_l2_norms_of_simple_fields(mesh4):
    assert l2_norm(mesh4, P1ScalarField(np.ones(mesh4.n_vertices))) == pytest.approx(1.0)
    x = P1ScalarField.interpolate(mesh4, lambda x, y: x)
    assert l2_norm(mesh4, x) == pytest.approx(np.sqrt(1.0 / 3.0))
    u = P0VectorField(np.tile([3.0, 4.0], mesh4.n_triangles))
    assert l2_norm(mesh4, u) == pytest.approx(5.0)
    assert l2_norm(mesh4, P0ScalarField(np.full(mesh4.n_triangles, -2.0))) == pytest.approx(2.0)
    assert mean_value(mesh4, x) == pytest.approx(0.5)


def test_l2_error_of_representable_field(mesh4):
    exact = lambda x, y: 2.0 * x - y + 0.25
    field = P1ScalarField.interpolate(mesh4, exact)
    assert l2_error_vs_exact(mesh4, field, exact) < 1e-13


def _subdivided_centroids(m):
    """参考三角形均分为 m² 个小三角形后各小三角形的重心"""
    corners = []
    for i in range(m):
        for j in range(m - i):
            corners.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j < m - 1:
                corners.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    return np.asarray(corners, dtype=float).mean(axis=1) / m


def test_l2_error_against_subdivided_oracle():
    mesh = build_unit_square_mesh(2)
    exact = lambda x, y: np.stack(np.broadcast_arrays(x, 0.0 * y), axis=-1)
    field = P0VectorField.interpolate(mesh, exact)

    m = 100
    ref = _subdivided_centroids(m)
    total = 0.0
    for t in range(mesh.n_triangles):
        p0, p1, p2 = mesh.tri_coords[t]
        pts = p0 + ref[:, :1] * (p1 - p0) + ref[:, 1:] * (p2 - p0)
        diff = exact(pts[:, 0], pts[:, 1]) - field.values[t]
        total += mesh.areas[t] / m ** 2 * np.sum(diff * diff)
    # 中点公式的相对误差为 O(1/m²)
    assert l2_error_vs_exact(mesh, field, exact) == pytest.approx(np.sqrt(total), rel=1e-3)
    assert 0.0 < np.sqrt(total) < 0.25


def test_field_size_check(mesh4):
    with pytest.raises(ValueError):
        l2_norm(mesh4, P1ScalarField(np.ones(3)))
    with pytest.raises(TypeError):
        P1ScalarField(np.ones(3)) - P0ScalarField(np.ones(3))


def test_zeros_shapes(mesh4):
    assert P0VectorField.zeros(mesh4).values.shape == (mesh4.n_triangles, 2)
    assert RT0Field.zeros(mesh4).values.shape == (mesh4.n_edges,)


def test_forchheimer_monotonicity_scalar(rng):
    x = rng.normal(scale=10.0, size=10000)
    y = rng.normal(scale=10.0, size=10000)
    product = (forchheimer_drag(x, axis=None) - forchheimer_drag(y, axis=None)) * (x - y)
    assert np.all(product >= 0.0)


def test_forchheimer_monotonicity_vector(rng):
    u = rng.normal(size=(10000, 2))
    v = rng.normal(size=(10000, 2))
    product = np.einsum("nd,nd->n", forchheimer_drag(u) - forchheimer_drag(v), u - v)
    assert np.all(product >= -1e-12)


def test_forchheimer_values():
    np.testing.assert_allclose(forchheimer_drag(np.array([3.0, 4.0])), [15.0, 20.0])
    np.testing.assert_allclose(forchheimer_drag(np.array([-2.0]), q=2.0, axis=None), [-8.0])
    with pytest.raises(ValueError):
        forchheimer_drag(np.ones(2), q=-1.0)


def test_forchheimer_monotonicity_random_exponent(rng):
    for q in rng.uniform(0.0, 3.0, size=200):
        u = rng.normal(scale=2.0, size=(50, 2))
        v = rng.normal(scale=2.0, size=(50, 2))
        product = np.einsum("nd,nd->n", forchheimer_drag(u, q=q) - forchheimer_drag(v, q=q), u - v)
        scale = (1.0 + np.linalg.norm(u, axis=1) + np.linalg.norm(v, axis=1)) ** (q + 2.0)
        assert np.all(product >= -1e-12 * scale), f"q={q}"


def test_mesh_tables_are_not_kept_for_every_mesh():
    rule = quadrature_rule(5)
    for n in range(1, MESH_CACHE_SIZE + 4):
        rt0_tabulate(build_unit_square_mesh(n), rule)
    assert physical_points.cache_info().currsize <= MESH_CACHE_SIZE
    assert rt0_tabulate.cache_info().currsize <= MESH_CACHE_SIZE
