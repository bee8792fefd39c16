from dataclasses import replace
import numpy as np
import pytest
from src.mesh.triangle_mesh import Side, build_unit_square_mesh
from src.fem.quadrature import quadrature_rule, integrate_function
from src.cases import (
    PermeabilityField,
    make_case,
    keps_case,
    consistency_check,
    compatibility_defect,
)

MANUFACTURED = ("Ex1FA", "Ex2FA", "Ex1SA", "Ex2SA")


def test_ex1fa_velocity_at_left_midpoint():
    case = make_case("Ex1FA", gamma=1.0, beta=10.0)
    u = case.exact_u(np.array(0.0), np.array(0.5))
    np.testing.assert_allclose(u, [1.0, 0.0], atol=1e-15)
    assert np.linalg.norm(u) == pytest.approx(1.0)


def test_ex1fa_gradient_closed_form():
    case = make_case("Ex1FA", gamma=1.0, beta=0.0)
    g = case.grad_p(np.array(0.25), np.array(0.5))
    np.testing.assert_allclose(g, [0.0, -np.pi * np.cos(np.pi / 4)], atol=1e-14)


@pytest.mark.parametrize("name", ["Ex1FA", "Ex2FA"])
def test_flux_cases_have_zero_mean_pressure(name):
    case = make_case(name)
    assert integrate_function(build_unit_square_mesh(32), case.exact_p, quadrature_rule(5)) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("name", ["Ex1SA", "Ex2SA"])
def test_pressure_cases_vanish_on_boundary(name):
    case = make_case(name)
    s = np.linspace(0.0, 1.0, 41)
    for x, y in ((0 * s, s), (0 * s + 1, s), (s, 0 * s), (s, 0 * s + 1)):
        np.testing.assert_allclose(case.exact_p(x, y), 0.0, atol=1e-13)


@pytest.mark.parametrize("name", MANUFACTURED)
def test_consistency_check_passes(name):
    report = consistency_check(make_case(name, gamma=1.0, beta=10.0))
    assert report.passed
    assert report.n_points == 1000
    assert report.max_momentum_residual <= 1e-10
    assert report.max_divergence_residual <= 1e-10


@pytest.mark.parametrize("name", MANUFACTURED)
def test_consistency_check_pure_darcy(name):
    assert consistency_check(make_case(name, gamma=20.0, beta=0.0)).passed


def test_consistency_check_detects_wrong_gradient():
    case = make_case("Ex2SA", gamma=1.0, beta=10.0)
    corrupted = replace(case, grad_p=lambda x, y: -case.grad_p(x, y))
    report = consistency_check(corrupted)
    assert not report.passed
    assert len(report.failing_points) > 900


def test_consistency_check_requires_exact_solution():
    with pytest.raises(ValueError):
        consistency_check(keps_case(1e6))


@pytest.mark.parametrize("name", ["Ex1FA", "Ex2FA"])
@pytest.mark.parametrize("gamma", [1.0, 20.0])
def test_compatibility_condition(name, gamma):
    assert abs(compatibility_defect(make_case(name, gamma=gamma))) < 1e-8


@pytest.mark.parametrize("name", ["Ex1FA", "Ex2FA"])
def test_boundary_flux_matches_exact_normal_velocity(name):
    case = make_case(name, gamma=3.0)
    s = np.linspace(0.0, 1.0, 17)
    points = {
        Side.LEFT: (0 * s, s),
        Side.RIGHT: (0 * s + 1, s),
        Side.BOTTOM: (s, 0 * s),
        Side.TOP: (s, 0 * s + 1),
    }
    for side, (x, y) in points.items():
        normal = case.exact_u(x, y) @ np.asarray(side.outward_normal)
        np.testing.assert_allclose(case.flux(side)(x, y), normal, atol=1e-12)


def test_divergence_free_and_source():
    case = make_case("Ex1FA")
    x = np.array([0.3, 0.7])
    assert np.all(case.b(x, x) == 0.0)
    case2 = make_case("Ex2FA", gamma=2.0)
    assert case2.b(np.array(0.0), np.array(0.0)) == pytest.approx(4.0)


def test_unknown_case():
    with pytest.raises(ValueError):
        make_case("Ex3FA")


def test_forcing_is_built_from_exact_solution():
    case = make_case("Ex2FA", gamma=2.0, beta=5.0)
    x, y = np.array(0.4), np.array(0.9)
    u = case.exact_u(x, y)
    expected = u + 5.0 * np.linalg.norm(u) * u + case.grad_p(x, y)
    np.testing.assert_allclose(case.f(x, y), expected, rtol=1e-14)


def test_darcy_forcing_drops_the_drag_term():
    x, y = np.array([0.2, 0.7]), np.array([0.9, 0.4])
    for name in MANUFACTURED:
        np.testing.assert_allclose(
            make_case(name, gamma=2.0, beta=10.0).darcy_f(x, y), make_case(name, gamma=2.0, beta=0.0).f(x, y), rtol=1e-14
        )
    np.testing.assert_array_equal(keps_case(1e6).darcy_f(x, y), np.zeros((2, 2)))


def test_keps_bounds():
    assert keps_case(1e6).permeability.bounds == (1.0, 1e6)
    assert keps_case(1e-6).permeability.bounds == (1e-6, 1.0)
    assert keps_case(1.0).permeability.bounds == (1.0, 1.0)


def test_keps_data():
    case = keps_case(1e6)
    x = np.array([0.1, 0.3])
    np.testing.assert_array_equal(case.f(x, x), np.zeros((2, 2)))
    np.testing.assert_array_equal(case.b(x, x), [1.0, 1.0])
    assert not case.has_exact
    assert make_case("KepsCase", eps_k=1e-6).permeability.value == 1e-6


@pytest.mark.parametrize("eps_k", [0.0, -1.0])
def test_keps_rejects_nonpositive(eps_k):
    with pytest.raises(ValueError):
        keps_case(eps_k)


def test_identity_when_eps_is_one(mesh8):
    np.testing.assert_array_equal(keps_case(1.0).permeability.element_inverse(mesh8), 1.0)


def test_discontinuous_permeability_at_centroids():
    mesh = build_unit_square_mesh(60)
    field = PermeabilityField.discontinuous(1e6)
    kinv = field.element_inverse(mesh)
    # Ω₀ 的面积为 1/8，每个单元面积为 1/7200
    assert np.sum(kinv == 1e-6) == 900
    assert np.sum(kinv == 1.0) == mesh.n_triangles - 900


def test_permeability_jump_location():
    field = PermeabilityField.discontinuous(1e-6)
    x = np.array([0.24, 0.26, 0.49, 0.51])
    np.testing.assert_allclose(field.inverse_at(x, np.full(4, 0.5)), [1.0, 1e6, 1e6, 1.0], rtol=1e-15)


def test_scalar_permeability():
    field = PermeabilityField.scalar(4.0)
    assert field.bounds == (4.0, 4.0)
    assert field.inverse_at(np.array(0.1), np.array(0.2)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        PermeabilityField.scalar(0.0)
