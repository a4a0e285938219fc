"""
Tests for the spectral grid, state vectors and the diagonal semigroup
"""
import numpy as np
import pytest

from delaysim.models.spectral_operator import SpatialGrid, SpectralOperator, StateVector, build_laplacian
from delaysim.utils.errors import InputError


def test_point_grid_is_identity(point):
    coeffs = np.array([[3.0], [-1.5]])
    assert np.array_equal(point.to_collocation(coeffs), coeffs)
    assert np.array_equal(point.to_spectral(coeffs), coeffs)
    assert point.volume == 1.0
    assert point.n_collocation == 1


@pytest.mark.parametrize('boundary', ['neumann', 'dirichlet'])
def test_band_limited_transform_is_exact(boundary, rng):
    grid = SpatialGrid.interval(2.0, 8, boundary)
    coeffs = rng.standard_normal((2, 8))
    back = grid.to_spectral(grid.to_collocation(coeffs))
    assert np.allclose(back, coeffs, atol=1e-13)


@pytest.mark.parametrize('boundary', ['neumann', 'dirichlet'])
def test_collocation_norm_matches_spectral_norm(boundary, rng):
    grid = SpatialGrid.interval(3.0, 6, boundary)
    state = StateVector(rng.standard_normal((1, 6)), 'spectral', grid)
    assert state.norm() == pytest.approx(state.to_collocation().norm(), rel=1e-12)


def test_neumann_points_and_weights(neumann):
    assert neumann.n_collocation == 16
    assert neumann.points[0] == pytest.approx(0.5 * 2.0 / 16)
    assert neumann.collocation_weight == pytest.approx(2.0 / 16)
    assert neumann.spectral_weights[0] == pytest.approx(2.0)
    assert neumann.spectral_weights[1] == pytest.approx(1.0)


def test_dirichlet_points_exclude_boundary(dirichlet):
    m = dirichlet.n_collocation
    assert dirichlet.points[0] == pytest.approx(1.0 / (m + 1))
    assert dirichlet.points[-1] == pytest.approx(m / (m + 1))
    assert dirichlet.wavenumbers[0] == 1


def test_spatial_mean_of_constant(neumann):
    values = np.full((1, neumann.n_collocation), 2.5)
    assert neumann.spatial_mean(values)[0] == pytest.approx(2.5)


@pytest.mark.parametrize('kwargs', [
    {'domain_kind': 'point', 'boundary': 'neumann'},
    {'domain_kind': 'interval', 'boundary': 'none'},
    {'domain_kind': 'interval', 'boundary': 'neumann', 'length': -1.0},
    {'domain_kind': 'interval', 'boundary': 'neumann', 'n_modes': 4, 'n_collocation': 2},
    {'domain_kind': 'sphere'},
])
def test_invalid_grids_are_rejected(kwargs):
    with pytest.raises(InputError):
        SpatialGrid(**kwargs)


def test_laplacian_eigenvalues(neumann):
    op = build_laplacian(neumann, [0.5])
    k = np.arange(8)
    assert np.allclose(op.eigenvalues[0], 0.5 * (k * np.pi / 2.0) ** 2)
    assert op.omega == 0.0


def test_point_laplacian_is_zero(point):
    op = build_laplacian(point, [1.0, 2.0])
    assert op.n_species == 2
    assert np.all(op.eigenvalues == 0)


def test_negative_diffusivity_rejected(neumann):
    with pytest.raises(InputError):
        build_laplacian(neumann, [-0.1])


def test_semigroup_decays_each_mode(point):
    op = SpectralOperator(point, np.array([[1.0]]))
    state = StateVector([[1.0]], 'spectral', point)
    assert op.semigroup_apply(1.0, state).coefficients[0, 0] == pytest.approx(np.exp(-1.0))
    with pytest.raises(InputError):
        op.semigroup_factor(-0.1)


def test_phi1_at_zero_eigenvalue_is_step(point):
    op = SpectralOperator(point, np.array([[0.0]]))
    assert op.phi1_factor(0.3)[0, 0] == 0.3
    assert op.phi2_factor(0.3)[0, 0] == pytest.approx(0.15)


def test_phi1_closed_form(point):
    op = SpectralOperator(point, np.array([[2.0]]))
    assert op.phi1_factor(0.5)[0, 0] == pytest.approx((1 - np.exp(-1.0)) / 2.0, rel=1e-14)


def test_phi2_series_and_closed_form_agree_near_cutoff(point):
    lam = np.array([[0.999e-3, 1.001e-3]])
    op = SpectralOperator(SpatialGrid.interval(1.0, 2, 'neumann'), lam)
    series, closed = op.phi2_factor(1.0)[0]
    for value, x in ((series, 0.999e-3), (closed, 1.001e-3)):
        assert value == pytest.approx(0.5 - x / 6 + x ** 2 / 24, rel=1e-10)
    x = 1.0
    exact = (x + np.expm1(-x)) / x ** 2
    assert SpectralOperator(point, np.array([[1.0]])).phi2_factor(1.0)[0, 0] == pytest.approx(exact, rel=1e-14)


def test_omega_below_growth_rate_rejected(point):
    with pytest.raises(InputError):
        SpectralOperator(point, np.array([[-1.0]]), omega=0.5)


def test_state_arithmetic_crosses_representations(neumann, rng):
    a = StateVector(rng.standard_normal((1, 8)), 'spectral', neumann)
    b = a.to_collocation()
    assert np.allclose((a - b).coefficients, 0.0, atol=1e-13)
    assert (2.0 * a).norm() == pytest.approx(2.0 * a.norm())
    with pytest.raises(InputError):
        StateVector(np.zeros((1, 3)), 'spectral', neumann)
