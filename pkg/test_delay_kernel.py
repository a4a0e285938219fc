"""
Tests for delay measures, the delay functional and its sampled checks
"""
import numpy as np
import pytest
from scipy.integrate import quad

from delaysim.models.delay_kernel import (ConstantFunctional, DelayAtom, DelayDensity, DelayMeasure,
                                          HeadValueFunctional, IgnoreInterval, ModulusTable, PointMap,
                                          StateMeanFunctional, TimeTableFunctional, atom_moduli,
                                          atom_positions, check_ignore_interval, check_variation_bound,
                                          check_variation_lipschitz, eval_delay_functional,
                                          fd_perturbation_bound, is_nondecreasing, probe_point_map,
                                          split_delay_functional, total_variation, total_weight)
from delaysim.models.history import Segment
from delaysim.models.presets import random_segment, uniform_state
from delaysim.utils.errors import ContractViolation, InputError


def identity_ramp(point):
    """psi(theta) = theta on [-1, 0]"""
    return Segment(0.0, 1.0, [-1.0, 0.0], [[[-1.0]], [[0.0]]], point)


def state_mean_measure(eta_ign=0.4375):
    delay = StateMeanFunctional(0.5, 1.0 / 16.0, window=(-1.0, -0.5), transform='clip')
    return DelayMeasure((DelayAtom(delay, ConstantFunctional(1.0)),), None, 1.0, IgnoreInterval(eta_ign),
                        delay_horizon=1.0)


def value(state):
    return float(state.to_spectral().coefficients[0, 0])


def test_constant_atom_reads_oldest_value(point):
    psi = Segment(0.0, 1.0, [-1.0, 0.0], [[[4.0]], [[-2.0]]], point)
    measure = DelayMeasure((DelayAtom.constant(1.0),), None, 1.0, delay_horizon=1.0)
    assert value(eval_delay_functional(measure, PointMap.identity(), 0.0, psi)) == 4.0


def test_density_averages_constant(point):
    psi = Segment.constant(point, uniform_state(point, [3.0]), 0.0, 2.0)
    measure = DelayMeasure(density=DelayDensity.constant(0.5, 2.0), delay_horizon=2.0)
    assert value(eval_delay_functional(measure, PointMap.identity(), 0.0, psi)) == pytest.approx(3.0, rel=1e-14)


def test_density_integral_matches_adaptive_quadrature(point):
    psi = Segment(0.0, 1.0, [-1.0, -0.5, 0.0], [[[1.0]], [[3.0]], [[0.5]]], point)
    measure = DelayMeasure(density=DelayDensity.table([-1.0, 0.0], [0.0, 2.0]), delay_horizon=1.0)
    p = PointMap.nicholson(2.0)

    def integrand(theta):
        u = np.interp(theta, [-1.0, -0.5, 0.0], [1.0, 3.0, 0.5])
        return 2.0 * (theta + 1.0) * 2.0 * u * np.exp(-u)

    expected, _ = quad(integrand, -1.0, 0.0, points=[-0.5], epsabs=1e-13, epsrel=1e-13)
    assert value(eval_delay_functional(measure, p, 0.0, psi)) == pytest.approx(expected, rel=1e-10)


def test_state_dependent_atom_value(point):
    # mean of theta over [-1, -0.5] is -0.75, so eta = 0.5 - 0.75/16
    measure = state_mean_measure()
    psi = identity_ramp(point)
    [(eta, h)] = atom_positions(measure, 0.0, psi)
    assert eta == pytest.approx(0.453125, abs=1e-14)
    assert h == 1.0
    assert value(eval_delay_functional(measure, PointMap.identity(), 0.0, psi)) == pytest.approx(-0.453125,
                                                                                                 abs=1e-14)


def test_split_components(point):
    psi = identity_ramp(point)
    p = PointMap.identity()
    atoms_only = state_mean_measure()
    f_c, f_d = split_delay_functional(atoms_only, p, 0.0, psi)
    assert np.all(f_c.coefficients == 0)

    density_only = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), delay_horizon=1.0)
    f_c, f_d = split_delay_functional(density_only, p, 0.0, psi)
    assert np.all(f_d.coefficients == 0)
    assert value(f_c) == pytest.approx(-0.5, rel=1e-14)

    mixed = DelayMeasure(atoms_only.atoms, DelayDensity.constant(1.0, 1.0), 2.0, IgnoreInterval(0.4375),
                         delay_horizon=1.0)
    f_c, f_d = split_delay_functional(mixed, p, 0.0, psi)
    total = eval_delay_functional(mixed, p, 0.0, psi)
    assert np.array_equal((f_c + f_d).coefficients, total.coefficients)


def test_atoms_add_bit_exactly(point, rng):
    psi = random_segment(point, 1, 1.0, rng)
    p = PointMap.identity()
    first = DelayAtom.constant(0.7, 0.3)
    second = DelayAtom.constant(0.9, 0.6)
    both = DelayMeasure((first, second), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    only_first = DelayMeasure((first,), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    only_second = DelayMeasure((second,), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    combined = eval_delay_functional(both, p, 0.0, psi)
    parts = eval_delay_functional(only_first, p, 0.0, psi) + eval_delay_functional(only_second, p, 0.0, psi)
    assert np.array_equal(combined.coefficients, parts.coefficients)


def test_weights_scale_linearly(point, rng):
    psi = random_segment(point, 1, 1.0, rng)
    base = DelayMeasure((DelayAtom.constant(0.8, 0.5),), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    scaled = DelayMeasure((DelayAtom.constant(0.8, 1.5),), None, 2.0, IgnoreInterval(0.5), delay_horizon=1.0)
    p = PointMap.linear_map(2.0)
    assert value(eval_delay_functional(scaled, p, 0.0, psi)) == pytest.approx(
        3.0 * value(eval_delay_functional(base, p, 0.0, psi)), rel=1e-14)


def test_quadrature_is_converged(neumann, rng):
    psi = random_segment(neumann, 1, 1.0, rng)
    measure = DelayMeasure(density=DelayDensity.table([-1.0, -0.3, 0.0], [0.5, 2.0, 0.0]), max_variation=2.0,
                           delay_horizon=1.0)
    p = PointMap.nicholson(2.0, neumann.volume)
    coarse = split_delay_functional(measure, p, 0.0, psi, n_nodes=32)[0]
    fine = split_delay_functional(measure, p, 0.0, psi, n_nodes=64)[0]
    assert (coarse - fine).norm() <= 1e-10 * fine.norm()


def test_atom_inside_ignore_interval_is_violation(point):
    measure = DelayMeasure((DelayAtom.constant(0.2),), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    with pytest.raises(ContractViolation) as excinfo:
        atom_positions(measure, 0.0, identity_ramp(point))
    assert excinfo.value.assumption == 'atom-position'


def test_ignore_interval_longer_than_horizon_rejected():
    with pytest.raises(InputError):
        DelayMeasure((DelayAtom.constant(1.0),), None, 1.0, IgnoreInterval(1.5), delay_horizon=1.0)


def test_ignore_interval_table():
    eta = IgnoreInterval(times=(0.0, 1.0, 2.0), values=(0.5, 0.2, 0.4))
    assert eta(0.5) == pytest.approx(0.35)
    assert eta.minimum(0.0, 2.0) == pytest.approx(0.2)
    assert eta.minimum(0.0, 0.5) == pytest.approx(0.35)
    with pytest.raises(InputError):
        IgnoreInterval(times=(0.0, 1.0), values=(0.5, 0.0))


def test_variation_bound_report(point):
    psi = identity_ramp(point)
    light = DelayMeasure((DelayAtom.constant(1.0, 1.0),), None, 2.0, delay_horizon=1.0)
    report = check_variation_bound(light, [(0.0, psi)])
    assert report.passed
    assert report.value == 1.0

    heavy = DelayMeasure((DelayAtom.constant(1.0, 3.0),), None, 2.0, delay_horizon=1.0)
    report = check_variation_bound(heavy, [(0.0, psi)])
    assert report.flagged
    assert 'exceeded' in report.message

    density = DelayMeasure(density=DelayDensity.constant(0.5, 2.0), delay_horizon=2.0)
    psi2 = Segment.constant(point, uniform_state(point, [1.0]), 0.0, 2.0)
    assert total_variation(density, 0.0, psi2) == pytest.approx(1.0)


def test_variation_lipschitz_on_time_modulated_density(point):
    psi = Segment.constant(point, uniform_state(point, [1.0]), 0.0, 1.0)
    density = DelayDensity.time_modulated(1.0, 1.0, 1.0, 1.0)
    pairs = [((0.0, psi), (np.pi / 2, psi))]
    loose = DelayMeasure(density=density, max_variation=2.0, density_lipschitz=0.64, delay_horizon=1.0)
    tight = DelayMeasure(density=density, max_variation=2.0, density_lipschitz=0.63, delay_horizon=1.0)
    assert check_variation_lipschitz(loose, pairs).passed
    report = check_variation_lipschitz(tight, pairs)
    assert report.flagged
    assert report.rows[0]['variation_difference'] == pytest.approx(1.0, rel=1e-12)


def test_variation_lipschitz_without_density_is_vacuous(point):
    measure = DelayMeasure((DelayAtom.constant(1.0),), delay_horizon=1.0)
    report = check_variation_lipschitz(measure, [])
    assert not report.applicable
    assert not report.flagged


def test_ignore_interval_check_passes_for_truncated_atoms(point, rng):
    psi = random_segment(point, 1, 1.0, rng, n_knots=17)
    report = check_ignore_interval(state_mean_measure(), 0.0, psi, 100, rng)
    assert report.passed


def test_ignore_interval_check_catches_head_reader(point, rng):
    atom = DelayAtom(ConstantFunctional(1.0), HeadValueFunctional(), reads_full_segment=True)
    measure = DelayMeasure((atom,), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    psi = random_segment(point, 1, 1.0, rng)
    report = check_ignore_interval(measure, 0.0, psi, 5, rng)
    assert report.flagged
    assert 'atoms [0]' in report.message


def test_ignore_interval_check_without_atoms(point, rng):
    measure = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), delay_horizon=1.0)
    assert check_ignore_interval(measure, 0.0, identity_ramp(point), 3, rng).passed


def test_perturbation_bound_equal_histories(point):
    psi = identity_ramp(point)
    measure = state_mean_measure()
    result = fd_perturbation_bound(measure, PointMap.identity(), 0.0, psi, psi, atom_moduli(measure, psi))
    assert result.delta == 0.0
    assert result.measured == 0.0
    assert result.holds


def test_perturbation_bound_constant_atom(point):
    first = Segment(0.0, 1.0, [-1.0, 0.0], [[[1.0]], [[1.0]]], point)
    second = Segment(0.0, 1.0, [-1.0, 0.0], [[[1.2]], [[1.1]]], point)
    measure = DelayMeasure((DelayAtom.constant(1.0, 0.5),), None, 1.0, delay_horizon=1.0)
    zero = ModulusTable.zero()
    result = fd_perturbation_bound(measure, PointMap.identity(), 0.0, first, second, (zero, zero, zero))
    assert result.bound == pytest.approx(0.2)
    assert result.measured == pytest.approx(0.1)
    assert result.holds


def test_perturbation_bound_state_dependent(point):
    first = identity_ramp(point)
    second = Segment(0.0, 1.0, [-1.0, -0.5, 0.0], [[[-0.99]], [[-0.49]], [[0.0]]], point)
    measure = state_mean_measure()
    result = fd_perturbation_bound(measure, PointMap.identity(), 0.0, first, second, atom_moduli(measure, first))
    assert result.measured > 0
    assert result.holds


def test_perturbation_bound_needs_one_atom(point):
    psi = identity_ramp(point)
    measure = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), delay_horizon=1.0)
    with pytest.raises(InputError):
        atom_moduli(measure, psi)


def test_total_weight_and_monotonicity(point):
    psi = identity_ramp(point)
    mixed = DelayMeasure((DelayAtom.constant(0.8, 0.25),), DelayDensity.constant(0.75, 1.0), 1.0,
                         IgnoreInterval(0.5), delay_horizon=1.0)
    assert total_weight(mixed, 0.0, psi) == pytest.approx(1.0, abs=1e-14)
    assert is_nondecreasing(mixed, 0.0, psi)
    signed = DelayMeasure((DelayAtom.constant(0.8, -0.25),), None, 1.0, IgnoreInterval(0.5), delay_horizon=1.0)
    assert not is_nondecreasing(signed, 0.0, psi)


def test_nicholson_point_map_bounds(point, rng):
    p = PointMap.nicholson(2.0)
    probes = [(0.0, np.array([[x]])) for x in rng.uniform(0.0, 5.0, size=20)]
    assert probe_point_map(p, point, probes).passed
    assert p(0.0, np.array([[1.0]]))[0, 0] == pytest.approx(2.0 / np.e)


def test_time_table_functional():
    f = TimeTableFunctional([0.0, 1.0], [0.5, 1.0])
    assert f(0.5, None) == pytest.approx(0.75)
    assert f.value_range() == (0.5, 1.0)
    with pytest.raises(InputError):
        TimeTableFunctional([1.0, 0.0], [0.5, 1.0])


def test_modulus_table_validation():
    assert ModulusTable.linear(2.0)(0.5) == pytest.approx(1.0)
    with pytest.raises(InputError):
        ModulusTable((0.0, 1.0), (1.0, 0.5))
    with pytest.raises(InputError):
        ModulusTable.zero()(-1.0)
