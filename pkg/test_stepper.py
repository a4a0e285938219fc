"""
Tests for the frozen-coefficient and Picard steppers
"""
import numpy as np
import pytest

from delaysim.models.delay_kernel import DelayAtom, DelayMeasure, IgnoreInterval, PointMap
from delaysim.models.history import HistoryBuffer, Segment
from delaysim.models.presets import (perturb_segment, preset_linear_benchmark, preset_nicholson,
                                     preset_sdd_benchmark, uniform_state)
from delaysim.models.rhs import DelayRHS, OuterMap
from delaysim.models.spectral_operator import SpectralOperator, StateVector, build_laplacian
from delaysim.solvers.oracle import compare, solve_reference
from delaysim.solvers.stepper import (STATUS_BLOWUP, StepperConfig, continuous_dependence_experiment,
                                      gronwall_constant, solve, step_frozen, step_times)
from delaysim.utils.errors import InputError


def unit_history(grid, r=1.0):
    return Segment.constant(grid, uniform_state(grid, [1.0]), 0.0, r)


def solve_preset(preset, **kwargs):
    cfg = StepperConfig(**{'end_time': preset.end_time, **kwargs})
    return solve(preset.operator, preset.rhs, preset.initial, preset.start_time, cfg)


def test_pure_semigroup_decay(point):
    op = SpectralOperator(point, np.array([[1.0]]))
    rhs = DelayRHS((), OuterMap.zero(), 1.0)
    result = solve(op, rhs, unit_history(point), 0.0, StepperConfig(dt=0.1, end_time=1.0))
    assert result.completed
    assert result.buffer.last_state.coefficients[0, 0] == pytest.approx(np.exp(-1.0), rel=1e-12)


def test_constant_forcing_without_diffusion(point):
    op = build_laplacian(point, [0.0])
    rhs = DelayRHS((), OuterMap.constant([1.0]), 1.0)
    result = solve(op, rhs, unit_history(point), 0.0, StepperConfig(dt=0.25, end_time=1.0))
    assert result.buffer.last_state.coefficients[0, 0] == 2.0


def test_single_frozen_step_on_linear_benchmark():
    preset = preset_linear_benchmark()
    buffer = HistoryBuffer.from_segment(preset.initial)
    state = step_frozen(preset.operator, preset.rhs, 0.0, 0.5, buffer)
    assert state.coefficients[0, 0] == 1.5


def test_step_times_land_on_end_time():
    times = step_times(0.0, 1.0, 0.3)
    assert times[0] == 0.0
    assert times[-1] == 1.0
    assert len(times) == 5
    assert list(step_times(2.0, 2.0, 0.1)) == [2.0]


def test_equilibrium_is_preserved_by_picard(point):
    measure = DelayMeasure((DelayAtom.constant(1.0),), ignore_interval=IgnoreInterval(1.0), delay_horizon=1.0)
    rhs = DelayRHS.single(measure, PointMap.identity(), OuterMap.affine(1.0))
    op = build_laplacian(point, [0.0])
    result = solve(op, rhs, unit_history(point), 0.0, StepperConfig(dt=0.1, end_time=3.0, scheme='picard'))
    assert result.completed
    assert np.all(result.buffer.values == 1.0)


def test_picard_reproduces_linear_benchmark():
    result = solve_preset(preset_linear_benchmark(), dt=0.01, scheme='picard')
    assert result.completed
    assert result.buffer.state_at(1.0).coefficients[0, 0] == pytest.approx(2.0, abs=1e-10)
    assert result.buffer.last_state.coefficients[0, 0] == pytest.approx(3.5, abs=1e-10)
    assert all(row['iterations'] <= 3 for row in result.diagnostics)


def test_picard_stores_midpoints():
    result = solve_preset(preset_linear_benchmark(end_time=1.0), dt=0.1, scheme='picard')
    assert len(result.buffer) == 2 + 2 * 10
    assert result.buffer.state_at(0.55).coefficients[0, 0] == pytest.approx(1.55, abs=1e-12)


def test_frozen_scheme_is_first_order():
    # exact in the first window; on [1, 2] the scheme is explicit Euler for u' = t
    errors = []
    for dt in (0.1, 0.05, 0.025):
        result = solve_preset(preset_linear_benchmark(), dt=dt)
        assert result.buffer.state_at(1.0).coefficients[0, 0] == pytest.approx(2.0, abs=1e-12)
        errors.append(abs(result.buffer.last_state.coefficients[0, 0] - 3.5))
    assert errors[0] == pytest.approx(0.05, rel=1e-6)
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(orders - 1.0) < 0.3)


def test_picard_is_second_order_on_state_dependent_delay():
    preset = preset_sdd_benchmark()
    reference = solve_reference(preset.operator, preset.rhs, preset.initial, 0.0, 0.25, grid_n=1024)
    errors = []
    for dt in (0.05, 0.025, 0.0125):
        result = solve_preset(preset, dt=dt, scheme='picard')
        assert result.completed
        errors.append(compare(reference, result))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.7)


def test_zero_length_solve():
    preset = preset_linear_benchmark()
    result = solve(preset.operator, preset.rhs, preset.initial, 0.0, StepperConfig(end_time=0.0))
    assert result.completed
    assert len(result.buffer) == preset.initial.times.size
    assert result.diagnostics == []


def test_step_longer_than_ignore_interval_rejected():
    with pytest.raises(InputError):
        solve_preset(preset_linear_benchmark(), dt=1.5)


def test_history_must_match_model(point):
    preset = preset_linear_benchmark()
    short = Segment.constant(point, uniform_state(point, [1.0]), 0.0, 0.5)
    with pytest.raises(InputError):
        solve(preset.operator, preset.rhs, short, 0.0, StepperConfig(end_time=1.0))
    with pytest.raises(InputError):
        solve(preset.operator, preset.rhs, preset.initial, 0.5, StepperConfig(end_time=1.0))
    with pytest.raises(InputError):
        solve(preset.operator, preset.rhs, preset.initial, 0.0, StepperConfig(end_time=-1.0))


def test_nicholson_zero_stays_zero():
    result = solve_preset(preset_nicholson(p1=2.0, initial_value=0.0, end_time=5.0), dt=0.05)
    assert result.completed
    assert np.all(result.buffer.values == 0.0)


def test_nicholson_positive_equilibrium():
    # p1 = e puts the equilibrium at u = 1
    result = solve_preset(preset_nicholson(p1=np.e, d=1.0, initial_value=1.0, end_time=5.0), dt=0.01)
    assert result.completed
    assert np.max(np.abs(result.buffer.values - 1.0)) < 1e-8


def test_blowup_stops_the_solve():
    result = solve_preset(preset_linear_benchmark(), dt=0.1, blowup_norm=1.55)
    assert result.status == STATUS_BLOWUP
    assert not result.completed
    assert result.status_time == pytest.approx(0.6)
    assert 'exceeds' in result.summary()


def test_semigroup_is_exact_on_interval(neumann, rng):
    op = build_laplacian(neumann, [0.5])
    state = StateVector(rng.standard_normal((1, neumann.n_modes)), 'spectral', neumann)
    phi = Segment.constant(neumann, state, 0.0, 1.0)
    result = solve(op, DelayRHS((), OuterMap.zero(), 1.0), phi, 0.0, StepperConfig(dt=0.1, end_time=1.0))
    expected = np.exp(-op.eigenvalues) * state.coefficients
    assert np.allclose(result.buffer.last_state.coefficients, expected, rtol=1e-12, atol=1e-15)


def test_first_window_matches_constant_extension():
    preset = preset_sdd_benchmark()
    result = solve_preset(preset, dt=0.005, scheme='picard')
    assert result.completed
    assert result.extension_checks == 50


def test_gronwall_constant():
    assert gronwall_constant(0.0, 1.0, 1.0, 1.0) == pytest.approx(np.e ** 2)
    assert gronwall_constant(0.5, 0.0, 3.0, 2.0) == pytest.approx(np.e)


def test_gronwall_exponent_scales_with_horizon():
    single_window = np.exp(0.0) * np.exp(1.0 * (1.0 + 1.0) * np.exp(0.0))
    assert gronwall_constant(0.0, 1.0, 1.0, 1.0) == pytest.approx(single_window)
    assert gronwall_constant(0.0, 1.0, 1.0, 2.0) == pytest.approx(np.e ** 4)
    assert gronwall_constant(0.0, 1.0, 1.0, 2.0) > 2.0 * single_window


def test_continuous_dependence_on_density_model(rng):
    preset = preset_linear_benchmark('density')
    perturbations = [perturb_segment(preset.initial, rng, 1e-3) for _ in range(20)] + [preset.initial]
    report = continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial, perturbations,
                                              0.0, 1.0, StepperConfig(dt=0.01))
    assert report.passed
    assert len(report.rows) == 21
    assert report.rows[-1]['status'] == 'exact_match'
    assert all(row['C_T'] == pytest.approx(np.e ** 2) for row in report.rows)
    assert 0.0 < report.value <= np.e ** 2


def test_continuous_dependence_runs_in_threads(rng):
    preset = preset_linear_benchmark('density')
    perturbations = [perturb_segment(preset.initial, rng, 1e-3) for _ in range(4)]
    cfg = StepperConfig(dt=0.05)
    serial = continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial, perturbations,
                                              0.0, 0.5, cfg)
    threaded = continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial, perturbations,
                                                0.0, 0.5, cfg, max_workers=4)
    assert [row['ratio'] for row in serial.rows] == [row['ratio'] for row in threaded.rows]


def test_continuous_dependence_with_atoms_stays_in_window(rng):
    preset = preset_linear_benchmark()
    with pytest.raises(InputError):
        continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial, [], 0.0, 2.0,
                                         StepperConfig(dt=0.1))
    report = continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial,
                                              [perturb_segment(preset.initial, rng, 1e-3)], 0.0, 1.0,
                                              StepperConfig(dt=0.1))
    assert report.passed
    assert report.rows[0]['C_T'] is None


@pytest.mark.parametrize('kwargs', [
    {'dt': 0.0},
    {'scheme': 'rk4'},
    {'picard_tol': -1.0},
    {'picard_max_iter': 0},
    {'blowup_norm': 0.0},
])
def test_stepper_config_validation(kwargs):
    with pytest.raises(InputError):
        StepperConfig(**kwargs)
