"""
Ready-made models: the diffusive Nicholson blowflies equation, the n-species
Lotka-Volterra system with delayed interaction, and two analytic benchmarks.
Also the builders that turn run-config dictionaries into models and histories,
and the seeded probe generators the check suites draw from.
"""
import inspect
import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.solver_config import EDGE_TOLERANCE, NORMALIZATION_TOLERANCE, PROBE_COUNT, PROBE_KNOTS
from delaysim.models.delay_kernel import (ConstantFunctional, DelayAtom, DelayDensity, DelayMeasure,
                                          HeadValueFunctional, IgnoreInterval, PointMap, StateMeanFunctional,
                                          TimeTableFunctional, is_nondecreasing, total_weight)
from delaysim.models.history import Segment
from delaysim.models.rhs import DelayRHS, DelayTerm, OuterMap
from delaysim.models.spectral_operator import SpatialGrid, SpectralOperator, StateVector, build_laplacian
from delaysim.solvers.invariance import ConstraintSet
from delaysim.utils.errors import ConfigError, InputError
from delaysim.utils.reports import CheckReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModelPreset:
    """A complete model: operator, right-hand side, default history and constraint set"""
    name: str
    operator: SpectralOperator
    rhs: DelayRHS
    initial: Segment
    constraint: Optional[ConstraintSet] = None
    start_time: float = 0.0
    end_time: float = 1.0
    description: str = ''
    normalized: bool = False

    @property
    def grid(self) -> SpatialGrid:
        return self.operator.grid

    @property
    def n_species(self) -> int:
        return self.operator.n_species

    @property
    def delay_horizon(self) -> float:
        return self.rhs.delay_horizon

    def with_initial(self, initial: Segment) -> 'ModelPreset':
        return replace(self, initial=initial)

    def with_constraint(self, constraint: Optional[ConstraintSet]) -> 'ModelPreset':
        return replace(self, constraint=constraint)

    def with_end_time(self, end_time: float) -> 'ModelPreset':
        return replace(self, end_time=float(end_time))


# ---------------------------------------------------------------------------
# States, histories and probes
# ---------------------------------------------------------------------------

def uniform_state(grid: SpatialGrid, values) -> StateVector:
    """Spatially constant state, one value per species"""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    colloc = np.repeat(values[:, None], grid.n_collocation, axis=1)
    return StateVector(colloc, 'collocation', grid).to_spectral()


def segment_from_function(grid: SpatialGrid, fn: Callable[[float], Any], n_species: int,
                          delay_horizon: float, anchor_time: float = 0.0,
                          n_knots: int = PROBE_KNOTS) -> Segment:
    """History theta -> fn(theta), spatially constant, sampled on uniform knots"""
    thetas = np.linspace(-delay_horizon, 0.0, max(int(n_knots), 2))
    values = np.stack([
        uniform_state(grid, np.broadcast_to(np.asarray(fn(theta), dtype=float), (n_species,))).coefficients
        for theta in thetas
    ])
    return Segment(anchor_time, delay_horizon, anchor_time + thetas, values, grid)


def random_nonneg_state(grid: SpatialGrid, n_species: int, rng: np.random.Generator,
                        amplitude: float = 1.0) -> StateVector:
    """
    Smooth random state that is non-negative at every collocation point.
    Cosine modes stay below an eighth of the mean; the second sine mode stays
    below half the first.
    """
    coeffs = np.zeros((n_species, grid.n_modes))
    for i in range(n_species):
        if grid.is_point:
            coeffs[i, 0] = rng.uniform(0.0, 2.0)
        elif grid.boundary == 'neumann':
            c0 = rng.uniform(0.5, 1.5)
            coeffs[i, 0] = c0
            k = min(3, grid.n_modes - 1)
            if k > 0:
                coeffs[i, 1:k + 1] = rng.uniform(-c0 / 8, c0 / 8, size=k)
        else:
            c1 = rng.uniform(0.5, 1.5)
            coeffs[i, 0] = c1
            if grid.n_modes > 1:
                coeffs[i, 1] = rng.uniform(-c1 / 2, c1 / 2)
    return StateVector(amplitude * coeffs, 'spectral', grid)


def random_segment(grid: SpatialGrid, n_species: int, delay_horizon: float, rng: np.random.Generator,
                   anchor_time: float = 0.0, n_knots: int = PROBE_KNOTS,
                   zero_head_species: Optional[int] = None, amplitude: float = 1.0) -> Segment:
    """
    Non-negative random history. With zero_head_species set, that species
    decays linearly to zero at theta = 0.
    """
    thetas = np.linspace(-delay_horizon, 0.0, max(int(n_knots), 2))
    values = np.stack([random_nonneg_state(grid, n_species, rng, amplitude).coefficients for _ in thetas])
    if zero_head_species is not None:
        if not 0 <= zero_head_species < n_species:
            raise InputError(f"Species index {zero_head_species} out of range for {n_species} species")
        values[:, zero_head_species, :] *= (-thetas / delay_horizon)[:, None]
    return Segment(anchor_time, delay_horizon, anchor_time + thetas, values, grid)


def random_probes(preset: ModelPreset, rng: np.random.Generator, count: int = PROBE_COUNT,
                  n_knots: int = PROBE_KNOTS, zero_head: bool = False) -> List[Tuple[float, Segment, int]]:
    """(t, psi, species) probes anchored at random times in the preset's horizon"""
    probes = []
    span = max(preset.end_time - preset.start_time, 0.0)
    for index in range(count):
        t = preset.start_time + span * rng.uniform()
        species = index % preset.n_species
        psi = random_segment(preset.grid, preset.n_species, preset.delay_horizon, rng, t, n_knots,
                             species if zero_head else None)
        probes.append((t, psi, species))
    return probes


def perturb_segment(segment: Segment, rng: np.random.Generator, magnitude: float,
                    n_knots: int = PROBE_KNOTS) -> Segment:
    """Random perturbation whose largest knot norm is exactly magnitude"""
    if not magnitude > 0:
        raise InputError(f"Perturbation magnitude must be positive, got {magnitude}")
    r = segment.delay_horizon
    thetas = np.unique(np.clip(np.concatenate((segment.thetas, np.linspace(-r, 0.0, max(int(n_knots), 2)))),
                               -r, 0.0))
    base = segment.values_at(thetas)
    noise = rng.standard_normal(base.shape)
    noise *= magnitude / float(np.max(segment.grid.spectral_norms(noise)))
    return Segment(segment.anchor_time, r, segment.anchor_time + thetas, base + noise, segment.grid)


def check_normalization(measures: Dict[str, DelayMeasure], probes: Sequence[Tuple[float, Segment]],
                        tolerance: float = NORMALIZATION_TOLERANCE, name: str = 'normalization') -> CheckReport:
    """Every labelled measure has total weight 1 and is nondecreasing on every probe"""
    rows = []
    failures = []
    for label, measure in measures.items():
        for index, (t, psi) in enumerate(probes):
            weight = total_weight(measure, t, psi)
            monotone = is_nondecreasing(measure, t, psi)
            normalized = abs(weight - 1.0) <= tolerance
            rows.append({'measure': label, 'probe': index, 'total_weight': weight,
                         'nondecreasing': monotone, 'passed': normalized and monotone})
            if not normalized:
                failures.append(f"{label} normalization: total weight {weight:.17g} != 1")
            if not monotone:
                failures.append(f"{label} is not nondecreasing")
    message = failures[0] if failures else f"{len(measures)} measures normalized and nondecreasing"
    return CheckReport(name, not failures, rows=rows, message=message)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _nicholson_measure(spec: Dict[str, Any], r: float, eta_ign: Optional[float]) -> DelayMeasure:
    kind = spec.get('kind', 'constant')
    tol = EDGE_TOLERANCE * max(1.0, r)

    if kind == 'constant':
        _known(spec, {'kind', 'delay'}, 'delay_spec')
        delay = float(spec.get('delay', r))
        if not 0 < delay <= r + tol:
            raise InputError(f"Constant delay must lie in (0, {r}], got {delay}")
        eta = delay if eta_ign is None else float(eta_ign)
        if delay < eta - tol:
            raise InputError(f"delay {delay} is shorter than the ignore interval {eta}")
        return DelayMeasure((DelayAtom.constant(delay, 1.0),), ignore_interval=IgnoreInterval(eta), delay_horizon=r)

    if kind == 'state_mean':
        _known(spec, {'kind', 'base', 'scale', 'window', 'transform'}, 'delay_spec')
        window = tuple(spec.get('window', (-r, -r / 2)))
        functional = StateMeanFunctional(spec.get('base', r / 2), spec.get('scale', r / 16), window,
                                         spec.get('transform', 'clip'))
        value_range = functional.value_range()
        if value_range is None:
            raise InputError("A state-dependent delay needs a bounded transform ('clip' or 'tanh')")
        lo, hi = value_range
        eta = lo if eta_ign is None else float(eta_ign)
        if lo < eta - tol or hi > r + tol or lo <= 0:
            raise InputError(f"State-dependent delay range [{lo:.6g}, {hi:.6g}] leaves [{eta:.6g}, {r:.6g}]")
        if functional.window[1] > -eta + tol:
            raise InputError(f"Averaging window {functional.window} reaches into the ignore interval {eta:.6g}")
        atom = DelayAtom(functional, ConstantFunctional(1.0))
        return DelayMeasure((atom,), ignore_interval=IgnoreInterval(eta), delay_horizon=r)

    if kind == 'density':
        _known(spec, {'kind', 'value'}, 'delay_spec')
        value = float(spec.get('value', 1.0 / r))
        if not value > 0:
            raise InputError(f"Density value must be positive, got {value}")
        return DelayMeasure(density=DelayDensity.constant(value, r), max_variation=value * r,
                            ignore_interval=IgnoreInterval(r if eta_ign is None else float(eta_ign)),
                            delay_horizon=r)

    raise InputError(f"delay_spec kind must be 'constant', 'state_mean' or 'density', got {kind!r}")


def preset_nicholson(p1: float = 2.0, d: float = 1.0, diffusivity: float = 0.0,
                     delay_spec: Optional[Dict[str, Any]] = None, grid: Optional[SpatialGrid] = None,
                     delay_horizon: float = 1.0, ignore_interval: Optional[float] = None,
                     initial_value: float = 1.0, end_time: float = 10.0) -> ModelPreset:
    """
    u_t = D u_xx - d u + integral p(u(t + theta)) dg(theta), p(w) = p1 w e^{-w}.

    delay_spec picks the delay: {'kind': 'constant', 'delay'}, a state-mean
    atom {'kind': 'state_mean', 'base', 'scale', 'window', 'transform'} that
    reads only the truncated segment, or {'kind': 'density', 'value'}.
    """
    if d < 0:
        raise InputError(f"Death rate d must be non-negative, got {d}")
    if diffusivity < 0:
        raise InputError(f"Diffusivity must be non-negative, got {diffusivity}")
    grid = grid or SpatialGrid.point()
    r = float(delay_horizon)
    measure = _nicholson_measure(dict(delay_spec or {'kind': 'constant', 'delay': r}), r, ignore_interval)

    p = PointMap.nicholson(p1, grid.volume)
    outer = OuterMap.nicholson(d, measure.max_variation * p.growth_const)
    rhs = DelayRHS.single(measure, p, outer)
    op = build_laplacian(grid, [diffusivity])
    initial = Segment.constant(grid, uniform_state(grid, [initial_value]), 0.0, r)
    return ModelPreset('nicholson', op, rhs, initial, ConstraintSet.nonneg_cone(), 0.0, float(end_time),
                       description=f"diffusive Nicholson blowflies, p1={p1}, d={d}, D={diffusivity}, "
                                   f"delay {'atom' if measure.has_atoms else 'density'}, {grid.domain_kind} domain")


def preset_lotka_volterra(b: Sequence[float] = (1.0,), c: Sequence[Sequence[float]] = ((1.0,),),
                          m: Optional[int] = None, diffusivities: Optional[Sequence[float]] = None,
                          delays: Optional[Sequence[Sequence[float]]] = None,
                          measures: Optional[Sequence[Sequence[DelayMeasure]]] = None,
                          grid: Optional[SpatialGrid] = None, delay_horizon: float = 1.0,
                          initial_value: float = 0.5, end_time: float = 50.0,
                          probe_seed: int = 0) -> ModelPreset:
    """
    B^i = b_i u^i(0) [1 - sum_j c_ij F_ij(t, u^j)], one normalized
    nondecreasing measure g_ij per species pair.
    """
    rates = np.atleast_1d(np.asarray(b, dtype=float))
    n = rates.size
    if m is not None and int(m) != n:
        raise InputError(f"m={m} does not match {n} growth rates")
    coupling = np.asarray(c, dtype=float).reshape(-1)
    if coupling.size != n * n:
        raise InputError(f"Coupling matrix must be {n}x{n}")
    coupling = coupling.reshape(n, n)
    if np.any(rates <= 0) or np.any(coupling <= 0):
        raise InputError("Lotka-Volterra rates b_i and couplings c_ij must be positive")

    grid = grid or SpatialGrid.point()
    if grid.boundary == 'dirichlet':
        raise InputError("The Lotka-Volterra preset uses a Neumann boundary")
    r = float(delay_horizon)

    if measures is None:
        lags = np.full((n, n), r) if delays is None else np.asarray(delays, dtype=float).reshape(n, n)
        if np.any(lags <= 0) or np.any(lags > r + EDGE_TOLERANCE):
            raise InputError(f"Delays must lie in (0, {r}]")
        measures = [[DelayMeasure((DelayAtom.constant(lags[i, j], 1.0),), ignore_interval=IgnoreInterval(lags[i, j]),
                                  delay_horizon=r) for j in range(n)] for i in range(n)]

    labelled = {f"g[{i}][{j}]": measures[i][j] for i in range(n) for j in range(n)}
    terms = tuple(DelayTerm(measures[i][j], PointMap.species_coupling(j, i, coupling[i, j]))
                  for i in range(n) for j in range(n))
    rhs = DelayRHS(terms, OuterMap.lotka_volterra(rates), r)
    op = build_laplacian(grid, np.zeros(n) if diffusivities is None else diffusivities)
    initial = Segment.constant(grid, uniform_state(grid, np.full(n, initial_value)), 0.0, r)
    preset = ModelPreset('lotka_volterra', op, rhs, initial, ConstraintSet.nonneg_cone(), 0.0, float(end_time),
                         description=f"{n}-species Lotka-Volterra with delayed interaction, "
                                     f"{grid.domain_kind} domain",
                         normalized=True)

    rng = np.random.default_rng(probe_seed)
    probes = [(t, psi) for t, psi, _ in random_probes(preset, rng)]
    report = check_normalization(labelled, probes)
    if not report.passed:
        raise InputError(report.message)
    return preset


def preset_linear_benchmark(delay: str = 'atom', end_time: float = 2.0) -> ModelPreset:
    """
    u'(t) = u(t - 1) with u = 1 on [-1, 0]: u = 1 + t on [0, 1] and
    2 + (t - 1) + (t - 1)^2 / 2 on [1, 2]. delay='density' swaps the atom for
    the unit density on [-1, 0].
    """
    grid = SpatialGrid.point()
    if delay == 'atom':
        measure = DelayMeasure((DelayAtom.constant(1.0, 1.0),), ignore_interval=IgnoreInterval(1.0), delay_horizon=1.0)
    elif delay == 'density':
        measure = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), max_variation=1.0, delay_horizon=1.0)
    else:
        raise InputError(f"delay must be 'atom' or 'density', got {delay!r}")
    rhs = DelayRHS.single(measure, PointMap.identity(), OuterMap.affine(0.0))
    initial = Segment.constant(grid, uniform_state(grid, [1.0]), 0.0, 1.0)
    return ModelPreset('linear_benchmark', build_laplacian(grid, [0.0]), rhs, initial,
                       ConstraintSet.nonneg_cone(), 0.0, float(end_time),
                       description=f"u' = u(t-1) ({delay}), exact by the method of steps")


def preset_sdd_benchmark(weight: str = 'constant', threshold: float = 0.0, end_time: float = 0.25) -> ModelPreset:
    """
    u'(t) = -u(t) + h u(t - eta), eta = 0.5 + 0.25 tanh(mean of u over
    [t-1, t-0.5]). The ignore interval is 0.25, the smallest delay. With
    weight='threshold' the atom weight is min(1, max(0, mean - threshold))
    and the discrete delay switches off while the mean stays low.
    """
    grid = SpatialGrid.point()
    window = (-1.0, -0.5)
    delay = StateMeanFunctional(0.5, 0.25, window=window, transform='tanh')
    if weight == 'constant':
        h = ConstantFunctional(1.0)
    elif weight == 'threshold':
        h = StateMeanFunctional(0.0, 1.0, window=window, transform='clip', clip=(0.0, 1.0), offset=threshold)
    else:
        raise InputError(f"weight must be 'constant' or 'threshold', got {weight!r}")
    measure = DelayMeasure((DelayAtom(delay, h),), ignore_interval=IgnoreInterval(0.25), delay_horizon=1.0)
    rhs = DelayRHS.single(measure, PointMap.identity(), OuterMap.affine(1.0))
    initial = Segment(0.0, 1.0, [-1.0, 0.0], [[[-1.0]], [[0.0]]], grid)
    return ModelPreset('sdd_benchmark', build_laplacian(grid, [0.0]), rhs, initial, None, 0.0, float(end_time),
                       description=f"state-dependent delay benchmark, weight={weight}")


PRESETS: Dict[str, Callable[..., ModelPreset]] = {
    'nicholson': preset_nicholson,
    'lotka_volterra': preset_lotka_volterra,
    'linear_benchmark': preset_linear_benchmark,
    'sdd_benchmark': preset_sdd_benchmark,
}


def build_preset(name: str, params: Optional[Dict[str, Any]] = None,
                 grid: Optional[SpatialGrid] = None) -> ModelPreset:
    """Look up a preset by name and call it with config parameters"""
    if name not in PRESETS:
        raise ConfigError(f"Unknown model preset {name!r}; choose from {sorted(PRESETS)}", key='preset')
    builder = PRESETS[name]
    accepted = inspect.signature(builder).parameters
    params = dict(params or {})
    for key in params:
        if key not in accepted or key in ('grid', 'measures'):
            raise ConfigError(f"model.params: unknown key {key!r} for preset {name!r}", key=key)
    if 'grid' in accepted:
        params['grid'] = grid
    elif grid is not None and not grid.is_point:
        raise ConfigError(f"Preset {name!r} runs on a point domain only", key='grid')
    logger.debug(f"Building preset {name} with {sorted(params)}")
    return builder(**params)


# ---------------------------------------------------------------------------
# Inline model specs
# ---------------------------------------------------------------------------

def _known(spec: Any, allowed: set, where: str):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where} must be an object")
    for key in spec:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}", key=key)


def _require(spec: Dict[str, Any], key: str, where: str):
    if key not in spec:
        raise ConfigError(f"{where}: missing key {key!r}")
    return spec[key]


def functional_from_spec(spec: Any, where: str):
    """A number is a constant; objects select a functional by 'kind'"""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return ConstantFunctional(spec)
    _known(spec, {'kind', 'value', 'times', 'values', 'base', 'scale', 'window', 'transform', 'clip',
                  'offset', 'species'}, where)
    kind = spec.get('kind')
    if kind == 'constant':
        return ConstantFunctional(_require(spec, 'value', where))
    if kind == 'time_table':
        return TimeTableFunctional(_require(spec, 'times', where), _require(spec, 'values', where))
    if kind == 'state_mean':
        window = spec.get('window')
        return StateMeanFunctional(_require(spec, 'base', where), _require(spec, 'scale', where),
                                   None if window is None else tuple(window), spec.get('transform', 'clip'),
                                   tuple(spec.get('clip', (-1.0, 1.0))), spec.get('offset', 0.0),
                                   spec.get('species', 0))
    if kind == 'head_value':
        return HeadValueFunctional(spec.get('base', 0.0), spec.get('scale', 1.0), spec.get('species', 0))
    raise ConfigError(f"{where}: unknown functional kind {kind!r}", key='kind')


def density_from_spec(spec: Any, r: float, where: str) -> DelayDensity:
    _known(spec, {'kind', 'value', 'thetas', 'values', 'amplitude', 'frequency', 'phase'}, where)
    kind = spec.get('kind', 'constant')
    if kind == 'constant':
        return DelayDensity.constant(_require(spec, 'value', where), r)
    if kind == 'table':
        return DelayDensity.table(_require(spec, 'thetas', where), _require(spec, 'values', where))
    if kind == 'time_modulated':
        return DelayDensity.time_modulated(_require(spec, 'value', where), spec.get('amplitude', 0.0),
                                           spec.get('frequency', 1.0), r, spec.get('phase', 0.0))
    raise ConfigError(f"{where}: unknown density kind {kind!r}", key='kind')


def point_map_from_spec(spec: Any, grid: SpatialGrid, where: str) -> PointMap:
    _known(spec, {'kind', 'slope', 'p1', 'source', 'target', 'coefficient'}, where)
    kind = spec.get('kind', 'identity')
    if kind == 'identity':
        return PointMap.identity()
    if kind == 'linear':
        return PointMap.linear_map(_require(spec, 'slope', where))
    if kind == 'nicholson':
        return PointMap.nicholson(_require(spec, 'p1', where), grid.volume)
    if kind == 'species_coupling':
        return PointMap.species_coupling(_require(spec, 'source', where), _require(spec, 'target', where),
                                         spec.get('coefficient', 1.0))
    raise ConfigError(f"{where}: unknown point map kind {kind!r}", key='kind')


def outer_from_spec(spec: Any, grid: SpatialGrid, where: str) -> OuterMap:
    """Inline outer maps; Lotka-Volterra is reachable through its preset only"""
    _known(spec, {'kind', 'd', 'growth_const', 'times', 'a', 'b', 'c', 'values'}, where)
    kind = spec.get('kind', 'affine')
    if kind == 'affine':
        return OuterMap.affine(spec.get('d', 0.0), spec.get('growth_const', 0.0))
    if kind == 'nicholson':
        return OuterMap.nicholson(spec.get('d', 0.0), _require(spec, 'growth_const', where))
    if kind == 'custom_table':
        return OuterMap.custom_table(_require(spec, 'times', where), _require(spec, 'a', where),
                                     _require(spec, 'b', where), _require(spec, 'c', where), grid.volume)
    if kind == 'constant':
        return OuterMap.constant(_require(spec, 'values', where), grid.volume)
    if kind == 'zero':
        return OuterMap.zero()
    raise ConfigError(f"{where}: outer kind must be affine, nicholson, custom_table, constant or zero; "
                      f"got {kind!r}", key='kind')


def _ignore_interval_from_spec(spec: Any, where: str) -> IgnoreInterval:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return IgnoreInterval(float(spec))
    _known(spec, {'times', 'values'}, where)
    return IgnoreInterval(times=tuple(_require(spec, 'times', where)), values=tuple(_require(spec, 'values', where)))


def measure_from_spec(spec: Any, r: float, where: str) -> DelayMeasure:
    """Atoms, density and declared constants of one delay term"""
    _known(spec, {'atoms', 'density', 'max_variation', 'ignore_interval', 'density_lipschitz',
                  'density_reads_full', 'point_map'}, where)
    atoms = []
    for k, atom in enumerate(spec.get('atoms', [])):
        at = f"{where}.atoms[{k}]"
        _known(atom, {'delay', 'weight', 'reads_full_segment'}, at)
        atoms.append(DelayAtom(functional_from_spec(_require(atom, 'delay', at), f"{at}.delay"),
                               functional_from_spec(atom.get('weight', 1.0), f"{at}.weight"),
                               bool(atom.get('reads_full_segment', False))))
    density = spec.get('density')
    eta = spec.get('ignore_interval')
    return DelayMeasure(tuple(atoms),
                        None if density is None else density_from_spec(density, r, f"{where}.density"),
                        float(spec.get('max_variation', 1.0)),
                        None if eta is None else _ignore_interval_from_spec(eta, f"{where}.ignore_interval"),
                        float(spec.get('density_lipschitz', 0.0)), r,
                        bool(spec.get('density_reads_full', True)))


def build_inline_model(spec: Dict[str, Any], grid: Optional[SpatialGrid] = None) -> ModelPreset:
    """Model assembled term by term from an inline config object"""
    where = 'model.inline'
    _known(spec, {'name', 'n_species', 'delay_horizon', 'diffusivities', 'outer', 'terms',
                  'start_time', 'end_time', 'description'}, where)
    grid = grid or SpatialGrid.point()
    r = float(_require(spec, 'delay_horizon', where))
    if not r > 0:
        raise ConfigError(f"{where}: delay_horizon must be positive, got {r}", key='delay_horizon')
    n = int(spec.get('n_species', 1))
    terms = []
    for k, term in enumerate(spec.get('terms', [])):
        at = f"{where}.terms[{k}]"
        measure = measure_from_spec(term, r, at)
        terms.append(DelayTerm(measure, point_map_from_spec(term.get('point_map', {}), grid, f"{at}.point_map")))
    outer = outer_from_spec(spec.get('outer', {'kind': 'affine'}), grid, f"{where}.outer")
    rhs = DelayRHS(tuple(terms), outer, r)
    op = build_laplacian(grid, spec.get('diffusivities', [0.0] * n))
    if op.n_species != n:
        raise ConfigError(f"{where}: {op.n_species} diffusivities for {n} species", key='diffusivities')
    start = float(spec.get('start_time', 0.0))
    initial = Segment.constant(grid, uniform_state(grid, np.ones(n)), start, r)
    return ModelPreset(spec.get('name', 'inline'), op, rhs, initial, None, start,
                       float(spec.get('end_time', start + 1.0)), spec.get('description', 'inline model'))


def initial_segment(spec: Dict[str, Any], grid: SpatialGrid, n_species: int, delay_horizon: float,
                    anchor_time: float, rng: np.random.Generator) -> Segment:
    """History from the config's 'initial' section"""
    kind = spec.get('kind', 'constant')
    if kind == 'constant':
        value = np.broadcast_to(np.asarray(spec.get('value', 1.0), dtype=float), (n_species,))
        return Segment.constant(grid, uniform_state(grid, value), anchor_time, delay_horizon)
    if kind == 'linear':
        slope = float(spec.get('slope', 1.0))
        intercept = float(spec.get('intercept', 0.0))
        return segment_from_function(grid, lambda theta: intercept + slope * theta, n_species,
                                     delay_horizon, anchor_time, n_knots=2)
    if kind == 'knots':
        knots = spec.get('knots')
        if not knots or any(len(k) != 2 for k in knots):
            raise ConfigError("initial.knots must be a list of [theta, value] pairs", key='knots')
        thetas = np.array([float(k[0]) for k in knots])
        values = np.stack([
            uniform_state(grid, np.broadcast_to(np.asarray(k[1], dtype=float), (n_species,))).coefficients
            for k in knots
        ])
        return Segment(anchor_time, delay_horizon, anchor_time + thetas, values, grid)
    if kind == 'random':
        return random_segment(grid, n_species, delay_horizon, rng, anchor_time,
                              amplitude=float(spec.get('amplitude', 1.0)))
    raise ConfigError(f"initial.kind must be constant, linear, knots or random; got {kind!r}", key='kind')
