"""
Delay measures: state-dependent atoms plus an absolutely continuous density,
the Stieltjes functional F(t, psi) they define, and sampled checks of the
assumptions the well-posedness theory places on them.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from config.solver_config import BOUND_SLACK, EDGE_TOLERANCE, QUADRATURE_NODES
from delaysim.models.history import Segment, segment_distance
from delaysim.models.spectral_operator import SpatialGrid, StateVector
from delaysim.utils.errors import ContractViolation, InputError
from delaysim.utils.quadrature import clip_breakpoints, composite_nodes
from delaysim.utils.reports import CheckReport

logger = logging.getLogger(__name__)

TRANSFORMS = ('clip', 'tanh', 'identity', 'positive_part')


# ---------------------------------------------------------------------------
# Functionals of (t, segment) used for atom positions and weights
# ---------------------------------------------------------------------------

class ConstantFunctional:
    kind = 'constant'

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t: float, segment: Segment) -> float:
        return self.value

    def value_range(self) -> Tuple[float, float]:
        return self.value, self.value

    def psi_lipschitz(self, grid: SpatialGrid) -> float:
        return 0.0


class TimeTableFunctional:
    """Piecewise-linear function of time only"""
    kind = 'time_dependent'

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.size < 1 or self.times.shape != self.values.shape:
            raise InputError("Time table needs matching non-empty 'times' and 'values'")
        if np.any(np.diff(self.times) <= 0):
            raise InputError("Time table times must increase strictly")

    def __call__(self, t: float, segment: Segment) -> float:
        return float(np.interp(t, self.times, self.values))

    def value_range(self) -> Tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def psi_lipschitz(self, grid: SpatialGrid) -> float:
        return 0.0


class StateMeanFunctional:
    """
    base + scale * transform(mean - offset), where mean is the time average over
    a theta window of the spatial mean of one species.
    """
    kind = 'state_mean'

    def __init__(self, base: float, scale: float, window: Optional[Tuple[float, float]] = None,
                 transform: str = 'clip', clip: Tuple[float, float] = (-1.0, 1.0),
                 offset: float = 0.0, species: int = 0, n_nodes: int = QUADRATURE_NODES):
        if transform not in TRANSFORMS:
            raise InputError(f"transform must be one of {TRANSFORMS}, got {transform!r}")
        if window is not None and not window[0] < window[1]:
            raise InputError(f"Averaging window must satisfy lo < hi, got {window}")
        if clip[0] > clip[1]:
            raise InputError(f"Clip range must satisfy lo <= hi, got {clip}")
        self.base = float(base)
        self.scale = float(scale)
        self.window = None if window is None else (float(window[0]), float(window[1]))
        self.transform = transform
        self.clip = (float(clip[0]), float(clip[1]))
        self.offset = float(offset)
        self.species = int(species)
        self.n_nodes = n_nodes

    def mean(self, segment: Segment) -> float:
        lo, hi = self.window if self.window else (-segment.delay_horizon, segment.window_end)
        if not hi > lo:
            raise InputError(f"Empty averaging window [{lo}, {hi}]")
        nodes, weights = composite_nodes(clip_breakpoints(segment.thetas, lo, hi), self.n_nodes)
        colloc = segment.collocation_at(nodes)[:, self.species, :]
        return float(weights @ segment.grid.spatial_mean(colloc) / (hi - lo))

    def _apply(self, x: float) -> float:
        if self.transform == 'clip':
            return float(np.clip(x, *self.clip))
        if self.transform == 'tanh':
            return float(np.tanh(x))
        if self.transform == 'positive_part':
            return max(0.0, x)
        return x

    def __call__(self, t: float, segment: Segment) -> float:
        return self.base + self.scale * self._apply(self.mean(segment) - self.offset)

    def value_range(self) -> Optional[Tuple[float, float]]:
        """Range of the functional, or None when unbounded"""
        if self.transform == 'clip':
            lo, hi = self.clip
        elif self.transform == 'tanh':
            lo, hi = -1.0, 1.0
        else:
            return None
        ends = (self.base + self.scale * lo, self.base + self.scale * hi)
        return min(ends), max(ends)

    def psi_lipschitz(self, grid: SpatialGrid) -> float:
        """Every transform is 1-Lipschitz and the spatial mean costs 1/sqrt(volume)"""
        return abs(self.scale) / np.sqrt(grid.volume)


class HeadValueFunctional:
    """Reads psi(0). Only meaningful on a full segment; used to exercise violation detection."""
    kind = 'head_value'

    def __init__(self, base: float = 0.0, scale: float = 1.0, species: int = 0):
        self.base = float(base)
        self.scale = float(scale)
        self.species = int(species)

    def __call__(self, t: float, segment: Segment) -> float:
        head = segment.collocation_at([0.0])[0, self.species, :]
        return self.base + self.scale * float(segment.grid.spatial_mean(head))

    def value_range(self):
        return None

    def psi_lipschitz(self, grid: SpatialGrid) -> float:
        return abs(self.scale) / np.sqrt(grid.volume)


@dataclass(frozen=True, eq=False)
class DelayAtom:
    """Point mass of weight h_k at theta = -eta_k"""
    delay: Callable[[float, Segment], float]
    weight: Callable[[float, Segment], float]
    reads_full_segment: bool = False

    @classmethod
    def constant(cls, delay: float, weight: float = 1.0) -> 'DelayAtom':
        return cls(ConstantFunctional(delay), ConstantFunctional(weight))


@dataclass(frozen=True, eq=False)
class DelayDensity:
    """Density xi(theta, t, psi) of the absolutely continuous part"""
    xi_fn: Callable[[np.ndarray, float, Segment], np.ndarray]
    variation_hint: float
    breakpoints: Tuple[float, ...] = ()
    kind: str = 'custom'
    nonnegative: bool = False
    time_lipschitz: float = 0.0

    def __call__(self, thetas: np.ndarray, t: float, segment: Segment) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        return np.broadcast_to(np.asarray(self.xi_fn(thetas, t, segment), dtype=float), thetas.shape)

    @classmethod
    def constant(cls, value: float, delay_horizon: float) -> 'DelayDensity':
        value = float(value)
        return cls(lambda thetas, t, psi: np.full(thetas.shape, value), abs(value) * delay_horizon,
                   kind='constant', nonnegative=value >= 0)

    @classmethod
    def table(cls, thetas: Sequence[float], values: Sequence[float]) -> 'DelayDensity':
        """Piecewise-linear density in theta"""
        grid = np.asarray(thetas, dtype=float)
        vals = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != vals.shape or np.any(np.diff(grid) <= 0):
            raise InputError("Density table needs at least two strictly increasing thetas with values")
        return cls(lambda th, t, psi: np.interp(th, grid, vals), float(trapezoid(np.abs(vals), grid)),
                   breakpoints=tuple(grid.tolist()), kind='table', nonnegative=bool(np.all(vals >= 0)))

    @classmethod
    def time_modulated(cls, value: float, amplitude: float, frequency: float, delay_horizon: float,
                       phase: float = 0.0) -> 'DelayDensity':
        """value * (1 + amplitude * sin(frequency * t + phase)), constant in theta"""
        value, amplitude, frequency, phase = float(value), float(amplitude), float(frequency), float(phase)

        def xi(thetas, t, psi):
            return np.full(thetas.shape, value * (1.0 + amplitude * np.sin(frequency * t + phase)))

        return cls(xi, abs(value) * delay_horizon * (1.0 + abs(amplitude)), kind='time_modulated',
                   nonnegative=value >= 0 and abs(amplitude) <= 1,
                   time_lipschitz=abs(value) * delay_horizon * abs(amplitude * frequency))


@dataclass(frozen=True, eq=False)
class IgnoreInterval:
    """eta_ign(t): constant or tabulated piecewise linear, strictly positive"""
    value: Optional[float] = None
    times: Optional[Tuple[float, ...]] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.value is None:
            if self.times is None or self.values is None or len(self.times) != len(self.values) \
                    or len(self.times) == 0:
                raise InputError("Ignore interval needs a value or a time table")
            if np.any(np.diff(self.times) <= 0):
                raise InputError("Ignore interval table times must increase strictly")
            if min(self.values) <= 0:
                raise InputError("Ignore interval must stay strictly positive")
        elif not self.value > 0:
            raise InputError(f"Ignore interval must be positive, got {self.value}")

    def __call__(self, t: float) -> float:
        if self.value is not None:
            return float(self.value)
        return float(np.interp(t, self.times, self.values))

    def minimum(self, t0: float, t1: float) -> float:
        """Smallest value over [t0, t1]"""
        if self.value is not None:
            return float(self.value)
        inside = [v for s, v in zip(self.times, self.values) if t0 <= s <= t1]
        return float(min([self(t0), self(t1)] + inside))

    def maximum(self) -> float:
        return float(self.value) if self.value is not None else float(max(self.values))


@dataclass(frozen=True, eq=False)
class DelayMeasure:
    """Generating function g = atoms + density with its declared constants"""
    atoms: Tuple[DelayAtom, ...] = ()
    density: Optional[DelayDensity] = None
    max_variation: float = 1.0
    ignore_interval: Optional[IgnoreInterval] = None
    density_lipschitz: float = 0.0
    delay_horizon: float = 1.0
    density_reads_full: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'atoms', tuple(self.atoms))
        if not self.delay_horizon > 0:
            raise InputError(f"Delay horizon must be positive, got {self.delay_horizon}")
        if not self.max_variation > 0:
            raise InputError(f"Variation bound must be positive, got {self.max_variation}")
        if self.density_lipschitz < 0:
            raise InputError("Density Lipschitz constant must be non-negative")
        if self.ignore_interval is None:
            object.__setattr__(self, 'ignore_interval', IgnoreInterval(self.delay_horizon))
        if self.ignore_interval.maximum() > self.delay_horizon + EDGE_TOLERANCE:
            raise InputError(f"Ignore interval {self.ignore_interval.maximum()} exceeds the delay "
                             f"horizon {self.delay_horizon}")

    @property
    def has_atoms(self) -> bool:
        return len(self.atoms) > 0

    @property
    def has_density(self) -> bool:
        return self.density is not None

    def visible(self, t: float, psi: Segment) -> Segment:
        """The truncated segment the atoms are allowed to read"""
        if psi.delay_horizon < self.delay_horizon - EDGE_TOLERANCE:
            raise InputError(f"Segment horizon {psi.delay_horizon} is shorter than the measure's "
                             f"{self.delay_horizon}")
        return psi.truncate(min(self.ignore_interval(t), psi.delay_horizon))


@dataclass(frozen=True, eq=False)
class PointMap:
    """p(t, u) applied pointwise to (..., n_species, n_points) values"""
    p_fn: Callable[[float, np.ndarray], np.ndarray]
    lipschitz: float
    growth_linear: float
    growth_const: float
    kind: str = 'custom'
    linear: bool = False

    def __call__(self, t: float, values: np.ndarray) -> np.ndarray:
        return self.p_fn(t, np.asarray(values, dtype=float))

    @classmethod
    def identity(cls) -> 'PointMap':
        return cls(lambda t, u: u, 1.0, 1.0, 0.0, kind='identity', linear=True)

    @classmethod
    def linear_map(cls, slope: float) -> 'PointMap':
        slope = float(slope)
        return cls(lambda t, u: slope * u, abs(slope), abs(slope), 0.0, kind='linear', linear=True)

    @classmethod
    def nicholson(cls, p1: float, volume: float = 1.0) -> 'PointMap':
        """p(w) = p1 * w * exp(-w); Lipschitz and bounded on w >= 0"""
        p1 = float(p1)
        return cls(lambda t, u: p1 * u * np.exp(-u), abs(p1), 0.0, abs(p1) / np.e * np.sqrt(volume),
                   kind='nicholson')

    @classmethod
    def species_coupling(cls, source: int, target: int, coefficient: float) -> 'PointMap':
        """Puts coefficient * u^source into the target species row"""
        c = float(coefficient)

        def couple(t, u):
            out = np.zeros_like(u)
            out[..., target, :] = c * u[..., source, :]
            return out

        return cls(couple, abs(c), abs(c), 0.0, kind='species_coupling', linear=True)


@dataclass(frozen=True, eq=False)
class ModulusTable:
    """Sampled monotone modulus of continuity, linearly interpolated"""
    deltas: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if d.ndim != 1 or d.size < 2 or d.shape != v.shape:
            raise InputError("Modulus table needs at least two (delta, value) samples")
        if d[0] != 0 or np.any(np.diff(d) <= 0):
            raise InputError("Modulus deltas must start at 0 and increase strictly")
        if np.any(v < 0) or np.any(np.diff(v) < 0):
            raise InputError("Modulus values must be non-negative and nondecreasing")

    @classmethod
    def zero(cls, max_delta: float = 1e6) -> 'ModulusTable':
        return cls((0.0, max_delta), (0.0, 0.0))

    @classmethod
    def linear(cls, slope: float, max_delta: float = 1e6) -> 'ModulusTable':
        return cls((0.0, max_delta), (0.0, slope * max_delta))

    def __call__(self, delta: float) -> float:
        if delta < 0 or delta > self.deltas[-1]:
            raise InputError(f"Modulus queried at {delta} outside [0, {self.deltas[-1]}]")
        return float(np.interp(delta, self.deltas, self.values))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def atom_positions(measure: DelayMeasure, t: float, psi: Segment,
                   visible: Optional[Segment] = None) -> List[Tuple[float, float]]:
    """(eta_k, h_k) per atom; eta outside [eta_ign(t), r] is a contract violation"""
    if visible is None:
        visible = measure.visible(t, psi)
    eta_ign = measure.ignore_interval(t)
    r = measure.delay_horizon
    tol = EDGE_TOLERANCE * max(1.0, r)

    positions = []
    for k, atom in enumerate(measure.atoms):
        source = psi if atom.reads_full_segment else visible
        eta = float(atom.delay(t, source))
        if not eta_ign - tol <= eta <= r + tol:
            raise ContractViolation(
                'atom-position',
                f"atom {k} at t={t:.6g}: delay {eta:.6g} outside [{eta_ign:.6g}, {r:.6g}]"
            )
        positions.append((min(max(eta, eta_ign), r), float(atom.weight(t, source))))
    return positions


def _density_nodes(measure: DelayMeasure, psi: Segment, n_nodes: int):
    r = measure.delay_horizon
    points = np.concatenate((psi.thetas, np.asarray(measure.density.breakpoints, dtype=float)))
    return composite_nodes(clip_breakpoints(points, -r, 0.0), n_nodes)


def split_delay_functional(measure: DelayMeasure, p: PointMap, t: float, psi: Segment,
                           n_nodes: int = QUADRATURE_NODES) -> Tuple[StateVector, StateVector]:
    """
    (F_c, F_d) in collocation representation: the density integral and the
    atom sum. Atoms read only the truncated segment.
    """
    grid = psi.grid
    visible = measure.visible(t, psi)
    shape = (psi.n_species, grid.n_collocation)

    f_d = np.zeros(shape)
    if measure.has_atoms:
        for atom, (eta, h) in zip(measure.atoms, atom_positions(measure, t, psi, visible)):
            source = psi if atom.reads_full_segment else visible
            f_d = f_d + h * p(t, source.collocation_at([-eta])[0])

    f_c = np.zeros(shape)
    if measure.has_density:
        nodes, weights = _density_nodes(measure, psi, n_nodes)
        values = p(t, psi.collocation_at(nodes))
        xi = measure.density(nodes, t, psi if measure.density_reads_full else visible)
        f_c = np.tensordot(weights * xi, values, axes=1)

    return StateVector(f_c, 'collocation', grid), StateVector(f_d, 'collocation', grid)


def eval_delay_functional(measure: DelayMeasure, p: PointMap, t: float, psi: Segment,
                          n_nodes: int = QUADRATURE_NODES) -> StateVector:
    """F(t, psi) = F_c + F_d"""
    f_c, f_d = split_delay_functional(measure, p, t, psi, n_nodes)
    return f_c + f_d


def total_variation(measure: DelayMeasure, t: float, psi: Segment,
                    n_nodes: int = QUADRATURE_NODES) -> float:
    """sum |h_k| + integral |xi|"""
    variation = sum(abs(h) for _, h in atom_positions(measure, t, psi)) if measure.has_atoms else 0.0
    if measure.has_density:
        nodes, weights = _density_nodes(measure, psi, n_nodes)
        xi = measure.density(nodes, t, psi if measure.density_reads_full else measure.visible(t, psi))
        variation += float(weights @ np.abs(xi))
    return float(variation)


def total_weight(measure: DelayMeasure, t: float, psi: Segment, n_nodes: int = QUADRATURE_NODES) -> float:
    """g(0) - g(-r): signed total mass"""
    weight = sum(h for _, h in atom_positions(measure, t, psi)) if measure.has_atoms else 0.0
    if measure.has_density:
        nodes, weights = _density_nodes(measure, psi, n_nodes)
        xi = measure.density(nodes, t, psi if measure.density_reads_full else measure.visible(t, psi))
        weight += float(weights @ xi)
    return float(weight)


def is_nondecreasing(measure: DelayMeasure, t: float, psi: Segment,
                     n_nodes: int = QUADRATURE_NODES) -> bool:
    """All atom weights and sampled density values are non-negative"""
    if measure.has_atoms and any(h < 0 for _, h in atom_positions(measure, t, psi)):
        return False
    if measure.has_density:
        nodes, _ = _density_nodes(measure, psi, n_nodes)
        xi = measure.density(nodes, t, psi if measure.density_reads_full else measure.visible(t, psi))
        if np.any(xi < 0):
            return False
    return True


# ---------------------------------------------------------------------------
# Sampled assumption checks
# ---------------------------------------------------------------------------

def check_variation_bound(measure: DelayMeasure, probes: List[Tuple[float, Segment]],
                          name: str = 'variation_bound') -> CheckReport:
    """Total variation at every probe stays within max_variation"""
    if not probes:
        raise InputError("Variation check needs at least one probe")
    rows = []
    worst = 0.0
    for index, (t, psi) in enumerate(probes):
        variation = total_variation(measure, t, psi)
        worst = max(worst, variation)
        rows.append({'probe': index, 't': t, 'variation': variation, 'bound': measure.max_variation,
                     'passed': variation <= measure.max_variation})
    failed = [row['probe'] for row in rows if not row['passed']]
    message = f"max variation {worst:.6g} vs bound {measure.max_variation:.6g}"
    if failed:
        message += f"; exceeded at probes {failed}"
    return CheckReport(name, not failed, rows=rows, message=message, value=worst)


def check_variation_lipschitz(measure: DelayMeasure,
                              pairs: List[Tuple[Tuple[float, Segment], Tuple[float, Segment]]],
                              n_nodes: int = QUADRATURE_NODES,
                              name: str = 'variation_lipschitz') -> CheckReport:
    """integral |xi1 - xi2| <= L (|t1 - t2| + ||psi1 - psi2||_C) on every pair"""
    if not measure.has_density:
        return CheckReport(name, True, applicable=False, message='no density: vacuous pass')
    density = measure.density
    r = measure.delay_horizon
    lip = measure.density_lipschitz
    rows = []
    for index, ((t1, psi1), (t2, psi2)) in enumerate(pairs):
        points = np.concatenate((psi1.thetas, psi2.thetas, np.asarray(density.breakpoints, dtype=float)))
        nodes, weights = composite_nodes(clip_breakpoints(points, -r, 0.0), n_nodes)
        src1 = psi1 if measure.density_reads_full else measure.visible(t1, psi1)
        src2 = psi2 if measure.density_reads_full else measure.visible(t2, psi2)
        difference = float(weights @ np.abs(density(nodes, t1, src1) - density(nodes, t2, src2)))
        distance = abs(t1 - t2) + segment_distance(psi1, psi2)
        bound = lip * distance
        rows.append({'pair': index, 't1': t1, 't2': t2, 'variation_difference': difference,
                     'distance': distance, 'bound': bound,
                     'passed': difference <= bound + EDGE_TOLERANCE})
    failed = [row['pair'] for row in rows if not row['passed']]
    message = f"L_Vgc={lip:.6g}"
    if failed:
        message += f"; exceeded at pairs {failed}"
    return CheckReport(name, not failed, rows=rows, message=message)


def check_ignore_interval(measure: DelayMeasure, t: float, psi: Segment, n_mutations: int,
                          rng: Optional[np.random.Generator] = None, scale: float = 1.0,
                          name: str = 'ignore_interval') -> CheckReport:
    """
    Perturb psi only on (-eta_ign(t), 0] and confirm every eta_k and h_k is
    reproduced bit-exactly.
    """
    if n_mutations < 1:
        raise InputError("Structural check needs at least one mutation")
    if not measure.has_atoms:
        return CheckReport(name, True, message='no atoms: vacuous pass')
    rng = rng if rng is not None else np.random.default_rng()

    cut = psi.anchor_time - measure.ignore_interval(t)
    reference = psi.with_knot(cut)
    baseline = atom_positions(measure, t, reference)
    hidden = reference.times > cut

    rows = []
    offenders = set()
    for index in range(n_mutations):
        values = np.array(reference.values)
        values[hidden] += scale * rng.standard_normal(values[hidden].shape)
        mutated = reference.with_values(values)
        try:
            positions = atom_positions(measure, t, mutated)
        except ContractViolation:
            positions = [(np.nan, np.nan)] * len(baseline)
        for k, ((eta0, h0), (eta, h)) in enumerate(zip(baseline, positions)):
            same = eta == eta0 and h == h0
            if not same:
                offenders.add(k)
            rows.append({'mutation': index, 'atom': k, 'eta': eta, 'weight': h, 'matches': same})

    if offenders:
        message = f"atoms {sorted(offenders)} read the ignored window (-{measure.ignore_interval(t):.6g}, 0]"
        logger.warning(f"Ignore-interval check failed: {message}")
    else:
        message = f"{n_mutations} mutations reproduced all {len(baseline)} atoms bit-exactly"
    return CheckReport(name, not offenders, rows=rows, message=message)


class PerturbationBound(NamedTuple):
    bound: float
    measured: float
    delta: float
    holds: bool


def atom_moduli(measure: DelayMeasure, psi: Segment) -> Tuple[ModulusTable, ModulusTable, ModulusTable]:
    """
    Linear moduli (omega_eta, omega_h, omega_psi) for a single-atom measure:
    the functionals' Lipschitz constants in psi and the steepest knot slope of psi.
    """
    if len(measure.atoms) != 1:
        raise InputError(f"Moduli are built for exactly one atom, measure has {len(measure.atoms)}")
    atom = measure.atoms[0]
    try:
        eta_lip = atom.delay.psi_lipschitz(psi.grid)
        h_lip = atom.weight.psi_lipschitz(psi.grid)
    except AttributeError:
        raise InputError("Atom functionals do not declare a Lipschitz constant in psi")
    if psi.times.size > 1:
        slopes = psi.grid.spectral_norms(np.diff(psi.values, axis=0)) / np.diff(psi.times)
        slope = float(np.max(slopes))
    else:
        slope = 0.0
    return ModulusTable.linear(eta_lip), ModulusTable.linear(h_lip), ModulusTable.linear(slope)


def fd_perturbation_bound(measure: DelayMeasure, p: PointMap, t: float, psi1: Segment, psi2: Segment,
                          moduli: Tuple[ModulusTable, ModulusTable, ModulusTable]) -> PerturbationBound:
    """
    Bound on ||F_d(t, psi1) - F_d(t, psi2)|| for a single discrete delay:
    L_p M_Vg [delta + omega_psi(omega_eta(delta))] + (C1 ||psi1||_C + C2) omega_h(delta).
    """
    if len(measure.atoms) != 1:
        raise InputError(f"Perturbation bound applies to exactly one atom, measure has {len(measure.atoms)}")
    omega_eta, omega_h, omega_psi = moduli
    delta = segment_distance(psi1, psi2)
    bound = (p.lipschitz * measure.max_variation * (delta + omega_psi(omega_eta(delta)))
             + (p.growth_linear * psi1.sup_norm() + p.growth_const) * omega_h(delta))
    _, fd1 = split_delay_functional(measure, p, t, psi1)
    _, fd2 = split_delay_functional(measure, p, t, psi2)
    measured = (fd1 - fd2).norm()
    return PerturbationBound(bound, measured, delta, measured <= bound + BOUND_SLACK)


def probe_point_map(p: PointMap, grid: SpatialGrid, probes: List[Tuple[float, np.ndarray]],
                    name: str = 'point_map') -> CheckReport:
    """Sampled Lipschitz and growth bounds of p on collocation-valued probes"""
    rows = []
    for index, (t, u) in enumerate(probes):
        value = p(t, u)
        size = float(grid.collocation_norms(value))
        growth = p.growth_linear * float(grid.collocation_norms(u)) + p.growth_const
        row = {'probe': index, 'kind': 'growth', 'measured': size, 'bound': growth,
               'passed': size <= growth + BOUND_SLACK}
        rows.append(row)
        if index:
            s, v = probes[index - 1]
            diff = float(grid.collocation_norms(value - p(s, v)))
            lip = p.lipschitz * (abs(t - s) + float(grid.collocation_norms(np.asarray(u) - np.asarray(v))))
            rows.append({'probe': index, 'kind': 'lipschitz', 'measured': diff, 'bound': lip,
                         'passed': diff <= lip + BOUND_SLACK})
    failed = sorted({row['probe'] for row in rows if not row['passed']})
    message = f"{p.kind}: L_p={p.lipschitz:.6g}, C1={p.growth_linear:.6g}, C2={p.growth_const:.6g}"
    if failed:
        message += f"; violated at probes {failed}"
    return CheckReport(name, not failed, rows=rows, message=message)
