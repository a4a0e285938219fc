"""
Right-hand side B(t, psi) = G(t, psi(0), F(t, psi)) and sampled probes of the
hypotheses placed on G and on B.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config.solver_config import BOUND_SLACK, QUADRATURE_NODES, QUASIPOSITIVITY_TOLERANCE
from delaysim.models.delay_kernel import DelayMeasure, PointMap, split_delay_functional
from delaysim.models.history import Segment, segment_distance
from delaysim.models.spectral_operator import SpatialGrid, StateVector
from delaysim.utils.errors import InputError
from delaysim.utils.reports import CheckReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OuterMap:
    """G(t, u, v) acting pointwise on collocation values of shape (n_species, n_points)"""
    G_fn: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    lipschitz: Callable[[float], float]
    time_modulus: Optional[Callable[[float, float], float]] = None
    growth: Optional[Tuple[Callable[[float], float], Callable[[float], float]]] = None
    kind: str = 'custom'

    def __call__(self, t: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.G_fn(t, u, v)

    @classmethod
    def affine(cls, d: float = 0.0, growth_const: float = 0.0) -> 'OuterMap':
        """G = v - d u"""
        d = float(d)
        lip = max(1.0, abs(d))
        return cls(lambda t, u, v: v - d * u, lambda R: lip,
                   growth=(lambda t: lip, lambda t: growth_const), kind='affine')

    @classmethod
    def nicholson(cls, d: float, growth_const: float) -> 'OuterMap':
        """G = v - d u with the growth constants of a bounded birth term"""
        d = float(d)
        return cls(lambda t, u, v: v - d * u, lambda R: max(1.0, abs(d)),
                   growth=(lambda t: d, lambda t: growth_const), kind='nicholson')

    @classmethod
    def lotka_volterra(cls, b: Sequence[float]) -> 'OuterMap':
        """G^i = b_i u^i (1 - v^i); quadratic, so no global linear growth. L_GR is for the sup-norm ball."""
        rates = np.asarray(b, dtype=float)[:, None]
        bmax = float(np.max(np.abs(rates)))
        return cls(lambda t, u, v: rates * u * (1.0 - v), lambda R: bmax * (1.0 + R),
                   kind='lotka_volterra')

    @classmethod
    def constant(cls, values: Sequence[float], volume: float = 1.0) -> 'OuterMap':
        """G = c per species, independent of u and v"""
        c = np.asarray(values, dtype=float)[:, None]
        size = float(np.sqrt(volume * np.sum(c * c)))
        return cls(lambda t, u, v: np.broadcast_to(c, u.shape).copy(), lambda R: 0.0,
                   growth=(lambda t: 0.0, lambda t: size), kind='constant')

    @classmethod
    def zero(cls) -> 'OuterMap':
        return cls(lambda t, u, v: np.zeros_like(u), lambda R: 0.0,
                   growth=(lambda t: 0.0, lambda t: 0.0), kind='zero')

    @classmethod
    def custom_table(cls, times: Sequence[float], a: Sequence[float], b: Sequence[float],
                     c: Sequence[float], volume: float = 1.0) -> 'OuterMap':
        """G = a(t) u + b(t) v + c(t) with piecewise-linear coefficient tables"""
        ts = np.asarray(times, dtype=float)
        tables = [np.asarray(x, dtype=float) for x in (a, b, c)]
        if ts.ndim != 1 or ts.size < 1 or any(x.shape != ts.shape for x in tables):
            raise InputError("custom_table needs 'times', 'a', 'b', 'c' of equal length")
        if np.any(np.diff(ts) <= 0):
            raise InputError("custom_table times must increase strictly")
        ta, tb, tc = tables
        lip = float(max(np.max(np.abs(ta)), np.max(np.abs(tb))))

        def slope(x):
            return float(np.max(np.abs(np.diff(x) / np.diff(ts)))) if ts.size > 1 else 0.0

        def G(t, u, v):
            return np.interp(t, ts, ta) * u + np.interp(t, ts, tb) * v + np.interp(t, ts, tc)

        return cls(G, lambda R: lip,
                   time_modulus=lambda R, dt: (slope(ta) * R + slope(tb) * R + slope(tc)) * dt,
                   growth=(lambda t: max(abs(np.interp(t, ts, ta)), abs(np.interp(t, ts, tb))),
                           lambda t: abs(float(np.interp(t, ts, tc))) * np.sqrt(volume)),
                   kind='custom_table')


@dataclass(frozen=True, eq=False)
class DelayTerm:
    """One measure with its point map; terms add into F"""
    measure: DelayMeasure
    p: PointMap


@dataclass(frozen=True, eq=False)
class DelayRHS:
    terms: Tuple[DelayTerm, ...]
    outer: OuterMap
    delay_horizon: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple(self.terms))
        horizons = [term.measure.delay_horizon for term in self.terms]
        if self.delay_horizon is None:
            if not horizons:
                raise InputError("A right-hand side without delay terms needs an explicit delay horizon")
            object.__setattr__(self, 'delay_horizon', max(horizons))
        elif horizons and max(horizons) > self.delay_horizon:
            raise InputError(f"Delay horizon {self.delay_horizon} is shorter than a measure's {max(horizons)}")

    @classmethod
    def single(cls, measure: DelayMeasure, p: PointMap, outer: OuterMap) -> 'DelayRHS':
        return cls((DelayTerm(measure, p),), outer)

    @property
    def measures(self) -> List[DelayMeasure]:
        return [term.measure for term in self.terms]

    @property
    def has_atoms(self) -> bool:
        return any(m.has_atoms for m in self.measures)

    @property
    def density_only(self) -> bool:
        return not self.has_atoms

    def min_ignore_interval(self, t0: float, t1: float) -> float:
        """Smallest eta_ign over [t0, t1] among measures carrying atoms"""
        values = [m.ignore_interval.minimum(t0, t1) for m in self.measures if m.has_atoms]
        return min(values) if values else float('inf')

    def delay_lipschitz(self, R: float) -> float:
        """L_Fc = sum over terms of L_p M_Vg + L_Vgc (C1 R + C2)"""
        return float(sum(term.p.lipschitz * term.measure.max_variation
                         + term.measure.density_lipschitz * (term.p.growth_linear * R + term.p.growth_const)
                         for term in self.terms))


def eval_F_split(rhs: DelayRHS, t: float, psi: Segment,
                 n_nodes: int = QUADRATURE_NODES) -> Tuple[StateVector, StateVector]:
    """(F_c, F_d) summed over all delay terms, collocation representation"""
    f_c = StateVector.zeros(psi.grid, psi.n_species, 'collocation')
    f_d = StateVector.zeros(psi.grid, psi.n_species, 'collocation')
    for term in rhs.terms:
        c, d = split_delay_functional(term.measure, term.p, t, psi, n_nodes)
        f_c = f_c + c
        f_d = f_d + d
    return f_c, f_d


def eval_B_collocation(rhs: DelayRHS, t: float, psi: Segment,
                       n_nodes: int = QUADRATURE_NODES) -> np.ndarray:
    """G(t, psi(0), F_c + F_d) at the collocation points"""
    f_c, f_d = eval_F_split(rhs, t, psi, n_nodes)
    head = psi.collocation_at([0.0])[0]
    return np.asarray(rhs.outer(t, head, (f_c + f_d).coefficients), dtype=float)


def eval_B(rhs: DelayRHS, t: float, psi: Segment, n_nodes: int = QUADRATURE_NODES) -> StateVector:
    """B(t, psi) in spectral representation"""
    values = eval_B_collocation(rhs, t, psi, n_nodes)
    return StateVector(values, 'collocation', psi.grid).to_spectral()


def linear_growth_probe(rhs: DelayRHS, grid: SpatialGrid, probes: List[Tuple[float, np.ndarray, np.ndarray]],
                        name: str = 'linear_growth') -> CheckReport:
    """||G(t,u,v)|| <= k1(t)(||u|| + ||v||) + k2(t) on (t, u, v) probes"""
    if rhs.outer.growth is None:
        return CheckReport(name, True, applicable=False,
                           message=f"{rhs.outer.kind}: no linear growth constants declared")
    k1, k2 = rhs.outer.growth
    rows = []
    worst = 0.0
    for index, (t, u, v) in enumerate(probes):
        size = float(grid.collocation_norms(rhs.outer(t, u, v)))
        bound = k1(t) * (float(grid.collocation_norms(u)) + float(grid.collocation_norms(v))) + k2(t)
        ratio = size / bound if bound > 0 else (0.0 if size == 0 else float('inf'))
        worst = max(worst, ratio)
        rows.append({'probe': index, 't': t, 'norm_G': size, 'bound': bound, 'ratio': ratio,
                     'passed': size <= bound + BOUND_SLACK})
    failed = [row['probe'] for row in rows if not row['passed']]
    message = f"max ratio {worst:.6g}"
    if failed:
        message += f"; violated at probes {failed}"
    return CheckReport(name, not failed, rows=rows, message=message, value=worst)


def quasipositivity_probe(rhs: DelayRHS, probes: List[Tuple[float, Segment, int]],
                          tolerance: float = QUASIPOSITIVITY_TOLERANCE,
                          name: str = 'quasipositivity') -> CheckReport:
    """
    Probes are non-negative segments whose head vanishes in one species i;
    component i of B must then be >= -tolerance everywhere.
    """
    rows = []
    for index, (t, psi, species) in enumerate(probes):
        colloc = psi.grid.to_collocation(psi.values)
        head = psi.collocation_at([0.0])[0]
        if np.min(colloc) < -tolerance or np.max(np.abs(head[species])) > tolerance:
            raise InputError(f"Probe {index} must be non-negative with species {species} zero at theta=0")
        minimum = float(np.min(eval_B_collocation(rhs, t, psi)[species]))
        rows.append({'probe': index, 't': t, 'species': species, 'min_B': minimum,
                     'passed': minimum >= -tolerance})
    failed = [row['probe'] for row in rows if not row['passed']]
    worst = min((row['min_B'] for row in rows), default=0.0)
    message = f"min B_i over probes {worst:.6g}"
    if failed:
        message += f"; negative at probes {failed}"
    return CheckReport(name, not failed, rows=rows, message=message, value=worst)


def lipschitz_surrogate_probe(rhs: DelayRHS, radius: float, pairs: List[Tuple[float, Segment, Segment]],
                              name: str = 'lipschitz_surrogate') -> CheckReport:
    """
    For density-only right-hand sides: ||B(t,psi1) - B(t,psi2)|| <=
    L_GR (1 + L_Fc) ||psi1 - psi2||_C on pairs inside the ball of radius R.
    """
    if rhs.has_atoms:
        return CheckReport(name, True, applicable=False, message='atoms present: no Lipschitz surrogate')
    constant = rhs.outer.lipschitz(radius) * (1.0 + rhs.delay_lipschitz(radius))
    rows = []
    for index, (t, psi1, psi2) in enumerate(pairs):
        if max(psi1.sup_norm(), psi2.sup_norm()) > radius:
            continue
        measured = (eval_B(rhs, t, psi1) - eval_B(rhs, t, psi2)).norm()
        bound = constant * segment_distance(psi1, psi2)
        rows.append({'pair': index, 't': t, 'measured': measured, 'bound': bound,
                     'passed': measured <= bound + BOUND_SLACK})
    failed = [row['pair'] for row in rows if not row['passed']]
    message = f"L_GR(1+L_Fc)={constant:.6g} on {len(rows)} pairs"
    if failed:
        message += f"; exceeded at pairs {failed}"
    return CheckReport(name, not failed, rows=rows, message=message, value=constant)


Sample = Tuple[float, np.ndarray, np.ndarray]


def check_outer_lipschitz(outer: OuterMap, grid: SpatialGrid, radius: float, pairs: List[Tuple[Sample, Sample]],
                          name: str = 'outer_lipschitz') -> CheckReport:
    """||G(t1,u1,v1) - G(t2,u2,v2)|| <= nu_R(|t1-t2|) + L_GR (||u1-u2|| + ||v1-v2||)"""
    lip = outer.lipschitz(radius)
    rows = []
    for index, ((t1, u1, v1), (t2, u2, v2)) in enumerate(pairs):
        diff = float(grid.collocation_norms(outer(t1, u1, v1) - outer(t2, u2, v2)))
        modulus = outer.time_modulus(radius, abs(t1 - t2)) if outer.time_modulus else 0.0
        if outer.time_modulus is None and t1 != t2:
            raise InputError(f"{outer.kind} has no time modulus; probe pairs must share t")
        bound = modulus + lip * (float(grid.collocation_norms(np.asarray(u1) - u2))
                                 + float(grid.collocation_norms(np.asarray(v1) - v2)))
        rows.append({'pair': index, 'measured': diff, 'bound': bound, 'passed': diff <= bound + BOUND_SLACK})
    failed = [row['pair'] for row in rows if not row['passed']]
    message = f"L_GR({radius:.6g})={lip:.6g}"
    if failed:
        message += f"; exceeded at pairs {failed}"
    return CheckReport(name, not failed, rows=rows, message=message)
