"""
Forward invariance of closed convex constraint sets: distance and projection,
the subtangential condition on an h-ladder, the cone criterion of the
frozen-semigroup variant, and trajectory monitoring.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from config.solver_config import (CONSTRAINT_TOLERANCE, H_LADDER, H_MIN, SATISFIED_RATIO,
                                  SCHEME_TOLERANCE, VIOLATED_RATIO)
from delaysim.models.history import HistoryBuffer, Segment
from delaysim.models.rhs import DelayRHS, eval_B
from delaysim.models.spectral_operator import SpectralOperator, StateVector
from delaysim.solvers.stepper import SolveResult
from delaysim.utils.errors import InputError
from delaysim.utils.reports import CheckReport

logger = logging.getLogger(__name__)

CONSTRAINT_KINDS = ('nonneg_cone', 'box', 'time_indexed_box')

VERDICT_SATISFIED = 'satisfied'
VERDICT_VIOLATED = 'violated'
VERDICT_INCONCLUSIVE = 'inconclusive'


class ConstraintSet:
    """
    D(t) = {u : lower_i(t) <= u^i(x_j) <= upper_i(t) at every collocation
    point}. Closed and convex for every kind.
    """

    def __init__(self, kind: str, lower=None, upper=None, times=None,
                 tolerance: float = CONSTRAINT_TOLERANCE):
        if kind not in CONSTRAINT_KINDS:
            raise InputError(f"Constraint kind must be one of {CONSTRAINT_KINDS}, got {kind!r}")
        if tolerance < 0:
            raise InputError("Constraint tolerance must be non-negative")
        self.kind = kind
        self.tolerance = float(tolerance)
        self.times = None

        if kind == 'nonneg_cone':
            self.lower = np.zeros(1)
            self.upper = np.full(1, np.inf)
        elif kind == 'box':
            self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
            self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        else:
            self.times = np.asarray(times, dtype=float)
            self.lower = np.asarray(lower, dtype=float)
            self.upper = np.asarray(upper, dtype=float)
            if self.lower.ndim == 1:
                self.lower = self.lower[:, None]
            if self.upper.ndim == 1:
                self.upper = self.upper[:, None]
            if self.times.ndim != 1 or self.times.size < 1 or self.lower.shape[0] != self.times.size \
                    or self.upper.shape != self.lower.shape:
                raise InputError("time_indexed_box needs 'times' and per-time 'lower'/'upper' rows")
            if np.any(np.diff(self.times) <= 0):
                raise InputError("time_indexed_box times must increase strictly")
        if np.any(self.lower > self.upper):
            raise InputError("Constraint lower bounds exceed upper bounds")

    @classmethod
    def nonneg_cone(cls, tolerance: float = CONSTRAINT_TOLERANCE) -> 'ConstraintSet':
        return cls('nonneg_cone', tolerance=tolerance)

    @classmethod
    def box(cls, lower, upper, tolerance: float = CONSTRAINT_TOLERANCE) -> 'ConstraintSet':
        return cls('box', lower, upper, tolerance=tolerance)

    @classmethod
    def time_indexed_box(cls, times, lower, upper, tolerance: float = CONSTRAINT_TOLERANCE) -> 'ConstraintSet':
        return cls('time_indexed_box', lower, upper, times, tolerance)

    @property
    def time_invariant(self) -> bool:
        return self.kind != 'time_indexed_box'

    def bounds(self, t: float):
        """Per-species (lower, upper) at time t"""
        if self.times is None:
            return self.lower, self.upper
        lower = np.array([np.interp(t, self.times, self.lower[:, i]) for i in range(self.lower.shape[1])])
        upper = np.array([np.interp(t, self.times, self.upper[:, i]) for i in range(self.upper.shape[1])])
        return lower, upper

    def project(self, t: float, x: StateVector) -> StateVector:
        """Nearest point of D(t): pointwise clipping at the collocation points"""
        values = x.to_collocation().coefficients
        lower, upper = self.bounds(t)
        clipped = np.clip(values, lower[:, None], upper[:, None])
        return StateVector(clipped, 'collocation', x.grid)

    def distance(self, t: float, x: StateVector) -> float:
        """||x - project(x)|| in the discrete L2 norm"""
        values = x.to_collocation()
        return (values - self.project(t, values)).norm()

    def contains(self, t: float, x: StateVector) -> bool:
        return self.distance(t, x) <= self.tolerance


@dataclass
class SubtangencyReport:
    t: float
    h_values: List[float]
    ratios: List[float]
    verdict: str
    criterion: str = 'subtangential'
    rows: List[Dict[str, Any]] = field(default_factory=list)


def classify_ratios(ratios: Sequence[float]) -> str:
    """
    satisfied: the ladder ends below SATISFIED_RATIO and either never rises or
    stays below it throughout. violated: ends above VIOLATED_RATIO without
    decreasing. Anything else is inconclusive.
    """
    r = np.asarray(ratios, dtype=float)
    rel = 1e-9 * np.maximum(np.abs(r[:-1]), 1e-300)
    non_increasing = bool(np.all(np.diff(r) <= rel))
    non_decreasing = bool(np.all(np.diff(r) >= -rel))
    if r[-1] < SATISFIED_RATIO and (non_increasing or np.all(r < SATISFIED_RATIO)):
        return VERDICT_SATISFIED
    if r[-1] > VIOLATED_RATIO and non_decreasing:
        return VERDICT_VIOLATED
    return VERDICT_INCONCLUSIVE


def _check_ladder(h_values: Sequence[float]) -> List[float]:
    h = [float(x) for x in h_values]
    if not h or any(b >= a for a, b in zip(h, h[1:])) or h[-1] < H_MIN:
        raise InputError(f"h_values must decrease strictly with the smallest >= {H_MIN}")
    return h


def _check_admissible(cset: ConstraintSet, t: float, psi: Segment):
    """(t, psi) must have psi(theta) in D(t + theta) at every knot"""
    for theta, coeffs in zip(psi.thetas, psi.values):
        state = StateVector(coeffs, 'spectral', psi.grid)
        if cset.distance(t + theta, state) > cset.tolerance:
            raise InputError(f"Probe leaves the constraint set at theta={theta:.6g}")


def _ladder_report(cset: ConstraintSet, t: float, h_values: List[float], predict, criterion: str) -> SubtangencyReport:
    ratios = []
    rows = []
    for h in h_values:
        ratio = cset.distance(t + h, predict(h)) / h
        ratios.append(ratio)
        rows.append({'h': h, 'ratio': ratio})
    verdict = classify_ratios(ratios)
    for row in rows:
        row['verdict'] = verdict
    return SubtangencyReport(t, h_values, ratios, verdict, criterion, rows)


def subtangential_check(cset: ConstraintSet, op: SpectralOperator, rhs: DelayRHS, t: float, psi: Segment,
                        h_values: Sequence[float] = H_LADDER) -> SubtangencyReport:
    """(1/h) d(T(h) psi(0) + phi1(h) B(t, psi); D(t+h)) along the h-ladder"""
    ladder = _check_ladder(h_values)
    _check_admissible(cset, t, psi)
    head = psi.head
    b = eval_B(rhs, t, psi)
    return _ladder_report(cset, t, ladder, lambda h: op.semigroup_apply(h, head) + op.phi1_apply(h, b),
                          'subtangential')


def corollary_condition_b(cset: ConstraintSet, rhs: DelayRHS, t: float, psi: Segment,
                          h_values: Sequence[float] = H_LADDER) -> SubtangencyReport:
    """(1/h) d(psi(0) + h B(t, psi); K) for a time-invariant K"""
    if not cset.time_invariant:
        raise InputError("The Euler-predictor criterion needs a time-invariant constraint set")
    ladder = _check_ladder(h_values)
    _check_admissible(cset, t, psi)
    head = psi.head
    b = eval_B(rhs, t, psi)
    return _ladder_report(cset, t, ladder, lambda h: head + b * h, 'euler_predictor')


def semigroup_preserves_K(cset: ConstraintSet, op: SpectralOperator, probes: Sequence[StateVector],
                          t_values: Sequence[float], name: str = 'semigroup_invariance') -> CheckReport:
    """
    Largest distance of T(t) x from K over probes x in K. Spectral truncation
    can move a Dirichlet solution slightly out of the cone; the excursion is
    reported.
    """
    if not cset.time_invariant:
        raise InputError("Semigroup invariance is checked for a time-invariant set")
    rows = []
    worst = 0.0
    for index, x in enumerate(probes):
        if not cset.contains(0.0, x):
            raise InputError(f"Probe {index} is not in the constraint set")
        for t in t_values:
            excursion = cset.distance(0.0, op.semigroup_apply(t, x))
            worst = max(worst, excursion)
            rows.append({'probe': index, 't': t, 'distance': excursion})
    passed = worst <= cset.tolerance
    return CheckReport(name, passed, rows=rows, message=f"max excursion {worst:.3e}", value=worst)


def monitor_trajectory(cset: ConstraintSet, result: Union[SolveResult, HistoryBuffer],
                       scheme_tolerance: float = SCHEME_TOLERANCE, name: str = 'trajectory_monitor') -> CheckReport:
    """Distance to D(t) at every knot; passes when the largest stays within tolerance"""
    buffer = result.buffer if isinstance(result, SolveResult) else result
    rows = []
    worst, worst_time = 0.0, None
    for t, coeffs in zip(buffer.times, buffer.values):
        gap = cset.distance(float(t), StateVector(coeffs, 'spectral', buffer.grid))
        rows.append({'time': float(t), 'distance': gap})
        if worst_time is None or gap > worst:
            worst, worst_time = gap, float(t)
    limit = cset.tolerance + scheme_tolerance
    passed = worst <= limit
    message = f"max distance {worst:.3e} at t={worst_time:.6g} (limit {limit:.1e})"
    if not passed:
        logger.warning(f"Trajectory leaves the constraint set: {message}")
    return CheckReport(name, passed, rows=rows, message=message, value=worst)
