"""
Independent reference solutions by waveform relaxation: global Picard sweeps
of the mild-solution integral equation on a fine uniform grid.

Nothing here reuses the stepper. The trapezoidal rule replaces the stepper's
phi-function weights and comparisons use their own interpolation.
"""
import logging
from typing import List, Union

import numpy as np
from scipy.integrate import trapezoid

from config.solver_config import EDGE_TOLERANCE, ORACLE_MAX_SWEEPS, ORACLE_MIN_GRID_N, ORACLE_TOL
from delaysim.models.history import HistoryBuffer, Segment
from delaysim.models.rhs import DelayRHS, eval_B
from delaysim.models.spectral_operator import SpectralOperator, StateVector
from delaysim.solvers.stepper import SolveResult
from delaysim.utils.errors import ConvergenceError, InputError

logger = logging.getLogger(__name__)


class WaveformRelaxation:
    """Jacobi sweeps u^{(j+1)} = T(.)phi(0) + integral T(. - s) B(s, u^{(j)}_s) ds"""

    def __init__(self, op: SpectralOperator, rhs: DelayRHS, grid_n: int,
                 tol: float = ORACLE_TOL, max_sweeps: int = ORACLE_MAX_SWEEPS):
        if grid_n < ORACLE_MIN_GRID_N:
            raise InputError(f"grid_n must be at least {ORACLE_MIN_GRID_N}, got {grid_n}")
        if not tol > 0 or max_sweeps < 1:
            raise InputError("tol must be positive and max_sweeps at least 1")
        self.op = op
        self.rhs = rhs
        self.grid_n = int(grid_n)
        self.tol = tol
        self.max_sweeps = int(max_sweeps)
        self.residuals: List[float] = []

    def _sweep_values(self, phi: Segment, nodes: np.ndarray, current: np.ndarray) -> np.ndarray:
        """B at every node, all taken from the current iterate"""
        times = np.concatenate((phi.times[:-1], nodes))
        values = np.concatenate((phi.values[:-1], current))
        out = np.empty_like(current)
        for i, s in enumerate(nodes):
            segment = Segment.from_knots(times, values, phi.grid, s, phi.delay_horizon)
            out[i] = eval_B(self.rhs, s, segment).coefficients
        return out

    def solve(self, phi: Segment, a: float, T: float) -> HistoryBuffer:
        if not T > a:
            raise InputError(f"Reference horizon needs T > a, got a={a}, T={T}")
        if self.rhs.has_atoms and T - a > self.rhs.min_ignore_interval(a, T) + EDGE_TOLERANCE:
            raise InputError(f"T - a = {T - a:.6g} exceeds the ignore interval; chain windows externally")
        if abs(phi.anchor_time - a) > EDGE_TOLERANCE * max(1.0, abs(a)):
            raise InputError(f"Initial history is anchored at {phi.anchor_time}, not at {a}")
        if phi.is_truncated:
            raise InputError("Initial history must be a full segment, got a truncated view")

        n = self.grid_n
        step = (T - a) / n
        nodes = a + step * np.arange(n + 1)
        nodes[-1] = T

        decay = self.op.semigroup_factor(step)
        head = phi.values[-1]
        free = np.stack([head * self.op.semigroup_factor(s - a) for s in nodes])
        current = free.copy()

        self.residuals = []
        for sweep in range(1, self.max_sweeps + 1):
            b = self._sweep_values(phi, nodes, current)
            updated = np.empty_like(current)
            updated[0] = head
            for i in range(n):
                updated[i + 1] = decay * updated[i] + 0.5 * step * (decay * b[i] + b[i + 1])

            residual = float(np.max(phi.grid.spectral_norms(updated - current)))
            self.residuals.append(residual)
            current = updated
            logger.debug(f"Sweep {sweep}: residual {residual:.3e}")
            if residual < self.tol:
                logger.info(f"Waveform relaxation converged after {sweep} sweeps (grid_n={n})")
                break
        else:
            raise ConvergenceError(
                f"Waveform relaxation did not reach tol={self.tol:.1e} in {self.max_sweeps} sweeps "
                f"(last residual {self.residuals[-1]:.3e})",
                self.residuals,
            )

        buffer = HistoryBuffer(phi.grid, phi.n_species, phi.delay_horizon, capacity=phi.times.size + n + 1)
        for t, value in zip(phi.times[:-1], phi.values[:-1]):
            buffer.append(float(t), _state(phi, value))
        for t, value in zip(nodes, current):
            buffer.append(float(t), _state(phi, value))
        return buffer


def _state(phi: Segment, coefficients: np.ndarray) -> StateVector:
    return StateVector(coefficients, 'spectral', phi.grid)


def solve_reference(op: SpectralOperator, rhs: DelayRHS, phi: Segment, a: float, T: float,
                    grid_n: int, tol: float = ORACLE_TOL, max_sweeps: int = ORACLE_MAX_SWEEPS) -> HistoryBuffer:
    """Converged reference trajectory on [a - r, T]"""
    return WaveformRelaxation(op, rhs, grid_n, tol, max_sweeps).solve(phi, a, T)


def _column_interp(times: np.ndarray, values: np.ndarray, s: np.ndarray) -> np.ndarray:
    flat = values.reshape(values.shape[0], -1)
    out = np.column_stack([np.interp(s, times, flat[:, j]) for j in range(flat.shape[1])])
    return out.reshape((s.size,) + values.shape[1:])


def compare(reference: HistoryBuffer, candidate: Union[HistoryBuffer, SolveResult], norm: str = 'sup') -> float:
    """Discrepancy of two trajectories over their common time span"""
    if isinstance(candidate, SolveResult):
        candidate = candidate.buffer
    if norm not in ('sup', 'l2_time'):
        raise InputError(f"norm must be 'sup' or 'l2_time', got {norm!r}")
    lo = max(reference.start_time, candidate.start_time)
    hi = min(reference.end_time, candidate.end_time)
    if lo > hi:
        raise InputError(f"Trajectories do not overlap: [{reference.start_time}, {reference.end_time}] vs "
                         f"[{candidate.start_time}, {candidate.end_time}]")

    s = np.union1d(reference.times, candidate.times)
    s = np.union1d(s[(s >= lo) & (s <= hi)], [lo, hi])
    diff = _column_interp(reference.times, reference.values, s) - _column_interp(candidate.times, candidate.values, s)
    sizes = reference.grid.spectral_norms(diff)
    if norm == 'sup' or s.size == 1:
        return float(np.max(sizes))
    return float(np.sqrt(trapezoid(sizes ** 2, s)))
