"""
Solution history: piecewise-linear segments u_t over [t - r, t] and the
append-only buffer the stepper writes into
"""
import logging
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from config.solver_config import EDGE_TOLERANCE
from delaysim.models.spectral_operator import SpatialGrid, StateVector
from delaysim.utils.errors import ContractViolation, InputError

logger = logging.getLogger(__name__)


def interpolate_knots(times: np.ndarray, values: np.ndarray, s: np.ndarray) -> np.ndarray:
    """
    Piecewise-linear interpolation of knot values (K, m, N) at times s.
    Times equal to a knot return that knot's value bit-exactly; times outside
    the knot range are clamped to the end knots.
    """
    s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), times[0], times[-1])
    if times.size == 1:
        return np.repeat(values[:1], s.size, axis=0)

    idx = np.clip(np.searchsorted(times, s, side='right') - 1, 0, times.size - 2)
    t0 = times[idx]
    t1 = times[idx + 1]
    w = (s - t0) / (t1 - t0)
    v0 = values[idx]
    out = v0 + w[:, None, None] * (values[idx + 1] - v0)

    hit0 = s == t0
    out[hit0] = values[idx[hit0]]
    hit1 = s == t1
    out[hit1] = values[idx[hit1] + 1]
    return out


class Segment:
    """
    Immutable history slice theta -> u(t + theta) on [-r, window_end].

    A full segment has window_end = 0. A truncated view (window_end < 0) is
    what delay functionals see; reading it past window_end is a contract
    violation of the ignore interval.
    """

    __slots__ = ('anchor_time', 'delay_horizon', 'times', 'values', 'grid', 'window_end')

    def __init__(self, anchor_time: float, delay_horizon: float, times, values,
                 grid: SpatialGrid, window_end: float = 0.0):
        if not delay_horizon > 0:
            raise InputError(f"Delay horizon must be positive, got {delay_horizon}")
        if not -delay_horizon <= window_end <= 0:
            raise InputError(f"window_end must lie in [-r, 0], got {window_end}")

        times = np.array(times, dtype=float, ndmin=1)
        values = np.array(values, dtype=float)
        if times.size == 0:
            raise InputError("Segment has no knots")
        if values.ndim != 3 or values.shape[0] != times.size or values.shape[2] != grid.n_modes:
            raise InputError(f"Knot values must have shape ({times.size}, n_species, {grid.n_modes}), "
                             f"got {values.shape}")
        if np.any(np.diff(times) <= 0):
            raise InputError("Knot times must be strictly increasing")

        tol = EDGE_TOLERANCE * max(1.0, abs(anchor_time), delay_horizon)
        if times[0] > anchor_time - delay_horizon + tol or times[-1] < anchor_time + window_end - tol:
            raise InputError(
                f"Knots [{times[0]:.6g}, {times[-1]:.6g}] do not cover "
                f"[{anchor_time - delay_horizon:.6g}, {anchor_time + window_end:.6g}]"
            )
        if times[-1] > anchor_time + window_end + tol:
            raise InputError(f"Last knot {times[-1]:.6g} lies past the window end {anchor_time + window_end:.6g}")

        times.setflags(write=False)
        values.setflags(write=False)
        self.anchor_time = float(anchor_time)
        self.delay_horizon = float(delay_horizon)
        self.times = times
        self.values = values
        self.grid = grid
        self.window_end = float(window_end)

    @classmethod
    def from_knots(cls, times, values, grid: SpatialGrid, anchor_time: float,
                   delay_horizon: float, window_end: float = 0.0) -> 'Segment':
        """Slice knots to the window, inserting interpolated knots at its ends"""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        lo_t = anchor_time - delay_horizon
        hi_t = anchor_time + window_end
        tol = EDGE_TOLERANCE * max(1.0, abs(anchor_time), delay_horizon)
        if times.size == 0 or times[0] > lo_t + tol or times[-1] < hi_t - tol:
            raise InputError(f"History does not cover [{lo_t:.6g}, {hi_t:.6g}]")

        if hi_t <= lo_t:
            value = interpolate_knots(times, values, [lo_t])
            return cls(anchor_time, delay_horizon, [lo_t], value, grid, window_end)

        i0 = max(int(np.searchsorted(times, lo_t, side='right')) - 1, 0)
        i1 = min(int(np.searchsorted(times, hi_t, side='left')), times.size - 1)
        sel_t = times[i0:i1 + 1].copy()
        sel_v = values[i0:i1 + 1].copy()

        first = interpolate_knots(times, values, [lo_t])[0] if sel_t[0] < lo_t else None
        last = interpolate_knots(times, values, [hi_t])[0] if sel_t[-1] > hi_t else None
        if first is not None:
            sel_t[0] = lo_t
            sel_v[0] = first
        if last is not None:
            sel_t[-1] = hi_t
            sel_v[-1] = last
        return cls(anchor_time, delay_horizon, sel_t, sel_v, grid, window_end)

    @classmethod
    def constant(cls, grid: SpatialGrid, state: StateVector, anchor_time: float,
                 delay_horizon: float) -> 'Segment':
        """History identically equal to one state"""
        coeffs = state.to_spectral().coefficients
        values = np.stack([coeffs, coeffs])
        return cls(anchor_time, delay_horizon, [anchor_time - delay_horizon, anchor_time], values, grid)

    @property
    def n_species(self) -> int:
        return self.values.shape[1]

    @property
    def thetas(self) -> np.ndarray:
        return self.times - self.anchor_time

    @property
    def is_truncated(self) -> bool:
        return self.window_end < 0

    def _check_thetas(self, thetas: np.ndarray):
        tol = EDGE_TOLERANCE * max(1.0, self.delay_horizon)
        if np.any(thetas < -self.delay_horizon - tol) or np.any(thetas > tol) or np.any(np.isnan(thetas)):
            bad = thetas[(thetas < -self.delay_horizon - tol) | (thetas > tol) | np.isnan(thetas)][0]
            raise InputError(f"theta={bad} outside [-{self.delay_horizon}, 0]")
        if np.any(thetas > self.window_end + tol):
            bad = float(np.max(thetas))
            raise ContractViolation(
                'ignore-interval',
                f"read at theta={bad:.6g} but only theta <= {self.window_end:.6g} is visible"
            )

    def values_at(self, thetas) -> np.ndarray:
        """Spectral coefficients (n, m, N) at the given thetas"""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        self._check_thetas(thetas)
        return interpolate_knots(self.times, self.values, self.anchor_time + thetas)

    def collocation_at(self, thetas) -> np.ndarray:
        """Point values (n, m, M) at the given thetas"""
        return self.grid.to_collocation(self.values_at(thetas))

    def evaluate(self, theta: float) -> StateVector:
        return StateVector(self.values_at([theta])[0], 'spectral', self.grid)

    @property
    def head(self) -> StateVector:
        """psi(0)"""
        return self.evaluate(0.0)

    def sup_norm(self) -> float:
        """Largest knot norm; exact for the piecewise-linear interpolant up to knot spacing"""
        return float(np.max(self.grid.spectral_norms(self.values)))

    def truncate(self, eta_ign: float) -> 'Segment':
        """View restricted to theta in [-r, -eta_ign]"""
        if not 0 < eta_ign <= self.delay_horizon:
            raise InputError(f"Ignore interval must lie in (0, {self.delay_horizon}], got {eta_ign}")
        window_end = min(self.window_end, -eta_ign)
        return Segment.from_knots(self.times, self.values, self.grid, self.anchor_time,
                                  self.delay_horizon, window_end)

    def with_knot(self, time: float) -> 'Segment':
        """Same function with an extra knot at the given absolute time"""
        if np.any(self.times == time):
            return self
        value = interpolate_knots(self.times, self.values, [time])
        pos = int(np.searchsorted(self.times, time))
        times = np.insert(self.times, pos, time)
        values = np.insert(self.values, pos, value[0], axis=0)
        return Segment(self.anchor_time, self.delay_horizon, times, values, self.grid, self.window_end)

    def with_values(self, values) -> 'Segment':
        return Segment(self.anchor_time, self.delay_horizon, self.times, values, self.grid, self.window_end)

    def constant_extension(self, a: float, t: float) -> 'Segment':
        """
        Segment at t of the function equal to this history up to a and to
        its value at a afterwards.
        """
        if abs(self.anchor_time - a) > EDGE_TOLERANCE * max(1.0, abs(a)):
            raise InputError(f"Segment is anchored at {self.anchor_time}, not at {a}")
        if t < a:
            raise InputError(f"Extension time t={t} precedes anchor a={a}")
        if t == a:
            return self

        keep = self.times < a
        head = interpolate_knots(self.times, self.values, [a])
        times = np.concatenate((self.times[keep], [a, t]))
        values = np.concatenate((self.values[keep], head, head))
        return Segment.from_knots(times, values, self.grid, t, self.delay_horizon)

    def __repr__(self) -> str:
        return (f"Segment(t={self.anchor_time:.6g}, r={self.delay_horizon:.6g}, "
                f"knots={self.times.size}, window_end={self.window_end:.6g})")


def segment_distance(first: Segment, second: Segment) -> float:
    """Sup over theta of ||psi1(theta) - psi2(theta)|| on the shared window"""
    if abs(first.delay_horizon - second.delay_horizon) > EDGE_TOLERANCE:
        raise InputError("Segments have different delay horizons")
    r = first.delay_horizon
    upper = min(first.window_end, second.window_end)
    thetas = np.union1d(first.thetas, second.thetas)
    thetas = np.clip(thetas, -r, upper)
    thetas = np.union1d(thetas, [-r, upper])
    diff = first.values_at(thetas) - second.values_at(thetas)
    return float(np.max(first.grid.spectral_norms(diff)))


class HistoryBuffer:
    """Append-only knot storage for one trajectory"""

    def __init__(self, grid: SpatialGrid, n_species: int, delay_horizon: float, capacity: int = 256):
        if not delay_horizon > 0:
            raise InputError(f"Delay horizon must be positive, got {delay_horizon}")
        self.grid = grid
        self.n_species = n_species
        self.delay_horizon = float(delay_horizon)
        self._times = np.empty(max(capacity, 2))
        self._values = np.empty((max(capacity, 2), n_species, grid.n_modes))
        self._count = 0

    @classmethod
    def from_segment(cls, segment: Segment) -> 'HistoryBuffer':
        """Start a buffer with the knots of an initial history"""
        if segment.is_truncated:
            raise InputError("A buffer starts from a full segment, got a truncated view")
        buffer = cls(segment.grid, segment.n_species, segment.delay_horizon,
                     capacity=max(256, 2 * segment.times.size))
        n = segment.times.size
        buffer._times[:n] = segment.times
        buffer._values[:n] = segment.values
        buffer._count = n
        return buffer

    def __len__(self) -> int:
        return self._count

    @property
    def times(self) -> np.ndarray:
        view = self._times[:self._count]
        view.setflags(write=False)
        return view

    @property
    def values(self) -> np.ndarray:
        view = self._values[:self._count]
        view.setflags(write=False)
        return view

    @property
    def start_time(self) -> float:
        return float(self._times[0])

    @property
    def end_time(self) -> float:
        if self._count == 0:
            raise InputError("History buffer is empty")
        return float(self._times[self._count - 1])

    @property
    def last_state(self) -> StateVector:
        return StateVector(self._values[self._count - 1], 'spectral', self.grid)

    def _grow(self):
        capacity = 2 * self._times.size
        times = np.empty(capacity)
        values = np.empty((capacity,) + self._values.shape[1:])
        times[:self._count] = self._times[:self._count]
        values[:self._count] = self._values[:self._count]
        self._times = times
        self._values = values

    def append(self, t: float, state: StateVector):
        """Add a knot; times must increase strictly"""
        coeffs = state.to_spectral().coefficients
        if coeffs.shape != self._values.shape[1:]:
            raise InputError(f"State shape {coeffs.shape} does not match buffer {self._values.shape[1:]}")
        if self._count and not t > self._times[self._count - 1]:
            raise InputError(f"Knot time {t} does not follow {self._times[self._count - 1]}")
        if self._count == self._times.size:
            self._grow()
        self._times[self._count] = t
        self._values[self._count] = coeffs
        self._count += 1

    def _window_start(self, t: float) -> int:
        lo = int(np.searchsorted(self._times[:self._count], t - self.delay_horizon, side='right')) - 1
        return max(lo, 0)

    def segment_at(self, t: float) -> Segment:
        """u_t built from the stored knots"""
        lo = self._window_start(t)
        return Segment.from_knots(self._times[lo:self._count], self._values[lo:self._count],
                                  self.grid, t, self.delay_horizon)

    def segment_with(self, t: float, extra_times: Sequence[float], extra_values: np.ndarray) -> Segment:
        """u_t from the stored knots followed by trial knots past the buffer end"""
        lo = self._window_start(t)
        times = np.concatenate((self._times[lo:self._count], np.asarray(extra_times, dtype=float)))
        values = np.concatenate((self._values[lo:self._count], np.asarray(extra_values, dtype=float)))
        return Segment.from_knots(times, values, self.grid, t, self.delay_horizon)

    def state_at(self, t: float) -> StateVector:
        if not self.start_time - EDGE_TOLERANCE <= t <= self.end_time + EDGE_TOLERANCE:
            raise InputError(f"t={t} outside stored history [{self.start_time}, {self.end_time}]")
        return StateVector(interpolate_knots(self.times, self.values, [t])[0], 'spectral', self.grid)

    def knot_norms(self) -> np.ndarray:
        return self.grid.spectral_norms(self.values)

    def rows(self, representation: str = 'spectral') -> Iterator[Tuple[float, int, int, float]]:
        """(time, species, mode_or_point, value) per stored coefficient"""
        values = self.values if representation == 'spectral' else self.grid.to_collocation(self.values)
        for k, t in enumerate(self.times):
            for i in range(values.shape[1]):
                for j in range(values.shape[2]):
                    yield float(t), i, j, float(values[k, i, j])


def buffer_sup_distance(first: HistoryBuffer, second: HistoryBuffer,
                        t_start: Optional[float] = None, t_end: Optional[float] = None) -> float:
    """Sup over shared knot times of ||u1(s) - u2(s)||"""
    lo = max(first.start_time, second.start_time)
    hi = min(first.end_time, second.end_time)
    if t_start is not None:
        lo = max(lo, t_start)
    if t_end is not None:
        hi = min(hi, t_end)
    if lo > hi:
        raise InputError("Trajectories do not overlap in time")
    s = np.union1d(first.times, second.times)
    s = np.union1d(s[(s >= lo) & (s <= hi)], [lo, hi])
    diff = interpolate_knots(first.times, first.values, s) - interpolate_knots(second.times, second.values, s)
    return float(np.max(first.grid.spectral_norms(diff)))
