"""
Spectral representation of the diffusion generator and its semigroup
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from delaysim.utils.errors import InputError

logger = logging.getLogger(__name__)

DOMAIN_KINDS = ('interval', 'point')
BOUNDARIES = ('dirichlet', 'neumann', 'none')

# Below this |lambda h| the closed form of phi2 cancels badly
_PHI2_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Eigenbasis and collocation points of a 1-D interval or a single point"""
    domain_kind: str = 'point'
    length: float = 1.0
    n_modes: int = 1
    n_collocation: Optional[int] = None
    boundary: str = 'none'

    def __post_init__(self):
        if self.domain_kind not in DOMAIN_KINDS:
            raise InputError(f"domain_kind must be one of {DOMAIN_KINDS}, got {self.domain_kind!r}")
        if self.boundary not in BOUNDARIES:
            raise InputError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

        if self.domain_kind == 'point':
            if self.boundary != 'none':
                raise InputError("A point domain takes boundary 'none'")
            if self.n_modes != 1 or self.n_collocation not in (None, 1):
                raise InputError("A point domain has exactly one mode and one collocation point")
            object.__setattr__(self, 'n_collocation', 1)
            object.__setattr__(self, 'length', 1.0)
            return

        if self.boundary == 'none':
            raise InputError("An interval needs a 'dirichlet' or 'neumann' boundary")
        if not np.isfinite(self.length) or self.length <= 0:
            raise InputError(f"Interval length must be positive, got {self.length}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InputError(f"n_modes must be a positive integer, got {self.n_modes}")
        n_coll = 2 * self.n_modes if self.n_collocation is None else self.n_collocation
        if int(n_coll) != n_coll or n_coll < self.n_modes:
            raise InputError(f"n_collocation ({n_coll}) must be an integer >= n_modes ({self.n_modes})")
        object.__setattr__(self, 'n_modes', int(self.n_modes))
        object.__setattr__(self, 'n_collocation', int(n_coll))
        object.__setattr__(self, 'length', float(self.length))

    @classmethod
    def point(cls) -> 'SpatialGrid':
        return cls()

    @classmethod
    def interval(cls, length: float, n_modes: int, boundary: str = 'neumann',
                 n_collocation: Optional[int] = None) -> 'SpatialGrid':
        return cls('interval', length, n_modes, n_collocation, boundary)

    @property
    def is_point(self) -> bool:
        return self.domain_kind == 'point'

    @property
    def volume(self) -> float:
        """Measure of the domain (1 for a point)"""
        return self.length

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        if self.boundary == 'dirichlet':
            k = np.arange(1, self.n_modes + 1, dtype=float)
        else:
            k = np.arange(self.n_modes, dtype=float)
        k.setflags(write=False)
        return k

    @cached_property
    def points(self) -> np.ndarray:
        """Collocation points"""
        m = self.n_collocation
        if self.is_point:
            x = np.zeros(1)
        elif self.boundary == 'dirichlet':
            x = np.arange(1, m + 1) * self.length / (m + 1)
        else:
            x = (np.arange(m) + 0.5) * self.length / m
        x.setflags(write=False)
        return x

    @cached_property
    def collocation_weight(self) -> float:
        if self.is_point:
            return 1.0
        if self.boundary == 'dirichlet':
            return self.length / (self.n_collocation + 1)
        return self.length / self.n_collocation

    @cached_property
    def spectral_weights(self) -> np.ndarray:
        """Squared L2 norms of the basis functions"""
        if self.is_point:
            w = np.ones(1)
        else:
            w = np.full(self.n_modes, 0.5 * self.length)
            if self.boundary == 'neumann':
                w[0] = self.length
        w.setflags(write=False)
        return w

    @cached_property
    def basis(self) -> np.ndarray:
        """Synthesis matrix, shape (n_collocation, n_modes)"""
        if self.is_point:
            b = np.ones((1, 1))
        else:
            arg = np.pi * np.outer(self.points, self.wavenumbers) / self.length
            b = np.sin(arg) if self.boundary == 'dirichlet' else np.cos(arg)
        b.setflags(write=False)
        return b

    @cached_property
    def analysis(self) -> np.ndarray:
        """Discrete projection onto the modes, shape (n_modes, n_collocation)"""
        a = (self.basis.T * self.collocation_weight) / self.spectral_weights[:, None]
        a.setflags(write=False)
        return a

    def to_collocation(self, coefficients: np.ndarray) -> np.ndarray:
        """Map (..., n_modes) spectral coefficients to (..., n_collocation) point values"""
        coefficients = np.asarray(coefficients, dtype=float)
        if self.is_point:
            return coefficients.copy()
        return coefficients @ self.basis.T

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        """Map (..., n_collocation) point values to (..., n_modes) coefficients"""
        values = np.asarray(values, dtype=float)
        if self.is_point:
            return values.copy()
        return values @ self.analysis.T

    def collocation_norms(self, values: np.ndarray) -> np.ndarray:
        """Discrete L2 norm over the last two axes (species, points)"""
        values = np.asarray(values, dtype=float)
        return np.sqrt(self.collocation_weight * np.sum(values * values, axis=(-2, -1)))

    def spectral_norms(self, coefficients: np.ndarray) -> np.ndarray:
        """Weighted coefficient norm over the last two axes (species, modes)"""
        coefficients = np.asarray(coefficients, dtype=float)
        return np.sqrt(np.sum(self.spectral_weights * coefficients * coefficients, axis=(-2, -1)))

    def spatial_mean(self, values: np.ndarray) -> np.ndarray:
        """Average over the domain of (..., n_collocation) point values"""
        values = np.asarray(values, dtype=float)
        if self.is_point:
            return values[..., 0]
        return self.collocation_weight * np.sum(values, axis=-1) / self.length


class StateVector:
    """An element of X: one row of coefficients or point values per species"""

    __slots__ = ('coefficients', 'representation', 'grid')

    def __init__(self, coefficients, representation: str, grid: SpatialGrid):
        if representation not in ('spectral', 'collocation'):
            raise InputError(f"Unknown representation {representation!r}")
        arr = np.array(coefficients, dtype=float, ndmin=2)
        width = grid.n_modes if representation == 'spectral' else grid.n_collocation
        if arr.ndim != 2 or arr.shape[1] != width:
            raise InputError(f"{representation} state needs shape (n_species, {width}), got {arr.shape}")
        arr.setflags(write=False)
        self.coefficients = arr
        self.representation = representation
        self.grid = grid

    @classmethod
    def zeros(cls, grid: SpatialGrid, n_species: int, representation: str = 'spectral') -> 'StateVector':
        width = grid.n_modes if representation == 'spectral' else grid.n_collocation
        return cls(np.zeros((n_species, width)), representation, grid)

    @classmethod
    def from_collocation(cls, values, grid: SpatialGrid) -> 'StateVector':
        return cls(values, 'collocation', grid)

    @classmethod
    def from_spectral(cls, coefficients, grid: SpatialGrid) -> 'StateVector':
        return cls(coefficients, 'spectral', grid)

    @property
    def n_species(self) -> int:
        return self.coefficients.shape[0]

    @property
    def shape(self):
        return self.coefficients.shape

    def to_collocation(self) -> 'StateVector':
        if self.representation == 'collocation':
            return self
        return StateVector(self.grid.to_collocation(self.coefficients), 'collocation', self.grid)

    def to_spectral(self) -> 'StateVector':
        if self.representation == 'spectral':
            return self
        return StateVector(self.grid.to_spectral(self.coefficients), 'spectral', self.grid)

    def as_representation(self, representation: str) -> 'StateVector':
        return self.to_spectral() if representation == 'spectral' else self.to_collocation()

    def norm(self) -> float:
        """Discrete L2 norm (Euclidean over species for a point domain)"""
        if self.representation == 'spectral':
            return float(self.grid.spectral_norms(self.coefficients))
        return float(self.grid.collocation_norms(self.coefficients))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.to_collocation().coefficients)))

    def _other(self, other: Union['StateVector', float]):
        if isinstance(other, StateVector):
            coeffs = other.as_representation(self.representation).coefficients
            if coeffs.shape != self.shape:
                raise InputError(f"State shapes differ: {self.shape} vs {coeffs.shape}")
            return coeffs
        return other

    def __add__(self, other):
        return StateVector(self.coefficients + self._other(other), self.representation, self.grid)

    __radd__ = __add__

    def __sub__(self, other):
        return StateVector(self.coefficients - self._other(other), self.representation, self.grid)

    def __mul__(self, scalar: float):
        return StateVector(self.coefficients * scalar, self.representation, self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return StateVector(-self.coefficients, self.representation, self.grid)

    def __repr__(self) -> str:
        return f"StateVector({self.representation}, shape={self.shape})"


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Diagonal generator A with eigenvalues per species and mode"""
    grid: SpatialGrid
    eigenvalues: np.ndarray
    n_species: int = 1
    omega: Optional[float] = None

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float, ndmin=2)
        if lam.shape != (self.n_species, self.grid.n_modes):
            raise InputError(
                f"eigenvalues must have shape ({self.n_species}, {self.grid.n_modes}), got {lam.shape}"
            )
        if not np.all(np.isfinite(lam)):
            raise InputError("eigenvalues must be finite")
        lam.setflags(write=False)
        object.__setattr__(self, 'eigenvalues', lam)

        floor = max(0.0, float(np.max(-lam)))
        if self.omega is None:
            object.__setattr__(self, 'omega', floor)
        elif self.omega < floor:
            raise InputError(f"omega={self.omega} is below the semigroup growth rate {floor}")

    def _check_state(self, v: StateVector) -> StateVector:
        v = v.to_spectral()
        if v.shape != self.eigenvalues.shape:
            raise InputError(f"State shape {v.shape} does not match operator {self.eigenvalues.shape}")
        return v

    def semigroup_factor(self, t: float) -> np.ndarray:
        """Per-mode multipliers e^{-lambda t}"""
        if t < 0:
            raise InputError(f"The semigroup only runs forward; got t={t}")
        return np.exp(-self.eigenvalues * t)

    def phi1_factor(self, h: float) -> np.ndarray:
        """Per-mode integral of e^{-lambda (h-s)} over [0, h]"""
        if h <= 0:
            raise InputError(f"Step size must be positive; got h={h}")
        lam = self.eigenvalues
        out = np.full(lam.shape, float(h))
        nz = lam != 0.0
        out[nz] = -np.expm1(-lam[nz] * h) / lam[nz]
        return out

    def phi2_factor(self, h: float) -> np.ndarray:
        """Per-mode integral of e^{-lambda (h-s)} * s/h over [0, h]"""
        if h <= 0:
            raise InputError(f"Step size must be positive; got h={h}")
        lam = self.eigenvalues
        x = lam * h
        small = np.abs(x) < _PHI2_SERIES_CUTOFF
        out = np.empty(lam.shape)
        xs = x[small]
        out[small] = h * (0.5 - xs / 6.0 + xs ** 2 / 24.0 - xs ** 3 / 120.0 + xs ** 4 / 720.0)
        big = ~small
        out[big] = (x[big] + np.expm1(-x[big])) / (lam[big] ** 2 * h)
        return out

    def semigroup_apply(self, t: float, v: StateVector) -> StateVector:
        """T(t) v"""
        v = self._check_state(v)
        return StateVector(v.coefficients * self.semigroup_factor(t), 'spectral', self.grid)

    def phi1_apply(self, h: float, v: StateVector) -> StateVector:
        """Exact step integral of a constant right-hand side"""
        v = self._check_state(v)
        return StateVector(v.coefficients * self.phi1_factor(h), 'spectral', self.grid)

    def phi2_apply(self, h: float, v: StateVector) -> StateVector:
        """Exact step integral of a right-hand side growing linearly from 0 to v"""
        v = self._check_state(v)
        return StateVector(v.coefficients * self.phi2_factor(h), 'spectral', self.grid)


def build_laplacian(grid: SpatialGrid, diffusivities: Union[Sequence[float], np.ndarray]) -> SpectralOperator:
    """
    Diffusion generator A_i = -d_i * Laplacian per species, diagonal in the
    sine (Dirichlet) or cosine (Neumann) basis. A point domain gives A = 0.
    """
    d = np.atleast_1d(np.asarray(diffusivities, dtype=float))
    if d.ndim != 1 or d.size == 0:
        raise InputError("diffusivities must be a non-empty vector")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InputError(f"diffusivities must be finite and non-negative, got {d.tolist()}")

    if grid.is_point:
        lam = np.zeros((d.size, 1))
    else:
        k = grid.wavenumbers
        lam = d[:, None] * (k[None, :] * np.pi / grid.length) ** 2

    logger.debug(f"Built Laplacian: {grid.domain_kind}/{grid.boundary}, {d.size} species, "
                 f"{grid.n_modes} modes")
    return SpectralOperator(grid, lam, n_species=d.size)
