"""
Composite Gauss-Legendre quadrature helpers
"""
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np
from scipy.special import roots_legendre


@lru_cache(maxsize=16)
def gauss_legendre(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Reference nodes and weights on [-1, 1]"""
    if n_nodes < 1:
        raise ValueError("Quadrature needs at least one node")
    nodes, weights = roots_legendre(n_nodes)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_nodes(breakpoints: Iterable[float], n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of an n-point Gauss-Legendre rule on every subinterval
    between consecutive distinct breakpoints.
    """
    edges = np.unique(np.asarray(list(breakpoints), dtype=float))
    if edges.size < 2:
        return np.empty(0), np.empty(0)

    x, w = gauss_legendre(n_nodes)
    left = edges[:-1, None]
    half = 0.5 * (edges[1:, None] - left)
    nodes = (left + half) + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def clip_breakpoints(points: Iterable[float], lower: float, upper: float) -> np.ndarray:
    """Keep points strictly inside (lower, upper) and add the two ends"""
    pts = np.asarray(list(points), dtype=float)
    inside = pts[(pts > lower) & (pts < upper)]
    return np.concatenate(([lower], inside, [upper]))
