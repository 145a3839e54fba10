"""Panel-based Gauss-Legendre quadrature helpers.

All kernel integrals in this package reduce to 1-d radial integrals (d=1
directly, d=2 through polar or tensor factorizations), so the building block
is a vectorized Gauss rule on a list of panels.  Dyadic panel generators and
a geometric stopping loop live here too.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidParameterError, QuadratureStallError

_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1], cached."""
    if order < 1:
        raise InvalidParameterError(f"Gauss order must be >= 1, got {order}")
    if order not in _RULE_CACHE:
        _RULE_CACHE[order] = leggauss(order)
    return _RULE_CACHE[order]


@dataclass(frozen=True)
class QuadConfig:
    """Knobs for radial kernel quadrature.

    nodes_per_panel: Gauss order on each radial panel.
    n_theta: angular nodes for d=2 (uniform rule, spectrally accurate for
        periodic integrands).
    max_doublings: cap on dyadic shell doublings before a stall error.
    stall_rel: geometric stopping threshold, relative to the running total.
    """

    nodes_per_panel: int = 16
    n_theta: int = 64
    max_doublings: int = 200
    stall_rel: float = 1e-12

    def __post_init__(self):
        if self.nodes_per_panel < 2:
            raise InvalidParameterError("nodes_per_panel must be >= 2")
        if self.n_theta < 4:
            raise InvalidParameterError("n_theta must be >= 4")


def panel_integrate(fn, a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Integrate fn over each interval [a_k, b_k] with one Gauss rule per panel.

    a, b may be arbitrary broadcastable arrays; fn must accept an array of
    evaluation points of shape (order,) + shape(a) and is integrated along
    axis 0.  Returns an array of shape broadcast(a, b).
    """
    x, w = gauss_rule(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[None, ...] + half[None, ...] * x.reshape((-1,) + (1,) * a.ndim)
    vals = fn(pts)
    return np.tensordot(w, vals, axes=(0, 0)) * half


def split_panels(edges: np.ndarray, breakpoints) -> np.ndarray:
    """Insert breakpoints that fall strictly inside [edges[0], edges[-1]]."""
    pts = [float(t) for t in breakpoints if edges[0] < t < edges[-1]]
    if not pts:
        return np.asarray(edges, dtype=float)
    return np.unique(np.concatenate([edges, pts]))


def dyadic_edges(start: float, stop: float, *, first_width: float | None = None) -> np.ndarray:
    """Panel edges [start, ...] doubling in width until stop is covered."""
    if stop <= start:
        return np.array([start, stop]) if stop > start else np.array([start])
    width = first_width if first_width is not None else start
    width = max(width, 1e-300)
    edges = [start]
    t = start
    while t < stop:
        t = min(t + width, stop)
        edges.append(t)
        width *= 2.0
    return np.array(edges)


def integrate_radial(fn, edges: np.ndarray, order: int) -> float:
    """Sum of Gauss panel integrals of a scalar radial function."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    vals = panel_integrate(fn, edges[:-1], edges[1:], order)
    return float(np.sum(vals))


def integrate_to_infinity(fn, start: float, quad: QuadConfig) -> float:
    """Integrate a decaying radial function on [start, inf) by dyadic shells.

    Doubles the shell width geometrically and stops once a shell contributes
    less than quad.stall_rel of the running total.  Raises
    QuadratureStallError if the shells fail to contract within the doubling
    budget.
    """
    total = 0.0
    lo = start
    width = max(start, 1.0)
    for _ in range(quad.max_doublings):
        hi = lo + width
        part = float(panel_integrate(fn, np.array(lo), np.array(hi), quad.nodes_per_panel))
        total += part
        if abs(part) <= quad.stall_rel * max(abs(total), 1e-300):
            return total
        lo = hi
        width *= 2.0
    raise QuadratureStallError(
        f"dyadic shells from {start} did not contract within {quad.max_doublings} doublings"
    )
