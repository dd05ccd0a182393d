"""Gauss-Legendre rules and principal-value integration helpers."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 32


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def on_unit(self):
        """Nodes and weights mapped to [0, 1]."""
        return 0.5 * (self.nodes + 1.0), 0.5 * self.weights


def _legendre(n, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        return np.ones_like(x), np.zeros_like(x)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gauss_tables(n):
    k = np.arange(1, n + 1)
    # Chebyshev-type initial guesses, descending
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    if n == 1:
        x = np.zeros(1)
    else:
        for _ in range(100):
            p, dp = _legendre(n, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) < 1e-16:
                break
    if n == 1:
        return np.zeros(1), np.full(1, 2.0)
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1]
    w = w[::-1]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(n):
    """Return the ``n``-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of the degree-``n`` Legendre polynomial, found by
    Newton iteration; tables are cached per order.
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_ORDER:
        raise ValueError(f"quadrature order must be in 1..{MAX_ORDER}, got {n!r}")
    x, w = _gauss_tables(int(n))
    x = x.copy()
    w = w.copy()
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(int(n), x, w)


def integrate_panel(rule, a, b, integrand):
    """Integrate ``integrand`` over [a, b] with the affinely mapped rule.

    ``integrand`` must accept a numpy array of abscissae.
    """
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * rule.nodes
    return half * float(np.dot(rule.weights, integrand(x)))


def pv_integrate_symmetric(rule, half_width, odd_pair_integrand, panels=1):
    """Principal value over [-a, a] of an integrand with an odd simple pole.

    ``odd_pair_integrand(y)`` must return ``[h(x - y) - h(x + y)] * K(y)``
    for ``y > 0``; the pairing cancels the pole, so the folded integrand is
    bounded at ``y = 0`` and the Gauss nodes never touch it.  ``panels``
    splits (0, a] into equal pieces.
    """
    edges = np.linspace(0.0, half_width, panels + 1)
    return sum(
        integrate_panel(rule, lo, hi, odd_pair_integrand)
        for lo, hi in zip(edges[:-1], edges[1:])
    )


def pv_integrate_breaks(rule, breaks, odd_pair_integrand):
    """Folded principal value with panels split at the given breakpoints.

    ``breaks`` is an increasing array starting at 0; each panel should
    contain no kinks of the folded integrand.
    """
    breaks = np.asarray(breaks, dtype=float)
    lo = breaks[:-1]
    hi = breaks[1:]
    half = 0.5 * (hi - lo)
    y = (0.5 * (lo + hi))[:, None] + half[:, None] * rule.nodes[None, :]
    vals = odd_pair_integrand(y)
    return float(np.sum(half[:, None] * rule.weights[None, :] * vals))
