from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

GAUSS_ORDER = 16


@lru_cache(maxsize=16)
def gauss_legendre(order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_nodes(lower, upper, order: int = GAUSS_ORDER):
    """
    Quadrature nodes and weights for a batch of panels.

    Args:
        lower, upper: Arrays of panel endpoints with the same shape S

    Returns:
        tuple: (nodes, weights), each of shape S + (order,)
    """
    t, w = gauss_legendre(order)
    lower = np.asarray(lower, dtype=float)[..., None]
    upper = np.asarray(upper, dtype=float)[..., None]
    half = 0.5 * (upper - lower)
    return lower + half * (t + 1.0), half * w


def integrate_panels(fn: Callable, lower, upper, order: int = GAUSS_ORDER) -> np.ndarray:
    """Integral of a vectorised fn over each panel [lower_k, upper_k]."""
    nodes, weights = panel_nodes(lower, upper, order)
    return np.sum(fn(nodes) * weights, axis=-1)


def dyadic_edges(lower: float, upper: float) -> np.ndarray:
    """
    Edges upper, upper/2, upper/4, ... clipped at lower (decreasing).

    Integrands of the form r^p * smooth(r) are smooth on every such band.
    """
    if not (0 < lower < upper):
        return np.array([upper, lower]) if lower == upper else np.empty(0)
    count = int(np.ceil(np.log2(upper / lower)))
    edges = upper * 2.0 ** -np.arange(count + 1, dtype=float)
    edges[-1] = lower
    if count > 0 and edges[-2] <= lower:
        edges = edges[:-1]
        edges[-1] = lower
    return edges


def integrate_dyadic(fn: Callable, lower: float, upper: float, order: int = GAUSS_ORDER) -> float:
    """Integral of fn over [lower, upper] on dyadic bands, 0 < lower < upper."""
    if upper <= lower:
        return 0.0
    edges = dyadic_edges(lower, upper)
    return float(np.sum(integrate_panels(fn, edges[1:], edges[:-1], order)))


def oscillation_panels(lower: float, upper: float, frequency: float, max_panels: int = 4096) -> np.ndarray:
    """Panel edges fine enough that each panel holds at most half an oscillation of cos(frequency * z)."""
    count = 1 + int(frequency * (upper - lower) / np.pi)
    count = min(max(count, 1), max_panels)
    return np.linspace(lower, upper, count + 1)


def refine_edges(edges: np.ndarray, max_width: float) -> np.ndarray:
    """Split every panel of a monotone edge array into equal parts no wider than max_width."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return edges
    pieces = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        count = max(1, int(np.ceil(abs(b - a) / max_width - 1e-12)))
        pieces.append(np.linspace(a, b, count + 1)[1:])
    return np.concatenate(pieces)
