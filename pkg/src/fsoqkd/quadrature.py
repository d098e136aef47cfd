"""Panel-based Gauss quadrature for oscillatory radial integrals.

The diffraction integrands carry a quadratic phase ``q * r**2`` (wavenumber
~4e6 rad/m makes it spin fast), a Bessel factor oscillating like ``s * r``,
and a Gaussian envelope of scale W.  Panels are chosen so that no panel spans
more than half a local period of the combined phase, then a fixed 10-point
Gauss rule is applied per panel.  A second pass on bisected panels gives a
Richardson-style error estimate; naive adaptive schemes stall on integrands
like these.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

GAUSS_ORDER = 10
_GX, _GW = leggauss(GAUSS_ORDER)


class QuadratureError(RuntimeError):
    """Quadrature failed to converge within its node budget.

    Carries the achieved relative error estimate in ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


def phase_panels(a: float, b: float, quad_rate: float, lin_rate: float,
                 envelope_scale: float, max_panels: int = 400_000) -> np.ndarray:
    """Panel edges on [a, b] bounding the phase swing per panel by pi.

    ``quad_rate`` is |q| for a phase term q*r^2, ``lin_rate`` is |s| for a
    term s*r; panel widths are additionally capped at a quarter of the
    envelope scale so the Gaussian amplitude is resolved.
    """
    if b <= a:
        return np.array([a, b])
    total = quad_rate * (b * b - a * a) + lin_rate * (b - a)
    n = max(8, int(np.ceil(total / np.pi)))
    if n > max_panels:
        raise QuadratureError(
            f"phase subdivision needs {n} panels, budget is {max_panels}",
            estimate=float("nan"))
    if total > 0 and n > 8:
        targets = np.arange(1, n) * (total / n)
        if quad_rate * (b * b - a * a) > 1e-12 * total:
            # invert quad_rate*(r^2 - a^2) + lin_rate*(r - a) = target
            c = targets + quad_rate * a * a + lin_rate * a
            edges = (-lin_rate + np.sqrt(lin_rate * lin_rate + 4.0 * quad_rate * c)) / (2.0 * quad_rate)
        else:
            edges = a + targets / max(lin_rate, 1e-300)
        edges = np.concatenate([[a], edges, [b]])
    else:
        edges = np.linspace(a, b, n + 1)

    cap = envelope_scale / 4.0
    widths = np.diff(edges)
    splits = np.maximum(1, np.ceil(widths / cap).astype(int))
    if splits.sum() > max_panels:
        raise QuadratureError(
            f"envelope subdivision needs {splits.sum()} panels, budget is {max_panels}",
            estimate=float("nan"))
    if (splits > 1).any():
        pieces = [np.array([a])]
        for lo, hi, m in zip(edges[:-1], edges[1:], splits):
            pieces.append(np.linspace(lo, hi, m + 1)[1:])
        edges = np.concatenate(pieces)
    return edges


def gauss_nodes(edges: np.ndarray):
    """Gauss nodes and weights for a panel decomposition."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * _GX[None, :]).ravel()
    weights = (half[:, None] * _GW[None, :]).ravel()
    return nodes, weights


def bisect_edges(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    return np.sort(np.concatenate([edges, mids]))
