"""Composite Gauss-Legendre rules on geometrically graded panels.

Kernel integrands in this package are smooth inside their support but may
blow up (integrably) at ``t = 0`` and lose smoothness where the support
closes.  Grading panels toward the ends of each smooth piece recovers
spectral-like accuracy without adaptive bookkeeping.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def graded_edges(a, b, grade_lo=0, grade_hi=0, ratio=0.5):
    """Panel edges on [a, b] refined geometrically toward either end.

    ``grade_lo`` panels shrink by ``ratio`` toward ``a`` (and likewise
    ``grade_hi`` toward ``b``); the middle is one panel.
    """
    if not b > a:
        return np.array([a, b], dtype=float)
    width = b - a
    if grade_lo and grade_hi:
        half = 0.5 * width
        lo = a + half * ratio ** np.arange(grade_lo, 0, -1)
        hi = b - half * ratio ** np.arange(1, grade_hi + 1)
        inner = np.concatenate(([a], lo, [a + half], hi, [b]))
    elif grade_lo:
        lo = a + width * ratio ** np.arange(grade_lo, 0, -1)
        inner = np.concatenate(([a], lo, [b]))
    elif grade_hi:
        hi = b - width * ratio ** np.arange(1, grade_hi + 1)
        inner = np.concatenate(([a], hi, [b]))
    else:
        inner = np.array([a, b], dtype=float)
    return inner


def panel_rule(edges, order):
    """Nodes and weights of a composite Gauss rule over consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def piecewise_edges(a, b, breaks=(), grade_lo=0, grade_hi=0, grade_breaks=0):
    """Edges on [a, b] split at interior ``breaks``.

    The outer ends get ``grade_lo`` / ``grade_hi`` levels; every interior
    break is graded on both sides with ``grade_breaks`` levels.
    """
    pts = sorted({float(p) for p in breaks if a < p < b})
    cuts = [a] + pts + [b]
    pieces = []
    last = len(cuts) - 2
    for i in range(len(cuts) - 1):
        glo = grade_lo if i == 0 else grade_breaks
        ghi = grade_hi if i == last else grade_breaks
        e = graded_edges(cuts[i], cuts[i + 1], glo, ghi)
        pieces.append(e if i == 0 else e[1:])
    return np.concatenate(pieces)


def interval_rule(lo, hi, order):
    """Gauss nodes/weights on many intervals at once.

    ``lo`` and ``hi`` broadcast to a common shape ``S``; returns arrays of
    shape ``S + (order,)``.  Empty intervals (hi <= lo) get zero weight.
    """
    x, w = gauss_legendre(order)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * np.clip(hi - lo, 0.0, None)
    mid = lo + half
    nodes = mid[..., None] + half[..., None] * x
    weights = half[..., None] * w
    return nodes, weights
