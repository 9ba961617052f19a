"""Sign-exact 2D predicates.

Cross and dot products are evaluated in floating point first; entries whose
magnitude falls inside the forward error bound are re-evaluated with exact
rational arithmetic. All inputs are plain doubles, so ``Fraction(x)`` is exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps
# Bound on |fl(det) - det| relative to |l| + |r| for det = l - r with
# each factor a single rounded difference (conservative vs. Shewchuk's A bound).
_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


def _exact_cross(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    F = Fraction
    v = (F(bx) - F(ax)) * (F(dy) - F(cy)) - (F(by) - F(ay)) * (F(dx) - F(cx))
    return (v > 0) - (v < 0)


def _exact_dot(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    F = Fraction
    v = (F(bx) - F(ax)) * (F(dx) - F(cx)) + (F(by) - F(ay)) * (F(dy) - F(cy))
    return (v > 0) - (v < 0)


def cross_sign(a, b, c, d) -> int:
    """Exact sign of ``(b - a) x (d - c)`` for scalar points."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    dx, dy = float(d[0]), float(d[1])
    left = (bx - ax) * (dy - cy)
    right = (by - ay) * (dx - cx)
    det = left - right
    bound = _ERRBOUND * (abs(left) + abs(right))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    return _exact_cross(ax, ay, bx, by, cx, cy, dx, dy)


def orient(a, b, c) -> int:
    """+1 if ``c`` is left of the directed line ``a -> b``, -1 if right, 0 if collinear."""
    return cross_sign(a, b, a, c)


def dot_sign(a, b, c, d) -> int:
    """Exact sign of ``(b - a) . (d - c)``."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    dx, dy = float(d[0]), float(d[1])
    left = (bx - ax) * (dx - cx)
    right = (by - ay) * (dy - cy)
    val = left + right
    bound = _ERRBOUND * (abs(left) + abs(right))
    if val > bound:
        return 1
    if val < -bound:
        return -1
    return _exact_dot(ax, ay, bx, by, cx, cy, dx, dy)


def _vectorized(exact_fn, op):
    def signs(ax, ay, bx, by, cx, cy, dx, dy):
        ax, ay, bx, by, cx, cy, dx, dy = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=float)) for v in (ax, ay, bx, by, cx, cy, dx, dy))
        )
        if op == "cross":
            left = (bx - ax) * (dy - cy)
            right = (by - ay) * (dx - cx)
            val = left - right
        else:
            left = (bx - ax) * (dx - cx)
            right = (by - ay) * (dy - cy)
            val = left + right
        bound = _ERRBOUND * (np.abs(left) + np.abs(right))
        out = np.zeros(val.shape, dtype=np.int8)
        out[val > bound] = 1
        out[val < -bound] = -1
        unsure = np.abs(val) <= bound
        # exact zeros of exactly-zero factors need no rational fallback
        trivial = unsure & (left == 0) & (right == 0)
        trivial &= ((bx == ax) & (by == ay)) | ((dx == cx) & (dy == cy))
        unsure &= ~trivial
        if unsure.any():
            for idx in zip(*np.nonzero(unsure)):
                out[idx] = exact_fn(
                    ax[idx], ay[idx], bx[idx], by[idx], cx[idx], cy[idx], dx[idx], dy[idx]
                )
        return out

    return signs


cross_signs = _vectorized(_exact_cross, "cross")
"""Vectorized exact sign of ``(b - a) x (d - c)`` over broadcast coordinate arrays."""

dot_signs = _vectorized(_exact_dot, "dot")
"""Vectorized exact sign of ``(b - a) . (d - c)`` over broadcast coordinate arrays."""


def orient_signs(ax, ay, bx, by, cx, cy):
    return cross_signs(ax, ay, bx, by, ax, ay, cx, cy)
