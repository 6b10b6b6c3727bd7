"""Exact minimization of a pointwise maximum of absolute affine functions.

Minimizes ``F(theta) = max_j |<w_j, theta> - s_j|`` over a coordinate box.
``F`` is convex and piecewise linear, so a golden-section search is exact in
one dimension and a linear program is exact in general.
"""

import numpy as np
from scipy.optimize import linprog

from .errors import EstimationError, InvalidArgumentError

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def minimax_value(directions, offsets, theta):
    """Evaluate max_j |<w_j, theta> - s_j|."""
    w = np.atleast_2d(np.asarray(directions, dtype=float))
    s = np.asarray(offsets, dtype=float)
    return float(np.max(np.abs(w @ np.asarray(theta, dtype=float) - s)))


def minimax_affine(directions, offsets, lower, upper, iters=200):
    """Minimize max_j |<w_j, theta> - s_j| over the box [lower, upper].

    Returns ``(theta, value)``.  ``iters`` caps the 1-D search; the LP backend
    used for d >= 2 ignores it.
    """
    w = np.atleast_2d(np.asarray(directions, dtype=float))
    s = np.asarray(offsets, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if w.shape[0] != s.shape[0] or w.shape[0] == 0:
        raise InvalidArgumentError("need one offset per direction and at least one direction")
    d = w.shape[1]
    if d == 1:
        t, v = _golden_min(
            lambda m: float(np.max(np.abs(w[:, 0] * m - s))),
            float(lower[0]),
            float(upper[0]),
            iters,
        )
        return np.array([t]), v
    return _minimax_lp(w, s, lower, upper)


def _minimax_lp(w, s, lower, upper):
    k, d = w.shape
    # variables (theta, z): minimize z s.t. +/-(<w,theta> - s) <= z
    c = np.zeros(d + 1)
    c[-1] = 1.0
    a_ub = np.zeros((2 * k, d + 1))
    a_ub[:k, :d] = w
    a_ub[k:, :d] = -w
    a_ub[:, -1] = -1.0
    b_ub = np.concatenate([s, -s])
    bounds = [(lower[i], upper[i]) for i in range(d)] + [(0.0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise EstimationError(f"minimax LP failed: {res.message}")
    return res.x[:d].copy(), float(res.x[-1])


def _golden_min(f, a, b, iters):
    """Golden-section minimization of a convex function on [a, b]."""
    if b < a:
        a, b = b, a
    if b - a <= 0:
        return a, f(a)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if b - a <= 1e-300:
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        elif f1 > f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            # flat bracket for a convex f: the minimum lies between the probes
            a, b = x1, x2
            x1 = b - _INVPHI * (b - a)
            x2 = a + _INVPHI * (b - a)
            f1, f2 = f(x1), f(x2)
    cands = [(f(a), a), (f1, x1), (f2, x2), (f(b), b)]
    v, t = min(cands, key=lambda p: p[0])
    return t, v
