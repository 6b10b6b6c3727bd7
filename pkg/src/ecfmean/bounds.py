"""Directly testable encodings of the accuracy analysis: the sine
linear-approximation inequality, the conjugate two-point bound, the uniform
deviation of the empirical characteristic function, Rademacher complexity,
and the closed-form error/accuracy calculators.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError
from .estimator import InnerSolverConfig, as_samples, _golden_max
from .minimax import minimax_affine
from .norms import NormPair

__all__ = [
    "BoundInputs",
    "ConjugateCheck",
    "sin_approx_gap",
    "conjugate_bound_check",
    "sup_deviation",
    "rademacher_complexity",
    "master_bound",
    "accuracy_floor",
    "accuracy_floor_contaminated",
    "cf_deviation_bound",
]


def sin_approx_gap(alpha, beta, p, q):
    """Both sides of the sine linear-approximation inequality.

    Returns ``(lhs, rhs)`` with
    lhs = |sin a - sin b - (a - b) cos b| and
    rhs = |a-b|^(p+q+1) / (2^(p+q-1) (p+q+1)) + q |a-b|^(p+q) |b| / (2^(p+q-2) (p+q)),
    valid for p, q in [0, 1] with p + q > 0; lhs <= rhs always holds.
    Accepts scalars or broadcasting arrays.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or np.any(q < 0) or np.any(q > 1):
        raise InvalidArgumentError("p and q must lie in [0, 1]")
    s = p + q
    if np.any(s <= 0):
        raise InvalidArgumentError("p + q must be positive")
    gap = np.abs(alpha - beta)
    lhs = np.abs(np.sin(alpha) - np.sin(beta) - (alpha - beta) * np.cos(beta))
    rhs = gap ** (s + 1.0) / (2.0 ** (s - 1.0) * (s + 1.0)) + q * gap**s * np.abs(beta) / (
        2.0 ** (s - 2.0) * s
    )
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


class ConjugateCheck(NamedTuple):
    theta_min: np.ndarray
    max_ratio: float


def conjugate_bound_check(directions, f_values, theta, norm=None):
    """Two-point bound for the net-restricted conjugate score.

    Given values ``f(w)`` on a symmetric net of dual directions with dual norm
    at most one, minimizes ``fstar(theta') = max_w |f(w) - <w, theta'>`` and
    returns the minimizer together with
    ``net_norm(theta_min - theta) / (2 fstar(theta))``, where ``net_norm`` is
    the net-restricted seminorm ``max_w <w, .>``.  The ratio never exceeds one
    (up to roundoff) because the minimizer scores no worse than ``theta``.
    """
    w = np.atleast_2d(np.asarray(directions, dtype=float))
    f = np.asarray(f_values, dtype=float)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if w.shape[0] == 0:
        raise InvalidArgumentError("the direction net is empty")
    if w.shape[0] != f.shape[0]:
        raise InvalidArgumentError("need one value per net direction")
    norm = norm if norm is not None else NormPair("l2")
    for row in w:
        if norm.dual_norm(row) > 1.0 + 1e-9:
            raise InvalidArgumentError("net directions must have dual norm at most one")
        if not np.any(np.all(np.abs(w + row) <= 1e-9, axis=1)):
            raise InvalidArgumentError("the net must be symmetric (w in net => -w in net)")

    def fstar(point):
        return float(np.max(np.abs(f - w @ point)))

    fs_theta = fstar(theta)
    pad = 10.0 * (2.0 * fs_theta + float(np.max(np.abs(f), initial=0.0)) + float(np.max(np.abs(theta))) + 1.0)
    theta_min, _ = minimax_affine(w, f, theta - pad, theta + pad)
    num = float(np.max(w @ (theta_min - theta)))
    den = 2.0 * fs_theta
    if den <= 1e-300:
        ratio = 0.0 if num <= 1e-12 else float("inf")
    else:
        ratio = num / den
    return ConjugateCheck(theta_min=theta_min, max_ratio=ratio)


def sup_deviation(samples, dist, r, cfg=None):
    """Certified-grid supremum of |ecf - cf| over frequencies |w| <= r.

    Requires 1-D Gaussian ground truth (``dist``).  The modulus is even in w,
    so the grid covers [0, r]; the grid maximum is within
    ``(mean|x| + E|X|) * spacing / 2`` of the true supremum and a local polish
    tightens it from below.  Translation invariant by construction: shifting
    the samples and the true mean together leaves the value unchanged.
    """
    x = as_samples(samples)
    if x.shape[1] != 1:
        raise InvalidArgumentError("sup_deviation requires univariate samples")
    if dist.family != "gaussian":
        raise InvalidArgumentError("only the Gaussian ground truth is supported")
    if r < 0:
        raise InvalidArgumentError("r must be nonnegative")
    if r == 0:
        return 0.0
    cfg = cfg if cfg is not None else InnerSolverConfig()
    x1 = x[:, 0]
    if dist.infer_d() != 1:
        raise InvalidArgumentError("sup_deviation requires a 1-D distribution")
    mu = float(np.atleast_1d(np.asarray(dist.shift, dtype=float))[0])
    scale = float(np.atleast_1d(np.asarray(dist.scale, dtype=float)).ravel()[0])
    sigma2 = scale * scale

    def modulus(w_arr):
        phase = np.multiply.outer(w_arr, x1)
        re_n = np.cos(phase).mean(axis=1)
        im_n = np.sin(phase).mean(axis=1)
        damp = np.exp(-(w_arr**2) * sigma2 / 2.0)
        return np.hypot(re_n - damp * np.cos(w_arr * mu), im_n - damp * np.sin(w_arr * mu))

    lip = float(np.mean(np.abs(x1))) + _folded_normal_mean(mu, sigma2)
    m = cfg.grid_points
    if lip > 0:
        m = max(m, int(np.ceil(r * lip / (2.0 * cfg.ascent_tol))) + 1)
    m = int(min(max(m, 3), cfg.grid_cap))
    grid = np.linspace(0.0, r, m)
    vals = np.empty(m)
    chunk = max(1, 4_000_000 // max(x1.size, 1))
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        vals[a:b] = modulus(grid[a:b])
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, m - 1)]
    if hi > lo:
        _, polished = _golden_max(lambda u: float(modulus(np.array([u]))[0]), lo, hi, 32)
        best = max(best, polished)
    return best


def _folded_normal_mean(mu, sigma2):
    if sigma2 <= 0:
        return abs(mu)
    sigma = math.sqrt(sigma2)
    return sigma * math.sqrt(2.0 / math.pi) * math.exp(-mu * mu / (2.0 * sigma2)) + abs(mu) * math.erf(
        abs(mu) / (sigma * math.sqrt(2.0))
    )


def rademacher_complexity(samples, mu_star, num_mc=1000, seed=0, norm=None, method="auto"):
    """Average of ||sum_i eps_i (x_i - mu)|| / sqrt(n) over sign vectors.

    ``method='exact'`` enumerates all 2^n sign patterns (n <= 20 enforced);
    ``'mc'`` draws ``num_mc`` seeded sign vectors; ``'auto'`` enumerates for
    n <= 12 and falls back to Monte Carlo otherwise.
    """
    x = as_samples(samples)
    mu = np.atleast_1d(np.asarray(mu_star, dtype=float))
    if mu.shape != (x.shape[1],):
        raise InvalidArgumentError("mu_star dimension does not match samples")
    if num_mc < 1:
        raise InvalidArgumentError("num_mc must be positive")
    if method not in ("auto", "mc", "exact"):
        raise InvalidArgumentError("method must be one of auto/mc/exact")
    norm = norm if norm is not None else NormPair("l2")
    y = x - mu
    n = y.shape[0]
    if method == "exact" or (method == "auto" and n <= 12):
        if n > 20:
            raise InvalidArgumentError("exact enumeration is limited to n <= 20")
        codes = np.arange(2**n, dtype=np.uint64)
        signs = ((codes[:, None] >> np.arange(n, dtype=np.uint64)) & 1).astype(float) * 2.0 - 1.0
    else:
        rng = np.random.default_rng(seed)
        signs = rng.integers(0, 2, size=(num_mc, n)).astype(float) * 2.0 - 1.0
    sums = signs @ y
    return float(np.mean(norm.primal_norm(sums))) / math.sqrt(n)


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the closed-form error bound calculators."""

    Cn: float
    sigma_op: float
    delta: float
    n: int
    r: float
    mu_norm: float
    eta: float = 0.0

    def __post_init__(self):
        if self.Cn < 0 or self.sigma_op < 0 or self.mu_norm < 0:
            raise InvalidArgumentError("Cn, sigma_op and mu_norm must be nonnegative")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        if self.n < 1 or self.r <= 0:
            raise InvalidArgumentError("n must be positive and r > 0")
        if not 0 <= self.eta < 0.5:
            raise InvalidArgumentError("eta must lie in [0, 1/2)")


def master_bound(b):
    """Five-term high-probability error bound at an arbitrary radius."""
    log_d = np.log(1.0 / b.delta)
    return (
        24.0 * b.Cn / np.sqrt(b.n)
        + np.sqrt(8.0 * b.sigma_op * log_d / b.n)
        + 16.0 * log_d / (3.0 * b.n * b.r)
        + b.r**2 * b.mu_norm**3 / 3.0
        + b.r * b.sigma_op
    )


def accuracy_floor(Cn, sigma_op, delta, n, mu_norm):
    """Smallest admissible accuracy target for the tuned radius (clean data).

    The max of the sub-Gaussian term and the mean-dependent n^(-2/3) term.
    """
    _check_floor_args(Cn, sigma_op, delta, n, mu_norm)
    log_d = np.log(1.0 / delta)
    first = (96.0 * Cn + 12.0 * np.sqrt(sigma_op * log_d)) / np.sqrt(n)
    second = 9.0 * (log_d / n) ** (2.0 / 3.0) * mu_norm
    return max(first, second)


def accuracy_floor_contaminated(Cn, sigma_op, delta, n, mu_norm, eta):
    """Smallest admissible accuracy target under contamination rate eta."""
    _check_floor_args(Cn, sigma_op, delta, n, mu_norm)
    if not 0 <= eta < 0.5:
        raise InvalidArgumentError("eta must lie in [0, 1/2)")
    log_d = np.log(1.0 / delta)
    first = (96.0 * Cn + 12.0 * np.sqrt(sigma_op * log_d)) / np.sqrt(n) + 8.0 * np.sqrt(
        eta * sigma_op
    )
    second = (19.0 * eta + 26.0 * log_d / n) ** (2.0 / 3.0) * mu_norm
    return max(first, second)


def cf_deviation_bound(Cn, sigma_op, delta, n, r):
    """High-probability bound on sup |ecf - cf| over the ball of radius r."""
    _check_floor_args(Cn, sigma_op, delta, n, 0.0)
    if r < 0:
        raise InvalidArgumentError("r must be nonnegative")
    log_d = np.log(1.0 / delta)
    return r * (12.0 * Cn / np.sqrt(n) + np.sqrt(2.0 * sigma_op * log_d / n)) + 8.0 * log_d / (
        3.0 * n
    )


def _check_floor_args(Cn, sigma_op, delta, n, mu_norm):
    if Cn < 0 or sigma_op < 0 or mu_norm < 0:
        raise InvalidArgumentError("Cn, sigma_op and mu_norm must be nonnegative")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    if n < 1:
        raise InvalidArgumentError("n must be positive")
