"""Robust mean estimation from the imaginary part of the empirical
characteristic function.

A candidate mean ``mu`` is scored by the worst linear-approximation gap

    sup over ||w||_* <= r  of  |<w, mu> - (1/n) sum_i sin(<w, x_i>)|,

rescaled by ``1/r``; the estimate minimizes this score over ``mu``.  As the
radius shrinks the minimizer approaches the empirical mean, while moderate
radii temper heavy tails and sample contamination.

The outer minimization runs a cutting-plane loop: the inner supremum supplies
maximizing directions, and the resulting max-of-affine model is minimized
exactly (golden-section search in one dimension, a linear program otherwise).
In one dimension the inner supremum is evaluated on a grid that certifies its
distance to the true supremum through a Lipschitz bound; in higher dimensions
it uses multi-start projected gradient ascent on the dual ball and carries no
certificate.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidArgumentError
from .minimax import minimax_affine, minimax_value
from .norms import NormPair

__all__ = [
    "SampleSet",
    "DualVector",
    "InnerSolverConfig",
    "OuterSolverConfig",
    "EstimateOutcome",
    "InnerSupResult",
    "ecf",
    "inner_sup",
    "objective",
    "estimate_mean",
    "choose_radius",
    "choose_radius_contaminated",
]


@dataclass(frozen=True)
class SampleSet:
    """Validated n-by-d observation matrix."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgumentError("samples must form a nonempty n-by-d matrix")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("samples must be finite (no NaN/Inf)")
        object.__setattr__(self, "data", arr)

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def d(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class DualVector:
    """A direction in the dual space together with its ball radius."""

    w: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.radius <= 0:
            raise InvalidArgumentError("radius must be positive")


@dataclass(frozen=True)
class InnerSolverConfig:
    """Controls for the inner supremum over the dual ball.

    ``ascent_tol`` sets the target certification slack of the 1-D grid (the
    grid spacing is chosen so that Lipschitz slack <= ascent_tol, subject to
    ``grid_cap``) and the stopping tolerance of the gradient ascent used for
    d >= 2.  ``seed`` fixes the random starts.
    """

    grid_points: int = 513
    random_starts: int = 12
    ascent_max_steps: int = 120
    ascent_tol: float = 1e-6
    top_k_refine: int = 3
    grid_cap: int = 200_001
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 3:
            raise InvalidArgumentError("grid_points must be at least 3")
        if self.random_starts < 1 or self.ascent_max_steps < 1 or self.top_k_refine < 1:
            raise InvalidArgumentError("solver step counts must be positive")
        if self.ascent_tol <= 0:
            raise InvalidArgumentError("ascent_tol must be positive")
        if self.grid_cap < self.grid_points:
            raise InvalidArgumentError("grid_cap must be >= grid_points")


@dataclass(frozen=True)
class OuterSolverConfig:
    """Controls for the cutting-plane minimization over candidate means.

    ``subgrad_max_steps`` is the iteration budget of the model minimizer (the
    1-D exact search; the LP backend has its own internal limits).  ``init``
    is one of ``coordinate_median``, ``empirical_mean``, ``zero`` or ``given``
    (which reads ``init_vector``).
    """

    max_cuts: int = 60
    subgrad_max_steps: int = 200
    tol_abs: float = 1e-6
    init: str = "coordinate_median"
    init_vector: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.tol_abs <= 0:
            raise InvalidArgumentError("tol_abs must be positive")
        if self.max_cuts < 1 or self.subgrad_max_steps < 1:
            raise InvalidArgumentError("iteration budgets must be positive")
        if self.init not in ("coordinate_median", "empirical_mean", "zero", "given"):
            raise InvalidArgumentError(f"unknown init {self.init!r}")
        if self.init == "given" and self.init_vector is None:
            raise InvalidArgumentError("init='given' requires init_vector")


@dataclass(frozen=True)
class EstimateOutcome:
    """Result of the minimax mean estimate."""

    mu_hat: np.ndarray
    objective_value: float
    attaining_w: DualVector
    cuts_used: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


class InnerSupResult(NamedTuple):
    value: float
    w_star: DualVector
    cert_gap: Optional[float]


def as_samples(samples):
    """Coerce an array-like or SampleSet into a validated (n, d) float matrix."""
    if isinstance(samples, SampleSet):
        return samples.data
    return SampleSet(np.asarray(samples, dtype=float)).data


def ecf(samples, w):
    """Empirical characteristic function at ``w`` as a complex number.

    Returns ``mean(cos(<w, x_i>)) + 1j * mean(sin(<w, x_i>))``; the modulus
    never exceeds one.
    """
    x = as_samples(samples)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (x.shape[1],):
        raise InvalidArgumentError(
            f"direction has dimension {w.shape}, samples have d={x.shape[1]}"
        )
    phase = x @ w
    return complex(np.mean(np.cos(phase)), np.mean(np.sin(phase)))


def _im_ecf(x, w):
    return float(np.mean(np.sin(x @ w)))


def choose_radius(eps, delta, n):
    """Ball radius tuned for target accuracy ``eps`` at confidence ``delta``."""
    if eps <= 0:
        raise InvalidArgumentError("eps must be positive")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    if n < 1:
        raise InvalidArgumentError("n must be positive")
    return 22.0 * np.log(1.0 / delta) / (n * eps)


def choose_radius_contaminated(eps, delta, n, eta):
    """Radius tuned for accuracy ``eps`` when a fraction ``eta`` of samples is adversarial."""
    if not 0 <= eta < 0.5:
        raise InvalidArgumentError("eta must lie in [0, 1/2)")
    return 16.0 * eta / eps + choose_radius(eps, delta, n)


class _GridEvaluator:
    """Certified evaluator of the inner supremum for 1-D samples.

    Precomputes the sin-average on a uniform grid over [0, r] (the score is
    even in w, so the half ball suffices).  The true supremum exceeds the
    returned value by at most ``(|mu| + mean|x|) * spacing / 2``.
    """

    def __init__(self, x1, r, mu_abs_bound, cfg):
        self.x = np.asarray(x1, dtype=float)
        self.r = float(r)
        self.abs_mean = float(np.mean(np.abs(self.x)))
        m = cfg.grid_points
        lip = float(mu_abs_bound) + self.abs_mean
        if lip > 0:
            m = max(m, int(np.ceil(self.r * lip / (2.0 * cfg.ascent_tol))) + 1)
        self.m = int(min(max(m, 3), cfg.grid_cap))
        self.w = np.linspace(0.0, self.r, self.m)
        self.spacing = self.r / (self.m - 1)
        self.sin_mean = np.empty(self.m)
        chunk = max(1, 4_000_000 // max(self.x.size, 1))
        for a in range(0, self.m, chunk):
            b = min(a + chunk, self.m)
            self.sin_mean[a:b] = np.sin(np.multiply.outer(self.w[a:b], self.x)).mean(axis=1)

    def h_abs(self, mu, w):
        return abs(mu * w - float(np.mean(np.sin(w * self.x))))

    def cert_slack(self, mu):
        return (abs(mu) + self.abs_mean) * self.spacing / 2.0

    def evaluate(self, mu):
        mu = float(mu)
        vals = np.abs(mu * self.w - self.sin_mean)
        i = int(np.argmax(vals))
        best_w = float(self.w[i])
        best_v = float(vals[i])
        lo = float(self.w[max(i - 1, 0)])
        hi = float(self.w[min(i + 1, self.m - 1)])
        if hi > lo:
            w_p, v_p = _golden_max(lambda u: self.h_abs(mu, u), lo, hi, 32)
            if v_p > best_v:
                best_w, best_v = w_p, v_p
        return best_v, np.array([best_w]), self.cert_slack(mu)


class _AscentEvaluator:
    """Multi-start projected gradient ascent over the dual ball (d >= 2).

    Uncertified: the returned value is the best over explored candidates.
    Promising directions from earlier queries are recycled as warm starts.
    """

    def __init__(self, x, r, norm, cfg):
        self.x = x
        self.xt = x.T
        self.n, self.d = x.shape
        self.r = float(r)
        self.norm = norm
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.memory = []

    def _h(self, w_rows):
        return w_rows @ self._mu - np.sin(w_rows @ self.xt).mean(axis=1)

    def _grad(self, w_rows):
        return self._mu[None, :] - (np.cos(w_rows @ self.xt) @ self.x) / self.n

    def _starts(self, mu):
        parts = [self.rng.standard_normal((self.cfg.random_starts, self.d))]
        support = self.norm.dual_ball_support(mu, self.r)
        if np.any(support):
            parts.append(support[None, :])
            parts.append(-support[None, :])
        axes = np.eye(self.d)[: min(self.d, 6)] * self.r
        parts.append(axes)
        parts.append(-axes)
        if self.memory:
            parts.append(np.array(self.memory))
        w0 = np.vstack(parts)
        norms = np.array([max(self.norm.dual_norm(row), 1e-300) for row in w0])
        return w0 * (self.r / norms)[:, None]

    def _ascend(self, w_rows, steps):
        h = self._h(w_rows)
        flip = h < 0
        w_rows = np.where(flip[:, None], -w_rows, w_rows)
        h = np.abs(h)
        g = self._grad(w_rows)
        gn = np.maximum(np.linalg.norm(g, axis=1), 1e-300)
        step = np.full(len(w_rows), self.r) / gn
        stall = 0
        for _ in range(steps):
            cand = self.norm.project_dual(w_rows + step[:, None] * g, self.r)
            hc = self._h(cand)
            hc = np.where(hc < 0, -hc, hc)  # odd score: the mirrored direction attains |h|
            improved = hc > h
            gain = float(np.max(hc - h, initial=0.0))
            w_rows = np.where(improved[:, None], cand, w_rows)
            h = np.where(improved, hc, h)
            step = np.where(improved, step * 1.3, step * 0.5)
            if np.any(improved):
                g = self._grad(w_rows)
            stall = 0 if gain > self.cfg.ascent_tol / 8.0 else stall + 1
            if stall >= 3:
                break
        return w_rows, h

    def evaluate(self, mu):
        self._mu = np.asarray(mu, dtype=float)
        w_rows, h = self._ascend(self._starts(self._mu), self.cfg.ascent_max_steps)
        k = min(self.cfg.top_k_refine, len(h))
        top = np.argsort(h)[-k:]
        w_top, h_top = self._ascend(w_rows[top], self.cfg.ascent_max_steps)
        i = int(np.argmax(h_top))
        best_w = w_top[i].copy()
        best_v = float(h_top[i])
        keep = np.argsort(h)[-4:]
        self.memory = [w_rows[j].copy() for j in keep]
        return best_v, best_w, 0.0


def _golden_max(f, a, b, iters):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    cands = [(f(a), a), (f1, x1), (f2, x2), (f(b), b)]
    v, t = max(cands, key=lambda p: p[0])
    return t, v


def _make_evaluator(x, r, norm, cfg, mu_abs_bound):
    if x.shape[1] == 1:
        grid = _GridEvaluator(x[:, 0], r, mu_abs_bound, cfg)
        return grid, lambda mu: grid.evaluate(float(np.atleast_1d(mu)[0]))
    asc = _AscentEvaluator(x, r, norm, cfg)
    return asc, asc.evaluate


def inner_sup(mu, samples, r, norm=None, cfg=None):
    """Supremum of |<w, mu> - Im ecf(w)| over the dual ball of radius r.

    Returns ``(value, w_star, cert_gap)``.  ``value`` is the best over the
    candidates explored by the solver and never exceeds the true supremum.
    For 1-D samples ``cert_gap`` bounds the distance to the true supremum
    (Lipschitz grid certificate); it is ``None`` otherwise.
    """
    x = as_samples(samples)
    if r <= 0:
        raise InvalidArgumentError("r must be positive")
    norm = norm if norm is not None else NormPair("l2")
    cfg = cfg if cfg is not None else InnerSolverConfig()
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (x.shape[1],):
        raise InvalidArgumentError(f"mu has shape {mu.shape}, samples have d={x.shape[1]}")
    bound = float(np.max(np.abs(mu))) if x.shape[1] == 1 else 0.0
    _, evaluate = _make_evaluator(x, r, norm, cfg, bound)
    value, w, slack = evaluate(mu)
    gap = slack if x.shape[1] == 1 else None
    return InnerSupResult(value, DualVector(w, r), gap)


def objective(mu, samples, r, norm=None, cfg=None):
    """The minimax score ``inner_sup / r`` of a candidate mean; convex in mu."""
    return inner_sup(mu, samples, r, norm=norm, cfg=cfg).value / r


def _initial_point(x, outer_cfg):
    if outer_cfg.init == "coordinate_median":
        return np.median(x, axis=0)
    if outer_cfg.init == "empirical_mean":
        return x.mean(axis=0)
    if outer_cfg.init == "zero":
        return np.zeros(x.shape[1])
    mu0 = np.atleast_1d(np.asarray(outer_cfg.init_vector, dtype=float))
    if mu0.shape != (x.shape[1],):
        raise InvalidArgumentError("init_vector dimension does not match samples")
    return mu0.copy()


def estimate_mean(samples, r, norm=None, inner_cfg=None, outer_cfg=None):
    """Minimize the minimax score over candidate means.

    Cutting-plane loop: each round minimizes the max-of-affine model built
    from previously found directions, queries the inner supremum at the model
    minimizer, and stops once the (certified, where available) inner value is
    within ``tol_abs * r`` of the model value.  The model underestimates the
    true score everywhere, so on convergence the returned mean is optimal
    within ``tol_abs`` plus the inner certification slack on the explored cut
    set.  Deterministic given the configs (including the inner seed).

    Hitting ``max_cuts`` returns the best candidate seen with
    ``converged=False`` rather than raising.
    """
    x = as_samples(samples)
    if r <= 0:
        raise InvalidArgumentError("r must be positive")
    norm = norm if norm is not None else NormPair("l2")
    icfg = inner_cfg if inner_cfg is not None else InnerSolverConfig()
    ocfg = outer_cfg if outer_cfg is not None else OuterSolverConfig()
    n, d = x.shape

    mu0 = _initial_point(x, ocfg)
    bound0 = float(np.max(np.abs(mu0))) if d == 1 else 0.0
    ev_obj, evaluate = _make_evaluator(x, r, norm, icfg, bound0)
    val0, w0, slack0 = evaluate(mu0)

    # box containing every near-minimizer: any candidate farther than twice
    # the score at mu0 from mu0 scores strictly worse (conjugate bound)
    half = 2.0 * (val0 + slack0) / r + 64.0 * ocfg.tol_abs + 1e-12 * (1.0 + float(np.max(np.abs(mu0))))
    if d == 1:
        want_bound = float(np.abs(mu0[0])) + half
        grid = ev_obj
        if (want_bound + grid.abs_mean) * grid.spacing / 2.0 > icfg.ascent_tol and grid.m < icfg.grid_cap:
            ev_obj, evaluate = _make_evaluator(x, r, norm, icfg, want_bound)
            val0, w0, slack0 = evaluate(mu0)

    cuts_w = [np.atleast_1d(w0)]
    cuts_s = [_im_ecf(x, cuts_w[0])]
    best_mu, best_val, best_w = mu0, val0, cuts_w[0]
    tie_detected = False
    converged = False
    model_val = 0.0
    lower = mu0 - half
    upper = mu0 + half

    for _ in range(ocfg.max_cuts):
        w_mat = np.vstack(cuts_w)
        s_vec = np.array(cuts_s)
        for _expand in range(8):
            mu_k, model_val = minimax_affine(w_mat, s_vec, lower, upper, iters=ocfg.subgrad_max_steps)
            on_edge = np.any(mu_k <= lower + 1e-9 * (upper - lower)) or np.any(
                mu_k >= upper - 1e-9 * (upper - lower)
            )
            if not on_edge:
                break
            center = (lower + upper) / 2.0
            lower = center - 2.0 * (center - lower)
            upper = center + 2.0 * (upper - center)
        val_k, w_k, slack_k = evaluate(mu_k)
        if val_k < best_val - 1e-12 * (1.0 + best_val):
            best_mu, best_val, best_w = mu_k, val_k, np.atleast_1d(w_k)
        elif abs(val_k - best_val) <= 1e-12 * (1.0 + best_val) and not np.array_equal(mu_k, best_mu):
            tie_detected = True
        # the model underestimates the true score everywhere, so a small gap
        # at the model minimizer certifies near-optimality on the cut set
        if val_k - model_val <= ocfg.tol_abs * r:
            best_mu, best_val, best_w = mu_k, val_k, np.atleast_1d(w_k)
            converged = True
            break
        w_new = np.atleast_1d(w_k)
        duplicate = any(
            np.max(np.abs(w_new - w_old)) <= 1e-13 * (1.0 + r) for w_old in cuts_w
        )
        if duplicate:
            break
        cuts_w.append(w_new)
        cuts_s.append(_im_ecf(x, cuts_w[-1]))

    mu_hat = np.asarray(best_mu, dtype=float)
    slack_hat = ev_obj.cert_slack(float(mu_hat[0])) if d == 1 else 0.0
    diagnostics = {
        "model_value": model_val / r,
        "cert_slack": slack_hat / r,
        "inner_certified": d == 1,
        "box_halfwidth": float(np.max(upper - lower)) / 2.0,
        "tie_detected": tie_detected,
    }
    return EstimateOutcome(
        mu_hat=mu_hat,
        objective_value=best_val / r,
        attaining_w=DualVector(best_w, r),
        cuts_used=len(cuts_w),
        converged=converged,
        diagnostics=diagnostics,
    )
