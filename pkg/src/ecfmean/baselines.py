"""Reference robust mean estimators for head-to-head benchmarks.

All estimators here are shift-equivariant by construction (they act on
internally centered data and shift back), in deliberate contrast with the
characteristic-function estimator.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError, InvalidArgumentError
from .estimator import as_samples

__all__ = [
    "CatoniConfig",
    "BlockPartition",
    "WeiszfeldResult",
    "empirical_mean",
    "catoni",
    "catoni_influence",
    "suggest_catoni_alpha",
    "make_blocks",
    "median_of_means",
    "geometric_median",
    "geometric_median_of_means",
    "trimmed_mean",
]


def empirical_mean(samples):
    """Coordinate-wise sample average."""
    return as_samples(samples).mean(axis=0)


@dataclass(frozen=True)
class CatoniConfig:
    """Tempering scale and root-finding controls for the Catoni estimator."""

    alpha: float
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidArgumentError("alpha must be positive")
        if self.tol <= 0 or self.max_iter < 1:
            raise InvalidArgumentError("tol must be positive and max_iter >= 1")


def catoni_influence(t):
    """The odd influence function sign(t) * log(1 + |t| + t^2/2).

    It equals the narrower edge of the admissible band
    -log(1 - t + t^2/2) <= psi(t) <= log(1 + t + t^2/2) and is nondecreasing.
    """
    t = np.asarray(t, dtype=float)
    out = np.sign(t) * np.log1p(np.abs(t) + t * t / 2.0)
    return float(out) if out.ndim == 0 else out


def suggest_catoni_alpha(samples_1d, delta):
    """Standard tempering scale sqrt(2 log(1/delta) / (n * variance))."""
    x = _as_1d(samples_1d)
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    v = float(np.var(x))
    if v <= 0:
        v = 1.0
    return float(np.sqrt(2.0 * np.log(1.0 / delta) / (len(x) * v)))


def catoni(samples_1d, cfg):
    """Root of the tempered score mean(psi(alpha * (x - mu))) = 0.

    The score is nonincreasing in mu, so its zero set is an interval; the
    midpoint is returned.  Raises EstimationError if the score does not change
    sign over the sample range (degenerate data aside).
    """
    x = _as_1d(samples_1d)
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        return lo
    center = float(np.median(x))
    xc = x - center

    def score(mu):
        return float(np.mean(catoni_influence(cfg.alpha * (xc - mu))))

    a, b = lo - center, hi - center
    if score(a) < -cfg.tol or score(b) > cfg.tol:
        raise EstimationError("tempered score does not bracket a root on the sample range")
    left = _monotone_boundary(score, a, b, cfg.max_iter, keep_positive=True)
    right = _monotone_boundary(score, a, b, cfg.max_iter, keep_positive=False)
    root = (left + right) / 2.0
    if abs(score(root)) > cfg.tol:
        raise EstimationError("root residual above tolerance; increase max_iter")
    return center + root


def _monotone_boundary(score, a, b, iters, keep_positive):
    # bisect for the edge of the root interval of a nonincreasing score:
    # keep_positive tracks sup{mu: score > 0}, otherwise inf{mu: score < 0}
    lo, hi = a, b
    for _ in range(iters):
        mid = (lo + hi) / 2.0
        s = score(mid)
        if (s > 0) if keep_positive else (s >= 0):
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


@dataclass(frozen=True)
class BlockPartition:
    """Assignment of sample indices to k near-equal blocks."""

    k: int
    assignment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "assignment", np.asarray(self.assignment, dtype=int))
        counts = np.bincount(self.assignment, minlength=self.k)
        if len(counts) != self.k or counts.max() - counts.min() > 1 or counts.min() < 1:
            raise InvalidArgumentError("block sizes must differ by at most one")

    def blocks(self):
        return [np.nonzero(self.assignment == b)[0] for b in range(self.k)]


def make_blocks(n, k, seed=None):
    """Partition n indices into k blocks of near-equal size.

    ``seed=None`` keeps the sequential order; otherwise the indices are
    permuted reproducibly before the contiguous split.
    """
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must lie in [1, {n}], got {k}")
    order = np.arange(n)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=int)
    for b, idx in enumerate(np.array_split(order, k)):
        assignment[idx] = b
    return BlockPartition(k=k, assignment=assignment)


def _block_means(x, partition):
    return np.stack([x[idx].mean(axis=0) for idx in partition.blocks()])


def median_of_means(samples_1d, k, seed=None):
    """Median of the k block means (midpoint convention for even counts)."""
    x = _as_1d(samples_1d)
    part = make_blocks(len(x), k, seed)
    return float(np.median(_block_means(x[:, None], part)[:, 0]))


@dataclass(frozen=True)
class WeiszfeldResult:
    point: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    objective_trace: tuple = ()


def geometric_median(points, tol=1e-9, max_iter=500):
    """Minimizer of the summed distances via Weiszfeld iterations.

    Iterates coinciding with a data point are handled by the subgradient
    optimality test and, when not optimal, by the damped step of Vardi-Zhang,
    which preserves descent.  The returned point has objective within tol of
    the minimum (certified through the gradient-norm bound over the hull)
    unless ``converged`` is False.
    """
    p = as_samples(points)
    if p.shape[0] == 1:
        return WeiszfeldResult(p[0].copy(), 0.0, 0, True, (0.0,))
    center = p.mean(axis=0)
    q = p - center

    y = np.zeros(p.shape[1])
    trace = []
    for it in range(max_iter):
        diff = q - y
        dist = np.linalg.norm(diff, axis=1)
        trace.append(float(dist.sum()))
        at_point = dist <= 1e-14 * (1.0 + np.abs(q).max())
        if np.any(at_point):
            others = ~at_point
            pull = (diff[others] / dist[others, None]).sum(axis=0)
            multiplicity = int(at_point.sum())
            pull_norm = float(np.linalg.norm(pull))
            if pull_norm <= multiplicity + tol:
                return WeiszfeldResult(center + y, trace[-1], it, True, tuple(trace))
            weights = 1.0 / dist[others]
            t_step = (q[others] * weights[:, None]).sum(axis=0) / weights.sum()
            gamma = min(1.0, multiplicity / pull_norm)
            y = (1.0 - gamma) * t_step + gamma * y
            continue
        g = (diff / dist[:, None]).sum(axis=0)
        # certified suboptimality: the minimizer lies in the convex hull
        if np.linalg.norm(g) * dist.max() <= tol:
            return WeiszfeldResult(center + y, trace[-1], it, True, tuple(trace))
        weights = 1.0 / dist
        y = (q * weights[:, None]).sum(axis=0) / weights.sum()
    diff = q - y
    dist = np.linalg.norm(diff, axis=1)
    trace.append(float(dist.sum()))
    return WeiszfeldResult(center + y, trace[-1], max_iter, False, tuple(trace))


def geometric_median_of_means(samples, k, tol=1e-9, seed=None):
    """Geometric median of the k block means."""
    x = as_samples(samples)
    part = make_blocks(x.shape[0], k, seed)
    return geometric_median(_block_means(x, part), tol=tol).point


def trimmed_mean(samples_1d, eta, delta):
    """Average after clamping to the empirical [q, 1-q] quantile interval,
    q = min(0.25, eta + log(4/delta)/n)."""
    x = _as_1d(samples_1d)
    if not 0 <= eta < 0.5:
        raise InvalidArgumentError("eta must lie in [0, 1/2)")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    n = len(x)
    q = min(0.25, eta + np.log(4.0 / delta) / n)
    xs = np.sort(x)
    lo_idx = int(np.ceil(q * (n - 1)))
    hi_idx = int(np.floor((1.0 - q) * (n - 1)))
    lo, hi = xs[lo_idx], xs[hi_idx]
    return float(np.mean(np.clip(x, lo, hi)))


def _as_1d(samples):
    x = as_samples(samples)
    if x.shape[1] != 1:
        raise InvalidArgumentError("this estimator requires univariate samples")
    return x[:, 0]
