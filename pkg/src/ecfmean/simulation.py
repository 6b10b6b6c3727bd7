"""Heavy-tailed data generation with known ground truth, plus strong-model
sample contamination.  Everything is reproducible from explicit seeds.

Base coordinates are drawn i.i.d. and centered analytically, so the true mean
is exactly the configured shift and the covariance follows from the configured
scale in closed form.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .estimator import as_samples

__all__ = [
    "FAMILIES",
    "STRATEGIES",
    "DistributionSpec",
    "GroundTruth",
    "AdversarySpec",
    "child_seed",
    "sample",
    "ground_truth",
    "true_cf_gaussian",
    "contaminate",
]

FAMILIES = ("gaussian", "student_t", "pareto", "lognormal", "two_point")
STRATEGIES = ("point_mass", "scaled_copies", "sign_flip", "oracle_shift")


def child_seed(base_seed, *parts):
    """Stable 64-bit sub-stream seed derived from a base seed and tags."""
    text = "|".join([str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class DistributionSpec:
    """A sampling law with analytically known mean and covariance.

    ``shift`` is the true mean (scalar broadcasts across coordinates) and
    ``scale`` multiplies the centered unit-variance-free base coordinates:
    a scalar, a length-d diagonal, or a d-by-d matrix.
    """

    family: str
    params: dict = field(default_factory=dict)
    shift: object = 0.0
    scale: object = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.family == "student_t":
            df = self.params.get("df")
            if df is None or df <= 2:
                raise InvalidArgumentError("student_t requires df > 2 (finite covariance)")
        elif self.family == "pareto":
            tail = self.params.get("tail")
            if tail is None or tail <= 2:
                raise InvalidArgumentError("pareto requires tail index > 2")
        elif self.family == "lognormal":
            sigma = self.params.get("sigma", 1.0)
            if sigma <= 0:
                raise InvalidArgumentError("lognormal requires sigma > 0")
        elif self.family == "two_point":
            a = self.params.get("a", 1.0)
            if a <= 0:
                raise InvalidArgumentError("two_point requires a > 0")

    def infer_d(self):
        for value in (self.shift, self.scale):
            arr = np.asarray(value, dtype=float)
            if arr.ndim >= 1 and arr.size > 1:
                return arr.shape[0]
        return 1


@dataclass(frozen=True)
class GroundTruth:
    """True mean plus operator norm and trace of the covariance."""

    mean: np.ndarray
    cov_opnorm: float
    cov_trace: float

    def __post_init__(self):
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=float)))
        if self.cov_opnorm < 0 or self.cov_trace < 0:
            raise InvalidArgumentError("covariance summaries must be nonnegative")
        if self.cov_opnorm > self.cov_trace * (1 + 1e-12) + 1e-300:
            raise InvalidArgumentError("operator norm cannot exceed the trace")


def _base_variance(spec):
    if spec.family == "gaussian":
        return 1.0
    if spec.family == "student_t":
        df = spec.params["df"]
        return df / (df - 2.0)
    if spec.family == "pareto":
        a = spec.params["tail"]
        return a / ((a - 1.0) ** 2 * (a - 2.0))
    if spec.family == "lognormal":
        s2 = spec.params.get("sigma", 1.0) ** 2
        return (np.exp(s2) - 1.0) * np.exp(s2)
    a = spec.params.get("a", 1.0)
    return a * a


def _draw_base(spec, rng, n, d):
    if spec.family == "gaussian":
        return rng.standard_normal((n, d))
    if spec.family == "student_t":
        return rng.standard_t(spec.params["df"], size=(n, d))
    if spec.family == "pareto":
        a = spec.params["tail"]
        # standard Pareto on [1, inf); centered so the true mean is the shift
        return (rng.pareto(a, size=(n, d)) + 1.0) - a / (a - 1.0)
    if spec.family == "lognormal":
        s = spec.params.get("sigma", 1.0)
        return rng.lognormal(0.0, s, size=(n, d)) - np.exp(s * s / 2.0)
    a = spec.params.get("a", 1.0)
    return a * (2.0 * rng.integers(0, 2, size=(n, d)) - 1.0)


def _shift_scale(spec, d):
    shift = np.asarray(spec.shift, dtype=float)
    if shift.ndim == 0:
        shift = np.full(d, float(shift))
    if shift.shape != (d,):
        raise InvalidArgumentError(f"shift has shape {shift.shape}, expected ({d},)")
    scale = np.asarray(spec.scale, dtype=float)
    if scale.ndim == 0:
        scale = np.full(d, float(scale))
    if scale.ndim == 1:
        if scale.shape != (d,):
            raise InvalidArgumentError(f"diagonal scale has shape {scale.shape}, expected ({d},)")
    elif scale.shape != (d, d):
        raise InvalidArgumentError(f"scale matrix has shape {scale.shape}, expected ({d}, {d})")
    return shift, scale


def sample(dist, n, d, seed):
    """Draw an n-by-d sample; bitwise deterministic given (dist, n, d, seed)."""
    if n < 1 or d < 1:
        raise InvalidArgumentError("n and d must be positive")
    shift, scale = _shift_scale(dist, d)
    rng = np.random.default_rng(seed)
    z = _draw_base(dist, rng, n, d)
    if scale.ndim == 1:
        x = z * scale[None, :]
    else:
        x = z @ scale.T
    return x + shift[None, :]


def ground_truth(dist, d=None):
    """Closed-form mean, covariance operator norm, and covariance trace."""
    if d is None:
        d = dist.infer_d()
    shift, scale = _shift_scale(dist, d)
    v = _base_variance(dist)
    if scale.ndim == 1:
        eigs = v * scale**2
        opnorm = float(np.max(eigs))
        trace = float(np.sum(eigs))
    else:
        gram = scale @ scale.T
        opnorm = v * float(np.linalg.norm(gram, 2))
        trace = v * float(np.trace(gram))
    return GroundTruth(mean=shift, cov_opnorm=opnorm, cov_trace=trace)


def true_cf_gaussian(mu, sigma2, w):
    """Characteristic function of the 1-D Gaussian at frequency w."""
    if sigma2 < 0:
        raise InvalidArgumentError("sigma2 must be nonnegative")
    w = float(w)
    damp = np.exp(-(w * w) * sigma2 / 2.0)
    return complex(damp * np.cos(w * mu), damp * np.sin(w * mu))


@dataclass(frozen=True)
class AdversarySpec:
    """Strong contamination: replace exactly floor(eta * n) samples.

    Strategies: ``point_mass`` puts the replaced rows at
    ``magnitude * location`` (location defaults to the first axis);
    ``scaled_copies`` multiplies them by ``factor``; ``sign_flip`` negates
    them; ``oracle_shift`` places them at ``magnitude`` times the direction of
    the clean empirical mean supplied through ``context``.
    """

    eta: float
    strategy: str
    location: Optional[np.ndarray] = None
    magnitude: float = 1.0
    factor: float = 1.0
    direction_source: str = "clean_mean"

    def __post_init__(self):
        if not 0 <= self.eta < 0.5:
            raise InvalidArgumentError("eta must lie in [0, 1/2)")
        if self.strategy not in STRATEGIES:
            raise InvalidArgumentError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if self.location is not None:
            object.__setattr__(
                self, "location", np.atleast_1d(np.asarray(self.location, dtype=float))
            )


def contaminate(samples, adv, context=None, seed=0):
    """Replace a seeded-random set of floor(eta * n) rows per the strategy.

    ``context`` carries the clean empirical mean, used by ``oracle_shift``.
    """
    x = as_samples(samples).copy()
    n, d = x.shape
    m = int(np.floor(adv.eta * n))
    if m == 0:
        return x
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=m, replace=False)
    if adv.strategy == "point_mass":
        loc = adv.location if adv.location is not None else _axis(d)
        if loc.shape != (d,):
            raise InvalidArgumentError(f"location has shape {loc.shape}, expected ({d},)")
        x[idx] = adv.magnitude * loc
    elif adv.strategy == "scaled_copies":
        x[idx] *= adv.factor
    elif adv.strategy == "sign_flip":
        x[idx] = -x[idx]
    else:
        if context is None:
            raise InvalidArgumentError("oracle_shift requires the clean mean as context")
        mean = np.atleast_1d(np.asarray(context, dtype=float))
        if mean.shape != (d,):
            raise InvalidArgumentError(f"context mean has shape {mean.shape}, expected ({d},)")
        nrm = float(np.linalg.norm(mean))
        direction = mean / nrm if nrm > 0 else _axis(d)
        x[idx] = adv.magnitude * direction
    return x


def _axis(d):
    e = np.zeros(d)
    e[0] = 1.0
    return e
