"""Iterative re-centering of the minimax mean estimate, and selection of the
accuracy level from the data via nested sublevel sets.

Re-centering runs the core estimator on translated samples ``x - mu_prev`` and
shifts the result back, shrinking the accuracy target geometrically each round;
because the deviation between empirical and true characteristic functions is
translation invariant, every round enjoys the same guarantee, which makes the
composite estimate effectively shift-equivariant.

The oblivious procedure scores a level ``t`` by minimizing

    g_t(mu) = n / (11 log(1/delta)) * sup over the ball of radius r(t)
              of (<w, mu> - Im ecf(w)),        r(t) = 22 log(1/delta) / (n t),

whose sublevel sets ``{g_t <= 1}`` are nested, compact, and of diameter at
most ``t``.  Bisection over ``t`` finds a level that is nonempty while half of
it is empty, up to a factor-two resolution.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ScheduleError, SearchBoundsError
from .estimator import (
    InnerSolverConfig,
    OuterSolverConfig,
    as_samples,
    choose_radius,
    estimate_mean,
    inner_sup,
)
from .norms import NormPair

__all__ = [
    "SHRINK_FACTOR",
    "RefinementSchedule",
    "SublevelProbe",
    "ObliviousResult",
    "epsilon_schedule",
    "refine_step",
    "refine",
    "sublevel_nonempty",
    "oblivious_estimate",
]

# per-round shrink of the accuracy target
SHRINK_FACTOR = (9.0 / 10.0) ** (2.0 / 3.0)


@dataclass(frozen=True)
class RefinementSchedule:
    """Geometric accuracy schedule for the re-centering recursion.

    ``eps0`` must upper-bound the error of the crude initial estimate;
    ``eps_floor`` is the target accuracy at which the schedule saturates.
    The recursion is valid only when ``n >= 30 log(1/delta)``.
    """

    eps0: float
    eps_floor: float
    delta: float
    n: int
    max_k: int

    def __post_init__(self):
        if self.eps0 <= 0 or self.eps_floor <= 0:
            raise InvalidArgumentError("eps0 and eps_floor must be positive")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        if self.n < 1 or self.max_k < 0:
            raise InvalidArgumentError("n must be positive and max_k nonnegative")

    @property
    def is_valid(self):
        return self.n >= 30.0 * np.log(1.0 / self.delta)


def epsilon_schedule(schedule):
    """Accuracy targets (eps_1, ..., eps_max_k), each the max of the floor and
    the shrunk predecessor.  Raises ScheduleError when n < 30 log(1/delta)."""
    if not schedule.is_valid:
        need = 30.0 * np.log(1.0 / schedule.delta)
        raise ScheduleError(
            f"schedule requires n >= 30 log(1/delta) = {need:.1f}, got n = {schedule.n}"
        )
    eps = schedule.eps0
    out = []
    for _ in range(schedule.max_k):
        eps = max(schedule.eps_floor, SHRINK_FACTOR * eps)
        out.append(eps)
    return out


def refine_step(samples, prev_mu, r_k, norm=None, inner_cfg=None, outer_cfg=None):
    """One re-centering round: estimate on ``x - prev_mu`` and shift back."""
    x = as_samples(samples)
    prev = np.atleast_1d(np.asarray(prev_mu, dtype=float))
    if prev.shape != (x.shape[1],):
        raise InvalidArgumentError("prev_mu dimension does not match samples")
    out = estimate_mean(x - prev, r_k, norm=norm, inner_cfg=inner_cfg, outer_cfg=outer_cfg)
    return prev + out.mu_hat


def refine(samples, mu0, schedule, norm=None, inner_cfg=None, outer_cfg=None):
    """Full re-centering trajectory [mu0, mu_1, ..., mu_max_k].

    Round k uses the radius tuned for the schedule value eps_k.
    """
    x = as_samples(samples)
    if schedule.n != x.shape[0]:
        raise InvalidArgumentError(
            f"schedule.n = {schedule.n} does not match sample count {x.shape[0]}"
        )
    trajectory = [np.atleast_1d(np.asarray(mu0, dtype=float)).copy()]
    for eps_k in epsilon_schedule(schedule):
        r_k = choose_radius(eps_k, schedule.delta, schedule.n)
        trajectory.append(
            refine_step(x, trajectory[-1], r_k, norm=norm, inner_cfg=inner_cfg, outer_cfg=outer_cfg)
        )
    return trajectory


@dataclass(frozen=True)
class SublevelProbe:
    """Minimization of g_t at one level t.

    ``slack`` converts the solver tolerances into g-units; the level counts as
    nonempty when the minimized value is within slack of one.
    """

    t: float
    min_value: float
    witness_mu: np.ndarray
    slack: float

    @property
    def nonempty(self):
        return self.min_value <= 1.0 + self.slack


def sublevel_nonempty(samples, t, delta, norm=None, inner_cfg=None, outer_cfg=None):
    """Minimize g_t via the core estimator and report the sublevel status.

    Uses the identity ``g_t(mu) = (2 / t) * objective(mu)`` at the radius
    tuned for level t.
    """
    x = as_samples(samples)
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    ocfg = outer_cfg if outer_cfg is not None else OuterSolverConfig()
    r = choose_radius(t, delta, x.shape[0])
    out = estimate_mean(x, r, norm=norm, inner_cfg=inner_cfg, outer_cfg=ocfg)
    min_value = 2.0 * out.objective_value / t
    slack = 2.0 * (ocfg.tol_abs + out.diagnostics.get("cert_slack", 0.0)) / t
    return SublevelProbe(t=float(t), min_value=min_value, witness_mu=out.mu_hat, slack=slack)


@dataclass(frozen=True)
class ObliviousResult:
    """Estimate returned by the accuracy-oblivious procedure.

    ``scenario`` is 1 when the zero vector lies in every probed sublevel set
    (the all-levels test is approximated on the largest probed ball, flagged
    by ``approximate_global_test``), and 2 when bisection located the
    smallest nonempty level.  Iterating yields ``(mu_hat, eps0)``.
    """

    mu_hat: np.ndarray
    eps0: float
    scenario: int
    sup_im_checked: float
    approximate_global_test: bool
    bracket_resolved: bool
    probes: tuple

    def __iter__(self):
        yield self.mu_hat
        yield self.eps0


def oblivious_estimate(samples, delta, norm=None, inner_cfg=None, outer_cfg=None,
                       t_bounds=None, max_probes=40):
    """Select the accuracy level from the data and return (mu_hat, eps0).

    Scenario 1: when the supremum of Im ecf over the largest probed ball stays
    below ``11 log(1/delta) / n``, zero belongs to every sublevel set and is
    returned with the smallest probed level.  Scenario 2: bisection over
    ``log t`` returns the witness of the smallest nonempty probe; the level
    below half of it is empty up to the bisection resolution (factor two).

    Raises SearchBoundsError when even the largest level is empty.
    """
    x = as_samples(samples)
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    norm = norm if norm is not None else NormPair("l2")
    n, d = x.shape

    if t_bounds is None:
        scale = float(np.max(norm.primal_norm(x))) if x.size else 0.0
        scale = max(scale, 1.0)
        t_lo, t_hi = 1e-8 * scale, 2.0 * scale
    else:
        t_lo, t_hi = float(t_bounds[0]), float(t_bounds[1])
    if not 0 < t_lo < t_hi:
        raise InvalidArgumentError("need 0 < t_lo < t_hi")

    # largest probed ball = radius at the smallest level
    r_big = choose_radius(t_lo, delta, n)
    probe0 = inner_sup(np.zeros(d), x, r_big, norm=norm, cfg=inner_cfg)
    threshold = 11.0 * np.log(1.0 / delta) / n
    if probe0.value <= threshold:
        return ObliviousResult(
            mu_hat=np.zeros(d),
            eps0=t_lo,
            scenario=1,
            sup_im_checked=probe0.value,
            approximate_global_test=True,
            bracket_resolved=True,
            probes=(),
        )

    def probe(t):
        return sublevel_nonempty(x, t, delta, norm=norm, inner_cfg=inner_cfg, outer_cfg=outer_cfg)

    probes = []
    hi_probe = probe(t_hi)
    probes.append(hi_probe)
    if not hi_probe.nonempty:
        raise SearchBoundsError(
            f"sublevel set empty at the largest level t_hi = {t_hi:.6g}; widen t_bounds"
        )
    lo_probe = probe(t_lo)
    probes.append(lo_probe)
    if lo_probe.nonempty:
        # cannot certify emptiness below the smallest probed level
        return ObliviousResult(
            mu_hat=lo_probe.witness_mu,
            eps0=t_lo,
            scenario=2,
            sup_im_checked=probe0.value,
            approximate_global_test=True,
            bracket_resolved=False,
            probes=tuple(probes),
        )

    lo, hi = t_lo, t_hi
    used = 2
    while hi / lo > 1.95 and used < max_probes:
        mid = float(np.sqrt(lo * hi))
        p = probe(mid)
        probes.append(p)
        used += 1
        if p.nonempty:
            hi, hi_probe = mid, p
        else:
            lo = mid
    return ObliviousResult(
        mu_hat=hi_probe.witness_mu,
        eps0=hi_probe.t,
        scenario=2,
        sup_im_checked=probe0.value,
        approximate_global_test=True,
        bracket_resolved=True,
        probes=tuple(sorted(probes, key=lambda p: p.t)),
    )
