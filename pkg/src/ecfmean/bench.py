"""Seeded Monte Carlo benchmark harness: experiment configuration, trial
execution over a sample-size grid, rate summaries, and CSV/JSONL emission.

Every trial derives its own seed from the base seed, so runs are reproducible
record-for-record and trials can execute in parallel without coordination.
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import (
    CatoniConfig,
    catoni,
    empirical_mean,
    geometric_median_of_means,
    median_of_means,
    suggest_catoni_alpha,
    trimmed_mean,
)
from .bounds import accuracy_floor, accuracy_floor_contaminated
from .errors import BenchError, ConfigError
from .estimator import (
    InnerSolverConfig,
    OuterSolverConfig,
    choose_radius,
    choose_radius_contaminated,
    estimate_mean,
)
from .norms import NormPair
from .refinement import RefinementSchedule, SHRINK_FACTOR, oblivious_estimate, refine
from .simulation import AdversarySpec, DistributionSpec, child_seed, contaminate, ground_truth, sample

__all__ = [
    "ESTIMATOR_IDS",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialRecord",
    "run_experiment",
    "rate_sweep",
    "RateSweep",
    "fit_loglog_slope",
    "emit",
    "read_records",
]

ESTIMATOR_IDS = ("ecf", "ecf_refined", "ecf_oblivious", "mean", "catoni", "mom", "gmom", "trimmed")
_UNIVARIATE_ONLY = ("catoni", "trimmed")

CSV_COLUMNS = (
    "trial_index",
    "seed",
    "n",
    "d",
    "eta",
    "estimator_id",
    "error",
    "runtime_ms",
    "objective_value",
    "converged",
)


@dataclass(frozen=True)
class TrialRecord:
    """One (trial, estimator, n) result row."""

    trial_index: int
    seed: int
    n: int
    d: int
    eta: float
    estimator_id: str
    error: float
    runtime_ms: float
    objective_value: Optional[float]
    converged: bool

    def as_dict(self):
        return {c: getattr(self, c) for c in CSV_COLUMNS}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one benchmark run."""

    distribution: DistributionSpec
    n_grid: tuple
    d: int = 1
    delta: float = 0.1
    trials: int = 1
    base_seed: int = 0
    estimators: tuple = ("ecf", "mean")
    adversary: Optional[AdversarySpec] = None
    norm: NormPair = field(default_factory=NormPair)
    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)
    outer: OuterSolverConfig = field(default_factory=OuterSolverConfig)
    radius_mode: str = "oracle"
    cn_mc: int = 800
    mom_blocks: Optional[int] = None
    deterministic: bool = False

    def __post_init__(self):
        if not self.n_grid or list(self.n_grid) != sorted(set(int(n) for n in self.n_grid)):
            raise ConfigError("n_grid: must be a nonempty ascending list of distinct sizes")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid: sample sizes must be positive")
        if self.d < 1:
            raise ConfigError("d: must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta: must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials: must be positive")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        for i, est in enumerate(self.estimators):
            if est not in ESTIMATOR_IDS:
                raise ConfigError(f"estimators[{i}]: unknown id {est!r}; expected one of {ESTIMATOR_IDS}")
            if est in _UNIVARIATE_ONLY and self.d > 1:
                raise ConfigError(f"estimators[{i}]: {est!r} supports d = 1 only")
        if self.radius_mode not in ("oracle", "plugin"):
            raise ConfigError("radius_mode: must be 'oracle' or 'plugin'")
        if self.cn_mc < 1:
            raise ConfigError("cn_mc: must be positive")
        if self.mom_blocks is not None and self.mom_blocks < 1:
            raise ConfigError("mom_blocks: must be positive")

    @classmethod
    def from_dict(cls, raw):
        """Build a config from a JSON-compatible mapping, validating field by field."""
        if not isinstance(raw, dict):
            raise ConfigError(": configuration must be a JSON object")
        known = {
            "distribution", "adversary", "n_grid", "d", "delta", "trials", "base_seed",
            "estimators", "norm", "inner", "outer", "radius_mode", "cn_mc",
            "mom_blocks", "deterministic",
        }
        for key in raw:
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
        if "distribution" not in raw:
            raise ConfigError("distribution: required field is missing")
        if "n_grid" not in raw:
            raise ConfigError("n_grid: required field is missing")
        dist = _dist_from_dict(raw["distribution"])
        adv = _adv_from_dict(raw["adversary"]) if raw.get("adversary") else None
        inner = _cfg_from_dict(InnerSolverConfig, raw.get("inner"), "inner")
        outer = _cfg_from_dict(OuterSolverConfig, raw.get("outer"), "outer")
        try:
            norm = NormPair(raw.get("norm", "l2"))
        except Exception as exc:
            raise ConfigError(f"norm: {exc}") from exc
        try:
            return cls(
                distribution=dist,
                adversary=adv,
                n_grid=tuple(raw["n_grid"]),
                d=int(raw.get("d", 1)),
                delta=float(raw.get("delta", 0.1)),
                trials=int(raw.get("trials", 1)),
                base_seed=int(raw.get("base_seed", 0)),
                estimators=tuple(raw.get("estimators", ("ecf", "mean"))),
                norm=norm,
                inner=inner,
                outer=outer,
                radius_mode=str(raw.get("radius_mode", "oracle")),
                cn_mc=int(raw.get("cn_mc", 800)),
                mom_blocks=raw.get("mom_blocks"),
                deterministic=bool(raw.get("deterministic", False)),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f": {exc}") from exc


def _dist_from_dict(raw):
    if not isinstance(raw, dict) or "family" not in raw:
        raise ConfigError("distribution.family: required field is missing")
    try:
        return DistributionSpec(
            family=raw["family"],
            params={k: float(v) for k, v in raw.get("params", {}).items()},
            shift=raw.get("shift", 0.0),
            scale=raw.get("scale", 1.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"distribution: {exc}") from exc


def _adv_from_dict(raw):
    if not isinstance(raw, dict) or "strategy" not in raw or "eta" not in raw:
        raise ConfigError("adversary: needs 'eta' and 'strategy'")
    try:
        return AdversarySpec(
            eta=float(raw["eta"]),
            strategy=raw["strategy"],
            location=raw.get("location"),
            magnitude=float(raw.get("magnitude", 1.0)),
            factor=float(raw.get("factor", 1.0)),
            direction_source=raw.get("direction_source", "clean_mean"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"adversary: {exc}") from exc


def _cfg_from_dict(cls, raw, path):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: must be an object")
    fields = {f for f in cls.__dataclass_fields__}
    for key in raw:
        if key not in fields:
            raise ConfigError(f"{path}.{key}: unknown field")
    try:
        return cls(**raw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def population_rademacher(config, n):
    """Monte Carlo estimate of the population Rademacher complexity at size n.

    Fresh data and fresh signs per draw; seeded from the base seed.
    """
    gt = ground_truth(config.distribution, config.d)
    rng = np.random.default_rng(child_seed(config.base_seed, "cn", n))
    total = 0.0
    for i in range(config.cn_mc):
        x = sample(config.distribution, n, config.d, child_seed(config.base_seed, "cn-x", n, i))
        signs = rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0
        total += config.norm.primal_norm(signs @ (x - gt.mean)) / np.sqrt(n)
    return total / config.cn_mc


def _oracle_eps_r(config, gt, n, cn):
    eta = config.adversary.eta if config.adversary is not None else 0.0
    mu_norm = config.norm.primal_norm(gt.mean)
    if eta > 0:
        eps = accuracy_floor_contaminated(cn, gt.cov_opnorm, config.delta, n, mu_norm, eta)
        r = choose_radius_contaminated(eps, config.delta, n, eta)
    else:
        eps = accuracy_floor(cn, gt.cov_opnorm, config.delta, n, mu_norm)
        r = choose_radius(eps, config.delta, n)
    return eps, r


def _plugin_eps_r(config, x):
    n = x.shape[0]
    eta = config.adversary.eta if config.adversary is not None else 0.0
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    cn = float(np.sqrt(max(np.trace(cov), 0.0)))
    sigma_op = float(max(np.linalg.eigvalsh(cov).max(), 0.0))
    mu_norm = config.norm.primal_norm(np.median(x, axis=0))
    if eta > 0:
        eps = accuracy_floor_contaminated(cn, sigma_op, config.delta, n, mu_norm, eta)
        r = choose_radius_contaminated(eps, config.delta, n, eta)
    else:
        eps = accuracy_floor(cn, sigma_op, config.delta, n, mu_norm)
        r = choose_radius(eps, config.delta, n)
    return eps, r


def _default_blocks(config, n):
    if config.mom_blocks is not None:
        return min(n, config.mom_blocks)
    return max(1, min(n, int(np.ceil(8.0 * np.log(1.0 / config.delta)))))


def _run_one_estimator(est_id, x, config, gt, eps, r, trial_seed):
    n = x.shape[0]
    objective_value = None
    converged = True
    if est_id == "ecf":
        out = estimate_mean(x, r, norm=config.norm, inner_cfg=config.inner, outer_cfg=config.outer)
        mu_hat, objective_value, converged = out.mu_hat, out.objective_value, out.converged
    elif est_id == "ecf_refined":
        k = _default_blocks(config, n)
        mu0 = geometric_median_of_means(x, k, seed=child_seed(trial_seed, "gmom"))
        eps0 = max(eps, 10.0 * np.sqrt(gt.cov_trace * np.log(2.0 / config.delta) / n))
        steps = int(np.ceil(np.log(eps0 / eps) / -np.log(SHRINK_FACTOR))) + 1 if eps0 > eps else 1
        schedule = RefinementSchedule(eps0=eps0, eps_floor=eps, delta=config.delta, n=n, max_k=steps)
        trajectory = refine(x, mu0, schedule, norm=config.norm,
                            inner_cfg=config.inner, outer_cfg=config.outer)
        mu_hat = trajectory[-1]
    elif est_id == "ecf_oblivious":
        result = oblivious_estimate(x, config.delta, norm=config.norm,
                                    inner_cfg=config.inner, outer_cfg=config.outer)
        mu_hat = result.mu_hat
        objective_value = result.eps0
    elif est_id == "mean":
        mu_hat = empirical_mean(x)
    elif est_id == "catoni":
        alpha = suggest_catoni_alpha(x[:, 0], config.delta)
        mu_hat = np.array([catoni(x[:, 0], CatoniConfig(alpha=alpha))])
    elif est_id == "mom":
        k = _default_blocks(config, n)
        mu_hat = np.array([median_of_means(x[:, 0], k, seed=child_seed(trial_seed, "mom"))])
    elif est_id == "gmom":
        k = _default_blocks(config, n)
        mu_hat = geometric_median_of_means(x, k, seed=child_seed(trial_seed, "gmom"))
    else:
        eta = config.adversary.eta if config.adversary is not None else 0.0
        mu_hat = np.array([trimmed_mean(x[:, 0], eta, config.delta)])
    return mu_hat, objective_value, converged


def _trial_records(config, gt, n, eps, r, trial):
    trial_seed = child_seed(config.base_seed, "trial", n, trial)
    x = sample(config.distribution, n, config.d, trial_seed)
    eta = 0.0
    if config.adversary is not None:
        eta = config.adversary.eta
        x_run = contaminate(
            x, config.adversary, context=x.mean(axis=0),
            seed=child_seed(config.base_seed, "adv", n, trial),
        )
    else:
        x_run = x
    if config.radius_mode == "plugin":
        eps, r = _plugin_eps_r(config, x_run)
    records = []
    for est_id in sorted(config.estimators):
        t0 = time.perf_counter()
        mu_hat, objective_value, converged = _run_one_estimator(
            est_id, x_run, config, gt, eps, r, trial_seed
        )
        elapsed_ms = 0.0 if config.deterministic else (time.perf_counter() - t0) * 1e3
        records.append(
            TrialRecord(
                trial_index=trial,
                seed=trial_seed,
                n=n,
                d=config.d,
                eta=eta,
                estimator_id=est_id,
                error=float(config.norm.primal_norm(mu_hat - gt.mean)),
                runtime_ms=elapsed_ms,
                objective_value=objective_value,
                converged=bool(converged),
            )
        )
    return records


def _trial_task(args):
    config, gt, n, eps, r, trial = args
    return _trial_records(config, gt, n, eps, r, trial)


def run_experiment(config, jobs=1):
    """Run the configured Monte Carlo benchmark; yields TrialRecords.

    Output order is (n, trial_index, estimator_id) regardless of ``jobs``; all
    estimator calls are pure functions of derived seeds, so parallel execution
    cannot change numeric results.
    """
    gt = ground_truth(config.distribution, config.d)
    for n in config.n_grid:
        if config.radius_mode == "oracle":
            cn = population_rademacher(config, n)
            eps, r = _oracle_eps_r(config, gt, n, cn)
        else:
            eps, r = None, None
        tasks = [(config, gt, n, eps, r, trial) for trial in range(config.trials)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                batches = list(pool.map(_trial_task, tasks, chunksize=4))
        else:
            batches = [_trial_task(t) for t in tasks]
        for batch in batches:
            yield from batch


def fit_loglog_slope(sizes, values):
    """Least-squares slope of log(values) against log(sizes)."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if sizes.size < 3:
        raise BenchError("rate fit needs at least three grid points")
    if np.any(values <= 0) or np.any(sizes <= 0):
        raise BenchError("rate fit needs positive sizes and values")
    slope, _ = np.polyfit(np.log(sizes), np.log(values), 1)
    return float(slope)


@dataclass(frozen=True)
class RateSweep:
    """Per-estimator medians and upper quantiles over the size grid."""

    n_grid: tuple
    medians: dict
    q95: dict
    slopes: dict

    def table_rows(self):
        rows = []
        for est in sorted(self.medians):
            for i, n in enumerate(self.n_grid):
                rows.append((est, n, self.medians[est][i], self.q95[est][i]))
        return rows


def rate_sweep(config, jobs=1):
    """Error quantiles per sample size plus the fitted log-log slope."""
    if len(config.n_grid) < 3:
        raise BenchError("rate sweep needs at least three grid points")
    errors = {est: {n: [] for n in config.n_grid} for est in config.estimators}
    for rec in run_experiment(config, jobs=jobs):
        errors[rec.estimator_id][rec.n].append(rec.error)
    medians = {
        est: tuple(float(np.median(errors[est][n])) for n in config.n_grid)
        for est in config.estimators
    }
    q95 = {
        est: tuple(float(np.quantile(errors[est][n], 0.95)) for n in config.n_grid)
        for est in config.estimators
    }
    slopes = {est: fit_loglog_slope(config.n_grid, medians[est]) for est in config.estimators}
    return RateSweep(n_grid=config.n_grid, medians=medians, q95=q95, slopes=slopes)


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(records, fmt, path):
    """Write records as CSV (schema-exact columns) or JSONL."""
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format: unknown format {fmt!r}")
    records = list(records)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow([_format_cell(rec.as_dict()[c]) for c in CSV_COLUMNS])
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec.as_dict()) + "\n")
    return path


def read_records(path, fmt):
    """Parse records back from an emitted file (inverse of ``emit``)."""
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format: unknown format {fmt!r}")
    records = []
    if fmt == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_COLUMNS:
                raise ConfigError(f"csv: unexpected header {header}")
            for row in reader:
                raw = dict(zip(CSV_COLUMNS, row))
                records.append(
                    TrialRecord(
                        trial_index=int(raw["trial_index"]),
                        seed=int(raw["seed"]),
                        n=int(raw["n"]),
                        d=int(raw["d"]),
                        eta=float(raw["eta"]),
                        estimator_id=raw["estimator_id"],
                        error=float(raw["error"]),
                        runtime_ms=float(raw["runtime_ms"]),
                        objective_value=None if raw["objective_value"] == "" else float(raw["objective_value"]),
                        converged=raw["converged"] == "true",
                    )
                )
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                raw = json.loads(line)
                records.append(TrialRecord(**raw))
    return records
