"""Monte Carlo estimation of competitive ratios.

The instance is fixed; each trial draws fresh arrival times from its own keyed
stream, runs the online algorithm and evaluates the chosen benchmark. Per-trial
results depend only on (master seed, trial index), and aggregation always runs in
trial order with exactly rounded sums, so the outcome does not depend on how trials
are spread over workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..arrivals import UNIFORM, ArrivalDistribution, sample_arrivals, trial_rng
from ..model import Instance
from ..online import AlgorithmParams, EpsilonClampWarning, make_selector
from ..oracles import (
    lp_relaxation_opt,
    opt_offline_exact,
    opt_star_cardinality,
    opt_star_lengths,
)
from .bounds import bounds_for

# benchmarks that dominate the online algorithm for each variant
COMPATIBLE_ORACLES = {
    "cardinality": ("opt_star", "flow", "brute"),
    "lengths": ("opt_star", "flow", "brute"),
    "packing": ("lp",),
}
# benchmarks that do not depend on the arrival times
STATIC_ORACLES = ("opt_star", "lp")

TRIAL_COLUMNS = ("trial", "alg_value", "opt_value", "variant", "gamma", "B", "d",
                 "epsilon", "alpha", "seed")

Z95 = 1.959963984540054


class ConfigError(ValueError):
    """The experiment configuration is inconsistent."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    instance: Instance
    params: AlgorithmParams
    trials: int
    seed: int
    oracle: str = "opt_star"
    arrivals: ArrivalDistribution = UNIFORM
    validate: bool = True
    instance_source: Optional[dict] = None

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        variant = self.params.variant
        allowed = COMPATIBLE_ORACLES[variant]
        if self.oracle not in allowed:
            raise ConfigError(
                f"oracle {self.oracle!r} is not valid for variant {variant!r}; "
                f"expected one of {allowed}"
            )
        inst = self.instance
        if variant == "packing" and inst.constraints is None:
            raise ConfigError("variant 'packing' needs an instance with constraints")
        if variant in ("cardinality", "packing") and not inst.uniform_durations:
            raise ConfigError(f"variant {variant!r} needs every duration equal to gamma")
        if variant != "packing" and float(inst.capacity) != int(inst.capacity):
            raise ConfigError(f"variant {variant!r} needs an integral capacity")
        if self.oracle == "brute" and inst.n > 20:
            raise ConfigError("the brute-force oracle is limited to n <= 20")


@dataclass(eq=False)
class TrialAggregate:
    mean_alg: float
    mean_opt: float
    ratio: float
    stderr_alg: float
    stderr_opt: float
    ci_low: float
    ci_high: float
    mean_of_ratios: float
    trials: int
    alg_values: np.ndarray = field(repr=False, default=None)
    opt_values: np.ndarray = field(repr=False, default=None)
    violations: dict = field(default_factory=dict)


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    aggregate: TrialAggregate
    variant_info: dict
    bounds: dict
    traces: Optional[list] = None

    @property
    def bound(self):
        """The primary guarantee for the variant."""
        return next(iter(self.bounds.values()))


def aggregate(alg_values, opt_values) -> TrialAggregate:
    """Ratio of means with a 95% delta-method interval."""
    a = np.asarray(alg_values, dtype=float)
    o = np.asarray(opt_values, dtype=float)
    T = a.size
    if T == 0 or o.size != T:
        raise ValueError("need matching, non-empty per-trial arrays")
    ma = math.fsum(a) / T
    mo = math.fsum(o) / T
    ratio = ma / mo if mo > 0 else math.nan
    if T > 1:
        da, do = a - ma, o - mo
        va = math.fsum(da * da) / (T - 1)
        vo = math.fsum(do * do) / (T - 1)
        cov = math.fsum(da * do) / (T - 1)
        se_a, se_o = math.sqrt(va / T), math.sqrt(vo / T)
        if mo > 0:
            var_r = max(0.0, (va - 2 * ratio * cov + ratio * ratio * vo) / (T * mo * mo))
            half = Z95 * math.sqrt(var_r)
        else:
            half = math.nan
    else:
        se_a = se_o = 0.0
        half = 0.0
    pos = o > 0
    mor = math.fsum(a[pos] / o[pos]) / int(pos.sum()) if pos.any() else math.nan
    return TrialAggregate(ma, mo, ratio, se_a, se_o, ratio - half, ratio + half, mor, T,
                          alg_values=a, opt_values=o)


def _fit_selector(config: ExperimentConfig, quiet=False):
    sel = make_selector(config.params)
    with warnings.catch_warnings():
        if quiet:
            warnings.simplefilter("ignore", EpsilonClampWarning)
        sel.fit(config.instance)
    return sel


def _static_opt(config: ExperimentConfig):
    if config.oracle == "lp":
        return lp_relaxation_opt(config.instance).value
    if config.oracle == "opt_star":
        if config.params.variant == "lengths":
            return opt_star_lengths(config.instance).value
        return opt_star_cardinality(config.instance).value
    return None


def _run_chunk(config: ExperimentConfig, selector, trials, static_opt, keep_traces):
    out = []
    for trial in trials:
        arrivals = sample_arrivals(config.instance.n, config.arrivals,
                                   trial_rng(config.seed, trial, 0))
        if config.params.variant == "packing":
            trace = selector.run(arrivals, rng=trial_rng(config.seed, trial, 1))
        else:
            trace = selector.run(arrivals)
        if static_opt is None:
            opt = opt_offline_exact(config.instance, arrivals, method=config.oracle).value
        else:
            opt = static_opt
        viol = trace.violations(config.instance) if config.validate else None
        out.append((trial, trace.alg_value, opt, viol, trace if keep_traces else None))
    return out


def _chunks(trials, parts):
    bounds = np.linspace(0, trials, parts + 1).round().astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def run_trials(config: ExperimentConfig, threads=1, keep_traces=False) -> ExperimentResult:
    """Run every trial and aggregate. ``threads`` > 1 uses a process pool."""
    selector = _fit_selector(config)
    static_opt = _static_opt(config)
    threads = max(1, int(threads or 1))
    if threads == 1 or config.trials == 1:
        rows = _run_chunk(config, selector, range(config.trials), static_opt, keep_traces)
    else:
        parts = min(config.trials, 4 * threads)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_chunk, config, selector, chunk, static_opt, keep_traces)
                       for chunk in _chunks(config.trials, parts)]
            rows = [r for f in futures for r in f.result()]
    rows.sort(key=lambda r: r[0])
    agg = aggregate([r[1] for r in rows], [r[2] for r in rows])
    if config.validate:
        viols = [r[3] for r in rows]
        agg.violations = {
            "record_violations": int(sum(v["records"] for v in viols)),
            "value_mismatch_trials": int(sum(bool(v["value_mismatch"]) for v in viols)),
            "capacity_violation_trials": int(sum(v["capacity_excess"] > 0 for v in viols)),
        }
    info = variant_info(config, selector)
    bounds = bounds_for(config.params.variant, config.instance.gamma, info["B"], info["d"])
    traces = [r[4] for r in rows] if keep_traces else None
    return ExperimentResult(config, agg, info, bounds, traces)


def variant_info(config: ExperimentConfig, selector=None) -> dict:
    """B, d, epsilon and alpha as used by the algorithm."""
    variant = config.params.variant
    if variant == "packing":
        selector = selector or _fit_selector(config, quiet=True)
        return {"B": float(selector.capacity_ratio_), "d": int(selector.sparsity_),
                "epsilon": float(selector.epsilon_), "alpha": None}
    return {"B": float(config.instance.capacity), "d": 1, "epsilon": None,
            "alpha": float(config.params.alpha) if variant == "lengths" else None}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def trials_csv(result: ExperimentResult) -> str:
    """Per-trial table as CSV text (header = ``TRIAL_COLUMNS``)."""
    cfg, agg, info = result.config, result.aggregate, result.variant_info
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for t in range(agg.trials):
        w.writerow([t, _fmt(float(agg.alg_values[t])), _fmt(float(agg.opt_values[t])),
                    cfg.params.variant, _fmt(float(cfg.instance.gamma)), _fmt(info["B"]),
                    info["d"], _fmt(info["epsilon"]), _fmt(info["alpha"]), cfg.seed])
    return buf.getvalue()


def _json_float(x):
    return None if x is None or not math.isfinite(x) else float(x)


def summary_dict(result: ExperimentResult) -> dict:
    cfg, agg = result.config, result.aggregate
    primary = result.bound
    return {
        "ratio": _json_float(agg.ratio),
        "ci_low": _json_float(agg.ci_low),
        "ci_high": _json_float(agg.ci_high),
        "bound": _json_float(primary.value),
        "bound_flags": list(primary.flags),
        "bounds": {k: b.to_dict() for k, b in result.bounds.items()},
        "mean_alg": agg.mean_alg,
        "mean_opt": agg.mean_opt,
        "stderr_alg": agg.stderr_alg,
        "stderr_opt": agg.stderr_opt,
        "mean_of_ratios": _json_float(agg.mean_of_ratios),
        "trials": agg.trials,
        "seed": cfg.seed,
        "variant": cfg.params.variant,
        "oracle": cfg.oracle,
        "gamma": cfg.instance.gamma,
        "n": cfg.instance.n,
        "B": result.variant_info["B"],
        "d": result.variant_info["d"],
        "epsilon": result.variant_info["epsilon"],
        "alpha": result.variant_info["alpha"],
        "invariant_violations": dict(agg.violations),
    }


def default_threads():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1
