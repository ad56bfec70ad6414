"""Monte Carlo checks of the intermediate probabilistic claims behind the guarantees."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..arrivals import UNIFORM, sample_arrivals, trial_rng
from ..model import Instance
from ..online import (
    AlgorithmParams,
    EpsilonClampWarning,
    PackingScalingSelector,
    ScalingSelector,
)

BLOCK_COLUMNS = ("block", "t_start", "t_end", "tentative", "tentative_feasible", "ratio",
                 "bound", "excluded")
WALK_COLUMNS = ("trial", "max_window_difference", "boundary_deviation", "Q", "bound")
VIOLATION_COLUMNS = ("constraint", "capacity", "violation_rate", "stderr", "bound")


def _as_params(params, variant):
    params = params or AlgorithmParams(variant=variant)
    if params.variant != variant:
        raise ValueError(f"this diagnostic needs the {variant!r} variant, got {params.variant!r}")
    return params


def block_feasibility_diagnostic(instance: Instance, params=None, trials=100, N=None,
                                 seed=0, dist=UNIFORM):
    """Per sqrt(gamma)-block share of tentative selections that were also feasible.

    Returns a list of row dicts (``BLOCK_COLUMNS``), one per full block. Blocks that
    start before 2 sqrt(gamma/B) are marked excluded, since the bound does not apply
    there. ``N`` is the number of discrete rounds behind the bound (default 100 n).
    """
    _as_params(params, "cardinality")
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gamma = instance.gamma
    B = instance.integer_capacity()
    N = 100 * instance.n if N is None else N
    root = math.sqrt(gamma)
    nblocks = int(math.floor(1.0 / root + 1e-12))
    bound = 0.5 - root - 1.0 / (4.0 * root * N) if N > 0 else -math.inf

    selector = ScalingSelector().fit(instance)
    tent = np.zeros(nblocks, dtype=np.int64)
    good = np.zeros(nblocks, dtype=np.int64)
    for trial in range(trials):
        trace = selector.run(sample_arrivals(instance.n, dist, trial_rng(seed, trial, 0)))
        block = np.floor(trace.t / root).astype(np.int64)
        keep = trace.tentative & (block < nblocks)
        tent += np.bincount(block[keep], minlength=nblocks)[:nblocks]
        good += np.bincount(block[keep & trace.feasible], minlength=nblocks)[:nblocks]

    cutoff = 2.0 * math.sqrt(gamma / B)
    rows = []
    for i in range(nblocks):
        rows.append({
            "block": i,
            "t_start": i * root,
            "t_end": (i + 1) * root,
            "tentative": int(tent[i]),
            "tentative_feasible": int(good[i]),
            "ratio": good[i] / tent[i] if tent[i] else math.nan,
            "bound": bound,
            "excluded": bool(i * root < cutoff),
        })
    return rows


def coupled_walk_diagnostic(B, gamma, N, trials=1000, seed=0, max_cells=1 << 24):
    """Simulate i.i.d. Bernoulli(B/(gamma N)) indicators over two consecutive blocks of
    gamma N rounds and record, per trial,

        Q = max_l (sum of the current block up to l - same offset in the previous block)
            + |sum of the previous block - B|.

    Returns a dict with per-trial arrays and summary statistics, including the
    reference bounds 4 sqrt(B) and sqrt(B) + pi^2/6 sqrt(B) + 2 sqrt(4B/(3 pi)).
    """
    W_float = float(gamma) * float(N)
    W = int(round(W_float))
    if W < 1 or abs(W - W_float) > 1e-9 * max(1.0, W_float):
        raise ValueError(f"gamma * N must be a positive integer, got {W_float}")
    B = float(B)
    if B <= 0:
        raise ValueError("B must be positive")
    if B > W:
        raise ValueError(f"B = {B} exceeds gamma N = {W}; the Bernoulli parameter would be > 1")
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = B / W
    rng = np.random.default_rng(seed)
    walk_max = np.empty(trials)
    boundary = np.empty(trials)
    chunk = max(1, max_cells // (2 * W))
    for lo in range(0, trials, chunk):
        hi = min(trials, lo + chunk)
        c = (rng.random((hi - lo, 2 * W)) < p).astype(np.int32)
        prev, cur = c[:, :W], c[:, W:]
        walk = np.cumsum(cur - prev, axis=1)
        walk_max[lo:hi] = np.maximum(walk.max(axis=1), 0)
        boundary[lo:hi] = np.abs(prev.sum(axis=1) - B)
    q = walk_max + boundary
    rootB = math.sqrt(B)
    mean_q = math.fsum(q) / trials
    stderr = float(np.std(q, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return {
        "B": B,
        "gamma_N": W,
        "trials": trials,
        "mean_q": mean_q,
        "stderr_q": stderr,
        "mean_max_window_difference": math.fsum(walk_max) / trials,
        "mean_boundary_deviation": math.fsum(boundary) / trials,
        "bound": 4.0 * rootB,
        "fine_bound": rootB + math.pi ** 2 / 6 * rootB + 2 * math.sqrt(4 * B / (3 * math.pi)),
        "max_window_difference": walk_max,
        "boundary_deviation": boundary,
        "q": q,
    }


def packing_violation_diagnostic(instance: Instance, params=None, trials=20, seed=0,
                                 dist=UNIFORM):
    """Rate at which tentative consumption over the trailing window [t - gamma, t)
    exceeds b_i - 1, per constraint, against 1/(d B).

    The rate for constraint i is the fraction of arrivals at which the condition
    holds, averaged over trials; ``stderr`` is the across-trial standard error.
    Also reports the share of tentative selections that were committed.
    """
    params = _as_params(params, "packing")
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EpsilonClampWarning)
        sel = PackingScalingSelector(epsilon=params.epsilon).fit(instance)
    if sel.epsilon_ > 0.5:
        raise ValueError("epsilon must be at most 1/2")
    A, b = sel.matrix_, sel.b_
    m = b.size
    gamma = instance.gamma
    rates = np.zeros((trials, m))
    tentative_total = committed_total = 0
    for trial in range(trials):
        arrivals = sample_arrivals(instance.n, dist, trial_rng(seed, trial, 0))
        trace = sel.run(arrivals, rng=trial_rng(seed, trial, 1))
        t = trace.t
        use = A[:, trace.item_id] * trace.tentative
        prefix = np.concatenate([np.zeros((m, 1)), np.cumsum(use, axis=1)], axis=1)
        start = np.searchsorted(t, t - gamma, side="left")
        pos = np.arange(t.size)
        window = prefix[:, pos] - prefix[:, start]
        if t.size:
            rates[trial] = (window > (b - 1.0)[:, None] + 1e-9).mean(axis=1)
        tentative_total += int(trace.tentative.sum())
        committed_total += int(trace.selected.sum())
    per_row = rates.mean(axis=0)
    worst = int(np.argmax(per_row)) if m else 0
    stderr_rows = (rates.std(axis=0, ddof=1) / math.sqrt(trials)) if trials > 1 else np.zeros(m)
    bound = 1.0 / (sel.sparsity_ * sel.capacity_ratio_)
    return {
        "rates": per_row,
        "stderr": stderr_rows,
        "capacities": b,
        "max_rate": float(per_row[worst]) if m else 0.0,
        "max_rate_stderr": float(stderr_rows[worst]) if m else 0.0,
        "bound": bound,
        "epsilon": float(sel.epsilon_),
        "B": float(sel.capacity_ratio_),
        "d": int(sel.sparsity_),
        "trials": trials,
        "tentative": tentative_total,
        "committed": committed_total,
        "commit_ratio": committed_total / tentative_total if tentative_total else math.nan,
        "commit_bound": 1.0 - 1.0 / sel.capacity_ratio_,
    }
