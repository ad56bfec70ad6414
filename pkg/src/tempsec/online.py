"""Online scaling algorithms as fit/predict estimators.

``fit`` takes the adversarial instance (values, durations, constraints) and does all
realization-independent preparation; ``predict`` takes one set of arrival times and
returns the selected items. ``run`` returns the full per-arrival trace.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_integer_capacity, check_unit_interval
from .lp import PackingLP, density_order, earlier_better_totals, solve_packing_lp
from .model import (
    ArrivalRealization,
    Instance,
    ScheduleState,
    capacity_ratio,
    normalize_constraints,
    peak_excess,
    sparsity,
)

VARIANTS = ("cardinality", "packing", "lengths")


class EpsilonClampWarning(UserWarning):
    """The packing shrink factor exceeded 1/2 and was clamped; the guarantee is vacuous."""


def epsilon_formula(d, B):
    """sqrt(6 (1 + ln d + ln B) / B), unclamped (nan when the radicand is negative)."""
    if d < 1:
        raise ValueError(f"sparsity d must be >= 1, got {d}")
    if B <= 0:
        raise ValueError(f"capacity ratio must be positive, got {B}")
    radicand = 6.0 * (1.0 + math.log(d) + math.log(B)) / B
    return math.sqrt(radicand) if radicand >= 0 else math.nan


def epsilon_default(d, B):
    """Shrink factor for the packing algorithm, clamped to 1/2 with a warning."""
    eps = epsilon_formula(d, B)
    if not eps <= 0.5:
        warnings.warn(
            f"epsilon formula gives {eps:.4g} > 1/2 for d={d}, B={B}; clamped to 0.5",
            EpsilonClampWarning,
            stacklevel=2,
        )
        return 0.5
    return eps


@dataclass(frozen=True)
class AlgorithmParams:
    variant: str = "cardinality"
    alpha: float = 0.5
    epsilon: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        check_unit_interval("alpha", self.alpha, low_open=True)
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in [0, 1/2], got {self.epsilon}")


@dataclass(eq=False)
class AlgorithmTrace:
    """One record per arrival, in arrival order.

    ``aux`` is the tentative-set size (cardinality), the LP value (packing) or the
    GreedyRoundUp budget alpha*t*B (lengths).
    """

    variant: str
    item_id: np.ndarray
    t: np.ndarray
    tentative: np.ndarray
    feasible: np.ndarray
    selected: np.ndarray
    aux: np.ndarray
    value: np.ndarray
    probability: Optional[np.ndarray] = None

    def __len__(self):
        return self.item_id.size

    @property
    def alg_value(self):
        return math.fsum(self.value[self.selected])

    def selected_items(self):
        return self.item_id[self.selected]

    def selected_mask(self, n):
        mask = np.zeros(n, dtype=bool)
        mask[self.selected_items()] = True
        return mask

    def violations(self, instance: Instance) -> dict:
        """Invariant checks: selection implies tentative and feasible, value bookkeeping,
        and an exact replay of the selected schedule against capacity."""
        bad_records = int(np.count_nonzero(self.selected & ~(self.tentative & self.feasible)))
        expected = math.fsum(instance.values[self.selected_items()])
        mode = "packing" if self.variant == "packing" else "cardinality"
        excess = peak_excess(instance, self.item_id[self.selected], self.t[self.selected], mode)
        return {
            "records": bad_records,
            "value_mismatch": abs(expected - self.alg_value) > 1e-9 * max(1.0, expected),
            "capacity_excess": max(0.0, excess) if excess > 1e-9 else 0.0,
        }

    def to_csv(self, fh=None):
        """Write item_id,t,tentative,feasible,selected,aux_value; returns text if fh is None."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["item_id", "t", "tentative", "feasible", "selected", "aux_value"])
        for rec in zip(self.item_id, self.t, self.tentative, self.feasible, self.selected, self.aux):
            writer.writerow([int(rec[0]), repr(float(rec[1])), int(rec[2]), int(rec[3]),
                             int(rec[4]), repr(float(rec[5]))])
        return out.getvalue() if fh is None else None


def _as_realization(times, n):
    arrivals = times if isinstance(times, ArrivalRealization) else ArrivalRealization(times)
    if arrivals.n != n:
        raise ValueError(f"expected {n} arrival times, got {arrivals.n}")
    return arrivals


class _OnlineSelector(BaseEstimator):
    _variant = None

    def _fit_instance(self, X, durations=None):
        if isinstance(X, Instance):
            instance = X
            for name in ("gamma", "capacity"):
                mine = getattr(self, name, None)
                if mine is not None and float(mine) != float(getattr(instance, name)):
                    raise ValueError(
                        f"{name}={mine} conflicts with the instance's {getattr(instance, name)}"
                    )
        else:
            if self.gamma is None or getattr(self, "capacity", None) is None:
                raise ValueError("gamma and capacity are required when fitting raw arrays")
            arr = np.asarray(X, dtype=float)
            if arr.ndim == 2 and arr.shape[1] == 2 and durations is None:
                arr, durations = arr[:, 0], arr[:, 1]
            instance = Instance.from_arrays(arr, durations, gamma=self.gamma, capacity=self.capacity)
        self.instance_ = instance
        self.n_items_ = instance.n
        return instance

    def predict(self, times):
        """Boolean mask over items: True where the item was hired."""
        return self.run(times).selected_mask(self.n_items_)

    def score(self, times, opt_value):
        """Value collected on one realization divided by a benchmark value."""
        return self.run(times).alg_value / opt_value

    def _sweep(self, arrivals, tentative, aux, mode, probability=None):
        instance = self.instance_
        order = arrivals.order
        times = arrivals.times[order]
        n = order.size
        feasible = np.zeros(n, dtype=bool)
        selected = np.zeros(n, dtype=bool)
        state = ScheduleState(instance, mode)
        for p in range(n):
            t = float(times[p])
            j = int(order[p])
            state.advance(t)
            if state.fits(j):
                feasible[p] = True
                if tentative[p]:
                    selected[p] = True
                    state.commit(j, t)
        return AlgorithmTrace(
            variant=self._variant,
            item_id=order.copy(),
            t=times,
            tentative=np.asarray(tentative, dtype=bool),
            feasible=feasible,
            selected=selected,
            aux=np.asarray(aux, dtype=float),
            value=instance.values[order],
            probability=probability,
        )


class ScalingSelector(_OnlineSelector):
    """Hire an arriving item if it ranks among the floor(t B / gamma) best seen so far
    and fewer than B hires are active. Decisions depend on values only through their
    order.
    """

    _variant = "cardinality"

    def __init__(self, gamma=None, capacity=None):
        self.gamma = gamma
        self.capacity = capacity

    def fit(self, X, y=None):
        instance = self._fit_instance(X)
        if not instance.uniform_durations:
            raise ValueError("all durations must equal gamma; use LengthsScalingSelector")
        self.capacity_ = check_integer_capacity(instance.capacity)
        # rank 0 = highest value, equal values ordered by id
        order = np.lexsort((np.arange(instance.n), -instance.values))
        self.rank_ = np.empty(instance.n, dtype=np.int64)
        self.rank_[order] = np.arange(instance.n)
        return self

    def run(self, times) -> AlgorithmTrace:
        check_is_fitted(self, "rank_")
        arrivals = _as_realization(times, self.n_items_)
        order = arrivals.order
        t = arrivals.times[order]
        gamma = self.instance_.gamma
        k = np.floor(t * self.capacity_ / gamma)
        better_seen = earlier_better_totals(self.rank_[order])
        tentative = better_seen < k
        set_size = np.minimum(np.arange(1, order.size + 1), k)
        return self._sweep(arrivals, tentative, set_size, "cardinality")


class LengthsScalingSelector(_OnlineSelector):
    """Hire an arriving item if it is in GreedyRoundUp(arrived items, alpha t B) and
    fewer than B hires are active."""

    _variant = "lengths"

    def __init__(self, gamma=None, capacity=None, alpha=0.5):
        self.gamma = gamma
        self.capacity = capacity
        self.alpha = alpha

    def fit(self, X, y=None, durations=None):
        instance = self._fit_instance(X, durations)
        check_unit_interval("alpha", self.alpha, low_open=True)
        self.capacity_ = check_integer_capacity(instance.capacity)
        order = density_order(instance.values, instance.durations)
        self.rank_ = np.empty(instance.n, dtype=np.int64)
        self.rank_[order] = np.arange(instance.n)
        return self

    def run(self, times) -> AlgorithmTrace:
        check_is_fitted(self, "rank_")
        arrivals = _as_realization(times, self.n_items_)
        order = arrivals.order
        t = arrivals.times[order]
        budget = self.alpha * t * self.capacity_
        # mass of arrived items strictly ahead in density order; the item is in the
        # minimal covering prefix iff that mass is still below the budget
        ahead = earlier_better_totals(self.rank_[order], self.instance_.durations[order])
        tentative = ahead < budget
        return self._sweep(arrivals, tentative, budget, "cardinality")


class PackingScalingSelector(_OnlineSelector):
    """Solve the packing LP over arrived items with capacities t (1 - eps) b / gamma,
    round the arriving item's coordinate, and hire if the temporal constraints allow.

    Constraints are normalized (row maxima 1) at fit time; the algorithm is invariant
    to this scaling. ``epsilon=None`` uses the default formula in sparsity and
    capacity ratio.
    """

    _variant = "packing"

    def __init__(self, gamma=None, epsilon=None, random_state=None, tol=1e-9, warm_start=False):
        self.gamma = gamma
        self.epsilon = epsilon
        self.random_state = random_state
        self.tol = tol
        self.warm_start = warm_start

    def fit(self, X, y=None):
        if not isinstance(X, Instance) or X.constraints is None:
            raise ValueError("PackingScalingSelector needs an Instance with constraints")
        if self.gamma is not None and float(self.gamma) != X.gamma:
            raise ValueError(f"gamma={self.gamma} conflicts with the instance's {X.gamma}")
        if self.warm_start:
            raise NotImplementedError("warm-started LP re-solves are not available")
        if not X.uniform_durations:
            raise ValueError("the packing algorithm requires all durations equal to gamma")
        constraints = normalize_constraints(X.constraints)
        instance = Instance(X.items, X.gamma, X.capacity, constraints)
        self.instance_ = instance
        self.n_items_ = instance.n
        self.capacity_ratio_ = capacity_ratio(constraints)
        self.sparsity_ = max(1, sparsity(constraints))
        if self.epsilon is None:
            self.epsilon_ = epsilon_default(self.sparsity_, self.capacity_ratio_)
        else:
            if not 0.0 <= self.epsilon <= 0.5:
                raise ValueError(f"epsilon must lie in [0, 1/2], got {self.epsilon}")
            self.epsilon_ = float(self.epsilon)
        self.matrix_ = constraints.dense()
        self.b_ = np.asarray(constraints.capacities)
        return self

    def run(self, times, rng=None) -> AlgorithmTrace:
        check_is_fitted(self, "matrix_")
        arrivals = _as_realization(times, self.n_items_)
        if rng is None:
            rng = np.random.default_rng(self.random_state)
        order = arrivals.order
        t_sorted = arrivals.times[order]
        n = order.size
        values = self.instance_.values
        shrink = (1.0 - self.epsilon_) / self.instance_.gamma
        tentative = np.zeros(n, dtype=bool)
        prob = np.zeros(n)
        lp_value = np.zeros(n)
        for p in range(n):
            arrived = order[: p + 1]
            lp = PackingLP(values[arrived], self.matrix_[:, arrived], t_sorted[p] * shrink * self.b_)
            sol = solve_packing_lp(lp, tol=self.tol)
            lp_value[p] = sol.value
            prob[p] = sol.x[-1]
            # one draw per arrival keeps streams aligned across runs
            tentative[p] = rng.random() < prob[p]
        return self._sweep(arrivals, tentative, lp_value, "packing", probability=prob)


def make_selector(params: AlgorithmParams):
    """Unfitted estimator for a parameter set."""
    if params.variant == "cardinality":
        return ScalingSelector()
    if params.variant == "lengths":
        return LengthsScalingSelector(alpha=params.alpha)
    return PackingScalingSelector(epsilon=params.epsilon, random_state=params.seed)


def run_scaling_cardinality(instance, arrivals, params=None) -> AlgorithmTrace:
    return ScalingSelector().fit(instance).run(arrivals)


def run_scaling_lengths(instance, arrivals, params=None) -> AlgorithmTrace:
    alpha = 0.5 if params is None else params.alpha
    return LengthsScalingSelector(alpha=alpha).fit(instance).run(arrivals)


def run_scaling_packing(instance, arrivals, params=None, rng=None) -> AlgorithmTrace:
    params = params or AlgorithmParams(variant="packing")
    sel = PackingScalingSelector(epsilon=params.epsilon, random_state=params.seed)
    return sel.fit(instance).run(arrivals, rng=rng)


def run_algorithm(instance, arrivals, params: AlgorithmParams, rng=None) -> AlgorithmTrace:
    if params.variant == "cardinality":
        return run_scaling_cardinality(instance, arrivals, params)
    if params.variant == "lengths":
        return run_scaling_lengths(instance, arrivals, params)
    return run_scaling_packing(instance, arrivals, params, rng=rng)
