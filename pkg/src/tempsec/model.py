"""Instances, packing constraints, arrival realizations and the temporal schedule state.

Time is continuous. An item selected at time ``s`` with duration ``d`` is active on
the half-open interval ``[s, s + d)``; an interval that ends exactly when another
starts does not overlap it. Items may stay active past time 1.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._validation import (
    TOL,
    as_float_vector,
    check_gamma,
    check_integer_capacity,
    check_positive,
)


@dataclass(frozen=True)
class Item:
    id: int
    value: float
    duration: float

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"item id must be non-negative, got {self.id}")
        if not self.value >= 0 or math.isinf(self.value):
            raise ValueError(f"item {self.id}: value must be finite and >= 0")
        if not self.duration > 0:
            raise ValueError(f"item {self.id}: duration must be > 0")


@dataclass(frozen=True)
class PackingConstraints:
    """Sparse column-wise packing matrix ``A`` with capacity vector ``b``.

    ``columns[j]`` lists the ``(row, coefficient)`` pairs of item ``j``.
    """

    capacities: tuple
    columns: tuple

    def __post_init__(self):
        caps = tuple(float(b) for b in self.capacities)
        m = len(caps)
        cols = []
        for j, col in enumerate(self.columns):
            entries = []
            for row, coef in col:
                row = int(row)
                coef = float(coef)
                if not 0 <= row < m:
                    raise ValueError(f"item {j}: row index {row} outside [0, {m})")
                if coef < 0 or not math.isfinite(coef):
                    raise ValueError(
                        f"item {j}: coefficient {coef!r} in row {row} is not a "
                        "non-negative finite number (not a packing LP)"
                    )
                entries.append((row, coef))
            cols.append(tuple(sorted(entries)))
        if any(b < 0 or not math.isfinite(b) for b in caps):
            raise ValueError("capacities must be finite and non-negative")
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "columns", tuple(cols))

    @property
    def m(self):
        return len(self.capacities)

    @property
    def n(self):
        return len(self.columns)

    @classmethod
    def from_dense(cls, matrix, capacities):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        if len(capacities) != A.shape[0]:
            raise ValueError("capacities length must equal the number of rows")
        columns = [
            [(i, A[i, j]) for i in range(A.shape[0]) if A[i, j] != 0.0]
            for j in range(A.shape[1])
        ]
        return cls(tuple(capacities), tuple(columns))

    def dense(self):
        A = np.zeros((self.m, self.n))
        for j, col in enumerate(self.columns):
            for i, coef in col:
                A[i, j] = coef
        return A

    def row_max(self):
        out = np.zeros(self.m)
        for col in self.columns:
            for i, coef in col:
                if coef > out[i]:
                    out[i] = coef
        return out


def normalize_constraints(constraints: PackingConstraints) -> PackingConstraints:
    """Divide every row (coefficients and capacity) by its largest coefficient."""
    if constraints.m == 0:
        raise ValueError("constraint set is empty")
    if any(b <= 0 for b in constraints.capacities):
        raise ValueError("all capacities must be positive to normalize")
    scale = constraints.row_max()
    zero_rows = np.flatnonzero(scale == 0.0)
    if zero_rows.size:
        raise ValueError(
            f"row(s) {zero_rows.tolist()} have only zero coefficients; scaling is undefined"
        )
    columns = tuple(
        tuple((i, 1.0 if coef == scale[i] else coef / scale[i]) for i, coef in col)
        for col in constraints.columns
    )
    capacities = tuple(b / s for b, s in zip(constraints.capacities, scale))
    return PackingConstraints(capacities, columns)


def capacity_ratio(constraints: PackingConstraints) -> float:
    """min over rows of b_i / max_j a_ij (equals min b_i once normalized)."""
    if constraints.m == 0:
        raise ValueError("constraint set is empty")
    scale = constraints.row_max()
    if np.any(scale == 0.0):
        raise ValueError("capacity ratio undefined for a row without coefficients")
    return float(np.min(np.asarray(constraints.capacities) / scale))


def sparsity(constraints: PackingConstraints) -> int:
    """Largest number of rows any single item appears in with a positive coefficient."""
    return max((sum(1 for _, c in col if c > 0) for col in constraints.columns), default=0)


@dataclass(frozen=True)
class Instance:
    items: tuple
    gamma: float
    capacity: float
    constraints: Optional[PackingConstraints] = None

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "gamma", check_gamma(self.gamma))
        object.__setattr__(self, "capacity", check_positive("capacity", self.capacity))
        for k, item in enumerate(self.items):
            if item.id != k:
                raise ValueError(f"item at position {k} has id {item.id}; ids must be 0..n-1")
            if item.duration > self.gamma * (1 + TOL):
                raise ValueError(
                    f"item {k}: duration {item.duration} exceeds gamma {self.gamma}"
                )
        if self.constraints is not None and self.constraints.n != len(self.items):
            raise ValueError(
                f"constraints describe {self.constraints.n} columns but the instance "
                f"has {len(self.items)} items"
            )

    @classmethod
    def from_arrays(cls, values, durations=None, *, gamma, capacity, constraints=None):
        gamma = check_gamma(gamma)
        values = as_float_vector("values", values)
        if durations is None:
            durations = np.full(values.shape, gamma)
        durations = as_float_vector("durations", durations)
        if durations.shape != values.shape:
            raise ValueError("values and durations must have the same length")
        items = tuple(Item(k, float(v), float(d)) for k, (v, d) in enumerate(zip(values, durations)))
        return cls(items, gamma, capacity, constraints)

    @property
    def n(self):
        return len(self.items)

    @cached_property
    def values(self):
        arr = np.array([it.value for it in self.items], dtype=float)
        arr.flags.writeable = False
        return arr

    @cached_property
    def durations(self):
        arr = np.array([it.duration for it in self.items], dtype=float)
        arr.flags.writeable = False
        return arr

    @property
    def uniform_durations(self):
        return bool(np.all(np.abs(self.durations - self.gamma) <= TOL * self.gamma))

    def integer_capacity(self):
        return check_integer_capacity(self.capacity)

    def with_values(self, values):
        return Instance.from_arrays(
            values, self.durations, gamma=self.gamma, capacity=self.capacity,
            constraints=self.constraints,
        )


@dataclass(frozen=True, eq=False)
class ArrivalRealization:
    times: np.ndarray
    order: np.ndarray = field(default=None)

    def __post_init__(self):
        times = as_float_vector("times", self.times)
        if times.size and (times.min() < 0.0 or times.max() > 1.0):
            raise ValueError("arrival times must lie in [0, 1]")
        times = times.copy()
        times.flags.writeable = False
        # ties broken by item id: lexsort uses the last key as primary
        order = np.lexsort((np.arange(times.size), times)).astype(np.int64)
        if self.order is not None and not np.array_equal(np.asarray(self.order), order):
            raise ValueError("order is not the (time, id) sort of times")
        order.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "order", order)

    @property
    def n(self):
        return self.times.size

    def sorted_times(self):
        return self.times[self.order]


class ScheduleState:
    """Active selections of one online run; single writer, times must not decrease.

    Between two arrivals no item starts, so the active load can only fall. An item
    that fits at its arrival instant therefore fits for its whole interval, which is
    why feasibility is only ever checked at the arrival time.
    """

    def __init__(self, instance: Instance, mode: str = "cardinality"):
        if mode not in ("cardinality", "packing"):
            raise ValueError(f"unknown schedule mode {mode!r}")
        if mode == "packing" and instance.constraints is None:
            raise ValueError("packing schedule requires an instance with constraints")
        self.instance = instance
        self.mode = mode
        self.selections = []
        self.clock = 0.0
        self._ends = []
        if mode == "packing":
            self._caps = np.asarray(instance.constraints.capacities, dtype=float)
            self.load = np.zeros(instance.constraints.m)
        else:
            self._caps = None
            self.load = None

    @property
    def active_count(self):
        return len(self._ends)

    def advance(self, t):
        if t < self.clock:
            raise ValueError(f"time moved backwards: {t} < {self.clock}")
        self.clock = t
        ends = self._ends
        columns = self.instance.constraints.columns if self.mode == "packing" else None
        while ends and ends[0][0] <= t:
            _, item_id = heapq.heappop(ends)
            if columns is not None:
                for i, coef in columns[item_id]:
                    self.load[i] -= coef
        return self

    def active_at(self, t):
        """Selections with start <= t < start + duration."""
        durations = self.instance.durations
        return [(j, s) for j, s in self.selections if s <= t < s + durations[j]]

    def fits(self, item_id):
        """Whether item_id can start at the current clock."""
        if self.mode == "cardinality":
            return len(self._ends) < self.instance.capacity
        for i, coef in self.instance.constraints.columns[item_id]:
            if self.load[i] + coef > self._caps[i] + TOL:
                return False
        return True

    def commit(self, item_id, t):
        self.advance(t)
        self.selections.append((int(item_id), float(t)))
        heapq.heappush(self._ends, (t + float(self.instance.durations[item_id]), int(item_id)))
        if self.mode == "packing":
            for i, coef in self.instance.constraints.columns[item_id]:
                self.load[i] += coef


def is_feasible_now(state: ScheduleState, t, item: Item, instance: Instance,
                    arrivals: Optional[ArrivalRealization] = None) -> bool:
    """Can ``item`` be added at time ``t`` without exceeding capacity?

    Cardinality: fewer than B selections active at t. Packing: every row the item
    touches keeps its active consumption within b_i.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"query time {t} outside [0, 1]")
    if state.instance is not instance:
        raise ValueError("state belongs to a different instance")
    if arrivals is not None and arrivals.times[item.id] > t:
        raise ValueError(f"item {item.id} has not arrived by time {t}")
    state.advance(t)
    return state.fits(item.id)


def peak_excess(instance: Instance, item_ids: Sequence[int], starts: Sequence[float],
                mode: str = "cardinality") -> float:
    """Largest amount by which the active load of a schedule exceeds capacity.

    Exact event sweep; a value <= 0 means the schedule is feasible everywhere.
    """
    item_ids = np.asarray(item_ids, dtype=np.int64)
    starts = np.asarray(starts, dtype=float)
    if item_ids.size == 0:
        return -math.inf
    ends = starts + instance.durations[item_ids]
    if mode == "cardinality":
        return _sweep_peak(starts, ends, np.ones(item_ids.size)) - instance.capacity
    caps = instance.constraints.capacities
    columns = instance.constraints.columns
    per_row = {}
    for k, j in enumerate(item_ids):
        for i, coef in columns[j]:
            per_row.setdefault(i, []).append((k, coef))
    worst = -math.inf
    for i, entries in per_row.items():
        idx = np.array([k for k, _ in entries])
        w = np.array([c for _, c in entries])
        worst = max(worst, _sweep_peak(starts[idx], ends[idx], w) - caps[i])
    return worst


def _sweep_peak(starts, ends, weights):
    times = np.concatenate([ends, starts])
    deltas = np.concatenate([-weights, weights])
    # at equal times ends (kind 0) are processed before starts (kind 1): half-open intervals
    kinds = np.concatenate([np.zeros(ends.size), np.ones(starts.size)])
    order = np.lexsort((kinds, times))
    running = np.cumsum(deltas[order])
    return float(running.max())


# --- JSON instance files -------------------------------------------------------

def instance_from_dict(data: dict) -> Instance:
    allowed = {"gamma", "capacity", "items", "constraints"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown instance keys: {sorted(unknown)}")
    gamma = check_gamma(data["gamma"])
    items = []
    for k, raw in enumerate(data["items"]):
        extra = set(raw) - {"value", "duration"}
        if extra:
            raise ValueError(f"item {k}: unknown keys {sorted(extra)}")
        items.append(Item(k, float(raw["value"]), float(raw.get("duration", gamma))))
    constraints = None
    raw_c = data.get("constraints")
    if raw_c is not None:
        extra = set(raw_c) - {"capacities", "columns"}
        if extra:
            raise ValueError(f"constraints: unknown keys {sorted(extra)}")
        constraints = PackingConstraints(
            tuple(raw_c["capacities"]),
            tuple(tuple((int(r), float(c)) for r, c in col) for col in raw_c["columns"]),
        )
    return Instance(tuple(items), gamma, float(data["capacity"]), constraints)


def instance_to_dict(instance: Instance) -> dict:
    out = {
        "gamma": instance.gamma,
        "capacity": instance.capacity,
        "items": [{"value": it.value, "duration": it.duration} for it in instance.items],
        "constraints": None,
    }
    if instance.constraints is not None:
        out["constraints"] = {
            "capacities": list(instance.constraints.capacities),
            "columns": [[[i, c] for i, c in col] for col in instance.constraints.columns],
        }
    return out


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(instance: Instance, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(instance_to_dict(instance), indent=1))
    return path
