"""Offline benchmarks: exact OPT for a realization and the non-temporal relaxations."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import ceil_inverse
from .lp import PackingLP, fractional_knapsack, solve_packing_lp
from .model import ArrivalRealization, Instance


@dataclass(frozen=True, eq=False)
class OfflineResult:
    value: float
    method: str
    selected: Optional[tuple] = None
    x: Optional[np.ndarray] = None


def opt_star_cardinality(instance: Instance) -> OfflineResult:
    """Sum of the B * ceil(1/gamma) largest values (ties by lower id)."""
    cap = instance.integer_capacity()
    k = min(instance.n, cap * ceil_inverse(instance.gamma))
    order = np.lexsort((np.arange(instance.n), -instance.values))
    top = tuple(sorted(int(j) for j in order[:k]))
    return OfflineResult(math.fsum(instance.values[list(top)]), "topk", selected=top)


def opt_star_lengths(instance: Instance) -> OfflineResult:
    """Fractional knapsack with weights = durations and budget B(1 + gamma).

    Upper-bounds the integral knapsack, so ratios against it are conservative.
    """
    budget = instance.capacity * (1.0 + instance.gamma)
    if instance.n == 0:
        return OfflineResult(0.0, "knapsack", selected=(), x=np.zeros(0))
    sol = fractional_knapsack(instance.values, instance.durations, budget)
    return OfflineResult(sol.value, "knapsack", selected=tuple(sorted(sol.prefix)), x=sol.x)


def lp_relaxation_opt(instance: Instance, tol=1e-9) -> OfflineResult:
    """max v.x  s.t.  A x <= ceil(1/gamma) b,  0 <= x <= 1."""
    if instance.constraints is None:
        raise ValueError("the LP relaxation needs packing constraints")
    c = instance.constraints
    lp = PackingLP(instance.values, c.dense(), ceil_inverse(instance.gamma) * np.asarray(c.capacities))
    sol = solve_packing_lp(lp, tol=tol)
    return OfflineResult(sol.value, "lp", x=sol.x)


def _intervals(instance: Instance, arrivals: ArrivalRealization):
    if arrivals.n != instance.n:
        raise ValueError(
            f"realization has {arrivals.n} arrival times for {instance.n} items"
        )
    starts = np.asarray(arrivals.times, dtype=float)
    return starts, starts + instance.durations


def opt_offline_exact(instance: Instance, arrivals: ArrivalRealization,
                      method: str = "flow") -> OfflineResult:
    """Maximum-value item set with at most B items active at any time.

    ``flow``: min-cost flow on the event line. ``brute``: exhaustive search over
    feasible subsets, intended for n <= 20.
    """
    cap = instance.integer_capacity()
    starts, ends = _intervals(instance, arrivals)
    if method == "flow":
        chosen = _interval_flow(starts, ends, instance.values, cap)
    elif method == "brute":
        if instance.n > 20:
            raise ValueError("brute-force search is limited to n <= 20")
        chosen = _interval_brute(starts, ends, instance.values, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    chosen = tuple(sorted(chosen))
    return OfflineResult(math.fsum(instance.values[list(chosen)]), method, selected=chosen)


def _interval_flow(starts, ends, values, cap):
    """B units of flow along the time line; an item arc skips its interval at cost -v."""
    n = starts.size
    if n == 0:
        return []
    times = np.unique(np.concatenate([starts, ends]))
    s_node = np.searchsorted(times, starts)
    e_node = np.searchsorted(times, ends)
    V = times.size

    to, cap_, cost, head = [], [], [], [[] for _ in range(V)]

    def add(u, w, c, k):
        head[u].append(len(to))
        to.append(w); cap_.append(c); cost.append(k)
        head[w].append(len(to))
        to.append(u); cap_.append(0); cost.append(-k)

    for u in range(V - 1):
        add(u, u + 1, cap, 0.0)
    item_edge = np.empty(n, dtype=np.int64)
    for j in range(n):
        item_edge[j] = len(to)
        add(int(s_node[j]), int(e_node[j]), 1, -float(values[j]))

    # initial potentials: shortest paths in the DAG (all arcs point forward in time)
    pot = _dag_potentials(V, head, to, cap_, cost)

    source, sink = 0, V - 1
    remaining = cap
    while remaining > 0:
        dist, prev = _dijkstra(V, head, to, cap_, cost, pot, source)
        if math.isinf(dist[sink]):
            break
        for u in range(V):
            if not math.isinf(dist[u]):
                pot[u] += dist[u]
        push = remaining
        w = sink
        while w != source:
            e = prev[w]
            push = min(push, cap_[e])
            w = to[e ^ 1]
        w = sink
        while w != source:
            e = prev[w]
            cap_[e] -= push
            cap_[e ^ 1] += push
            w = to[e ^ 1]
        remaining -= push
    return [j for j in range(n) if cap_[item_edge[j]] == 0]


def _dag_potentials(V, head, to, cap_, cost):
    dist = [math.inf] * V
    dist[0] = 0.0
    for u in range(V):
        if math.isinf(dist[u]):
            continue
        for e in head[u]:
            w = to[e]
            if cap_[e] > 0 and w > u and dist[u] + cost[e] < dist[w]:
                dist[w] = dist[u] + cost[e]
    return dist


def _dijkstra(V, head, to, cap_, cost, pot, source):
    dist = [math.inf] * V
    prev = [-1] * V
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        pu = pot[u]
        for e in head[u]:
            if cap_[e] <= 0:
                continue
            w = to[e]
            # reduced costs are non-negative up to rounding
            nd = d + max(0.0, cost[e] + pu - pot[w])
            if nd < dist[w]:
                dist[w] = nd
                prev[w] = e
                heapq.heappush(heap, (nd, w))
    return dist, prev


def _interval_brute(starts, ends, values, cap):
    """Depth-first search over items in start order, pruning once capacity is exceeded.

    Feasibility is monotone under removal, so skipping infeasible branches still
    visits every feasible subset.
    """
    order = sorted(range(starts.size), key=lambda j: (starts[j], j))
    best_value = -1.0
    best = []
    chosen = []

    def active_at(t):
        return sum(1 for i in chosen if starts[i] <= t < ends[i])

    def rec(pos, acc):
        nonlocal best_value, best
        if pos == len(order):
            if acc > best_value:
                best_value, best = acc, list(chosen)
            return
        j = order[pos]
        if active_at(starts[j]) < cap:
            chosen.append(j)
            rec(pos + 1, acc + values[j])
            chosen.pop()
        rec(pos + 1, acc)

    rec(0, 0.0)
    return best


def brute_force_schedule_value(instance: Instance, arrivals: ArrivalRealization) -> float:
    """Best value over all temporally feasible subsets (any durations), by enumeration."""
    return opt_offline_exact(instance, arrivals, method="brute").value
