"""Optimization kernels: dense packing-LP simplex, knapsack greedies and rounding."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector


class SolverError(RuntimeError):
    """The LP solver failed to reach an optimal basis."""


@dataclass(frozen=True, eq=False)
class PackingLP:
    """max v.x  s.t.  A x <= b,  0 <= x <= 1, with A, b, v non-negative."""

    v: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        v = as_float_vector("v", self.v)
        b = as_float_vector("b", self.b)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1 and b.size == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2 or A.shape != (b.size, v.size):
            raise ValueError(
                f"inconsistent dimensions: A {A.shape}, b ({b.size},), v ({v.size},)"
            )
        if not np.all(np.isfinite(A)):
            raise ValueError("A contains non-finite entries")
        if (A < 0).any() or (b < 0).any() or (v < 0).any():
            raise ValueError("packing LP requires non-negative A, b and v")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self):
        return self.A.shape


@dataclass(eq=False)
class FractionalSolution:
    x: np.ndarray
    value: float
    basis: tuple = ()
    prefix: tuple = ()
    iterations: int = 0
    info: dict = field(default_factory=dict)


# --- simplex -------------------------------------------------------------------

def solve_packing_lp(lp: PackingLP, tol=1e-9, max_iter=None) -> FractionalSolution:
    """Bounded-variable primal simplex from the all-slack basis.

    Pricing is Dantzig's largest reduced cost; after a degenerate step it switches
    to Bland's smallest-index rule until the objective moves again. Upper bounds
    x <= 1 are handled implicitly, so the basis is only m x m. Deterministic for a
    given input.
    """
    m, k = lp.shape
    v, A, b = lp.v, lp.A, lp.b
    if k == 0:
        return FractionalSolution(np.zeros(0), 0.0, iterations=0)
    if m == 0:
        x = np.ones(k)
        return FractionalSolution(x, math.fsum(v), iterations=0)

    ncol = k + m
    M = np.hstack([A, np.eye(m)])
    cost = np.concatenate([v, np.zeros(m)])
    upper = np.concatenate([np.ones(k), np.full(m, np.inf)])

    basis = np.arange(k, ncol)
    is_basic = np.zeros(ncol, dtype=bool)
    is_basic[basis] = True
    at_upper = np.zeros(ncol, dtype=bool)
    Binv = np.eye(m)
    xB = b.copy()

    dtol = tol * max(1.0, float(v.max(initial=0.0)))
    ptol = 1e-11
    if max_iter is None:
        max_iter = 50 * (ncol + m) + 1000
    bland = False
    iterations = 0
    since_refactor = 0

    while True:
        y = cost[basis] @ Binv
        d = cost - y @ M
        eligible = ~is_basic & ((~at_upper & (d > dtol)) | (at_upper & (d < -dtol)))
        cand = np.flatnonzero(eligible)
        if cand.size == 0:
            break
        if bland:
            cand = cand[:1]
        else:
            # largest |d| first, index breaks ties
            cand = cand[np.lexsort((cand, -np.abs(d[cand])))]

        # Reduced costs do not change across bound flips, so the leading run of
        # candidates whose full flip keeps every basic variable in bounds is exactly
        # the sequence of steps the pricing rule would take one at a time.
        signs = np.where(at_upper[cand], -1.0, 1.0)
        rates = -(Binv @ M[:, cand]) * signs
        rates[np.abs(rates) <= ptol] = 0.0
        path = np.cumsum(np.hstack([xB[:, None], rates]), axis=1)[:, 1:]
        ub = upper[basis][:, None]
        stays = np.all((path >= 0.0) & (path <= ub), axis=0)
        nflip = cand.size if stays.all() else int(np.argmin(stays))
        if nflip:
            flipped = cand[:nflip]
            at_upper[flipped] = ~at_upper[flipped]
            xB = path[:, nflip - 1].copy()
            iterations += nflip
            bland = False
        pivoted = False
        if nflip < cand.size:
            q = cand[nflip]
            iterations += 1
            rate = rates[:, nflip]
            sign = signs[nflip]
            theta, p, to_upper = _ratio_test(xB, rate, upper[basis], basis, bland, ptol)
            if np.isinf(theta):
                raise SolverError("unbounded direction in a packing LP")
            # basis change: q enters at row p
            entering_value = (upper[q] if at_upper[q] else 0.0) + sign * theta
            xB = xB + theta * rate
            leaving = basis[p]
            is_basic[leaving] = False
            at_upper[leaving] = to_upper
            col = Binv @ M[:, q]
            pivot = col[p]
            if abs(pivot) < ptol:
                raise SolverError("pivot element vanished")
            row = Binv[p] / pivot
            Binv = Binv - np.outer(col, row)
            Binv[p] = row
            basis[p] = q
            is_basic[q] = True
            at_upper[q] = False
            xB[p] = entering_value
            since_refactor += 1
            bland = theta <= tol
            pivoted = True
        if iterations > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} iterations")
        if pivoted and since_refactor >= 50:
            Binv = np.linalg.inv(M[:, basis])
            xB = Binv @ (b - M[:, at_upper].sum(axis=1))
            since_refactor = 0

    x_full = np.where(at_upper, upper, 0.0)
    x_full[basis] = xB
    x = np.clip(x_full[:k], 0.0, 1.0)
    x[np.abs(x) <= tol] = 0.0
    x[np.abs(x - 1.0) <= tol] = 1.0
    return FractionalSolution(
        x=x,
        value=float(v @ x),
        basis=tuple(int(j) for j in basis),
        iterations=iterations,
        info={"degenerate_fallback": bland},
    )


def _ratio_test(xB, rate, ub, basis, bland, ptol):
    """Largest step keeping basic variables within [0, ub]; returns (theta, row, hits_upper)."""
    theta = np.inf
    row = -1
    to_upper = False
    down = rate < -ptol
    up = (rate > ptol) & np.isfinite(ub)
    limits = np.full(rate.shape, np.inf)
    limits[down] = np.maximum(xB[down], 0.0) / -rate[down]
    limits[up] = np.maximum(ub[up] - xB[up], 0.0) / rate[up]
    if np.isfinite(limits).any():
        theta = float(limits.min())
        ties = np.flatnonzero(limits <= theta + 1e-12)
        if bland:
            row = int(ties[np.argmin(basis[ties])])
        else:
            # prefer the numerically largest pivot among tied rows
            row = int(ties[np.argmax(np.abs(rate[ties]))])
        to_upper = bool(up[row])
    return theta, row, to_upper


def enumerate_vertices(lp: PackingLP, tol=1e-9) -> FractionalSolution:
    """Brute-force optimum: try every choice of k tight constraints among the
    m + 2k inequalities and keep the best feasible point. Only for tiny k.
    """
    m, k = lp.shape
    if k == 0:
        return FractionalSolution(np.zeros(0), 0.0, info={"method": "vertex"})
    G = np.vstack([lp.A, np.eye(k), -np.eye(k)])
    h = np.concatenate([lp.b, np.ones(k), np.zeros(k)])
    combos = np.array(list(itertools.combinations(range(G.shape[0]), k)))
    systems = G[combos]
    rhs = h[combos]
    det = np.linalg.det(systems)
    ok = np.abs(det) > 1e-12
    pts = np.linalg.solve(systems[ok], rhs[ok][..., None])[..., 0]
    feasible = np.all(pts @ G.T <= h + tol, axis=1)
    pts = pts[feasible]
    values = pts @ lp.v
    best = int(np.argmax(values))
    return FractionalSolution(pts[best], float(values[best]), info={"method": "vertex"})


# --- knapsack greedies ------------------------------------------------------------

def density_order(values, weights):
    """Indices by non-increasing value/weight; ties go to the lower index."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    density = values / weights
    return np.lexsort((np.arange(values.size), -density))


def fractional_knapsack(values, weights, budget) -> FractionalSolution:
    """Greedy by density; the last item that does not fit is taken fractionally.

    ``prefix`` holds the fully included items (the integral part of the solution).
    """
    values = as_float_vector("values", values)
    weights = as_float_vector("weights", weights)
    if values.shape != weights.shape:
        raise ValueError("values and weights must have the same length")
    if (weights <= 0).any():
        raise ValueError("weights must be positive")
    budget = float(budget)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    order = density_order(values, weights)
    x = np.zeros(values.size)
    remaining = budget
    prefix = []
    for j in order:
        if weights[j] <= remaining:
            x[j] = 1.0
            remaining -= weights[j]
            prefix.append(int(j))
        else:
            x[j] = remaining / weights[j]
            break
    value = math.fsum(values * x)
    return FractionalSolution(x, value, prefix=tuple(prefix), info={"method": "knapsack"})


def greedy_round_up(values, durations, budget):
    """Minimal density-ordered prefix whose durations sum to at least ``budget``.

    Returns item indices in density order. A budget of 0 gives the empty set and a
    budget above the total duration gives every item.
    """
    values = as_float_vector("values", values)
    durations = as_float_vector("durations", durations)
    if values.shape != durations.shape:
        raise ValueError("values and durations must have the same length")
    if (durations <= 0).any():
        raise ValueError("durations must be positive")
    budget = float(budget)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    order = density_order(values, durations)
    before = np.cumsum(durations[order]) - durations[order]
    # position p belongs to the prefix iff the mass ahead of it is still short of the budget
    return order[before < budget]


def randomized_round(x, rng, tol=1e-9) -> int:
    """One Bernoulli(x) draw from ``rng``."""
    x = float(x)
    if x < -tol or x > 1 + tol:
        raise ValueError(f"probability {x} outside [0, 1]")
    return int(rng.random() < min(max(x, 0.0), 1.0))


def earlier_better_totals(priority, weights=None):
    """For each position i, total weight of positions i' < i with priority[i'] < priority[i].

    ``priority`` is a permutation-like integer rank (0 = best). With unit weights this
    is the number of better items that arrived earlier. Computed level by level over
    the bits of the rank: at bit b, an element with bit 1 outranks-loses to every
    element of its parent block with bit 0, and each smaller rank is counted at
    exactly the highest bit where it differs.
    """
    priority = np.asarray(priority, dtype=np.int64)
    n = priority.size
    w = np.ones(n, dtype=np.int64) if weights is None else np.asarray(weights, dtype=float)
    out = np.zeros(n, dtype=w.dtype)
    if n < 2:
        return out
    for b in range(int(priority.max()).bit_length()):
        parent = priority >> (b + 1)
        order = np.argsort(parent, kind="stable")
        g = parent[order]
        low = ((priority[order] >> b) & 1) == 0
        contrib = np.where(low, w[order], 0)
        excl = np.cumsum(contrib) - contrib
        new_group = np.empty(n, dtype=bool)
        new_group[0] = True
        np.not_equal(g[1:], g[:-1], out=new_group[1:])
        group_start = np.flatnonzero(new_group)
        gid = np.cumsum(new_group) - 1
        before = excl - excl[group_start][gid]
        high = ~low
        out[order[high]] += before[high]
    return out
