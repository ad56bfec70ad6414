"""Seeded adversarial-instance generators.

Values (and durations, constraints) are drawn once from the generator seed and then
frozen; only arrival times vary between trials.
"""

import numpy as np

from ..model import Instance, PackingConstraints

GENERATORS = ("uniform-values", "geometric-values", "planted-heavy", "packing-random")

_DEFAULTS = {
    "seed": 0,
    "durations": "fixed",
    "rho": 0.999,
    "heavy_count": 5,
    "heavy_value": 1000.0,
    "rows": 1,
    "sparsity": 1,
    "coef_low": 0.5,
}


def make_instance(spec: dict) -> Instance:
    """Build an instance from a generator spec (see ``GENERATORS``).

    Required keys: generator, n, gamma, capacity. Optional: seed, durations
    ("fixed" = gamma, "uniform" = U(0, gamma]), rho, heavy_count, heavy_value,
    rows, sparsity, coef_low.
    """
    kind = spec["generator"]
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; expected one of {GENERATORS}")
    opts = {**_DEFAULTS, **spec}
    n = int(opts["n"])
    gamma = float(opts["gamma"])
    capacity = opts["capacity"]
    rng = np.random.default_rng(int(opts["seed"]))

    if kind == "geometric-values":
        values = float(opts["rho"]) ** np.arange(n, dtype=float)
    elif kind == "planted-heavy":
        values = rng.random(n)
        heavy = rng.choice(n, size=min(n, int(opts["heavy_count"])), replace=False)
        values[heavy] = float(opts["heavy_value"])
    else:
        values = rng.random(n)

    if opts["durations"] == "fixed":
        durations = np.full(n, gamma)
    elif opts["durations"] == "uniform":
        # 1 - U[0, 1) lies in (0, 1], so durations never hit zero
        durations = gamma * (1.0 - rng.random(n))
    else:
        raise ValueError(f"unknown durations mode {opts['durations']!r}")

    constraints = None
    if kind == "packing-random":
        constraints = _random_constraints(
            rng, n, int(opts["rows"]), int(opts["sparsity"]), float(opts["coef_low"]),
            float(capacity),
        )
    return Instance.from_arrays(values, durations, gamma=gamma, capacity=capacity,
                                constraints=constraints)


def _random_constraints(rng, n, rows, d, coef_low, capacity):
    """Each item uses ``d`` random rows with coefficients U[coef_low, 1]; each row is
    rescaled so its largest coefficient is exactly 1, making the capacity ratio equal
    to ``capacity``."""
    if not 1 <= d <= rows:
        raise ValueError("sparsity must lie in [1, rows]")
    if not 0.0 < coef_low <= 1.0:
        raise ValueError("coef_low must lie in (0, 1]")
    A = np.zeros((rows, n))
    for j in range(n):
        used = rng.choice(rows, size=d, replace=False)
        A[used, j] = rng.uniform(coef_low, 1.0, size=d)
    row_max = A.max(axis=1)
    empty = row_max == 0.0
    if empty.any():
        # every row needs at least one coefficient for the ratio to be defined
        A[np.flatnonzero(empty), 0] = 1.0
        row_max[empty] = 1.0
    A /= row_max[:, None]
    return PackingConstraints.from_dense(A, [capacity] * rows)
