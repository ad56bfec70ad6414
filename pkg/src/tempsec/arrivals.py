"""Arrival-time sampling, per-trial random streams and quantile transforms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ArrivalRealization


@dataclass(frozen=True, eq=False)
class ArrivalDistribution:
    """Uniform arrivals on [0, 1], or a general F given by a piecewise-linear inverse CDF.

    ``inverse_cdf`` is a sequence of ``(u, x)`` breakpoints with ``x = F^-1(u)``,
    strictly increasing in both coordinates, starting at (0, 0) and ending at (1, 1).
    """

    kind: str = "uniform"
    inverse_cdf: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "uniform":
            if self.inverse_cdf is not None:
                raise ValueError("a uniform distribution takes no inverse_cdf table")
            return
        if self.kind != "general":
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.inverse_cdf is None:
            raise ValueError("a general distribution needs an inverse_cdf table")
        table = np.asarray(self.inverse_cdf, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
            raise ValueError("inverse_cdf must be a list of at least two [u, x] pairs")
        u, x = table[:, 0], table[:, 1]
        if not (u[0] == 0.0 and x[0] == 0.0 and u[-1] == 1.0 and x[-1] == 1.0):
            raise ValueError("inverse_cdf must start at (0, 0) and end at (1, 1)")
        if np.any(np.diff(u) <= 0) or np.any(np.diff(x) <= 0):
            raise ValueError("inverse_cdf must be strictly increasing in both coordinates")
        object.__setattr__(self, "inverse_cdf", tuple(map(tuple, table.tolist())))

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"kind", "inverse_cdf"}
        if unknown:
            raise ValueError(f"unknown distribution keys: {sorted(unknown)}")
        table = data.get("inverse_cdf")
        return cls(data.get("kind", "uniform"), None if table is None else tuple(map(tuple, table)))

    def to_dict(self):
        if self.kind == "uniform":
            return {"kind": "uniform"}
        return {"kind": "general", "inverse_cdf": [list(p) for p in self.inverse_cdf]}

    def _table(self):
        table = np.asarray(self.inverse_cdf, dtype=float)
        return table[:, 0], table[:, 1]

    def ppf(self, u):
        """F^-1 applied elementwise."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return u.copy()
        us, xs = self._table()
        return np.interp(u, us, xs)

    def cdf(self, x):
        """F applied elementwise; maps arrival times back to uniform quantiles."""
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.clip(x, 0.0, 1.0)
        us, xs = self._table()
        return np.interp(x, xs, us)


UNIFORM = ArrivalDistribution()


def trial_rng(master_seed, trial, stream=0):
    """Independent generator for (master seed, trial index, sub-stream).

    Streams are keyed, not sequential, so trial k draws the same numbers no matter
    how many trials run or in which worker.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial), int(stream)))
    return np.random.Generator(np.random.PCG64(seq))


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def sample_arrivals(n, dist: ArrivalDistribution = UNIFORM, seed=None) -> ArrivalRealization:
    """Draw n i.i.d. arrival times from ``dist`` (inverse-CDF transform for general F)."""
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = _as_rng(seed)
    u = rng.random(n)
    times = u if dist.kind == "uniform" else dist.ppf(u)
    return ArrivalRealization(times)


def to_quantiles(times, dist: ArrivalDistribution):
    """F(tau) for each arrival; uniform on [0, 1] when tau ~ F."""
    return dist.cdf(times)


def quantile_gamma_bound(dist: ArrivalDistribution, alpha) -> float:
    """sup over theta in [0, 1 - alpha] of F(theta + alpha) - F(theta).

    F is piecewise linear, so the difference is piecewise linear in theta with kinks
    where theta or theta + alpha meets a breakpoint; the supremum is attained at one
    of those candidates.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if dist.kind == "uniform":
        return alpha
    if alpha == 1.0:
        return 1.0
    _, xs = dist._table()
    cand = np.concatenate([xs, xs - alpha, [0.0, 1.0 - alpha]])
    cand = cand[(cand >= 0.0) & (cand <= 1.0 - alpha)]
    return float(np.max(dist.cdf(cand + alpha) - dist.cdf(cand)))
