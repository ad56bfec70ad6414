"""Closed-form competitive-ratio guarantees."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .._validation import check_gamma, check_positive

THEOREMS = ("theorem1", "theorem2", "theorem3", "theorem4")

# which guarantees apply to which algorithm variant, primary first
VARIANT_THEOREMS = {
    "cardinality": ("theorem1", "theorem2"),
    "packing": ("theorem3",),
    "lengths": ("theorem4",),
}


@dataclass(frozen=True)
class BoundResult:
    """``value`` is the bound itself; for theorem3 it is the leading term 1/(1+gamma)
    and ``error_term`` holds the epsilon-order correction with unknown constant."""

    theorem: str
    value: float
    flags: tuple = ()
    error_term: Optional[float] = None

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "value": self.value,
            "flags": list(self.flags),
            "error_term": self.error_term,
        }


def theoretical_bound(variant, gamma, B=1, d=1, N_hint=None) -> BoundResult:
    """Evaluate one guarantee. ``variant`` is a theorem name or an algorithm variant
    (mapped to its primary theorem). ``N_hint`` adds the finite-N term to theorem1."""
    if variant in VARIANT_THEOREMS:
        variant = VARIANT_THEOREMS[variant][0]
    if variant not in THEOREMS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {THEOREMS}")
    gamma = check_gamma(gamma)
    B = check_positive("B", B)
    flags = []
    error_term = None

    if variant == "theorem1":
        value = 0.5 * (1 - 3.5 * math.sqrt(gamma) - 18.5 * math.sqrt(gamma / B) - gamma)
        if N_hint is not None:
            N = check_positive("N_hint", N_hint)
            value -= 1.0 / (4.0 * math.sqrt(gamma) * N)
    elif variant == "theorem2":
        value = 1 - 4 / math.sqrt(B) - 20.5 * math.sqrt(gamma / B) - 3 * gamma
        flags.append("asymptotic")
    elif variant == "theorem3":
        if d < 1:
            raise ValueError(f"sparsity d must be >= 1, got {d}")
        value = 1.0 / (1.0 + gamma)
        radicand = 6.0 * (1.0 + math.log(d) + math.log(B)) / B
        error_term = math.sqrt(max(radicand, 0.0))
        flags.append("constant-free")
    else:
        root = math.sqrt(gamma)
        value = 0.25 - 5 * root - 1.5 * gamma * math.log(1 / root)

    if value < 0:
        flags.append("vacuous")
    return BoundResult(variant, float(value), tuple(flags), error_term)


def bounds_for(variant, gamma, B=1, d=1, N_hint=None):
    """Every guarantee that applies to an algorithm variant, as {theorem: BoundResult}."""
    if variant not in VARIANT_THEOREMS:
        raise ValueError(f"unknown algorithm variant {variant!r}")
    return {th: theoretical_bound(th, gamma, B, d, N_hint) for th in VARIANT_THEOREMS[variant]}
