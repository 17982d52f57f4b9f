"""Weighted-to-unweighted reduction, weight adjustment baselines and error terms."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .chain import build_chain, guarded_cnf
from .formula import Clause, WeightedFormula
from .rational import bits_required, nearest_mbit_fraction


class NotNormalizedError(ValueError):
    pass


class _Unbounded:
    """Marker for an error bound that is infinite (a weight was rounded to 0 or 1)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "unbounded"


UNBOUNDED = _Unbounded()
Gamma = Union[Fraction, _Unbounded]


@dataclass(frozen=True)
class VarEncoding:
    p: int
    q: int
    m: int
    fresh: range

    @property
    def fresh_first(self) -> int | None:
        return self.fresh.start if self.m else None

    @property
    def fresh_last(self) -> int | None:
        return self.fresh.stop - 1 if self.m else None


@dataclass(frozen=True)
class Reduction:
    reduced_formula: WeightedFormula
    c_w: int
    per_var: dict[int, VarEncoding]
    mode: str = "exact"
    gamma: Gamma | None = None

    @property
    def projection_set(self) -> tuple[int, ...]:
        return self.reduced_formula.sampling_set

    @property
    def total_fresh(self) -> int:
        return sum(e.m for e in self.per_var.values())

    def metadata(self) -> dict:
        return {
            "c_w": str(self.c_w),
            "total_fresh": self.total_fresh,
            "projection_set": list(self.projection_set),
            "per_var": [
                {
                    "var": v,
                    "p": e.p,
                    "q": e.q,
                    "m": e.m,
                    "fresh_first": e.fresh_first,
                    "fresh_last": e.fresh_last,
                }
                for v, e in self.per_var.items()
            ],
            "mode": self.mode,
            "gamma": format_gamma(self.gamma),
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2) + "\n"


@dataclass(frozen=True)
class WeightAdjustment:
    adjusted: WeightedFormula
    gamma: Gamma
    bits: int


DyadicAdjustment = WeightAdjustment


def format_gamma(gamma: Gamma | None) -> str | None:
    if gamma is None:
        return None
    if gamma is UNBOUNDED:
        return "unbounded"
    return f"{gamma.numerator}/{gamma.denominator}"


def deweight_reduce(f: WeightedFormula) -> Reduction:
    """Replace every weighted variable by a pair of guarded chain formulas.

    For ``W(x) = p/q`` in lowest terms, ``m`` fresh variables are allocated
    and ``(x -> chain(p, m)) & (-x -> chain(q - p, m))`` is appended over that
    single block.  The projected model count of the result over P plus all
    fresh variables, divided by ``c_w`` (the product of the q's), equals the
    weighted count of ``f`` over P.
    """
    if not f.is_normalized():
        raise NotNormalizedError("deweight_reduce needs weights strictly inside (0, 1) summing to 1")
    next_var = f.num_variables + 1
    extra: list[Clause] = []
    per_var: dict[int, VarEncoding] = {}
    c_w = 1
    for var, (pos, _neg) in f.weights.items():
        p, q = pos.numerator, pos.denominator
        m = bits_required(p, q)
        extra.extend(guarded_cnf(build_chain(p, m, next_var), var))
        extra.extend(guarded_cnf(build_chain(q - p, m, next_var), -var))
        per_var[var] = VarEncoding(p, q, m, range(next_var, next_var + m))
        next_var += m
        c_w *= q
    fresh = range(f.num_variables + 1, next_var)
    reduced = WeightedFormula(
        num_variables=next_var - 1,
        clauses=f.clauses + tuple(extra),
        sampling_set=tuple(f.sampling_set) + tuple(fresh),
        weights={},
    )
    return Reduction(reduced, c_w, per_var)


def adjustment_gamma(original: WeightedFormula, adjusted: WeightedFormula) -> Gamma:
    """Worst-case multiplicative distortion of replacing weights by adjusted ones.

    Each variable contributes the largest ratio, either way round, between
    its original and adjusted literal weights; gamma is the product minus 1.
    A weight pushed to 0 or 1 makes the bound infinite.
    """
    prod = Fraction(1)
    for var, (pos, neg) in original.weights.items():
        if var not in adjusted.weights:
            return UNBOUNDED
        pos2, neg2 = adjusted.weights[var]
        rho = max(pos / pos2, pos2 / pos, neg / neg2, neg2 / neg)
        prod *= rho
    return prod - 1


def nearest_dyadic(w: Fraction, bits: int) -> Fraction:
    """Closest ``j / 2**bits`` with ``1 <= j < 2**bits``; halves round up."""
    scale = 1 << bits
    j = math.floor(w * scale + Fraction(1, 2))
    j = min(max(j, 1), scale - 1)
    return Fraction(j, scale)


def dyadic_adjust(f: WeightedFormula, bits: int) -> WeightAdjustment:
    if bits < 1:
        raise ValueError(f"dyadic adjustment needs bits >= 1, got {bits}")
    if not f.is_normalized():
        raise NotNormalizedError("dyadic_adjust needs a normalized formula")
    weights = {}
    for var, (pos, _neg) in f.weights.items():
        w = nearest_dyadic(pos, bits)
        weights[var] = (w, 1 - w)
    adjusted = f.with_changes(weights=weights)
    return WeightAdjustment(adjusted, adjustment_gamma(f, adjusted), bits)


def farey_adjust(f: WeightedFormula, budget: int) -> WeightAdjustment:
    """Move every weight to its nearest ``budget``-bit fraction.

    Weights that land on 0 or 1 are dropped in favour of a unit clause.
    """
    if budget < 0:
        raise ValueError(f"bit budget must be non-negative, got {budget}")
    if not f.is_normalized():
        raise NotNormalizedError("farey_adjust needs a normalized formula")
    clauses = list(f.clauses)
    weights = {}
    for var, (pos, _neg) in f.weights.items():
        a, b = nearest_mbit_fraction(pos.numerator, pos.denominator, budget)
        if a == 0:
            clauses.append((-var,))
        elif a == b:
            clauses.append((var,))
        else:
            w = Fraction(a, b)
            weights[var] = (w, 1 - w)
    adjusted = f.with_changes(clauses=tuple(clauses), weights=weights)
    return WeightAdjustment(adjusted, adjustment_gamma(f, adjusted), budget)


def budget_reduce(f: WeightedFormula, m_budget: int) -> tuple[Reduction, Gamma]:
    adj = farey_adjust(f, m_budget)
    red = deweight_reduce(adj.adjusted)
    red = Reduction(red.reduced_formula, red.c_w, red.per_var, "budget", adj.gamma)
    return red, adj.gamma


def dyadic_reduce(f: WeightedFormula, bits: int) -> tuple[Reduction, Gamma]:
    adj = dyadic_adjust(f, bits)
    red = deweight_reduce(adj.adjusted)
    red = Reduction(red.reduced_formula, red.c_w, red.per_var, "dyadic", adj.gamma)
    return red, adj.gamma


def combined_error(epsilon: Fraction, gamma: Gamma) -> Gamma:
    """Tolerance of an (epsilon, delta) count taken on gamma-adjusted weights."""
    if gamma is UNBOUNDED:
        return UNBOUNDED
    epsilon, gamma = Fraction(epsilon), Fraction(gamma)
    if epsilon < 0 or gamma < 0:
        raise ValueError("epsilon and gamma must be non-negative")
    return epsilon * gamma + gamma + epsilon
