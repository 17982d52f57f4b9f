"""Seeded property suites behind ``deweight selftest``."""
from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable

from .chain import ChainFormula, build_chain, guarded_cnf
from .count import exact_projected_count, exact_weighted_count
from .formula import Clause
from .generate import random_formula
from .rational import nearest_mbit_fraction
from .reduce import UNBOUNDED, deweight_reduce, dyadic_adjust, farey_adjust

GuardedCnf = Callable[[ChainFormula, int], list[Clause]]


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _count_over(clauses: list[Clause], variables: tuple[int, ...], guard: int) -> int:
    # Bit-parallel truth table: bit i of a mask is the value under assignment i.
    size = 1 << len(variables)
    full = (1 << size) - 1
    masks = {}
    for j, v in enumerate(variables):
        m = 0
        for i in range(size):
            if (i >> j) & 1:
                m |= 1 << i
        masks[v] = m
    result = full
    for c in clauses:
        cm = 0
        for lit in c:
            if abs(lit) == guard:
                cm |= full if lit > 0 else 0
            else:
                cm |= masks[lit] if lit > 0 else full ^ masks[-lit]
        result &= cm
    return bin(result).count("1")


def chain_counts(max_m: int = 8, cnf: GuardedCnf = guarded_cnf) -> SuiteResult:
    res = SuiteResult("chain-count")
    for m in range(0, max_m + 1):
        for k in range(1, (1 << m) + 1):
            ch = build_chain(k, m, 2)
            got = _count_over(cnf(ch, 1), ch.variables, 1)
            res.checked += 1
            if got != k:
                res.failures.append(f"(k={k}, m={m}): guarded chain has {got} models, expected {k}")
    return res


def _mbit_sorted(m: int) -> list[Fraction]:
    lim = 1 << m
    out = {Fraction(a, a + d) for a in range(lim + 1) for d in range(lim + 1) if a + d > 0 and gcd(a, a + d) == 1}
    return sorted(out)


def farey_optimality(max_q: int = 60, max_m: int = 4) -> SuiteResult:
    res = SuiteResult("farey-optimality")
    for m in range(max_m + 1):
        cands = _mbit_sorted(m)
        for q in range(1, max_q + 1):
            for p in range(q + 1):
                x = Fraction(p, q)
                i = bisect.bisect_left(cands, x)
                best = min(abs(x - c) for c in cands[max(i - 1, 0) : i + 1])
                got = nearest_mbit_fraction(p, q, m)
                res.checked += 1
                if abs(x - got.value()) != best:
                    res.failures.append(f"({p}/{q}, m={m}): got {got}, distance {abs(x - got.value())} > {best}")
    return res


def reduction_exactness(rng: random.Random, trials: int = 100) -> SuiteResult:
    res = SuiteResult("reduction-exactness")
    for _ in range(trials):
        f = random_formula(rng, max_vars=8, max_q=12)
        red = deweight_reduce(f)
        g = red.reduced_formula
        lhs = Fraction(exact_projected_count(g.clauses, g.sampling_set, cap=None), red.c_w)
        rhs = exact_weighted_count(f, cap=None)
        res.checked += 1
        if lhs != rhs:
            res.failures.append(f"{f}: reduced count/C_W = {lhs}, weighted count = {rhs}")
    return res


def gamma_soundness(rng: random.Random, trials: int = 60) -> SuiteResult:
    res = SuiteResult("gamma-soundness")
    for _ in range(trials):
        f = random_formula(rng, max_vars=7, max_q=15)
        exact = exact_weighted_count(f, cap=None)
        bits = rng.randint(1, 3)
        for adj in (dyadic_adjust(f, bits), farey_adjust(f, bits)):
            res.checked += 1
            if adj.gamma is UNBOUNDED:
                continue
            approx = exact_weighted_count(adj.adjusted, cap=None)
            lo, hi = exact / (1 + adj.gamma), exact * (1 + adj.gamma)
            if not lo <= approx <= hi:
                res.failures.append(f"{f} bits={bits}: {approx} outside [{lo}, {hi}]")
    return res


def run_all(seed: int, cnf: GuardedCnf = guarded_cnf) -> list[SuiteResult]:
    rng = random.Random(seed)
    return [
        chain_counts(cnf=cnf),
        farey_optimality(),
        reduction_exactness(rng),
        gamma_soundness(rng),
    ]


def flipped_connector_cnf(chain: ChainFormula, guard: int) -> list[Clause]:
    """A deliberately broken clause generator: the first connector is inverted."""
    if chain.is_tautology or chain.t < 2:
        return guarded_cnf(chain, guard)
    bits = (not chain.bits[0],) + chain.bits[1:]
    return guarded_cnf(ChainFormula(chain.k, chain.m, bits, chain.variables), guard)
