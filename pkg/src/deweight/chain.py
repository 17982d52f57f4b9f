"""Chain formulas: CNF gadgets over m fresh variables with exactly k models.

For ``k < 2**m`` write ``k`` in m bits ``c_1 .. c_m`` (``c_m`` least
significant) and let ``t`` be the position of the last 1-bit.  The formula is
``a_1 C_1 (a_2 C_2 ( ... (a_{t-1} C_{t-1} a_t)))`` with ``C_j`` an OR when
``c_j = 1`` and an AND when ``c_j = 0``.  ``k = 2**m`` is the tautology.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import Clause


@dataclass(frozen=True)
class ChainFormula:
    k: int
    m: int
    bits: tuple[bool, ...]
    variables: tuple[int, ...]

    @property
    def is_tautology(self) -> bool:
        return self.k == 1 << self.m

    @property
    def t(self) -> int:
        """1-based index of the last set bit (0 for the tautology)."""
        for j in range(len(self.bits), 0, -1):
            if self.bits[j - 1]:
                return j
        return 0

    def evaluate(self, assignment: dict[int, bool]) -> bool:
        """Evaluate the nested chain directly, without going through CNF."""
        if self.is_tautology:
            return True
        t = self.t
        value = assignment[self.variables[t - 1]]
        for j in range(t - 1, 0, -1):
            a = assignment[self.variables[j - 1]]
            value = (a or value) if self.bits[j - 1] else (a and value)
        return value


def build_chain(k: int, m: int, first_fresh_var: int) -> ChainFormula:
    if m < 0:
        raise ValueError(f"chain length must be non-negative, got {m}")
    if not 1 <= k <= 1 << m:
        raise ValueError(f"chain needs 1 <= k <= 2**m, got k={k}, m={m}")
    if first_fresh_var < 1:
        raise ValueError(f"fresh variables start at 1, got {first_fresh_var}")
    variables = tuple(range(first_fresh_var, first_fresh_var + m))
    if k == 1 << m:
        bits: tuple[bool, ...] = ()
    else:
        bits = tuple(bool((k >> (m - j)) & 1) for j in range(1, m + 1))
    return ChainFormula(k, m, bits, variables)


def guarded_cnf(chain: ChainFormula, guard: int) -> list[Clause]:
    """Clauses for ``guard -> chain`` with no auxiliary variables.

    OR-connectors accumulate a prefix of chain literals; every AND-connector
    closes a clause ``(-guard | prefix | a_j)`` and the chain ends with
    ``(-guard | prefix | a_t)``.
    """
    if chain.is_tautology:
        return []
    t = chain.t
    a = chain.variables
    prefix: list[int] = []
    clauses: list[Clause] = []
    for j in range(1, t):
        if chain.bits[j - 1]:
            prefix.append(a[j - 1])
        else:
            clauses.append((-guard, *prefix, a[j - 1]))
    clauses.append((-guard, *prefix, a[t - 1]))
    return clauses
