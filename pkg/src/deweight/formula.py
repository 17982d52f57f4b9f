"""Weighted CNF instances: data model, DIMACS parsing/emission, normalization.

Literals are signed DIMACS integers throughout (``3`` is x3, ``-3`` is not x3).
Weights use the model-counting-competition comment syntax::

    c p weight 1 2/3 0
    c p weight -1 1/3 0

with the older ``w <lit> <weight>`` lines accepted as an alternative.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .rational import WeightParseError, parse_weight

log = logging.getLogger(__name__)

Clause = tuple[int, ...]
WeightPair = tuple[Fraction, Fraction]

IND_CHUNK = 10


class FormatError(ValueError):
    """Malformed DIMACS input."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class WeightError(ValueError):
    """Weights that cannot be normalized."""


@dataclass(frozen=True)
class WeightedFormula:
    num_variables: int
    clauses: tuple[Clause, ...]
    sampling_set: tuple[int, ...] = None  # type: ignore[assignment]
    weights: Mapping[int, WeightPair] = field(default_factory=dict)

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        n = self.num_variables
        if n < 0:
            raise FormatError(f"negative variable count {n}")
        for c in clauses:
            for lit in c:
                if lit == 0 or abs(lit) > n:
                    raise FormatError(f"literal {lit} out of range 1..{n}")
        if self.sampling_set is None:
            sampling = tuple(range(1, n + 1))
        else:
            sampling = tuple(sorted(set(int(v) for v in self.sampling_set)))
        for v in sampling:
            if not 1 <= v <= n:
                raise FormatError(f"sampling variable {v} out of range 1..{n}")
        weights = {int(v): (Fraction(w[0]), Fraction(w[1])) for v, w in self.weights.items()}
        in_p = set(sampling)
        for v in weights:
            if v not in in_p:
                raise FormatError(f"variable {v} has a weight but is not in the sampling set")
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "sampling_set", sampling)
        object.__setattr__(self, "weights", dict(sorted(weights.items())))

    def literal_weight(self, lit: int) -> Fraction:
        """Weight of a literal; unweighted variables contribute 1 on both sides."""
        pair = self.weights.get(abs(lit))
        if pair is None:
            return Fraction(1)
        return pair[0] if lit > 0 else pair[1]

    def is_normalized(self) -> bool:
        return all(
            0 < pos < 1 and pos + neg == 1 for pos, neg in self.weights.values()
        )

    def with_changes(self, **kw) -> "WeightedFormula":
        base = dict(
            num_variables=self.num_variables,
            clauses=self.clauses,
            sampling_set=self.sampling_set,
            weights=self.weights,
        )
        base.update(kw)
        return WeightedFormula(**base)


def _ints(tokens: Iterable[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"expected integers: {exc}", lineno) from None


def _weight_line(tokens: list[str], lineno: int) -> tuple[int, Fraction]:
    # tokens: <lit> <weight> [0]
    if len(tokens) == 3 and tokens[2] == "0":
        tokens = tokens[:2]
    if len(tokens) != 2:
        raise FormatError("weight line must be '<lit> <weight> 0'", lineno)
    lit = _ints(tokens[:1], lineno)[0]
    if lit == 0:
        raise FormatError("weight given for literal 0", lineno)
    try:
        w = parse_weight(tokens[1])
    except WeightParseError as exc:
        raise FormatError(str(exc), lineno) from None
    if w < 0:
        raise FormatError(f"negative weight {tokens[1]} for literal {lit}", lineno)
    return lit, w


def parse(text: str) -> WeightedFormula:
    """Parse DIMACS CNF with optional ``c ind`` and weight lines."""
    header: tuple[int, int] | None = None
    clauses: list[Clause] = []
    current: list[int] = []
    sampling: set[int] | None = None
    lit_weights: dict[int, Fraction] = {}
    weight_lines: dict[int, int] = {}
    syntax: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head.startswith("c"):
            if tokens[:2] == ["c", "ind"]:
                vals = _ints(tokens[2:], lineno)
                if not vals or vals[-1] != 0 or 0 in vals[:-1]:
                    raise FormatError("'c ind' line must be 0-terminated", lineno)
                sampling = (sampling or set()) | set(vals[:-1])
            elif tokens[:3] == ["c", "p", "weight"]:
                kind = "c p weight"
                if syntax not in (None, kind):
                    raise FormatError("mixed 'c p weight' and 'w' weight syntaxes", lineno)
                syntax = kind
                lit, w = _weight_line(tokens[3:], lineno)
                if lit in lit_weights:
                    raise FormatError(f"duplicate weight for literal {lit}", lineno)
                lit_weights[lit] = w
                weight_lines[lit] = lineno
            continue
        if head == "p":
            if header is not None:
                raise FormatError("duplicate 'p' header", lineno)
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise FormatError("header must be 'p cnf <nvars> <nclauses>'", lineno)
            nv, nc = _ints(tokens[2:], lineno)
            if nv < 0 or nc < 0:
                raise FormatError("negative counts in header", lineno)
            header = (nv, nc)
            continue
        if head == "w":
            kind = "w"
            if syntax not in (None, kind):
                raise FormatError("mixed 'c p weight' and 'w' weight syntaxes", lineno)
            syntax = kind
            lit, w = _weight_line(tokens[1:], lineno)
            if lit in lit_weights:
                raise FormatError(f"duplicate weight for literal {lit}", lineno)
            lit_weights[lit] = w
            weight_lines[lit] = lineno
            continue
        if header is None:
            raise FormatError("clause before 'p cnf' header", lineno)
        for lit in _ints(tokens, lineno):
            if lit == 0:
                if not current:
                    raise FormatError("empty clause", lineno)
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > header[0]:
                    raise FormatError(f"variable {abs(lit)} exceeds declared {header[0]}", lineno)
                current.append(lit)

    if header is None:
        raise FormatError("missing 'p cnf' header")
    if current:
        raise FormatError("last clause is not 0-terminated")
    nv, nc = header
    if nc != len(clauses):
        log.warning("header declares %d clauses, found %d", nc, len(clauses))

    weights: dict[int, WeightPair] = {}
    for var in sorted({abs(l) for l in lit_weights}):
        where = weight_lines.get(var, weight_lines.get(-var))
        if var > nv:
            raise FormatError(f"weight for variable {var} exceeds declared {nv}", where)
        pos, neg = lit_weights.get(var), lit_weights.get(-var)
        if pos is None or neg is None:
            given = pos if pos is not None else neg
            if given > 1:
                raise FormatError(
                    f"weight {given} of variable {var} exceeds 1 with no complement given", where
                )
            if pos is None:
                pos = 1 - neg
            else:
                neg = 1 - pos
        weights[var] = (pos, neg)

    if sampling is not None:
        for v in sampling:
            if not 1 <= v <= nv:
                raise FormatError(f"sampling variable {v} out of range 1..{nv}")
    return WeightedFormula(nv, tuple(clauses), None if sampling is None else tuple(sampling), weights)


def normalize(f: WeightedFormula) -> WeightedFormula:
    """Scale every weight pair to sum to 1 and turn 0/1 weights into unit clauses."""
    clauses = list(f.clauses)
    weights: dict[int, WeightPair] = {}
    for var, (pos, neg) in f.weights.items():
        if pos < 0 or neg < 0:
            raise WeightError(f"negative weight on variable {var}")
        total = pos + neg
        if total == 0:
            raise WeightError(f"weights of variable {var} sum to zero")
        pos, neg = pos / total, neg / total
        if pos == 1:
            clauses.append((var,))
        elif pos == 0:
            clauses.append((-var,))
        else:
            weights[var] = (pos, neg)
    return f.with_changes(clauses=tuple(clauses), weights=weights)


def _frac(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def emit(f: WeightedFormula, include_weights: bool = True) -> str:
    lines = [f"p cnf {f.num_variables} {len(f.clauses)}"]
    ind = list(f.sampling_set)
    if not ind:
        lines.append("c ind 0")
    for i in range(0, len(ind), IND_CHUNK):
        chunk = ind[i : i + IND_CHUNK]
        lines.append("c ind " + " ".join(map(str, chunk)) + " 0")
    if include_weights:
        for var, (pos, neg) in f.weights.items():
            lines.append(f"c p weight {var} {_frac(pos)} 0")
            lines.append(f"c p weight {-var} {_frac(neg)} 0")
    for c in f.clauses:
        lines.append(" ".join(map(str, c)) + " 0")
    return "\n".join(lines) + "\n"
