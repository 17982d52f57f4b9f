"""Counting backends and the end-to-end weighted counting pipeline.

Two backends are offered.  ``exact`` is a desk-scale oracle: a small DPLL
engine answers satisfiability questions and projected counts are obtained by
exhaustive (pruned) enumeration of the projection set.  ``external`` shells
out to an approximate model counter such as ApproxMC, passing the reduced
formula as a DIMACS file with the projection set in ``c ind`` lines.
"""
from __future__ import annotations

import itertools
import logging
import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Mapping

from .formula import Clause, WeightedFormula, emit
from .reduce import Reduction, deweight_reduce

log = logging.getLogger(__name__)

DEFAULT_CAP = 24
BACKENDS = ("exact", "external")


class CapExceeded(RuntimeError):
    pass


class BackendError(RuntimeError):
    def __init__(self, message: str, returncode: int | None = None, output: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.output = output


# -- clause-set manipulation ------------------------------------------------


def _assign(clauses: Iterable[Clause], lit: int) -> list[Clause] | None:
    """Simplify under ``lit = true``; None on an emptied clause."""
    out = []
    neg = -lit
    for c in clauses:
        if lit in c:
            continue
        if neg in c:
            c = tuple(l for l in c if l != neg)
            if not c:
                return None
        out.append(c)
    return out


def _propagate(clauses: list[Clause]) -> tuple[list[Clause], list[int]] | None:
    """Unit propagation to fixpoint; returns the residual clauses and forced literals."""
    forced: list[int] = []
    while True:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is None:
            return clauses, forced
        forced.append(unit)
        clauses = _assign(clauses, unit)
        if clauses is None:
            return None


def _fix(clauses: Iterable[Clause], fixed: Mapping[int, bool] | None) -> list[Clause] | None:
    cl: list[Clause] | None = [tuple(c) for c in clauses]
    if any(not c for c in cl):
        return None
    for var, val in (fixed or {}).items():
        cl = _assign(cl, var if val else -var)
        if cl is None:
            return None
    return cl


def dpll_sat(clauses: Iterable[Clause], fixed: Mapping[int, bool] | None = None) -> bool:
    """True iff some extension of ``fixed`` satisfies every clause.

    Unit propagation plus chronological backtracking; branches on the lowest
    unassigned variable, trying false first.
    """
    start = _fix(clauses, fixed)
    if start is None:
        return False
    stack = [start]
    while stack:
        cl = stack.pop()
        res = _propagate(cl)
        if res is None:
            continue
        cl = res[0]
        if not cl:
            return True
        var = min(abs(l) for c in cl for l in c)
        for lit in (var, -var):  # pushed so that -var is explored first
            branch = _assign(cl, lit)
            if branch is not None:
                stack.append(branch)
    return False


def _components(clauses: list[Clause]) -> list[tuple[list[Clause], set[int]]]:
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in clauses:
        vs = [abs(l) for l in c]
        for v in vs:
            parent.setdefault(v, v)
        root = find(vs[0])
        for v in vs[1:]:
            r = find(v)
            if r != root:
                parent[r] = root
    groups: dict[int, tuple[list[Clause], set[int]]] = {}
    for c in clauses:
        r = find(abs(c[0]))
        g = groups.setdefault(r, ([], set()))
        g[0].append(c)
        g[1].update(abs(l) for l in c)
    return list(groups.values())


def _count(clauses: list[Clause] | None, proj: frozenset[int]) -> int:
    # Enumerates assignments to ``proj`` as a decision tree: subtrees with no
    # extension are cut by propagation/DPLL, subtrees whose clauses are all
    # satisfied contribute 2**free, and independent components multiply.
    if clauses is None:
        return 0
    res = _propagate(clauses)
    if res is None:
        return 0
    clauses, forced = res
    proj = proj - {abs(l) for l in forced}
    if not clauses:
        return 1 << len(proj)
    comps = _components(clauses)
    mentioned = set().union(*(vs for _, vs in comps))
    total = 1 << len(proj - mentioned)
    # cheap existence checks first so an unsatisfiable part aborts early
    comps.sort(key=lambda g: bool(proj & g[1]))
    for comp, vs in comps:
        local = proj & vs
        if not local:
            if not dpll_sat(comp):
                return 0
            continue
        occ: dict[int, int] = {}
        for c in comp:
            for l in c:
                if abs(l) in local:
                    occ[abs(l)] = occ.get(abs(l), 0) + 1
        var = max(sorted(occ), key=occ.__getitem__)
        rest = frozenset(local - {var})
        n = _count(_assign(comp, var), rest) + _count(_assign(comp, -var), rest)
        if n == 0:
            return 0
        total *= n
    return total


def _check_cap(size: int, cap: int | None) -> None:
    if cap is not None and size > cap:
        raise CapExceeded(
            f"projection set has {size} variables, over the exact-backend cap of {cap}; "
            "use the external backend (--backend external) for instances this size"
        )


def exact_projected_count(
    clauses: Iterable[Clause], projection: Iterable[int], cap: int | None = DEFAULT_CAP
) -> int:
    """Number of assignments to ``projection`` that extend to a model."""
    proj = frozenset(projection)
    _check_cap(len(proj), cap)
    return _count(_fix(clauses, None), proj)


def exact_weighted_count(f: WeightedFormula, cap: int | None = DEFAULT_CAP) -> Fraction:
    """Sum of assignment weights over the projection of the models onto P.

    Plain enumeration of every assignment to P with a satisfiability check
    each; deliberately shares nothing with the reduction path.
    """
    P = f.sampling_set
    _check_cap(len(P), cap)
    base = _fix(f.clauses, None)
    if base is None:
        return Fraction(0)
    total = Fraction(0)
    for values in itertools.product((False, True), repeat=len(P)):
        fixed = dict(zip(P, values))
        if not dpll_sat(base, fixed):
            continue
        w = Fraction(1)
        for var, val in fixed.items():
            w *= f.literal_weight(var if val else -var)
        total += w
    return total


# -- external counter -------------------------------------------------------

_PATTERNS = {
    "s-mc": re.compile(r"^s\s+mc\s+(\d+)\s*$", re.MULTILINE),
    "mult-pow2": re.compile(r"Number of solutions is:\s*(\d+)\s*(?:x|\*)\s*2\s*\^\s*(\d+)"),
}


@dataclass(frozen=True)
class CounterProfile:
    command_template: str
    output_pattern: str = "s-mc"
    timeout_seconds: int = 3600

    def __post_init__(self):
        if "{file}" not in self.command_template:
            raise ValueError("counter command template must contain {file}")
        if self.output_pattern not in _PATTERNS:
            raise ValueError(f"unknown output pattern {self.output_pattern!r}; choose from {sorted(_PATTERNS)}")


def format_param(x: Fraction) -> str:
    """Decimal text for a tolerance parameter (exact when it terminates)."""
    x = Fraction(x)
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1:
        with localcontext() as ctx:
            ctx.prec = 100
            return format(Decimal(x.numerator) / Decimal(x.denominator), "f")
    return repr(float(x))


def parse_counter_output(output: str, pattern: str) -> int:
    rx = _PATTERNS[pattern]
    matches = rx.findall(output)
    if not matches:
        raise BackendError(f"no count matching pattern {pattern!r} in counter output", output=output)
    last = matches[-1]
    if pattern == "mult-pow2":
        a, b = last
        return int(a) << int(b)
    return int(last)


def external_count(path: str | os.PathLike, epsilon: Fraction, delta: Fraction, profile: CounterProfile) -> int:
    """Run the external counter on a DIMACS file and return its (projected) count."""
    cmd = profile.command_template.format(
        file=shlex.quote(os.fspath(path)),
        epsilon=format_param(epsilon),
        delta=format_param(delta),
    )
    log.info("running counter: %s", cmd)
    try:
        proc = subprocess.run(
            shlex.split(cmd),
            capture_output=True,
            text=True,
            timeout=profile.timeout_seconds,
        )
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout or ""
        if isinstance(out, bytes):  # TimeoutExpired may carry bytes even in text mode
            out = out.decode(errors="replace")
        raise BackendError(f"counter timed out after {profile.timeout_seconds}s", output=out) from None
    except OSError as exc:
        raise BackendError(f"could not start counter: {exc}") from None
    output = proc.stdout + proc.stderr
    if proc.returncode != 0:
        raise BackendError(
            f"counter exited with code {proc.returncode}", returncode=proc.returncode, output=output
        )
    return parse_counter_output(proc.stdout, profile.output_pattern)


# -- pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class CountResult:
    value: Fraction
    epsilon: Fraction
    delta: Fraction
    backend: str
    raw_count: int
    c_w: int

    def interval(self) -> tuple[Fraction, Fraction]:
        return self.value / (1 + self.epsilon), self.value * (1 + self.epsilon)


def decimal_sci(x: Fraction, digits: int = 15) -> str:
    if x == 0:
        return f"{0:.{digits - 1}e}"
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return f"{d:.{digits - 1}e}"


def integrate(
    f: WeightedFormula,
    epsilon: Fraction = Fraction(0),
    delta: Fraction = Fraction(0),
    backend: str = "exact",
    profile: CounterProfile | None = None,
    cap: int | None = DEFAULT_CAP,
    reduction: Reduction | None = None,
    workdir: str | None = None,
) -> CountResult:
    """Reduce ``f``, count the reduced instance, divide by the normalizer.

    With the exact backend the result equals the weighted count of ``f``.
    With an external counter honouring an (epsilon, delta) guarantee on the
    reduced instance, the result is an (epsilon, delta) estimate of it.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    red = reduction if reduction is not None else deweight_reduce(f)
    g = red.reduced_formula
    if backend == "exact":
        raw = exact_projected_count(g.clauses, g.sampling_set, cap=cap)
        return CountResult(Fraction(raw, red.c_w), Fraction(0), Fraction(0), "exact", raw, red.c_w)
    if profile is None:
        raise ValueError("external backend needs a CounterProfile")
    epsilon, delta = Fraction(epsilon), Fraction(delta)
    with tempfile.TemporaryDirectory(dir=workdir, prefix="deweight-") as tmp:
        path = os.path.join(tmp, "reduced.cnf")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(emit(g, include_weights=False))
        raw = external_count(path, epsilon, delta, profile)
    return CountResult(Fraction(raw, red.c_w), epsilon, delta, "external", raw, red.c_w)
