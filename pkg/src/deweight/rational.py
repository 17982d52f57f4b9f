"""Exact rational helpers and the nearest m-bit fraction search.

Weights are carried as :class:`fractions.Fraction` throughout the package
(aliased here as ``Rational``).  The mediant walk works on raw ``(a, b)``
pairs so that it mirrors the Stern-Brocot descent step for step.
"""
from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import NamedTuple

Rational = Fraction

_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_RATIO = re.compile(r"[+-]?\d+/[+-]?\d+")


class WeightParseError(ValueError):
    pass


class FareyPair(NamedTuple):
    """A fraction ``a/b`` kept as an unreduced integer pair."""

    a: int
    b: int

    def value(self) -> Fraction:
        return Fraction(self.a, self.b)

    def __str__(self) -> str:
        return f"{self.a}/{self.b}"


def parse_weight(text: str) -> Fraction:
    """Parse a decimal, ``p/q`` or integer literal without touching floats.

    >>> parse_weight("0.3")
    Fraction(3, 10)
    >>> parse_weight("0.50")
    Fraction(1, 2)
    """
    token = text.strip()
    if _RATIO.fullmatch(token):
        num, den = token.split("/")
        if int(den) == 0:
            raise WeightParseError(f"zero denominator in weight {token!r}")
        return Fraction(int(num), int(den))
    if _DECIMAL.fullmatch(token):
        # Fraction() parses decimal strings exactly
        return Fraction(token)
    raise WeightParseError(f"malformed weight {token!r}")


def ceil_log2(x: int) -> int:
    """``ceil(log2(x))`` for ``x >= 1`` using integer bit lengths."""
    if x < 1:
        raise ValueError(f"ceil_log2 undefined for {x}")
    return (x - 1).bit_length()


def mediant(lo: FareyPair, hi: FareyPair) -> FareyPair:
    return FareyPair(lo.a + hi.a, lo.b + hi.b)


def bits_required(p: int, q: int) -> int:
    """Number of fresh variables needed to encode the weight ``p/q``.

    This is the smallest ``m`` with ``p <= 2**m`` and ``q - p <= 2**m``.
    """
    if p <= 0 or p >= q:
        raise ValueError(f"bits_required needs 1 <= p < q, got p={p}, q={q}")
    return max(ceil_log2(p), ceil_log2(q - p))


def _fits(a: int, b: int, m: int) -> bool:
    limit = 1 << m
    return a <= limit and b - a <= limit


def is_mbit_fraction(f: FareyPair, m: int) -> bool:
    return gcd(f.a, f.b) == 1 and _fits(f.a, f.b, m)


def _closer(p: int, q: int, lo: FareyPair, hi: FareyPair) -> FareyPair:
    # Distances compared by cross multiplication: |p/q - a/b| ~ |p*b - a*q| / b.
    d_lo = Fraction(abs(p * lo.b - lo.a * q), lo.b)
    d_hi = Fraction(abs(p * hi.b - hi.a * q), hi.b)
    if d_lo != d_hi:
        return lo if d_lo < d_hi else hi
    if lo.b != hi.b:
        return lo if lo.b < hi.b else hi
    return lo if lo.value() <= hi.value() else hi


def _walk(p: int, q: int, m: int) -> tuple[FareyPair, int]:
    """Run the mediant descent; return the answer and the number of descents taken."""
    if q <= 0 or p < 0 or p > q:
        raise ValueError(f"nearest_mbit_fraction needs 0 <= p <= q, q >= 1; got {p}/{q}")
    if m < 0:
        raise ValueError(f"bit budget must be non-negative, got {m}")
    target = Fraction(p, q)
    lo, hi = FareyPair(0, 1), FareyPair(1, 1)
    if target == 0:
        return lo, 0
    if target == 1:
        return hi, 0
    steps = 0
    while True:
        mid = mediant(lo, hi)
        # The bit test runs before the equality test so a target that is not
        # itself m-bit is never returned.
        if not _fits(mid.a, mid.b, m):
            return _closer(p, q, lo, hi), steps
        steps += 1
        if mid.value() == target:
            return mid, steps
        if mid.value() < target:
            lo = mid
        else:
            hi = mid


def nearest_mbit_fraction(p: int, q: int, m: int) -> FareyPair:
    """Nearest fraction ``a/b`` to ``p/q`` with ``a <= 2**m`` and ``b - a <= 2**m``.

    Walks the Farey mediants between ``0/1`` and ``1/1`` towards ``p/q``
    until the next mediant no longer fits in ``m`` bits, then returns the
    closer of the two bracketing fractions.  Ties go to the smaller
    denominator, then to the smaller value.

    >>> nearest_mbit_fraction(4, 25, 3)
    FareyPair(a=1, b=6)
    """
    return _walk(p, q, m)[0]
