"""Seeded random weighted instances for property checks."""
from __future__ import annotations

import random
from fractions import Fraction

from .formula import WeightedFormula


def random_formula(
    rng: random.Random,
    max_vars: int = 10,
    max_clauses: int = 25,
    max_width: int = 3,
    max_q: int = 20,
    weight_prob: float = 0.8,
    project: bool = True,
) -> WeightedFormula:
    """A random CNF with a random sampling set and random p/q weights on it.

    Weights are normalized (``0 < W(x) < 1`` with complements summing to 1);
    roughly ``weight_prob`` of the sampling variables receive one.
    """
    n = rng.randint(1, max_vars)
    clauses = []
    # clause count grows with n so that most instances stay satisfiable
    for _ in range(rng.randint(1, min(max_clauses, 2 * n + 2))):
        width = 1 if rng.random() < 0.1 else rng.randint(min(2, n), min(max_width, n))
        vs = rng.sample(range(1, n + 1), width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    if project:
        size = rng.randint(1, n)
        sampling = tuple(sorted(rng.sample(range(1, n + 1), size)))
    else:
        sampling = tuple(range(1, n + 1))
    weights = {}
    for v in sampling:
        if rng.random() < weight_prob:
            q = rng.randint(2, max_q)
            w = Fraction(rng.randint(1, q - 1), q)
            weights[v] = (w, 1 - w)
    return WeightedFormula(n, tuple(clauses), sampling, weights)
