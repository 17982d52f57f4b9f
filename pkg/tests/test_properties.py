from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from deweight.chain import build_chain, guarded_cnf
from deweight.count import exact_projected_count, exact_weighted_count
from deweight.formula import WeightedFormula, emit, parse
from deweight.rational import bits_required, nearest_mbit_fraction
from deweight.reduce import UNBOUNDED, deweight_reduce, dyadic_adjust, farey_adjust

from oracles import bitmask_count, weighted_count


@st.composite
def chain_params(draw):
    m = draw(st.integers(0, 12))
    k = draw(st.integers(1, 2**m))
    return k, m


@st.composite
def weights(draw, max_q=40):
    q = draw(st.integers(2, max_q))
    w = Fraction(draw(st.integers(1, q - 1)), q)
    return w, 1 - w


@st.composite
def formulas(draw, max_vars=6):
    n = draw(st.integers(1, max_vars))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=3, unique_by=abs).map(tuple), min_size=1, max_size=10))
    sampling = draw(st.lists(st.integers(1, n), min_size=1, unique=True).map(lambda s: tuple(sorted(s))))
    ws = draw(st.dictionaries(st.sampled_from(sampling), weights()))
    return WeightedFormula(n, tuple(clauses), sampling, ws)


@given(chain_params())
def test_chain_has_k_models(km):
    k, m = km
    chain = build_chain(k, m, 2)
    assert bitmask_count(guarded_cnf(chain, 1), chain.variables, {1: True}) == k


@given(chain_params())
def test_false_guard_leaves_chain_unconstrained(km):
    k, m = km
    chain = build_chain(k, m, 2)
    assert bitmask_count(guarded_cnf(chain, 1), chain.variables, {1: False}) == 2**m


@given(weights(max_q=10**9))
def test_chain_pair_fits_shared_block(w):
    p, q = w[0].numerator, w[0].denominator
    m = bits_required(p, q)
    assert p <= 2**m and q - p <= 2**m
    assert m == 0 or max(p, q - p) > 2 ** (m - 1)


@settings(max_examples=150)
@given(formulas())
def test_reduction_is_exact(f):
    red = deweight_reduce(f)
    g = red.reduced_formula
    expected = weighted_count(f.clauses, f.num_variables, f.sampling_set, f.weights)
    assert Fraction(exact_projected_count(g.clauses, g.sampling_set, cap=None), red.c_w) == expected
    assert exact_weighted_count(f, cap=None) == expected


@settings(max_examples=150)
@given(formulas(), st.integers(1, 4))
def test_adjustment_within_gamma(f, bits):
    exact = weighted_count(f.clauses, f.num_variables, f.sampling_set, f.weights)
    for adj in (dyadic_adjust(f, bits), farey_adjust(f, bits)):
        if adj.gamma is UNBOUNDED:
            continue
        g = adj.adjusted
        approx = weighted_count(g.clauses, g.num_variables, g.sampling_set, g.weights)
        assert exact / (1 + adj.gamma) <= approx <= exact * (1 + adj.gamma)


@given(formulas())
def test_emit_parse_round_trip(f):
    assert parse(emit(f)) == f


@given(st.integers(1, 300).flatmap(lambda q: st.tuples(st.integers(0, q), st.just(q))), st.integers(0, 6))
def test_budget_output_never_farther_than_dyadic_grid(pq, m):
    # every j/2^m is itself m-bit, so the walk can only do at least as well
    p, q = pq
    x = Fraction(p, q)
    got = nearest_mbit_fraction(p, q, m).value()
    grid = min(abs(x - Fraction(j, 2**m)) for j in range(2**m + 1))
    assert abs(x - got) <= grid
