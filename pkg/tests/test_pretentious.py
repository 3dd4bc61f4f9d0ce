import cmath
import math
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mfshift.arith import character, harmonic_number
from mfshift.constructions import build_sparse_example, sample_random_T
from mfshift.errors import DegeneratePairError
from mfshift.functions import MultFuncDef, omega, omega_S
from mfshift.arith import primes_in_class
from mfshift.pretentious import (
    char_func,
    chi3,
    chi4,
    compose,
    disc_block,
    distance_trajectory,
    elliott_defect,
    halasz_M,
    liouville_T,
    log_correlation,
    nit,
    one,
    pretentious_distance,
    tk_stats,
    zero,
)

X5 = 10**5


def pool():
    T = sample_random_T((), X5, 3)
    return [
        one(),
        zero(),
        liouville_T(),
        liouville_T(T),
        nit(0.5),
        nit(-2.0),
        nit(7.3),
        chi3(),
        chi4(),
        char_func(character(5, 1)),
        char_func(character(7, 2)),
        char_func(character(25, 3)),
        compose(character(7, 1), build_sparse_example((), 3, 5, 2)),
        compose(character(9, 1), MultFuncDef("identity")),
        chi3() * nit(1.0),
        chi4() * liouville_T(),
    ]


def naive_value(g, n):
    out = 1 + 0j
    for p, nu in sympy.factorint(n).items():
        out *= complex(g.at_primes(np.array([p]))[0]) ** nu
    return out


def test_disc_block_matches_factorization():
    for g in pool():
        vals = disc_block(g, 1, 3000)
        for n in random.Random(0).sample(range(1, 3001), 150):
            assert abs(vals[n - 1] - naive_value(g, n)) < 1e-12


def test_values_in_disc():
    ps = np.array(list(sympy.primerange(2, 5000)), dtype=np.int64)
    for g in pool():
        assert np.all(np.abs(g.at_primes(ps)) <= 1 + 1e-12)


def test_product_rule():
    ps = np.array(list(sympy.primerange(2, 2000)), dtype=np.int64)
    f, g = chi3(), nit(2.5)
    assert np.allclose((f * g).at_primes(ps), f.at_primes(ps) * g.at_primes(ps), atol=0, rtol=1e-15)


def test_distance_examples():
    assert pretentious_distance(one(), one(), X5).squared == 0.0
    r = pretentious_distance(liouville_T(), one(), X5)
    assert math.isclose(r.squared, 2 * math.fsum(1.0 / p for p in sympy.primerange(2, X5 + 1)), rel_tol=1e-13)
    assert r.prime_count == 9592
    r = pretentious_distance(one(), nit(1.0), 10**6)
    assert r.squared >= math.log(1 + math.log(10**6)) - 10


def test_distance_invariants():
    ps = list(sympy.primerange(2, X5 + 1))
    bound = 2 * math.fsum(1.0 / p for p in ps) + 1e-6
    for f in pool():
        for g in pool()[:6]:
            r = pretentious_distance(f, g, X5)
            assert r.squared >= 0 and math.isclose(r.value**2, r.squared, rel_tol=1e-12, abs_tol=1e-15)
            assert r.squared <= bound
            assert r.squared == pretentious_distance(g, f, X5).squared


def test_triangle_inequalities():
    fs = pool()
    rng = random.Random(11)
    cache = {}

    def D(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            cache[key] = pretentious_distance(fs[key[0]], fs[key[1]], X5).value
        return cache[key]

    for _ in range(300):
        i, j, k = (rng.randrange(len(fs)) for _ in range(3))
        assert D(i, k) <= D(i, j) + D(j, k) + 1e-9
    for _ in range(60):
        a, b, c, d = (rng.randrange(len(fs)) for _ in range(4))
        lhs = pretentious_distance(fs[a] * fs[b], fs[c] * fs[d], X5).value
        assert lhs <= D(a, c) + D(b, d) + 1e-9


def test_trajectory_monotone_and_consistent():
    xs = [100, 10**3, 10**4, X5]
    traj = distance_trajectory(liouville_T(sample_random_T((), X5, 1)), chi3(), xs)
    sq = [r.squared for r in traj]
    assert sq == sorted(sq)
    for r in traj:
        assert math.isclose(r.squared, pretentious_distance(liouville_T(sample_random_T((), X5, 1)), chi3(), r.x).squared, rel_tol=1e-12)


def test_halasz_examples():
    M, t = halasz_M(nit(0.5), X5, 1.0)
    assert M <= 1e-9 and t == 0.5
    M, t = halasz_M(one(), X5, 1.0)
    assert M == 0 and t == 0
    M, _ = halasz_M(liouville_T(), X5, 10.0)
    assert M >= 1.0


def test_halasz_bounded_by_distance_to_one():
    for g in (chi3(), chi4() * nit(0.3), liouville_T(sample_random_T((), 10**4, 2))):
        M, _ = halasz_M(g, 10**4, 5.0, grid_points=1025)
        assert M <= pretentious_distance(g, one(), 10**4).squared + 1e-9


def test_tk_examples():
    s = tk_stats(omega_S(()), 10**4)
    assert (s.A, s.B2, s.variance, s.ratio) == (0, 0, 0, 0)
    assert tk_stats(omega(), 10**6).ratio <= 4
    s = tk_stats(omega_S(primes_in_class(1, 4)), 10**6)
    ll = math.log(math.log(10**6))
    assert 0.5 * ll - 2 <= s.A <= 0.5 * ll + 2


def test_tk_matches_direct():
    X = 3000
    g = omega_S({3, 5, 9, 7})
    s = tk_stats(g, X)
    vals = [sum(1 for p, nu in sympy.factorint(n).items() if p**nu in {3, 5, 9, 7}) for n in range(1, X + 1)]
    A = sum(1 / q * (1 - 1 / p) for q, p in ((3, 3), (5, 5), (9, 3), (7, 7)))
    assert math.isclose(s.A, A, rel_tol=1e-12)
    assert math.isclose(s.variance, sum((v - A) ** 2 for v in vals) / X, rel_tol=1e-12)


def test_elliott_examples():
    assert elliott_defect(range(1, X5 + 1), X5, 1000).ratio <= 2
    assert elliott_defect([], X5, 1000).ratio == 0
    assert elliott_defect(range(2, X5 + 1, 2), X5, 100).ratio <= 2


def test_correlation_examples():
    assert abs(log_correlation(one(), one(), 1, 0, 1, 1, X5) - 1) <= 0.01
    v = log_correlation(one(), zero(), 1, 1, 1, 0, X5)
    # only n = 1 survives: zero(1) = 1
    assert abs(v - 1 / harmonic_number(X5)) < 1e-15
    assert abs(v - 1 / math.log(X5)) < 0.01
    with pytest.raises(DegeneratePairError):
        log_correlation(one(), one(), 2, 2, 1, 1, X5)


@settings(max_examples=25, deadline=None)
@given(
    i=st.integers(0, 15),
    j=st.integers(0, 15),
    a=st.integers(1, 3),
    b=st.integers(-2, 3),
    c=st.integers(1, 3),
    d=st.integers(-2, 3),
)
def test_correlation_matches_naive(i, j, a, b, c, d):
    if a * d == b * c:
        return
    fs = pool()
    g1, g2 = fs[i], fs[j]
    x = 400
    got = log_correlation(g1, g2, a, b, c, d, x)
    total = sum(naive_value(g1, a * n + b) * naive_value(g2, c * n + d) / n for n in range(1, x + 1) if a * n + b >= 1 and c * n + d >= 1)
    assert abs(got - total / harmonic_number(x)) < 1e-10


def test_correlation_same_object_path():
    g = liouville_T(sample_random_T((), 10**4, 4))
    h = liouville_T(sample_random_T((), 10**4, 4))
    assert abs(log_correlation(g, g, 2, 1, 2, 3, 5000) - log_correlation(g, h, 2, 1, 2, 3, 5000)) < 1e-12
