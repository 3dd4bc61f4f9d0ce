import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfshift.arith import (
    build_spf,
    char_eval,
    character,
    characters,
    discrete_log,
    euler_phi,
    factorize,
    multiplicative_order,
    multiply,
    nu_p,
    primitive_root,
    primes_up_to,
    real_character,
    root_of_unity_sum,
)
from mfshift.errors import InvalidInputError, InvalidRangeError, NonUnitError, UnsupportedModulusError


def trial_spf(n):
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return d
    return n


def brute_order(m, q):
    k, v = 1, m % q
    while v != 1:
        v = v * m % q
        k += 1
    return k


def test_spf_small():
    assert build_spf(10).as_dict() == {2: 2, 3: 3, 4: 2, 5: 5, 6: 2, 7: 7, 8: 2, 9: 3, 10: 2}
    assert build_spf(2).as_dict() == {2: 2}


def test_spf_errors():
    with pytest.raises(InvalidRangeError):
        build_spf(1)


def test_spf_segmented_matches_trial():
    t = build_spf(5000, segment_size=777)
    for n in range(2, 5001):
        assert t[n] == trial_spf(n)


def test_spf_large_prime():
    t = build_spf(10**7)
    assert t[9999991] == trial_spf(9999991) == 9999991


def test_primes_up_to():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(primes_up_to(10**6)) == 78498


def test_factorize_examples():
    assert list(factorize(360)) == [(2, 3), (3, 2), (5, 1)]
    assert list(factorize(1)) == []
    assert list(factorize(9999991)) == [(9999991, 1)]
    with pytest.raises(InvalidInputError):
        factorize(0)


def test_factorize_with_table():
    t = build_spf(1000)
    for n in range(1, 1001):
        assert factorize(n, t) == factorize(n)
        assert factorize(n).value == n


@given(st.dictionaries(st.sampled_from(primes_up_to(200).tolist()), st.integers(1, 4), max_size=5))
def test_factorize_multiply_roundtrip(d):
    pairs = sorted(d.items())
    assert list(factorize(multiply(pairs))) == pairs


def test_nu_p():
    assert nu_p(360, 2) == 3
    assert nu_p(360, 7) == 0


@pytest.mark.parametrize("q,u", [(7, 3), (3, 2), (9, 2)])
def test_primitive_root_examples(q, u):
    assert primitive_root(q) == u


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 25, 27, 49, 121, 125, 243, 997])
def test_primitive_root_property(q):
    u = primitive_root(q)
    phi = euler_phi(q)
    assert brute_order(u, q) == phi
    for d in range(1, phi):
        if phi % d == 0:
            assert pow(u, d, q) != 1


@pytest.mark.parametrize("q", [2, 4, 15, 1, 12])
def test_primitive_root_rejects(q):
    with pytest.raises(UnsupportedModulusError):
        primitive_root(q)


def test_discrete_log_examples():
    assert discrete_log(6, 7, 3) == 3
    assert discrete_log(1, 7, 3) == 0
    assert discrete_log(3, 7, 3) == 1
    with pytest.raises(NonUnitError):
        discrete_log(14, 7, 3)


@pytest.mark.parametrize("q", [7, 9, 27, 125])
def test_discrete_log_inverts_pow(q):
    u = primitive_root(q)
    for a in range(1, q):
        if math.gcd(a, q) == 1:
            assert pow(u, discrete_log(a, q, u), q) == a


def test_multiplicative_order():
    assert multiplicative_order(2, 7) == 3
    assert multiplicative_order(1, 11) == 1
    assert multiplicative_order(3, 7) == 6
    with pytest.raises(NonUnitError):
        multiplicative_order(14, 7)
    for m in range(1, 101):
        assert multiplicative_order(m, 101) == brute_order(m, 101)


def test_char_eval_examples():
    chi0 = character(7, 0, 3)
    assert char_eval(chi0, 14) == 0
    assert char_eval(chi0, 5) == 1
    chi = character(7, 3, 3)
    assert abs(char_eval(chi, 6) - (-1)) < 1e-12
    assert chi.exponent_of(6) == 3


def test_real_character_mod3():
    chi = real_character(3)
    assert [char_eval(chi, n).real for n in range(6)] == [0, 1, -1, 0, 1, -1]


@lru_cache(maxsize=None)
def exact_sum(exps, order):
    return root_of_unity_sum(list(exps), order)


@pytest.mark.parametrize("q", [7, 9, 27])
def test_orthogonality(q):
    chis = characters(q)
    phi = euler_phi(q)
    units = [a for a in range(1, q) if math.gcd(a, q) == 1]
    for a in units:
        for b in units:
            exps = tuple(sorted((c.exponent_of(a) - c.exponent_of(b)) % phi for c in chis))
            want = phi if a == b else 0
            assert exact_sum(exps, phi) == want
            s = sum(char_eval(c, a) * char_eval(c, b).conjugate() for c in chis)
            assert abs(s - want) < 1e-9


@pytest.mark.parametrize("q", [7, 9, 27, 125])
@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 10**6), n=st.integers(1, 10**6), j=st.integers(0, 10**3))
def test_character_completely_multiplicative(q, m, n, j):
    chi = character(q, j)
    em, en, emn = chi.exponent_of(m), chi.exponent_of(n), chi.exponent_of(m * n)
    if em is None or en is None:
        assert emn is None
    else:
        assert emn == (em + en) % chi.phi


def test_character_vectorized_matches_scalar():
    chi = character(27, 5)
    ns = np.arange(0, 200)
    vals = chi.values(ns)
    for n in range(200):
        assert abs(vals[n] - char_eval(chi, n)) < 1e-12


def test_root_of_unity_sum():
    assert root_of_unity_sum([0, 1, 2, 3], 4) == 0
    assert root_of_unity_sum([0, 0], 6) == 2
    assert root_of_unity_sum([1], 4) is None
