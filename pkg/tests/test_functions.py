import math
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mfshift.constructions import build_sparse_example
from mfshift.errors import InvalidInputError, InvalidParameterError, InvalidRangeError
from mfshift.functions import (
    MultFuncDef,
    evaluate,
    evaluate_additive,
    evaluate_additive_block,
    evaluate_block,
    evaluate_mod,
    evaluate_range,
    omega,
    omega_S,
)

EX12 = build_sparse_example((), 3, 5, 2)

BUILTINS = [
    MultFuncDef("identity"),
    MultFuncDef("one"),
    MultFuncDef("monomial", k=0),
    MultFuncDef("monomial", k=3),
    MultFuncDef("signed-identity", T=frozenset({2, 5, 13, 101})),
    EX12,
    MultFuncDef("identity", exceptions={2: 3, 3: -1}),
    MultFuncDef("identity", exceptions={7: 0}),
    MultFuncDef("identity", complete=False, exceptions={4: 5, 9: -2, 3: 7}),
]


def oracle(fdef, n):
    # sympy factorization, independent of the SPF machinery
    out = 1
    for p, nu in sympy.factorint(n).items():
        out *= fdef.at_prime_power(p, nu)
    return out


def test_evaluate_examples():
    assert evaluate(MultFuncDef("identity"), 10) == 10
    assert evaluate(EX12, 39) == 78
    assert evaluate(MultFuncDef("identity", exceptions={2: 3, 3: -1}), 12) == -9
    with pytest.raises(InvalidInputError):
        evaluate(EX12, 0)


def test_evaluate_mod_examples():
    assert evaluate_mod(MultFuncDef("identity"), 10, 7) == 3
    assert evaluate_mod(EX12, 39, 5) == 3 == evaluate(EX12, 39) % 5
    for f in BUILTINS:
        for m in (2, 3, 97):
            assert evaluate_mod(f, 1, m) == 1


def test_evaluate_range_examples():
    seen = []
    evaluate_range(MultFuncDef("identity"), 1, 5, lambda n, v: seen.append((n, v)))
    assert seen == [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)]
    seen = []
    evaluate_range(MultFuncDef("one"), 1, 100, lambda n, v: seen.append(v))
    assert seen == [1] * 100
    seen = []
    evaluate_range(EX12, 39, 39, lambda n, v: seen.append((n, v)))
    assert seen == [(39, 78)]
    with pytest.raises(InvalidRangeError):
        evaluate_range(EX12, 0, 5, lambda n, v: None)


def test_evaluate_range_consumer_error_propagates():
    def consumer(n, v):
        if n == 17:
            raise RuntimeError("stop")

    with pytest.raises(RuntimeError):
        evaluate_range(EX12, 1, 100, consumer)


@pytest.mark.parametrize("f", BUILTINS, ids=lambda f: f"{f.rule}-{len(f.exceptions)}")
def test_range_matches_pointwise(f):
    got = {}
    evaluate_range(f, 1, 10**4, got.__setitem__, block=3001)
    for n in range(1, 10**4 + 1):
        assert got[n] == evaluate(f, n)
    for n in random.Random(1).sample(range(1, 10**4), 200):
        assert got[n] == oracle(f, n)


def test_block_big_values_promote():
    f = MultFuncDef("monomial", k=5)
    vals = evaluate_block(f, 10**6 - 50, 10**6)
    assert vals.dtype == object
    for i, n in enumerate(range(10**6 - 50, 10**6 + 1)):
        assert vals[i] == n**5


@pytest.mark.parametrize("f", BUILTINS[:6], ids=lambda f: f.rule)
def test_multiplicativity(f):
    rng = random.Random(7)
    done = 0
    while done < 500:
        m = rng.randint(1, 1000)
        n = rng.randint(1, 10**6 // m)
        if math.gcd(m, n) != 1:
            continue
        assert evaluate(f, m * n) == evaluate(f, m) * evaluate(f, n)
        done += 1


@pytest.mark.parametrize("f", BUILTINS, ids=lambda f: f"{f.rule}-{len(f.exceptions)}")
def test_modular_consistency(f):
    rng = random.Random(3)
    for _ in range(500):
        n, m = rng.randint(1, 10**6), rng.randint(2, 10**4)
        assert evaluate_mod(f, n, m) == evaluate(f, n) % m


@given(st.integers(1, 10**6))
def test_complete_prime_powers(n):
    f = EX12
    for p, nu in sympy.factorint(n).items():
        assert f.at_prime_power(p, nu) == f.at_prime(p) ** nu


def test_signed_identity():
    T = frozenset({3, 11, 97})
    f = MultFuncDef("signed-identity", T=T)
    for p in sympy.primerange(2, 500):
        assert f.at_prime(p) == (-p if p in T else p)
    assert evaluate(f, 33) == 33
    assert evaluate(f, 3 * 5) == -15


def test_zero_values_allowed():
    f = MultFuncDef("identity", exceptions={7: 0})
    assert evaluate(f, 14) == 0
    assert evaluate(f, 15) == 15
    assert evaluate(f, 1) == 1


def test_definition_errors():
    with pytest.raises(InvalidParameterError):
        MultFuncDef("cube")
    with pytest.raises(InvalidParameterError):
        MultFuncDef("identity", exceptions={4: 1})
    with pytest.raises(InvalidParameterError):
        MultFuncDef("identity", complete=False, exceptions={12: 1})
    with pytest.raises(InvalidParameterError):
        MultFuncDef("monomial", k=-1)


def test_additive_examples():
    assert evaluate_additive(omega_S({4, 3}), 12) == 2
    assert evaluate_additive(omega_S(()), 97) == 0
    assert evaluate_additive(omega_S(None), 360) == 0
    assert evaluate_additive(omega(), 360) == 3


def test_additive_block_matches_pointwise():
    g = omega_S({2, 9, 5, 25, 7})
    vals = evaluate_additive_block(g, 1, 3000)
    for n in range(1, 3001):
        assert vals[n - 1] == evaluate_additive(g, n)
    w = evaluate_additive_block(omega(), 1, 3000)
    assert all(w[n - 1] == len(sympy.factorint(n)) for n in range(1, 3001))


@settings(max_examples=50)
@given(st.integers(1, 10**4), st.integers(1, 10**4))
def test_additive_on_coprime(m, n):
    g = omega_S({3, 4, 5, 49})
    if math.gcd(m, n) == 1:
        assert evaluate_additive(g, m * n) == evaluate_additive(g, m) + evaluate_additive(g, n)
