"""The twelve acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
A criterion that cannot be met is marked as a strict expected failure, so it
still reports FAIL; notes/decisions.md explains why.
"""
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from mfshift.arith import character, characters, euler_phi, primes_in_class, primes_up_to, root_of_unity_sum
from mfshift.constructions import (
    ConverseParams,
    build_converse,
    build_sparse_example,
    converse_prediction,
    sample_random_T,
    verify_converse,
)
from mfshift.functions import MultFuncDef, omega_S
from mfshift.local_power import find_local_power_exponent, fs_scan, ord_reciprocal_sum, s_f_density
from mfshift.pretentious import (
    char_func,
    chi3,
    chi4,
    compose,
    distance_trajectory,
    liouville_T,
    log_correlation,
    nit,
    one,
    pretentious_distance,
    tk_stats,
    zero,
)
from mfshift.sieve_density import ExactDivision, zero_dim_density
from mfshift.solutions import enumerate_solutions


@pytest.mark.xfail(strict=True, reason="N_{f,1,2} also contains the mirrored family 5||n, 3||n+1, so its density is 16/225")
def test_c01_example_density(record):
    f = build_sparse_example((), 3, 5, 2)
    pred = zero_dim_density([ExactDivision(3, 1, 0), ExactDivision(5, 1, 1)]).value
    assert pred == Fraction(8, 225)
    X = 10**7
    t0 = time.perf_counter()
    r = enumerate_solutions(f, 1, 2, 1, 1, X)
    elapsed = time.perf_counter() - t0
    dens = r.count / X
    rel = abs(dens - float(pred)) / float(pred)
    m = r.members
    sub = np.count_nonzero((m % 3 == 0) & (m % 9 != 0) & ((m + 1) % 5 == 0) & ((m + 1) % 25 != 0)) / X
    sub_rel = abs(sub - float(pred)) / float(pred)
    ok = record(
        1,
        rel <= 0.05 and elapsed <= 60,
        f"density {dens:.7f} vs 8/225={float(pred):.7f}, rel err {rel:.3%} (tol 5%), {elapsed:.1f}s; "
        f"3||n,5||n+1 subfamily {sub:.7f} rel err {sub_rel:.4%}",
    )
    assert ok


def test_c02_converse_exactness(record):
    params = ConverseParams(3, 3, 4, frozenset({3, 7, 11}))
    f = build_converse(params).fdef
    rep = verify_converse(f, params, 10**5)
    pred = converse_prediction(params)
    rel = abs(rep.density - float(pred)) / float(pred)
    ok = record(
        2,
        all(rep.items.values()) and not rep.violations and rel <= 0.25,
        f"items {rep.items}, violations {len(rep.violations)}, |N'|={rep.members.size}, "
        f"density {rep.density:.6f} vs {pred} = {float(pred):.6f} (rel {rel:.2%}, tol 25%)",
    )
    assert ok


def test_c03_local_power_recovery(record):
    t0 = time.perf_counter()
    bad = []
    ells = [int(p) for p in primes_up_to(1000) if p > 2]
    for k in range(4):
        f = MultFuncDef("monomial", k=k)
        for ell in ells:
            r = find_local_power_exponent(f, 1, ell, 10**4, "exact")
            if not r.ok or (r.g - k) % (ell - 1) or r.exceptions:
                bad.append((k, ell))
    elapsed = time.perf_counter() - t0
    ok = record(3, not bad and elapsed <= 30, f"{4 * len(ells)} (k, ell) cases, {len(bad)} failures, {elapsed:.1f}s (limit 30s)")
    assert ok


def test_c04_fs_negative_control(record):
    f = MultFuncDef("identity", exceptions={3: -3})
    s = fs_scan(f, 200, 10**4)
    listed = [ell for ell, _ in s.entries]
    # -3 = 3^g (mod ell) at p = 3 while p^1 = p elsewhere forces g = 1, so ell | 3 - (-3) = 6
    brute = [int(ell) for ell in sympy.primerange(3, 201) if 6 % ell == 0]
    ok = record(4, listed == brute == [3], f"exact mode succeeds at {listed}; brute force ell | 6 gives {brute}")
    assert ok


def test_c05_turan_kubilius(record):
    s = tk_stats(omega_S(primes_in_class(1, 4)), 10**6)
    ok = record(5, s.ratio <= 4, f"A={s.A:.4f}, B^2={s.B2:.4f}, variance={s.variance:.4f}, ratio {s.ratio:.4f} (limit 4)")
    assert ok


def test_c06_character_orthogonality(record):
    worst, exact_bad = 0.0, 0
    cache = {}
    for q in (7, 9, 27, 125):
        chis = characters(q)
        phi = euler_phi(q)
        units = np.array([a for a in range(1, q) if math.gcd(a, q) == 1])
        E = np.array([[c.exponent_of(int(a)) for a in units] for c in chis])  # E[j, a]
        for ia in range(len(units)):
            for ib in range(len(units)):
                exps = tuple(sorted(((E[:, ia] - E[:, ib]) % phi).tolist()))
                key = (exps, phi)
                if key not in cache:
                    cache[key] = root_of_unity_sum(list(exps), phi)
                exact_bad += cache[key] != (phi if ia == ib else 0)
        V = np.array([c.values(units) for c in chis])
        G = V.T @ V.conj()
        worst = max(worst, float(np.abs(G - phi * np.eye(len(units))).max()))
    ok = record(6, exact_bad == 0 and worst <= 1e-9, f"exact mismatches {exact_bad}, max float error {worst:.2e} (tol 1e-9)")
    assert ok


def _builtins(x):
    T = sample_random_T((), x, 7)
    return [
        one(),
        zero(),
        liouville_T(),
        liouville_T(T),
        chi3(),
        chi4(),
        char_func(character(5, 1)),
        char_func(character(7, 1)),
        char_func(character(9, 2)),
        char_func(character(25, 7)),
        nit(0.5),
        nit(1.0),
        nit(-3.0),
        compose(character(7, 1), build_sparse_example((), 3, 5, 2)),
        compose(character(5, 2), MultFuncDef("signed-identity", T=T)),
        chi3() * nit(2.0),
    ]


def test_c07_triangle_inequalities(record):
    x = 10**5
    fs = _builtins(x)
    rng = random.Random(2024)
    cache = {}

    def D(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            cache[key] = pretentious_distance(fs[key[0]], fs[key[1]], x).value
        return cache[key]

    worst = -math.inf
    for _ in range(1000):
        i, j, k = (rng.randrange(len(fs)) for _ in range(3))
        worst = max(worst, D(i, k) - D(i, j) - D(j, k))
    worst_m = -math.inf
    for _ in range(200):
        a, b, c, d = (rng.randrange(len(fs)) for _ in range(4))
        lhs = pretentious_distance(fs[a] * fs[b], fs[c] * fs[d], x).value
        worst_m = max(worst_m, lhs - D(a, c) - D(b, d))
    ok = record(
        7,
        worst <= 1e-9 and worst_m <= 1e-9,
        f"max violation: additive {worst:.3e} over 1000 triples, multiplicative {worst_m:.3e} over 200 pairs (tol 1e-9)",
    )
    assert ok


def test_c08_nit_distance_growth(record):
    parts, ok_all = [], True
    for t in (0.5, 1.0, 5.0):
        traj = distance_trajectory(one(), nit(t), [10**4, 10**5, 10**6])
        sq = [r.squared for r in traj]
        lower = math.log(1 + abs(t) * math.log(10**6)) - 10
        ok_all &= sq[-1] >= lower and sq == sorted(sq)
        parts.append(f"t={t:g}: D^2 {sq[0]:.3f},{sq[1]:.3f},{sq[2]:.3f} (lower {lower:.2f})")
    ok = record(8, ok_all, "; ".join(parts))
    assert ok


def test_c09_random_T_non_pretentious(record):
    x = 10**7
    thr = 0.25 * math.log(math.log(x))
    targets = {"1": one(), "chi3": chi3(), "chi4": chi4()}
    good, mins = 0, []
    for seed in range(10):
        lam = liouville_T(sample_random_T((), x, seed))
        d2 = {k: pretentious_distance(lam, g, x).squared for k, g in targets.items()}
        mins.append(min(d2.values()))
        good += all(v >= thr for v in d2.values())
    ok = record(9, good >= 9, f"{good}/10 seeds (0-9) with all D^2 >= {thr:.4f}; per-seed min D^2 {min(mins):.3f}..{max(mins):.3f}")
    assert ok


def test_c10_correlation_decay(record):
    seed, x = 1, 10**7
    lam = liouville_T(sample_random_T((), x + 1, seed))
    v = log_correlation(lam, lam, 1, 0, 1, 1, x)
    ok = record(10, abs(v) <= 0.1, f"seed {seed}: |corr| = {abs(v):.4f} (limit 0.1)")
    assert ok


def test_c11_ord_reciprocal_sums(record):
    rs = {ell: ord_reciprocal_sum(ell, 10**3, 10**7) for ell in (3, 5, 7)}
    ok = record(11, all(0.8 <= r.ratio <= 1.2 for r in rs.values()), ", ".join(f"ell={e}: ratio {r.ratio:.4f}" for e, r in rs.items()) + " (band [0.8, 1.2])")
    assert ok


def test_c12_s_f_density(record):
    X = 10**6
    ident = s_f_density(MultFuncDef("identity"), X)
    ps = primes_up_to(X)
    split = MultFuncDef("one", exceptions={int(p): int(p) for p in ps[ps % 4 == 1]})
    sp = s_f_density(split, X)
    ok = record(
        12,
        0.85 <= ident.dirichlet_estimate <= 1.15 and 0.35 <= sp.dirichlet_estimate <= 0.65,
        f"identity {ident.dirichlet_estimate:.4f} (band [0.85, 1.15]), mod-4 split {sp.dirichlet_estimate:.4f} (band [0.35, 0.65])",
    )
    assert ok
