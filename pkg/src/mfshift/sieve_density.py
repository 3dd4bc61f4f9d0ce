"""
Exact zero-dimensional sieve densities and sparse-set diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import RuleSet, csum, factorize, prime_powers_up_to, primes_up_to, segments, set_mask
from .errors import ConstraintConflictError, InvalidInputError, InvalidRangeError
from .functions import DEFAULT_BLOCK, MultFuncDef, evaluate_block


@dataclass(frozen=True)
class ExactDivision:
    """p^nu || n + shift."""

    p: int
    nu: int = 1
    shift: int = 0


@dataclass(frozen=True)
class Coprime:
    """gcd(n + shift, p) = 1."""

    p: int
    shift: int = 0


Constraint = ExactDivision | Coprime


@dataclass
class DensityPrediction:
    constraints: tuple
    sparse_set: tuple[int, ...]
    forbidden: dict[int, int]  # r_p per sparse prime
    value: Fraction
    degenerate: bool = False

    def as_string(self) -> str:
        return f"{self.value.numerator}/{self.value.denominator}"


def _v(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def local_density(p: int, conditions: Sequence[Constraint]) -> Fraction:
    """Exact density of n satisfying all conditions at the single prime p.

    Conditions only depend on n mod p^K with K one more than the largest
    exact exponent, so the density is a count over those residues.
    """
    K = 1 + max((c.nu for c in conditions if isinstance(c, ExactDivision)), default=0)
    mod = p**K
    hits = 0
    for n in range(mod):
        ok = True
        for c in conditions:
            # v_p(n + s) computed on a representative in [mod, 2 mod) to avoid 0
            v = _v((n + c.shift) % mod or mod, p)
            want = c.nu if isinstance(c, ExactDivision) else 0
            if min(v, K) != want:
                ok = False
                break
        hits += ok
    return Fraction(hits, mod)


def zero_dim_density(
    constraints: Iterable[Constraint] = (),
    S: Iterable[int] = (),
    shifts: Sequence[int] = (0,),
) -> DensityPrediction:
    """Density of n with the given exact-division constraints and (n + s, S) = 1 for s in shifts.

    Each exact-division constraint p^nu || n + s contributes (1/p^nu)(1 - 1/p);
    each p in S contributes 1 - r_p/p with r_p the number of distinct residues
    -s mod p.  Constraint primes must be distinct and disjoint from S.
    """
    cons = tuple(constraints)
    Sp = tuple(sorted(set(int(p) for p in S)))
    seen: set[int] = set()
    for c in cons:
        if c.p in seen:
            raise ConstraintConflictError(f"two constraints at the prime {c.p}; merge them first")
        seen.add(c.p)
    clash = seen.intersection(Sp)
    if clash:
        raise ConstraintConflictError(f"constraint primes {sorted(clash)} also lie in S")
    value = Fraction(1)
    for c in cons:
        if isinstance(c, ExactDivision):
            value *= Fraction(c.p - 1, c.p ** (c.nu + 1))
        else:
            value *= Fraction(c.p - 1, c.p)
    forbidden: dict[int, int] = {}
    degenerate = False
    for p in Sp:
        r = len({(-s) % p for s in shifts})
        forbidden[p] = r
        if r >= p:
            degenerate = True
            value = Fraction(0)
            break
        value *= Fraction(p - r, p)
    return DensityPrediction(cons, Sp, forbidden, value, degenerate)


def combined_density(conditions: Iterable[Constraint]) -> Fraction:
    """Product of exact local densities, grouping conditions by prime (CRT)."""
    by_prime: dict[int, list] = {}
    for c in conditions:
        by_prime.setdefault(c.p, []).append(c)
    value = Fraction(1)
    for p, cs in sorted(by_prime.items()):
        if all(isinstance(c, Coprime) for c in cs):
            r = len({(-c.shift) % p for c in cs})
            value *= Fraction(max(p - r, 0), p)
        else:
            value *= local_density(p, cs)
    return value


def brute_force_density(conditions: Iterable[Constraint], X: int) -> int:
    """Count of n <= X satisfying every condition, by direct divisibility tests."""
    n = np.arange(1, X + 1, dtype=np.int64)
    ok = np.ones(X, dtype=bool)
    for c in conditions:
        m = n + c.shift
        if isinstance(c, Coprime):
            ok &= m % c.p != 0
        else:
            q = c.p**c.nu
            ok &= (m % q == 0) & (m % (q * c.p) != 0)
    return int(np.count_nonzero(ok))


# ---------------------------------------------------------------------------
# S-parts


def _prime_list(S: Iterable[int] | RuleSet | None, X: int) -> np.ndarray:
    ps = primes_up_to(X)
    ps = ps[ps <= X]
    return ps[set_mask(S, ps)]


def n_S(n: int, S: Iterable[int] | RuleSet | None) -> int:
    """Prod_{p in S} p^{nu_p(n)}."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    members = S if isinstance(S, RuleSet) else frozenset(S or ())
    out = 1
    for p, nu in factorize(n):
        if p in members:
            out *= p**nu
    return out


def n_S_block(lo: int, hi: int, S: Iterable[int] | RuleSet | None) -> np.ndarray:
    """n_S(lo), ..., n_S(hi) as int64."""
    size = hi - lo + 1
    out = np.ones(size, dtype=np.int64)
    for p in _prime_list(S, hi).tolist():
        pk = p
        while pk <= hi:
            first = -(-lo // pk) * pk
            if first > hi:
                break
            out[first - lo :: pk] *= p
            pk *= p
    return out


def big_S_part_count(X: int, Z: int, S: Iterable[int] | RuleSet | None, block: int = DEFAULT_BLOCK) -> int:
    """N_S(X; Z) = #{n <= X : n_S > Z}."""
    if X < 1 or Z < 1:
        raise InvalidRangeError("need X >= 1 and Z >= 1")
    if Z >= X:
        return 0
    S = S if isinstance(S, RuleSet) else tuple(S or ())
    return sum(int(np.count_nonzero(n_S_block(lo, hi, S) > Z)) for lo, hi in segments(1, X, block))


def sparse_check(S: Iterable[int] | RuleSet | None, C: float, X: int) -> tuple[float, bool]:
    """Sum of 1/p^nu over the prime powers of S up to X, and whether it is <= C."""
    if X < 2:
        raise InvalidRangeError("X must be >= 2")
    qs, _, _ = prime_powers_up_to(X)
    if isinstance(S, RuleSet) or S is None:
        sel = qs[set_mask(S, qs)]
    else:
        arr = np.array(sorted(set(int(s) for s in S)), dtype=np.int64)
        sel = qs[np.isin(qs, arr)]
    total = csum(1.0 / sel.astype(np.float64)) if sel.size else 0.0
    return total, total <= C


# ---------------------------------------------------------------------------
# essentially bounded functions


@dataclass
class BoundedProbe:
    divergence_sum: float
    ones_density: float
    lower_bound: float
    ones_count: int = 0
    X: int = 0


def essentially_bounded_probe(fdef: MultFuncDef, X: int, block: int = DEFAULT_BLOCK) -> BoundedProbe:
    """Reciprocal mass where f(p^nu) != 1, density of f(n) = 1, and the sieve lower bound."""
    if X < 2:
        raise InvalidRangeError("X must be >= 2")
    ps = primes_up_to(X)
    ps = ps[ps <= X]
    vals, mags = fdef.values_at_primes(ps)
    ne1 = (vals != 1) | (mags > 0.5)
    terms = (1.0 / ps[ne1].astype(np.float64)).tolist()
    for p in ps[ps <= math.isqrt(X)].tolist():
        q, nu = p * p, 2
        while q <= X:
            if fdef.at_prime_power(p, nu) != 1:
                terms.append(1.0 / q)
            q *= p
            nu += 1
    log_prod = csum(np.log1p(-1.0 / ps[ne1].astype(np.float64)))
    ones = 0
    for lo, hi in segments(1, X, block):
        ones += int(np.count_nonzero(evaluate_block(fdef, lo, hi) == 1))
    return BoundedProbe(math.fsum(terms), ones / X, 6.0 / math.pi**2 * math.exp(log_prod), ones, X)
