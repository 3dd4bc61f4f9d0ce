"""
Prime sieves, factorization and modular arithmetic.

Everything here is exact integer arithmetic except the complex rendering of
character values.  Characters are only supported modulo odd prime powers, where
the unit group is cyclic and a character is pinned down by one exponent
against a fixed primitive root.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidRangeError,
    NonUnitError,
    UnsupportedModulusError,
)

DEFAULT_SEGMENT = 1 << 24
EULER_GAMMA = 0.57721566490153286061

_prime_cache: np.ndarray = np.array([], dtype=np.int64)
_prime_cache_limit = 1


def _eratosthenes(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_up_to(n: int) -> np.ndarray:
    """Sorted int64 array of the primes <= n (read-only, cached)."""
    global _prime_cache, _prime_cache_limit
    if n < 2:
        return np.array([], dtype=np.int64)
    if n > _prime_cache_limit:
        limit = max(n, 2 * _prime_cache_limit, 1 << 16)
        arr = _eratosthenes(limit)
        arr.setflags(write=False)
        _prime_cache, _prime_cache_limit = arr, limit
    return _prime_cache[: np.searchsorted(_prime_cache, n, side="right")]


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes p with lo <= p <= hi."""
    ps = primes_up_to(hi)
    return ps[np.searchsorted(ps, lo) :]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    r = math.isqrt(n)
    if r <= 1 << 22:
        for p in primes_up_to(r).tolist():
            if n % p == 0:
                return n == p
        return True
    from sympy import isprime

    return bool(isprime(n))


def prime_powers_up_to(X: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All prime powers p^nu <= X as parallel arrays (q, p, nu), sorted by q."""
    qs, ps, nus = [], [], []
    for p in primes_up_to(X).tolist():
        q, nu = p, 1
        while q <= X:
            qs.append(q)
            ps.append(p)
            nus.append(nu)
            q *= p
            nu += 1
    order = np.argsort(qs, kind="stable")
    return (
        np.asarray(qs, dtype=np.int64)[order],
        np.asarray(ps, dtype=np.int64)[order],
        np.asarray(nus, dtype=np.int64)[order],
    )


# ---------------------------------------------------------------------------
# smallest-prime-factor tables


@dataclass(frozen=True)
class SpfTable:
    """spf[n] is the smallest prime factor of n for 2 <= n <= range_end."""

    range_end: int
    spf: np.ndarray = field(repr=False)
    segment_size: int = DEFAULT_SEGMENT

    def __getitem__(self, n: int) -> int:
        if not 2 <= n <= self.range_end:
            raise InvalidInputError(f"{n} outside SPF table range [2, {self.range_end}]")
        return int(self.spf[n])

    def as_dict(self) -> dict[int, int]:
        return {n: int(self.spf[n]) for n in range(2, self.range_end + 1)}


def spf_segment(lo: int, hi: int, small_primes: np.ndarray | None = None) -> np.ndarray:
    """Smallest prime factors of lo..hi (inclusive, lo >= 2)."""
    if small_primes is None:
        small_primes = primes_up_to(math.isqrt(hi))
    seg = np.zeros(hi - lo + 1, dtype=np.int64)
    for p in small_primes.tolist():
        start = max(p * p, -(-lo // p) * p)
        if start > hi:
            continue
        view = seg[start - lo :: p]
        view[view == 0] = p
    unset = seg == 0
    seg[unset] = np.arange(lo, hi + 1, dtype=np.int64)[unset]
    return seg


def build_spf(X: int, segment_size: int = DEFAULT_SEGMENT) -> SpfTable:
    """Segmented smallest-prime-factor sieve over [2, X].

    Working memory beyond the output table is one segment plus the primes
    up to sqrt(X).
    """
    if X < 2:
        raise InvalidRangeError(f"SPF table needs X >= 2, got {X}")
    if segment_size < 1:
        raise InvalidRangeError("segment_size must be positive")
    dtype = np.uint32 if X < 1 << 32 else np.uint64
    spf = np.zeros(X + 1, dtype=dtype)
    small = primes_up_to(math.isqrt(X))
    lo = 2
    while lo <= X:
        hi = min(X, lo + segment_size - 1)
        spf[lo : hi + 1] = spf_segment(lo, hi, small)
        lo = hi + 1
    spf.setflags(write=False)
    return SpfTable(X, spf, segment_size)


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as increasing (prime, exponent) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def value(self) -> int:
        out = 1
        for p, e in self.pairs:
            out *= p**e
        return out

    def nu(self, p: int) -> int:
        """Exponent of p (0 if p does not divide)."""
        for q, e in self.pairs:
            if q == p:
                return e
        return 0

    @property
    def largest_prime(self) -> int:
        return self.pairs[-1][0] if self.pairs else 1


def _trial_factor(n: int) -> list[tuple[int, int]]:
    pairs = []
    r = math.isqrt(n)
    for p in primes_up_to(min(r, 1 << 22)).tolist():
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            pairs.append((p, e))
    if n > 1:
        if n > (1 << 44) and not is_prime(n):
            # beyond the cached primes: keep trial dividing by odd numbers
            d = (1 << 22) + 1
            while d * d <= n:
                if n % d == 0:
                    e = 0
                    while n % d == 0:
                        n //= d
                        e += 1
                    pairs.append((d, e))
                d += 2
            if n > 1:
                pairs.append((n, 1))
        else:
            pairs.append((n, 1))
    return pairs


def factorize(n: int, table: SpfTable | None = None) -> Factorization:
    """Factor n >= 1, through the SPF table when given, else by trial division."""
    n = int(n)
    if n < 1:
        raise InvalidInputError(f"cannot factor {n}")
    if n == 1:
        return Factorization(())
    if table is None:
        return Factorization(tuple(_trial_factor(n)))
    if n > table.range_end:
        raise InvalidInputError(f"{n} exceeds SPF table range {table.range_end}")
    pairs: list[tuple[int, int]] = []
    spf = table.spf
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        pairs.append((p, e))
    return Factorization(tuple(pairs))


def multiply(pairs: Iterable[tuple[int, int]]) -> int:
    out = 1
    for p, e in pairs:
        out *= p**e
    return out


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def largest_prime_factor(n: int) -> int:
    """P^+(n), with P^+(1) = 1."""
    if n == 0:
        raise InvalidInputError("P^+(0) is undefined")
    return factorize(abs(n)).largest_prime


def nu_p(n: int, p: int) -> int:
    """Exponent of the prime p in n (0 when p does not divide n)."""
    if n == 0:
        raise InvalidInputError("valuation of 0 is undefined")
    n, e = abs(n), 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# ---------------------------------------------------------------------------
# modular arithmetic


def odd_prime_power(q: int) -> tuple[int, int]:
    """Return (ell, e) with q = ell^e, ell an odd prime; raise otherwise."""
    if q < 3 or q % 2 == 0:
        raise UnsupportedModulusError(f"modulus {q} is not an odd prime power")
    f = factorize(q)
    if len(f) != 1:
        raise UnsupportedModulusError(f"modulus {q} is not a prime power")
    return f.pairs[0]


def _require_prime(ell: int) -> None:
    if not is_prime(ell):
        raise UnsupportedModulusError(f"{ell} is not prime")


def multiplicative_order(m: int, ell: int) -> int:
    """ord_ell(m): least k >= 1 with m^k = 1 (mod ell), via divisors of ell - 1."""
    _require_prime(ell)
    m %= ell
    if m == 0:
        raise NonUnitError(f"{ell} divides {m}")
    k = ell - 1
    for p, _ in factorize(ell - 1):
        while k % p == 0 and pow(m, k // p, ell) == 1:
            k //= p
    return k


def order_table(ell: int) -> np.ndarray:
    """ord_ell(r) for every residue r (entry 0 holds 0)."""
    _require_prime(ell)
    u = primitive_root(ell)
    ind = index_table(ell, u)
    n = ell - 1
    out = np.zeros(ell, dtype=np.int64)
    idx = ind[1:]
    out[1:] = n // np.gcd(idx, n)
    return out


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest u >= 2 generating (Z/qZ)^x, q an odd prime power."""
    ell, e = odd_prime_power(q)
    phi = q - q // ell
    factors = [p for p, _ in factorize(phi)]
    for u in range(2, q):
        if u % ell == 0:
            continue
        if all(pow(u, phi // p, q) != 1 for p in factors):
            return u
    raise AssertionError("cyclic group without generator")  # unreachable


@lru_cache(maxsize=64)
def _index_table(q: int, u: int) -> np.ndarray:
    ell, _ = odd_prime_power(q)
    phi = q - q // ell
    table = np.full(q, -1, dtype=np.int64)
    x = 1
    for k in range(phi):
        if table[x] != -1:
            raise InvalidInputError(f"{u} is not a primitive root mod {q}")
        table[x] = k
        x = x * u % q
    table.setflags(write=False)
    return table


def index_table(q: int, u: int | None = None) -> np.ndarray:
    """Discrete logs base u of every residue mod q; -1 marks non-units."""
    return _index_table(q, primitive_root(q) if u is None else u)


def discrete_log(a: int, q: int, u: int | None = None) -> int:
    """theta in [0, phi(q)) with u^theta = a (mod q)."""
    ell, _ = odd_prime_power(q)
    if a % ell == 0:
        raise NonUnitError(f"{a} is not a unit mod {q}")
    return int(index_table(q, u)[a % q])


# ---------------------------------------------------------------------------
# Dirichlet characters modulo odd prime powers


@dataclass(frozen=True)
class DirichletCharacter:
    """chi(u^theta) = exp(2 pi i j theta / phi(q)); chi vanishes off the units."""

    modulus: int
    generator: int
    exponent: int
    index_table: np.ndarray = field(repr=False, compare=False)

    @property
    def phi(self) -> int:
        ell, _ = odd_prime_power(self.modulus)
        return self.modulus - self.modulus // ell

    @property
    def is_principal(self) -> bool:
        return self.exponent % self.phi == 0

    @property
    def is_real(self) -> bool:
        return (2 * self.exponent) % self.phi == 0

    def exponent_of(self, n: int) -> int | None:
        """Exact value as k with chi(n) = e(k / phi); None when chi(n) = 0."""
        idx = int(self.index_table[n % self.modulus])
        if idx < 0:
            return None
        return self.exponent * idx % self.phi

    def exponents(self, ns: np.ndarray) -> np.ndarray:
        """Vectorized exponent form; -1 marks chi(n) = 0."""
        idx = self.index_table[np.asarray(ns, dtype=np.int64) % self.modulus]
        out = self.exponent * idx % self.phi
        return np.where(idx < 0, -1, out)

    def values(self, ns: np.ndarray) -> np.ndarray:
        e = self.exponents(ns)
        vals = np.exp(2j * np.pi * e / self.phi)
        return np.where(e < 0, 0, vals)

    def __call__(self, n: int) -> complex:
        return char_eval(self, n)

    def conj(self) -> "DirichletCharacter":
        return character(self.modulus, -self.exponent % self.phi, self.generator)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus or other.generator != self.generator:
            raise UnsupportedModulusError("characters must share modulus and generator")
        return character(self.modulus, (self.exponent + other.exponent) % self.phi, self.generator)


def character(q: int, j: int, u: int | None = None) -> DirichletCharacter:
    ell, _ = odd_prime_power(q)
    phi = q - q // ell
    u = primitive_root(q) if u is None else u
    return DirichletCharacter(q, u, j % phi, index_table(q, u))


def characters(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q; index j is the power of the generator chi_q."""
    ell, _ = odd_prime_power(q)
    return [character(q, j) for j in range(q - q // ell)]


def real_character(q: int) -> DirichletCharacter:
    """The quadratic character modulo an odd prime power."""
    ell, _ = odd_prime_power(q)
    return character(q, (q - q // ell) // 2)


def char_eval(chi: DirichletCharacter, n: int) -> complex:
    k = chi.exponent_of(n)
    if k is None:
        return 0j
    if k == 0:
        return 1 + 0j
    return cmath.exp(2j * math.pi * k / chi.phi)


def root_of_unity_sum(exponents: Sequence[int], order: int) -> int | None:
    """Exact value of sum_k e(exponents[k] / order) when it is a rational integer.

    The sum is reduced modulo the cyclotomic polynomial of the given order,
    so the answer is exact.  Returns None when the sum is not an integer.
    """
    from sympy import Poly, cyclotomic_poly, symbols

    x = symbols("x")
    counts = [0] * order
    for e in exponents:
        counts[e % order] += 1
    if order == 1:
        return counts[0]
    poly = Poly(list(reversed(counts)), x)
    rem = poly.rem(Poly(cyclotomic_poly(order, x), x))
    coeffs = rem.all_coeffs()
    if rem.degree() <= 0:
        return int(coeffs[-1]) if coeffs else 0
    return None


# ---------------------------------------------------------------------------
# sets of primes / prime powers given by a rule


@dataclass(frozen=True)
class RuleSet:
    """A possibly infinite set of positive integers described by a vectorized rule."""

    rule: Callable[[np.ndarray], np.ndarray]
    name: str = "rule"

    def mask(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(self.rule(np.asarray(values, dtype=np.int64)), dtype=bool)

    def __contains__(self, n: int) -> bool:
        return bool(self.mask(np.array([n]))[0])


def _is_prime_mask(v: np.ndarray) -> np.ndarray:
    if v.size == 0:
        return np.zeros(v.shape, dtype=bool)
    return np.isin(v, primes_up_to(max(int(v.max()), 2)))


def all_primes() -> RuleSet:
    return RuleSet(_is_prime_mask, "all primes")


def primes_in_class(r: int, q: int) -> RuleSet:
    return RuleSet(lambda v: (v % q == r % q) & _is_prime_mask(v), f"primes = {r} mod {q}")


def prime_squares() -> RuleSet:
    """Prime squares p^2."""

    def rule(v: np.ndarray) -> np.ndarray:
        r = np.round(np.sqrt(v.astype(np.float64))).astype(np.int64)
        return (r * r == v) & _is_prime_mask(r)

    return RuleSet(rule, "prime squares")


def set_mask(S: Iterable[int] | RuleSet | None, values: np.ndarray) -> np.ndarray:
    """Membership of each entry of values in S (finite collection or RuleSet)."""
    values = np.asarray(values, dtype=np.int64)
    if S is None:
        return np.zeros(values.shape, dtype=bool)
    if isinstance(S, RuleSet):
        return S.mask(values)
    arr = np.fromiter((int(s) for s in S), dtype=np.int64)
    if arr.size == 0:
        return np.zeros(values.shape, dtype=bool)
    return np.isin(values, arr)


# ---------------------------------------------------------------------------
# numerics


def harmonic_number(x: int) -> float:
    """H(x) = sum_{n <= x} 1/n."""
    x = int(x)
    if x < 1:
        return 0.0
    if x <= 1000:
        return math.fsum(1.0 / n for n in range(1, x + 1))
    inv = 1.0 / x
    inv2 = inv * inv
    return math.log(x) + EULER_GAMMA + 0.5 * inv - inv2 / 12 + inv2 * inv2 / 120


def csum(values: np.ndarray | Iterable[float]) -> float:
    """Compensated (exactly rounded) float summation."""
    if isinstance(values, np.ndarray):
        return math.fsum(values.tolist())
    return math.fsum(values)


def segments(lo: int, hi: int, size: int) -> Iterator[tuple[int, int]]:
    """Consecutive inclusive blocks covering [lo, hi]."""
    while lo <= hi:
        end = min(hi, lo + size - 1)
        yield lo, end
        lo = end + 1
