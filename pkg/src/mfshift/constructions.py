"""
Explicit example functions with prescribed shifted-value behaviour, the
random prime set T, and exact verification of the claimed properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .arith import is_prime, largest_prime_factor, primes_up_to
from .errors import InvalidConstructionError, InvalidRangeError
from .functions import (
    AdditiveFuncDef,
    MultFuncDef,
    evaluate,
    evaluate_additive_block,
    evaluate_block,
)
from .sieve_density import Coprime, ExactDivision, local_density


def _odd_prime_set(S: Iterable[int], what: str = "S") -> frozenset[int]:
    out = frozenset(int(p) for p in S)
    bad = sorted(p for p in out if p == 2 or not is_prime(p))
    if bad:
        raise InvalidConstructionError(f"{what} must consist of odd primes, got {bad[:5]}")
    return out


def build_sparse_example(S: Iterable[int], p1: int, p2: int, b: int) -> MultFuncDef:
    """f(p) = p generically, b*p at p1 and p2, and 1 on S (completely multiplicative).

    With S sparse, f(n+1) = f(n) + b whenever p1 || n and p2 || n+1 and
    n(n+1) is coprime to S.
    """
    S = _odd_prime_set(S)
    if p1 == p2:
        raise InvalidConstructionError("p1 and p2 must be distinct")
    if not (is_prime(p1) and is_prime(p2)):
        raise InvalidConstructionError("p1 and p2 must be prime")
    if p1 in S or p2 in S:
        raise InvalidConstructionError("p1, p2 must lie outside S")
    if b < 1:
        raise InvalidConstructionError("b must be a positive integer")
    exc = {p: 1 for p in S}
    exc.update({p1: b * p1, p2: b * p2})
    return MultFuncDef("identity", exceptions=exc, name=f"sparse({p1},{p2},b={b})")


def build_divisor_example(a: int, d: int, b: int, S: Iterable[int], p1: int, p2: int) -> MultFuncDef:
    """f(p) = p*b/a at p1 and p2, 1 on S, p elsewhere; needs a | b and (p1 p2, a) = 1."""
    S = _odd_prime_set(S)
    if a < 1 or d < 1 or a % d:
        raise InvalidConstructionError("need a >= 1 and d | a")
    if b == 0 or b % a:
        raise InvalidConstructionError(f"a={a} must divide b={b}")
    if p1 == p2 or not (is_prime(p1) and is_prime(p2)):
        raise InvalidConstructionError("p1, p2 must be distinct primes")
    if math.gcd(p1 * p2, a) != 1:
        raise InvalidConstructionError("p1 p2 must be coprime to a")
    if p1 in S or p2 in S:
        raise InvalidConstructionError("p1, p2 must lie outside S")
    q = b // a
    exc = {p: 1 for p in S}
    exc.update({p1: p1 * q, p2: p2 * q})
    return MultFuncDef("identity", exceptions=exc, name=f"divisor(a={a},b={b})")


# ---------------------------------------------------------------------------
# converse construction


@dataclass(frozen=True)
class ConverseParams:
    a: int
    d: int
    b: int
    S: frozenset[int]
    T: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "S", _odd_prime_set(self.S))
        object.__setattr__(self, "T", frozenset(int(t) for t in self.T))
        a, d, b = self.a, self.d, self.b
        if a == 0 or d < 1 or a % d:
            raise InvalidConstructionError("need a != 0 and a positive divisor d of a")
        if b % (a // d):
            raise InvalidConstructionError(f"a/d={a // d} must divide b={b}")
        if b == a // d:
            raise InvalidConstructionError("b = a/d is excluded")
        if b == 0:
            raise InvalidConstructionError("b must be nonzero")
        missing = [p for p, _ in _fac(d) if p not in self.S]
        if missing:
            raise InvalidConstructionError(f"S must contain the primes dividing d, missing {missing}")
        if len(self.S_d) < 2:
            raise InvalidConstructionError("S needs at least two primes not dividing d")
        if self.S & self.T:
            raise InvalidConstructionError("S and T must be disjoint")

    @property
    def k(self) -> int:
        return self.d * self.b // self.a

    @property
    def d_tilde(self) -> int:
        return math.prod(p for p, nu in _fac(self.d) if nu == 1)

    @property
    def anchor(self) -> int | None:
        """P^+(d~), or None when d~ = 1."""
        return largest_prime_factor(self.d_tilde) if self.d_tilde > 1 else None

    @property
    def S_d(self) -> frozenset[int]:
        return frozenset(p for p in self.S if self.d % p)


def _fac(n: int) -> list[tuple[int, int]]:
    from .arith import factorize

    return list(factorize(n))


@dataclass
class ConverseBuild:
    fdef: MultFuncDef
    params: ConverseParams
    anchor: int | None
    anchor_value: int
    notes: list[str] = field(default_factory=list)


def build_converse(params: ConverseParams) -> ConverseBuild:
    """Completely multiplicative f with f(n+a) = f(n) + b on the set N'.

    f(p) = lambda_T(p) p off S, f(P^+(d~)) = P^+(|k|), f(p) = p k / f(P^+(d~))
    on S_d = S minus the primes of d, and f(p) = 1 at the remaining primes of d.
    When d~ = 1 there is no anchor prime: the k-factor is carried by S_d
    directly (f(p) = p k) and every prime of d maps to 1, which keeps
    f(d) = 1 | b.
    """
    k = params.k
    anchor = params.anchor
    notes: list[str] = []
    exc: dict[int, int] = {}
    if anchor is None:
        fa = 1
        notes.append("d~ = 1: no anchor prime; S_d carries the full factor k")
    else:
        fa = largest_prime_factor(abs(k))
        exc[anchor] = fa
    for p in params.S_d:
        exc[p] = p * k // fa
    for p, _ in _fac(params.d):
        if p != anchor:
            exc[p] = 1
    clash = sorted(p for p in params.S if abs(exc[p]) == p)
    if clash:
        raise InvalidConstructionError(
            f"parameters give |f(p)| = p on S at {clash} (k={k}, f(anchor)={fa}); rejected"
        )
    fdef = MultFuncDef("signed-identity", T=params.T, exceptions=exc, name=f"converse(a={params.a},d={params.d},b={params.b})")
    return ConverseBuild(fdef, params, anchor, fa, notes)


# ---------------------------------------------------------------------------
# random T

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """Output number c of the SplitMix64 stream seeded with seed, for each counter c.

    The generator is counter-based, so stream position p is keyed by the
    prime p itself and any subset of primes can be drawn independently.
    """
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + counters.astype(np.uint64) * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def sample_random_T(S: Iterable[int], X: int, seed: int) -> frozenset[int]:
    """T = {p <= X, p not in S : top bit of SplitMix64(seed)[p] is 1}."""
    if X < 2:
        raise InvalidRangeError("X must be >= 2")
    ps = primes_up_to(X)
    ps = ps[ps <= X]
    Sarr = np.array(sorted(set(int(s) for s in S)), dtype=np.int64)
    if Sarr.size:
        ps = ps[~np.isin(ps, Sarr)]
    bits = splitmix64(seed, ps) >> np.uint64(63)
    return frozenset(ps[bits == 1].tolist())


# ---------------------------------------------------------------------------
# verification


@dataclass
class ConverseReport:
    items: dict[str, bool]
    failures: list[str]
    X: int
    members: np.ndarray  # N' cap [1, X]
    violations: list[int]
    prediction: Fraction

    @property
    def ok(self) -> bool:
        return all(self.items.values()) and not self.violations

    @property
    def density(self) -> float:
        return self.members.size / self.X if self.X else 0.0

    def rows(self) -> list[dict]:
        rows = [{"check": f"item ({k})", "value": int(v)} for k, v in self.items.items()]
        rows += [
            {"check": "N' count", "value": int(self.members.size)},
            {"check": "violations", "value": len(self.violations)},
            {"check": "N' density", "value": self.density},
            {"check": "predicted density", "value": f"{self.prediction.numerator}/{self.prediction.denominator}"},
        ]
        return rows


def _multiplicity_counter(P: frozenset[int], name: str) -> AdditiveFuncDef:
    arr = np.array(sorted(P), dtype=np.int64)
    return AdditiveFuncDef(lambda p, nu: nu if p in P else 0, lambda ps: np.isin(ps, arr).astype(np.int64), name)


def in_N_T(params: ConverseParams, hi: int) -> np.ndarray:
    """Membership of 0..hi in N_T = {d p m : p in S_d, (m, S) = 1, lambda_T(m) = +1}."""
    out = np.zeros(hi + 1, dtype=bool)
    top = hi // params.d
    if top < 1:
        return out
    om_S = evaluate_additive_block(_multiplicity_counter(params.S, "Omega_S"), 1, top)
    om_Sd = evaluate_additive_block(_multiplicity_counter(params.S_d, "Omega_Sd"), 1, top)
    om_T = evaluate_additive_block(_multiplicity_counter(params.T, "Omega_T"), 1, top)
    ok = (om_S == 1) & (om_Sd == 1) & (om_T % 2 == 0)
    out[params.d * (np.flatnonzero(ok) + 1)] = True
    return out


def converse_prediction(params: ConverseParams) -> Fraction:
    """Predicted natural density of N' from exact local densities.

    Sum over ordered pairs (p1, p2) of S_d of the density of n' with
    S-part of n' equal to p1 and S-part of n' + a/d equal to p2, divided by d;
    a factor 1/4 accounts for the two sign conditions when T is nonempty.
    """
    c = params.a // params.d
    S = sorted(params.S)

    def coprime_both(q: int) -> Fraction:
        return Fraction(q - len({0, (-c) % q}), q)

    base = math.prod((coprime_both(q) for q in S), start=Fraction(1))
    total = Fraction(0)
    for p1 in sorted(params.S_d):
        for p2 in sorted(params.S_d):
            if p1 == p2:
                loc = local_density(p1, [ExactDivision(p1, 1, 0), ExactDivision(p1, 1, c)])
                total += base / coprime_both(p1) * loc
            else:
                l1 = local_density(p1, [ExactDivision(p1, 1, 0), Coprime(p1, c)])
                l2 = local_density(p2, [Coprime(p2, 0), ExactDivision(p2, 1, c)])
                total += base / coprime_both(p1) / coprime_both(p2) * l1 * l2
    total /= params.d
    if params.T:
        total /= 4
    return total


def verify_converse(fdef: MultFuncDef, params: ConverseParams, X: int) -> ConverseReport:
    """Exact checks of items (i)-(iii) and of N' in N_{f,a,b} up to X."""
    if X < 0:
        raise InvalidRangeError("X must be >= 0")
    failures: list[str] = []
    S, T = params.S, params.T
    a, b, d = params.a, params.b, params.d

    # (i) f(p) = lambda_T(p) p off S, for primes up to the relevant range
    Y = max([X + abs(a), 100] + list(T) + list(S))
    ps = primes_up_to(Y)
    ps = ps[(ps <= Y) & ~np.isin(ps, np.array(sorted(S), dtype=np.int64))]
    vals, mags = fdef.values_at_primes(ps)
    sign = np.where(np.isin(ps, np.array(sorted(T), dtype=np.int64)), -1, 1)
    bad = ps[(vals != sign * ps) | (mags > 62)]
    extra = [p for p, v in fdef.exceptions if p not in S and is_prime(p) and v != (-p if p in T else p)]
    item_i = bad.size == 0 and not extra
    if not item_i:
        failures.append(f"item (i): f(p) != lambda_T(p) p at {sorted(set(bad[:5].tolist()) | set(extra[:5]))}")

    # (ii) |f(p)| != p on S
    clash = sorted(p for p in S if abs(fdef.at_prime(p)) == p)
    item_ii = not clash
    if clash:
        failures.append(f"item (ii): |f(p)| = p at {clash}")

    # (iii) f(d) | b and (a/d) | b / f(d)
    fd = evaluate(fdef, d)
    item_iii = fd != 0 and b % fd == 0 and (b // fd) % (a // d) == 0
    if not item_iii:
        failures.append(f"item (iii): f(d)={fd}, b={b}, a/d={a // d}")

    violations: list[int] = []
    if X >= 1:
        hi = X + max(a, 0)
        inN = in_N_T(params, hi)
        n = np.arange(1, X + 1)
        m = n + a
        valid = (m >= 1) & (m <= hi)
        sel = np.zeros(X, dtype=bool)
        sel[valid] = inN[n[valid]] & inN[m[valid]]
        members = n[sel]
        if members.size:
            vals_all = evaluate_block(fdef, 1, hi)
            lhs = vals_all[members + a - 1]
            rhs = vals_all[members - 1] + b
            violations = members[lhs != rhs].tolist()
            if violations:
                failures.append(f"{len(violations)} members of N' violate f(n+a) = f(n) + b, first {violations[:5]}")
    else:
        members = np.empty(0, dtype=np.int64)
    items = {"i": item_i, "ii": item_ii, "iii": item_iii}
    return ConverseReport(items, failures, X, members, violations, converse_prediction(params))
