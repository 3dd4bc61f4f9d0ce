"""
Local power maps modulo primes: recover g with f(p)^D = p^g (mod l) at primes,
scan moduli for Fabrykowski-Subbarao behaviour, and related prime statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import (
    _require_prime,
    csum,
    euler_phi,
    index_table,
    order_table,
    primes_up_to,
)
from .errors import InvalidRangeError, UnsupportedModulusError
from .functions import MultFuncDef, powmod

MODES = ("exact", "weighted")


@dataclass(frozen=True)
class LocalPowerResult:
    ell: int
    D: int
    g: int | None
    exceptions: frozenset[int]
    exception_weight: float
    mode: str
    X: int
    status: str = "unique"  # exact mode: unique | none | ambiguous
    candidates: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.g is not None

    def row(self) -> dict:
        return {"ell": self.ell, "g": "" if self.g is None else self.g, "exception_weight": self.exception_weight}


def _check_modulus(ell: int) -> None:
    if ell < 3 or ell % 2 == 0:
        raise UnsupportedModulusError(f"modulus {ell} must be an odd prime")
    _require_prime(ell)


def _primes_upto(X: int) -> np.ndarray:
    ps = primes_up_to(X)
    return ps[ps <= X]


def _crt(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """x = r1 (m1), x = r2 (m2) -> (r, lcm) or None if incompatible."""
    g = math.gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    l = m1 // g * m2
    if m1 == 1:
        return r2 % m2, m2
    t = (r2 - r1) // g * pow(m1 // g, -1, m2 // g) % (m2 // g)
    return (r1 + m1 * t) % l, l


def _indices(fdef: MultFuncDef, D: int, ell: int, X: int):
    """Primes p <= X (p != ell), their indices, indices of f(p)^D, and a zero mask."""
    ps = _primes_upto(X)
    ps = ps[ps != ell]
    ind = index_table(ell)
    fp = powmod(fdef.values_at_primes_mod(ps, ell), D, ell)
    zero = fp == 0
    a = ind[ps % ell]
    c = np.where(zero, -1, ind[fp])
    return ps, a, c, zero


def _solve_class(a: int, c: int, m: int) -> tuple[int, int] | None:
    """Solutions of g a = c (mod m) as the class g = g0 (mod m / gcd(a, m))."""
    h = math.gcd(a, m)
    if c % h:
        return None
    mod = m // h
    if mod == 1:
        return 0, 1
    return (c // h) * pow(a // h, -1, mod) % mod, mod


def find_local_power_exponent(
    fdef: MultFuncDef, D: int, ell: int, X: int, mode: str = "exact"
) -> LocalPowerResult:
    """Exponent g in [0, ell-1) with f(p)^D = p^g (mod ell) at primes p <= X, p != ell.

    exact: intersect the congruences g ind(p) = ind(f(p)^D) (mod ell-1) over all
    primes with ell not dividing f(p); status is unique, none or ambiguous.
    weighted: g minimizing the reciprocal mass of violating primes (primes with
    ell | f(p) violate for every g); ties go to the smallest g.
    """
    _check_modulus(ell)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if D < 1:
        raise ValueError("D must be positive")
    if X < ell:
        raise InvalidRangeError("X must be >= ell")
    m = ell - 1
    ps, a, c, zero = _indices(fdef, D, ell, X)
    pairs = np.unique(np.stack([a[~zero], c[~zero]], axis=1), axis=0) if (~zero).any() else np.empty((0, 2), np.int64)

    if mode == "exact":
        r, mod = 0, 1
        for ai, ci in pairs.tolist():
            cls = _solve_class(ai, ci, m)
            r_mod = None if cls is None else _crt(r, mod, *cls)
            if r_mod is None:
                return LocalPowerResult(ell, D, None, frozenset(), 0.0, mode, X, "none")
            r, mod = r_mod
        cands = tuple(range(r % mod, m, mod))
        if len(cands) > 1:
            return LocalPowerResult(ell, D, None, frozenset(), 0.0, mode, X, "ambiguous", cands)
        g = cands[0]
        _verify(fdef, D, ell, ps[~zero], g)
        return LocalPowerResult(ell, D, g, frozenset(), 0.0, mode, X, "unique", cands)

    # weighted: satisfied mass per g from the coset of each (ind p, ind f(p)^D) class
    w = 1.0 / ps.astype(np.float64)
    satisfied = np.zeros(m)
    if pairs.size:
        key = a[~zero] * m + c[~zero]
        uk, inv = np.unique(key, return_inverse=True)
        mass = np.bincount(inv, weights=w[~zero])
        for k, ms in zip(uk.tolist(), mass.tolist()):
            cls = _solve_class(k // m, k % m, m)
            if cls is not None:
                satisfied[cls[0] :: cls[1]] += ms
    weight = float(w.sum()) - satisfied
    best = float(weight.min())
    near = np.flatnonzero(weight <= best + 1e-9).tolist()
    scored = []
    for g in near:
        bad = _violators(ps, a, c, zero, g, m)
        scored.append((csum(w[bad]), g, bad))
    low = min(s[0] for s in scored)
    wt, g, bad = min((s for s in scored if s[0] <= low + 1e-12), key=lambda s: s[1])
    return LocalPowerResult(ell, D, g, frozenset(ps[bad].tolist()), wt, mode, X, "unique", (g,))


def _violators(ps, a, c, zero, g: int, m: int) -> np.ndarray:
    return zero | ((g * a - c) % m != 0)


def _verify(fdef: MultFuncDef, D: int, ell: int, ps: np.ndarray, g: int) -> None:
    """Independent check f(p)^D = p^g (mod ell) by modular powering."""
    lhs = powmod(fdef.values_at_primes_mod(ps, ell), D, ell)
    rhs = powmod(ps % ell, g, ell)
    if not np.array_equal(lhs, rhs):
        raise AssertionError(f"congruence re-check failed for ell={ell}, g={g}")


def check_congruence(fdef: MultFuncDef, result: LocalPowerResult) -> bool:
    """Every prime p <= X outside the exceptions (p != ell, ell not dividing f(p)) satisfies the congruence."""
    ps = _primes_upto(result.X)
    ps = ps[ps != result.ell]
    if result.exceptions:
        ps = ps[~np.isin(ps, np.array(sorted(result.exceptions), dtype=np.int64))]
    lhs = powmod(fdef.values_at_primes_mod(ps, result.ell), result.D, result.ell)
    keep = lhs != 0
    rhs = powmod(ps % result.ell, result.g, result.ell)
    return bool(np.array_equal(lhs[keep], rhs[keep]))


# ---------------------------------------------------------------------------
# scans over moduli


@dataclass
class FsScan:
    L: int
    X: int
    entries: list[tuple[int, int]]  # (ell, g) where exact mode succeeded
    failed: list[int]
    ambiguous: list[int]
    global_k: int | None  # smallest k with g = k (mod ell-1) at every listed ell
    global_power: bool  # f(p) = p^global_k at every prime p <= X

    def rows(self) -> list[dict]:
        return [{"ell": e, "g": g, "exception_weight": 0.0} for e, g in self.entries]


def fs_scan(fdef: MultFuncDef, L: int, X: int) -> FsScan:
    """Exact-mode exponent recovery at every odd prime ell <= L."""
    if L < 3:
        raise InvalidRangeError("L must be >= 3")
    entries, failed, amb = [], [], []
    for ell in _primes_upto(L).tolist():
        if ell == 2:
            continue
        res = find_local_power_exponent(fdef, 1, ell, max(X, ell), "exact")
        if res.ok:
            entries.append((ell, res.g))
        elif res.status == "ambiguous":
            amb.append(ell)
        else:
            failed.append(ell)
    k: int | None = None
    if entries:
        r, mod = 0, 1
        for ell, g in entries:
            nxt = _crt(r, mod, g, ell - 1)
            if nxt is None:
                r = None
                break
            r, mod = nxt
        k = r
    glob = False
    if k is not None and not failed and not amb:
        ps = _primes_upto(X)
        vals, mags = fdef.values_at_primes(ps)
        expect = k * np.log2(ps.astype(np.float64))
        glob = bool(np.allclose(mags, expect, atol=1e-9))
        if glob:
            ok_int = expect <= 62
            glob = bool(np.array_equal(vals[ok_int], ps[ok_int] ** k)) and all(
                fdef.at_prime(p) == p**k for p in ps[~ok_int][:200].tolist()
            )
    return FsScan(L, X, entries, failed, amb, k, glob)


@dataclass
class SfDensity:
    X: int
    members: np.ndarray
    reciprocal_sum: float
    dirichlet_estimate: float

    def rows(self) -> list[dict]:
        return [{"ell": int(e)} for e in self.members.tolist()]


def s_f_density(fdef: MultFuncDef, X: int) -> SfDensity:
    """S_f = {primes ell : ell | f(ell)} up to X, with sum 1/ell and sum / loglog X."""
    if X < 2:
        raise InvalidRangeError("X must be >= 2")
    ps = _primes_upto(X)
    hit = ps[fdef.values_at_primes_mod(ps, ps) == 0]
    s = csum(1.0 / hit.astype(np.float64)) if hit.size else 0.0
    ll = math.log(math.log(X)) if X >= 3 else 0.0
    return SfDensity(X, hit, s, s / ll if ll > 0 else 0.0)


@dataclass
class Overlap:
    violating: frozenset[int]
    reciprocal_sum: float
    budget: float


def exception_overlap(results: Sequence[LocalPowerResult], P: int, tau: float) -> Overlap:
    """Primes p <= P with sum_{ell in U, p in T_ell} 1/ell > tau sum_{ell in U} 1/ell."""
    if not results:
        raise ValueError("need at least one modulus")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    U = {r.ell: r for r in results}
    budget = tau * math.fsum(1.0 / ell for ell in U)
    load: dict[int, list[float]] = {}
    for ell, r in U.items():
        for p in r.exceptions:
            if p <= P:
                load.setdefault(p, []).append(1.0 / ell)
    bad = frozenset(p for p, ws in load.items() if math.fsum(ws) > budget)
    return Overlap(bad, math.fsum(1.0 / p for p in bad), budget)


@dataclass(frozen=True)
class OrdSum:
    empirical: float
    predicted: float
    ratio: float


def ord_reciprocal_sum(ell: int, y: int, x: int) -> OrdSum:
    """Sum of 1/p over primes y < p <= x with ord_ell(p) = ell - 1, against (phi(ell-1)/(ell-1)) log(log x / log y)."""
    _check_modulus(ell)
    if y < 10 or x < y:
        raise InvalidRangeError("need 10 <= y <= x")
    if x == y:
        return OrdSum(0.0, 0.0, 1.0)
    ps = _primes_upto(x)
    ps = ps[(ps > y) & (ps % ell != 0)]
    sel = ps[order_table(ell)[ps % ell] == ell - 1]
    emp = csum(1.0 / sel.astype(np.float64))
    pred = float(primitive_root_abundance(ell)) * math.log(math.log(x) / math.log(y))
    return OrdSum(emp, pred, emp / pred if pred else 1.0)


def primitive_root_abundance(ell: int) -> Fraction:
    """phi(ell - 1) / (ell - 1)."""
    _check_modulus(ell)
    return Fraction(euler_phi(ell - 1), ell - 1)


@dataclass(frozen=True)
class PowerFit:
    r: int
    fraction: float  # share of primes p <= X with |f(p)| = p^r
    misfit_weight: float  # sum of 1/p over the others


def power_fit(fdef: MultFuncDef, r: int, X: int) -> PowerFit:
    """How often |f(p)| = p^r for a user-supplied exponent r."""
    ps = _primes_upto(X)
    vals, mags = fdef.values_at_primes(ps)
    fit = np.abs(mags - r * np.log2(ps.astype(np.float64))) < 1e-9
    small = fit & (mags <= 62)
    fit[small] = np.abs(vals[small]) == ps[small] ** r
    bad = ps[~fit]
    return PowerFit(r, float(fit.mean()), csum(1.0 / bad.astype(np.float64)) if bad.size else 0.0)
