"""
Integer-valued multiplicative functions: declaration and evaluation.

A function is declared by a default rule at primes plus an exception table.
Values are exact integers.  Block evaluation runs a segmented prime-power
sieve in int64 and tracks log2|f(n)| alongside; entries that would not fit
are recomputed pointwise with Python integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .arith import (
    RuleSet,
    SpfTable,
    factorize,
    is_prime,
    primes_up_to,
    segments,
)
from .errors import InvalidInputError, InvalidParameterError, InvalidRangeError

RULES = ("identity", "one", "monomial", "signed-identity")

# int64 holds |v| < 2**63; stay one bit clear of the float estimate's rounding.
_MAG_LIMIT = 62.0
DEFAULT_BLOCK = 1 << 20


def _log2abs(v: int) -> float:
    return -math.inf if v == 0 else math.log2(abs(v))


@dataclass(frozen=True)
class MultFuncDef:
    """Declarative integer-valued multiplicative function.

    rule is the default at primes: ``identity`` (p), ``one`` (1),
    ``monomial`` (p**k) or ``signed-identity`` (-p on T, p elsewhere).
    For complete definitions exception keys are primes and
    f(p**nu) = f(p)**nu.  Otherwise keys may be prime powers and an unlisted
    p**nu takes default(p)**nu.
    """

    rule: str = "identity"
    k: int = 1
    complete: bool = True
    T: frozenset[int] = frozenset()
    exceptions: tuple[tuple[int, int], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise InvalidParameterError(f"unknown rule {self.rule!r}; expected one of {RULES}")
        if self.rule == "monomial" and self.k < 0:
            raise InvalidParameterError("monomial exponent must be >= 0")
        object.__setattr__(self, "T", frozenset(int(t) for t in self.T))
        exc = self.exceptions
        if isinstance(exc, Mapping):
            exc = exc.items()
        items = tuple(sorted((int(a), int(b)) for a, b in exc))
        keys = [a for a, _ in items]
        if len(set(keys)) != len(keys):
            raise InvalidParameterError("duplicate exception keys")
        object.__setattr__(self, "exceptions", items)
        self._validate_keys(keys)

    def _validate_keys(self, keys: list[int]) -> None:
        if not keys:
            return
        if self.complete:
            arr = np.array(keys, dtype=np.int64)
            bad = arr[~np.isin(arr, primes_up_to(int(arr.max())))].tolist()
            if bad:
                raise InvalidParameterError(f"exception keys must be primes for complete definitions: {bad[:5]}")
        else:
            for key in keys:
                f = factorize(key) if key > 1 else None
                if f is None or len(f) != 1:
                    raise InvalidParameterError(f"exception key {key} is not a prime power")

    # -- pointwise -------------------------------------------------------

    @cached_property
    def exception_map(self) -> dict[int, int]:
        return dict(self.exceptions)

    def default_at(self, p: int) -> int:
        if self.rule == "identity":
            return p
        if self.rule == "one":
            return 1
        if self.rule == "monomial":
            return p**self.k
        return -p if p in self.T else p

    def at_prime(self, p: int) -> int:
        return self.exception_map.get(p, self.default_at(p))

    def at_prime_power(self, p: int, nu: int) -> int:
        if nu == 0:
            return 1
        if self.complete:
            return self.at_prime(p) ** nu
        return self.exception_map.get(p**nu, self.default_at(p) ** nu)

    def with_exceptions(self, extra: Mapping[int, int], name: str = "") -> "MultFuncDef":
        merged = dict(self.exceptions)
        merged.update(extra)
        return MultFuncDef(self.rule, self.k, self.complete, self.T, tuple(merged.items()), name or self.name)

    # -- vectorized helpers ------------------------------------------------

    @cached_property
    def _T_array(self) -> np.ndarray:
        return np.array(sorted(self.T), dtype=np.int64)

    @cached_property
    def _prime_exceptions(self) -> tuple[np.ndarray, list[int]]:
        """Exception entries at primes (keys that are primes), sorted."""
        if self.complete:
            items = list(self.exceptions)
        else:
            items = [(a, b) for a, b in self.exceptions if is_prime(a)]
        return np.array([a for a, _ in items], dtype=np.int64), [b for _, b in items]

    @cached_property
    def _prime_exception_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
        """(keys, int64 values with 1 where too large, log2|value|, all_fit)."""
        keys, vals = self._prime_exceptions
        mags = np.array([_log2abs(v) for v in vals], dtype=np.float64)
        fit = mags <= _MAG_LIMIT
        ivals = np.array([v if ok else 1 for v, ok in zip(vals, fit.tolist())], dtype=np.int64)
        return keys, ivals, mags, bool(fit.all())

    def _exception_hits(self, ps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Indices into ps that carry a prime exception, and the matching key positions."""
        keys = self._prime_exceptions[0]
        if not keys.size or not ps.size:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        pos = np.searchsorted(keys, ps)
        pos[pos >= keys.size] = 0
        hit = np.flatnonzero(keys[pos] == ps)
        return hit, pos[hit]

    @cached_property
    def _general_primes(self) -> frozenset[int]:
        """Primes whose powers do not follow f(p**nu) = f(p)**nu."""
        if self.complete:
            return frozenset()
        return frozenset(factorize(a).pairs[0][0] for a, _ in self.exceptions)

    def _default_mod(self, ps: np.ndarray, m: np.ndarray | int) -> np.ndarray:
        if self.rule == "one":
            return np.ones(ps.shape, dtype=np.int64) % m
        if self.rule == "identity":
            return ps % m
        if self.rule == "monomial":
            return powmod(ps % m, self.k, m)
        sign = np.where(np.isin(ps, self._T_array), -1, 1)
        return (sign * (ps % m)) % m

    def values_at_primes_mod(self, ps: np.ndarray, m: np.ndarray | int) -> np.ndarray:
        """f(p) mod m for an array of primes; m a scalar or per-prime array."""
        ps = np.asarray(ps, dtype=np.int64)
        out = self._default_mod(ps, m)
        hit, pos = self._exception_hits(ps)
        if hit.size:
            mm = np.broadcast_to(np.asarray(m, dtype=np.int64), ps.shape)
            _, ivals, _, all_fit = self._prime_exception_arrays
            if all_fit:
                out[hit] = ivals[pos] % mm[hit]
            else:
                vals = self._prime_exceptions[1]
                out[hit] = [vals[j] % int(mm[i]) for i, j in zip(hit.tolist(), pos.tolist())]
        return out

    def values_at_primes(self, ps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(f(p) as int64 where representable, log2|f(p)|) for an array of primes."""
        ps = np.asarray(ps, dtype=np.int64)
        if self.rule == "one":
            vals = np.ones(ps.shape, dtype=np.int64)
            mag = np.zeros(ps.shape)
        elif self.rule == "identity":
            vals, mag = ps.copy(), np.log2(ps.astype(np.float64))
        elif self.rule == "signed-identity":
            vals = np.where(np.isin(ps, self._T_array), -ps, ps)
            mag = np.log2(ps.astype(np.float64))
        else:
            mag = self.k * np.log2(ps.astype(np.float64))
            vals = np.ones(ps.shape, dtype=np.int64)
            ok = mag <= _MAG_LIMIT
            vals[ok] = ps[ok] ** self.k
        hit, pos = self._exception_hits(ps)
        if hit.size:
            _, ivals, mags, _ = self._prime_exception_arrays
            vals[hit] = ivals[pos]
            mag[hit] = mags[pos]
        return vals, mag


def powmod(base: np.ndarray, k: int, m: np.ndarray | int) -> np.ndarray:
    """Elementwise base**k mod m in int64 (requires m < 2**31)."""
    base = np.asarray(base, dtype=np.int64) % m
    if np.max(m) >= 1 << 31:
        mm = np.broadcast_to(np.asarray(m), base.shape)
        return np.array([pow(int(b), k, int(q)) for b, q in zip(base, mm)], dtype=np.int64)
    out = np.ones(base.shape, dtype=np.int64) % m
    while k:
        if k & 1:
            out = out * base % m
        base = base * base % m
        k >>= 1
    return out


# ---------------------------------------------------------------------------
# pointwise evaluation


def evaluate(fdef: MultFuncDef, n: int, table: SpfTable | None = None) -> int:
    """Exact f(n) for n >= 1."""
    if n < 1:
        raise InvalidInputError(f"f is defined on positive integers, got {n}")
    out = 1
    for p, nu in factorize(n, table if table is not None and n <= table.range_end else None):
        out *= fdef.at_prime_power(p, nu)
        if out == 0:
            return 0
    return out


def evaluate_mod(fdef: MultFuncDef, n: int, m: int) -> int:
    """f(n) mod m, computed without forming f(n)."""
    if n < 1:
        raise InvalidInputError(f"f is defined on positive integers, got {n}")
    if m < 2:
        raise InvalidParameterError("modulus must be >= 2")
    out = 1 % m
    emap = fdef.exception_map
    for p, nu in factorize(n):
        if fdef.complete:
            base = emap[p] % m if p in emap else _default_mod_scalar(fdef, p, m)
            out = out * pow(base, nu, m) % m
        elif p**nu in emap:
            out = out * (emap[p**nu] % m) % m
        else:
            out = out * pow(_default_mod_scalar(fdef, p, m), nu, m) % m
    return out


def _default_mod_scalar(fdef: MultFuncDef, p: int, m: int) -> int:
    if fdef.rule == "one":
        return 1 % m
    if fdef.rule == "identity":
        return p % m
    if fdef.rule == "monomial":
        return pow(p, fdef.k, m)
    return (-p if p in fdef.T else p) % m


# ---------------------------------------------------------------------------
# block evaluation


def evaluate_block(fdef: MultFuncDef, lo: int, hi: int) -> np.ndarray:
    """f(lo), ..., f(hi) as an int64 array, or an object array of Python ints
    when some value does not fit in 62 bits."""
    if lo < 1 or hi < lo:
        raise InvalidRangeError(f"bad range [{lo}, {hi}]")
    size = hi - lo + 1
    val = np.ones(size, dtype=np.int64)
    mag = np.zeros(size)
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    general = fdef._general_primes
    for p in primes_up_to(math.isqrt(hi)).tolist():
        first = -(-lo // p) * p
        if first > hi:
            continue
        if p in general:
            _apply_general_prime(fdef, p, lo, hi, val, mag, rem)
            continue
        m = fdef.at_prime(p)
        lm = _log2abs(m)
        mi = m if lm <= _MAG_LIMIT else 1
        pk = p
        while pk <= hi:
            s = -(-lo // pk) * pk
            if s > hi:
                break
            sl = slice(s - lo, None, pk)
            if mi != 1:
                val[sl] *= mi
            mag[sl] += lm
            rem[sl] //= p
            pk *= p
    big = np.flatnonzero(rem > 1)
    if big.size:
        mv, ml = fdef.values_at_primes(rem[big])
        val[big] *= mv
        mag[big] += ml
    over = np.flatnonzero(mag > _MAG_LIMIT)
    if over.size == 0:
        return val
    out = val.astype(object)
    for i in over.tolist():
        out[i] = evaluate(fdef, lo + i)
    return out


def _apply_general_prime(fdef, p, lo, hi, val, mag, rem) -> None:
    first = -(-lo // p) * p
    pos = np.arange(first - lo, hi - lo + 1, p)
    nu = np.zeros(pos.size, dtype=np.int64)
    pk = p
    while pk <= hi:
        hit = (pos + lo) % pk == 0
        if not hit.any():
            break
        nu += hit
        rem[pos[hit]] //= p
        pk *= p
    for e in np.unique(nu).tolist():
        m = fdef.at_prime_power(p, e)
        lm = _log2abs(m)
        sel = pos[nu == e]
        if lm <= _MAG_LIMIT:
            val[sel] *= m
        mag[sel] += lm


def iter_blocks(fdef: MultFuncDef, lo: int, hi: int, block: int = DEFAULT_BLOCK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, values) blocks covering [lo, hi] in increasing order."""
    for s, e in segments(lo, hi, block):
        yield s, evaluate_block(fdef, s, e)


def evaluate_range(
    fdef: MultFuncDef,
    lo: int,
    hi: int,
    consumer: Callable[[int, int], object],
    block: int = DEFAULT_BLOCK,
) -> None:
    """Stream (n, f(n)) for lo <= n <= hi to consumer in increasing n.

    An exception raised by the consumer aborts the stream and propagates.
    """
    if lo < 1 or hi < lo:
        raise InvalidRangeError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    for start, vals in iter_blocks(fdef, lo, hi, block):
        for i, v in enumerate(vals.tolist()):
            consumer(start + i, v)


# ---------------------------------------------------------------------------
# additive functions


@dataclass(frozen=True)
class AdditiveFuncDef:
    """Additive function g given by its values g(p**nu) on prime powers.

    ``rule(p, nu)`` is the scalar rule; ``prime_rule`` optionally evaluates
    g(p) on an array of primes and is used for the large-prime tail of block
    evaluation.
    """

    rule: Callable[[int, int], int]
    prime_rule: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "g"

    def at(self, p: int, nu: int) -> int:
        return self.rule(p, nu)


def omega_S(S: Iterable[int] | RuleSet | None) -> AdditiveFuncDef:
    """omega_S(n) = #{p**nu || n : p**nu in S}.

    S is a collection of prime powers or a RuleSet queried on prime powers.
    """
    if S is None:
        return AdditiveFuncDef(lambda p, nu: 0, lambda ps: np.zeros(ps.shape, dtype=np.int64), "omega_empty")
    if isinstance(S, RuleSet):
        return AdditiveFuncDef(
            lambda p, nu: int(p**nu in S),
            lambda ps: S.mask(ps).astype(np.int64),
            f"omega[{S.name}]",
        )
    members = frozenset(int(s) for s in S)
    arr = np.array(sorted(members), dtype=np.int64)
    return AdditiveFuncDef(
        lambda p, nu: int(p**nu in members),
        lambda ps: np.isin(ps, arr).astype(np.int64),
        "omega_S",
    )


def omega() -> AdditiveFuncDef:
    """Number of distinct prime factors."""
    return AdditiveFuncDef(lambda p, nu: 1, lambda ps: np.ones(ps.shape, dtype=np.int64), "omega")


def evaluate_additive(gdef: AdditiveFuncDef, n: int) -> int:
    if n < 1:
        raise InvalidInputError(f"g is defined on positive integers, got {n}")
    return sum(gdef.at(p, nu) for p, nu in factorize(n))


def evaluate_additive_block(gdef: AdditiveFuncDef, lo: int, hi: int) -> np.ndarray:
    """g(lo), ..., g(hi) as an int64 array."""
    size = hi - lo + 1
    out = np.zeros(size, dtype=np.int64)
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    for p in primes_up_to(math.isqrt(hi)).tolist():
        first = -(-lo // p) * p
        if first > hi:
            continue
        pos = np.arange(first - lo, size, p)
        nu = np.zeros(pos.size, dtype=np.int64)
        pk = p
        while pk <= hi:
            hit = (pos + lo) % pk == 0
            if not hit.any():
                break
            nu += hit
            pk *= p
        for e in np.unique(nu).tolist():
            v = gdef.at(p, e)
            if v:
                out[pos[nu == e]] += v
        rem[pos] //= p**nu
    big = np.flatnonzero(rem > 1)
    if big.size:
        if gdef.prime_rule is not None:
            out[big] += gdef.prime_rule(rem[big])
        else:
            out[big] += [gdef.at(int(q), 1) for q in rem[big].tolist()]
    return out
