"""
Pretentious distance between unit-disc multiplicative functions, Halasz's
M_g, Turan-Kubilius and Elliott statistics, and logarithmic correlations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .arith import DirichletCharacter, csum, harmonic_number, primes_up_to, real_character
from .errors import DegeneratePairError, InvalidParameterError, InvalidRangeError
from .functions import DEFAULT_BLOCK, AdditiveFuncDef, MultFuncDef, evaluate_additive_block
from .solutions import exact_division_counts, indicator

PrimeRule = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscFunc:
    """Completely multiplicative g with |g(p)| <= 1, given by its values at primes.

    ``real`` marks functions whose values are real, which lets whole-integer
    evaluation run in float64.
    """

    name: str
    rule: PrimeRule = field(compare=False)
    real: bool = True

    def at_primes(self, ps: np.ndarray) -> np.ndarray:
        v = np.asarray(self.rule(np.asarray(ps, dtype=np.int64)))
        if self.real:
            return np.real(v).astype(np.float64)
        return v.astype(np.complex128)

    def __call__(self, n: int) -> complex:
        return complex(disc_block(self, n, n)[0])

    def __mul__(self, other: "DiscFunc") -> "DiscFunc":
        r1, r2 = self.rule, other.rule
        return DiscFunc(f"{self.name}*{other.name}", lambda ps: np.asarray(r1(ps)) * np.asarray(r2(ps)), self.real and other.real)

    def conj(self) -> "DiscFunc":
        r = self.rule
        return DiscFunc(f"conj({self.name})", lambda ps: np.conj(r(ps)), self.real)


def one() -> DiscFunc:
    return DiscFunc("1", lambda ps: np.ones(ps.shape))


def zero() -> DiscFunc:
    """g(p) = 0 at every prime, so g(1) = 1 and g(n) = 0 for n >= 2."""
    return DiscFunc("0", lambda ps: np.zeros(ps.shape))


def nit(t: float) -> DiscFunc:
    """p -> p^{it}."""
    return DiscFunc(f"n^{{i{t:g}}}", lambda ps: np.exp(1j * t * np.log(ps.astype(np.float64))), real=(t == 0))


def char_func(chi: DirichletCharacter) -> DiscFunc:
    return DiscFunc(f"chi[{chi.modulus},{chi.exponent}]", chi.values, real=chi.is_real)


def chi3() -> DiscFunc:
    """The real character mod 3."""
    chi = real_character(3)
    return DiscFunc("chi3", lambda ps: chi.values(ps).real)


def chi4() -> DiscFunc:
    """The non-principal character mod 4 by its +-1 rule: 0 at 2, 1 on 1 mod 4, -1 on 3 mod 4."""
    return DiscFunc("chi4", lambda ps: np.where(ps % 2 == 0, 0.0, np.where(ps % 4 == 1, 1.0, -1.0)))


def compose(chi: DirichletCharacter, fdef: MultFuncDef) -> DiscFunc:
    """p -> chi(f(p)); zero where f(p) shares a factor with the modulus."""
    q = chi.modulus

    def rule(ps: np.ndarray) -> np.ndarray:
        return chi.values(fdef.values_at_primes_mod(ps, q))

    return DiscFunc(f"chi[{q},{chi.exponent}]o{fdef.name or fdef.rule}", rule, real=chi.is_real)


def liouville_T(T: Iterable[int] | None = None, name: str = "lambda_T") -> DiscFunc:
    """-1 on T and +1 at other primes; T=None means every prime (Liouville's lambda)."""
    if T is None:
        return DiscFunc("lambda", lambda ps: -np.ones(ps.shape))
    arr = np.array(sorted(set(int(t) for t in T)), dtype=np.int64)
    return DiscFunc(name, lambda ps: np.where(np.isin(ps, arr), -1.0, 1.0))


# ---------------------------------------------------------------------------
# whole-integer values


def disc_block(g: DiscFunc, lo: int, hi: int) -> np.ndarray:
    """g(lo), ..., g(hi) by complete multiplicativity."""
    if lo < 1 or hi < lo:
        raise InvalidRangeError(f"bad range [{lo}, {hi}]")
    size = hi - lo + 1
    dtype = np.float64 if g.real else np.complex128
    out = np.ones(size, dtype=dtype)
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    small = primes_up_to(math.isqrt(hi))
    small = small[small <= math.isqrt(hi)]
    gvals = g.at_primes(small)
    for p, gp in zip(small.tolist(), gvals.tolist()):
        first = -(-lo // p) * p
        if first > hi:
            continue
        pos = np.arange(first - lo, size, p)
        nu = np.ones(pos.size, dtype=np.int64)
        pk = p * p
        while pk <= hi:
            hit = (pos + lo) % pk == 0
            if not hit.any():
                break
            nu += hit
            pk *= p
        out[pos] *= np.power(gp, nu)
        rem[pos] //= np.power(p, nu)
    big = np.flatnonzero(rem > 1)
    if big.size:
        out[big] *= g.at_primes(rem[big])
    return out


# ---------------------------------------------------------------------------
# distances


@dataclass(frozen=True)
class DistanceResult:
    x: int
    value: float
    squared: float
    prime_count: int


def _primes(x: int) -> np.ndarray:
    ps = primes_up_to(x)
    return ps[ps <= x]


def pretentious_distance(g1: DiscFunc, g2: DiscFunc, x: int) -> DistanceResult:
    """D(g1, g2; x)^2 = sum_{p <= x} (1 - Re g1(p) conj(g2(p))) / p."""
    if x < 2:
        raise InvalidRangeError("x must be >= 2")
    ps = _primes(x)
    v = np.real(g1.at_primes(ps) * np.conj(g2.at_primes(ps)))
    sq = max(csum((1.0 - v) / ps), 0.0)
    return DistanceResult(x, math.sqrt(sq), sq, int(ps.size))


def distance_trajectory(g1: DiscFunc, g2: DiscFunc, xs: Iterable[int]) -> list[DistanceResult]:
    """D^2 at several x from a single prime pass, via exact running partial sums."""
    xs = sorted(xs)
    ps = _primes(xs[-1])
    v = np.real(g1.at_primes(ps) * np.conj(g2.at_primes(ps)))
    terms = (1.0 - v) / ps
    out, done, prev = [], [], 0
    for x in xs:
        k = int(np.searchsorted(ps, x, side="right"))
        done.append(csum(terms[prev:k]))
        prev = k
        sq = max(math.fsum(done), 0.0)
        out.append(DistanceResult(x, math.sqrt(sq), sq, k))
    return out


def _twisted_sq(gp: np.ndarray, logp: np.ndarray, invp: np.ndarray, ts: np.ndarray, chunk: int = 64) -> np.ndarray:
    """D(g, n^{it}; x)^2 for each t, from values at the primes.

    Re(g(p) p^{-it}) = Re g(p) cos(t log p) + Im g(p) sin(t log p).
    """
    base = float(invp.sum())
    out = np.empty(ts.size)
    wr, wi = gp.real * invp, gp.imag * invp
    has_imag = bool(np.any(wi))
    for i in range(0, ts.size, chunk):
        tl = ts[i : i + chunk, None] * logp[None, :]
        acc = np.cos(tl) @ wr
        if has_imag:
            acc += np.sin(tl) @ wi
        out[i : i + chunk] = base - acc
    return out


def halasz_M(g: DiscFunc, x: int, T: float, grid_points: int = 4097) -> tuple[float, float]:
    """min over |t| <= T of D(g, n^{it}; x)^2, with the minimizing t.

    Uniform grid on [-T, T] (t = 0 always included), then one golden-section
    refinement on the two grid cells around the grid argmin.
    """
    if x < 2 or T <= 0 or grid_points < 3:
        raise InvalidParameterError("need x >= 2, T > 0, grid_points >= 3")
    ps = _primes(x)
    gp = g.at_primes(ps).astype(np.complex128)
    logp = np.log(ps.astype(np.float64))
    invp = 1.0 / ps.astype(np.float64)
    ts = np.linspace(-T, T, grid_points)
    if not np.any(ts == 0.0):
        ts = np.sort(np.append(ts, 0.0))
    vals = _twisted_sq(gp, logp, invp, ts)
    i = int(np.argmin(vals))
    best_t, best = float(ts[i]), float(vals[i])

    def f(t: float) -> float:
        # exact recomputation with compensated summation
        return csum((1.0 - np.real(gp * np.exp(-1j * t * logp))) * invp)

    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, ts.size - 1)])
    ratio = (math.sqrt(5) - 1) / 2
    c, d = hi - ratio * (hi - lo), lo + ratio * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(40):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - ratio * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + ratio * (hi - lo)
            fd = f(d)
    best = f(best_t)
    for t, v in ((c, fc), (d, fd)):
        # keep the grid point unless refinement is a genuine improvement
        if v < best - 1e-12:
            best_t, best = t, v
    return max(best, 0.0), best_t


# ---------------------------------------------------------------------------
# additive statistics


@dataclass(frozen=True)
class TKStats:
    A: float
    B2: float
    variance: float
    ratio: float


def _prime_power_values(g: AdditiveFuncDef, X: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(q, p, g(q)) over all prime powers q <= X."""
    ps = _primes(X)
    if g.prime_rule is not None:
        gv = np.asarray(g.prime_rule(ps), dtype=np.float64)
    else:
        gv = np.array([g.at(p, 1) for p in ps.tolist()], dtype=np.float64)
    qs, pl, gl = [ps], [ps], [gv]
    hq, hp, hg = [], [], []
    for p in ps[ps <= math.isqrt(X)].tolist():
        q, nu = p * p, 2
        while q <= X:
            hq.append(q)
            hp.append(p)
            hg.append(g.at(p, nu))
            q *= p
            nu += 1
    qs.append(np.array(hq, dtype=np.int64))
    pl.append(np.array(hp, dtype=np.int64))
    gl.append(np.array(hg, dtype=np.float64))
    return np.concatenate(qs), np.concatenate(pl), np.concatenate(gl)


def tk_stats(g: AdditiveFuncDef, X: int, block: int = DEFAULT_BLOCK) -> TKStats:
    """A_g(X), B_g(X)^2 and the empirical variance (1/X) sum |g(n) - A_g(X)|^2."""
    if X < 10:
        raise InvalidRangeError("X must be >= 10")
    qs, ps, gv = _prime_power_values(g, X)
    qf = qs.astype(np.float64)
    A = csum(gv / qf * (1.0 - 1.0 / ps))
    B2 = csum(gv * gv / qf)
    parts = []
    lo = 1
    while lo <= X:
        hi = min(X, lo + block - 1)
        vals = evaluate_additive_block(g, lo, hi).astype(np.float64)
        parts.append(csum((vals - A) ** 2))
        lo = hi + 1
    var = math.fsum(parts) / X
    return TKStats(A, B2, var, var / B2 if B2 > 0 else 0.0)


@dataclass(frozen=True)
class ElliottStats:
    lhs: float
    rhs: float
    ratio: float


def elliott_defect(members, X: int, limit: int) -> ElliottStats:
    """Left and right sides of Elliott's dual inequality for a 0/1 sequence.

    lhs = sum_{p^nu <= limit} p^nu |#{n in N : p^nu || n} - (1/p^nu)(1 - 1/p)|N||^2,
    rhs = X |N|.  members is a boolean indicator over 0..X or a sequence of members.
    """
    if limit > X:
        raise InvalidRangeError("limit must not exceed X")
    ind = members if isinstance(members, np.ndarray) and members.dtype == bool and members.size == X + 1 else indicator(members, X)
    total = int(np.count_nonzero(ind[1:]))
    qs, ps, counts = exact_division_counts(ind, limit)
    terms = []
    for q, p, c in zip(qs.tolist(), ps.tolist(), counts.tolist()):
        # |c - (p-1) total / (q p)|^2 * q, kept exact until the final division
        num = c * q * p - (p - 1) * total
        terms.append(num * num / (q * p * p))
    lhs = math.fsum(terms)
    rhs = float(X) * total
    return ElliottStats(lhs, rhs, lhs / rhs if rhs else 0.0)


# ---------------------------------------------------------------------------
# correlations


def log_correlation(
    g1: DiscFunc, g2: DiscFunc, a: int, b: int, c: int, d: int, x: int, block: int = DEFAULT_BLOCK
) -> complex:
    """(1/H(x)) sum_{n <= x} g1(an+b) g2(cn+d) / n over n with an+b, cn+d >= 1.

    H(x) = sum_{n <= x} 1/n replaces log x so the trivial pair gives exactly 1.
    """
    if a < 1 or c < 1:
        raise InvalidParameterError("a and c must be positive")
    if a * d - b * c == 0:
        raise DegeneratePairError(f"ad - bc = 0 for (a,b,c,d)=({a},{b},{c},{d})")
    if x < 10:
        raise InvalidRangeError("x must be >= 10")
    n0 = max(1, -(-(1 - b) // a), -(-(1 - d) // c))
    parts_re, parts_im = [], []
    lo = n0
    while lo <= x:
        hi = min(x, lo + block - 1)
        if g1 is g2 and a == c:
            base = a * lo + min(b, d)
            vals = disc_block(g1, base, a * hi + max(b, d))
            v1 = vals[a * lo + b - base :: a][: hi - lo + 1]
            v2 = vals[a * lo + d - base :: a][: hi - lo + 1]
            v = v1 * v2
        else:
            v = disc_block(g1, a * lo + b, a * hi + b)[::a] * disc_block(g2, c * lo + d, c * hi + d)[::c]
        w = v / np.arange(lo, hi + 1, dtype=np.float64)
        parts_re.append(csum(np.real(w)))
        if not (g1.real and g2.real):
            parts_im.append(csum(np.imag(w)))
        lo = hi + 1
    h = harmonic_number(x)
    return complex(math.fsum(parts_re) / h, math.fsum(parts_im) / h)
