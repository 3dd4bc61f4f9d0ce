"""
Solution sets of A f(n+a) = B f(n) + b, their density trajectories, the
per-prime-power equidistribution defect, and bounded-gap scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import csum, harmonic_number, prime_powers_up_to
from .errors import InvalidParameterError, InvalidRangeError
from .functions import DEFAULT_BLOCK, MultFuncDef, evaluate_block

STORE_LIMIT = 10**7
_I64_SAFE = 1 << 62


@dataclass(frozen=True)
class Checkpoint:
    x: int
    count: int
    natural: float
    logarithmic: float


@dataclass
class SolutionSetReport:
    a: int
    b: int
    A: int
    B: int
    X: int
    members: np.ndarray
    count: int
    checkpoints: list[Checkpoint]
    stride: int = 1  # members holds every stride-th solution past STORE_LIMIT

    def rows(self) -> list[dict]:
        return [
            {"x": c.x, "count": c.count, "nat_density": c.natural, "log_density": c.logarithmic}
            for c in self.checkpoints
        ]


def checkpoint_grid(X: int) -> list[int]:
    """x = X^(1/8), X^(1/4), X^(1/2), X rounded down, deduplicated."""
    xs = set()
    for k in (8, 4, 2, 1):
        x = int(X ** (1.0 / k) + 1e-9)
        while (x + 1) ** k <= X:
            x += 1
        while x > 1 and x**k > X:
            x -= 1
        xs.add(max(1, x))
    return sorted(xs)


class _Accumulator:
    """Running counts and reciprocal sums of a member stream at fixed checkpoints."""

    def __init__(self, xs: Sequence[int]):
        self.xs = list(xs)
        self.counts = [0] * len(xs)
        self.partials: list[list[float]] = [[] for _ in xs]

    def add(self, ms: np.ndarray) -> None:
        if not ms.size:
            return
        inv = 1.0 / ms.astype(np.float64)
        for i, x in enumerate(self.xs):
            k = int(np.searchsorted(ms, x, side="right"))
            if k:
                self.counts[i] += k
                self.partials[i].append(csum(inv[:k]))

    def checkpoints(self) -> list[Checkpoint]:
        out = []
        for x, c, parts in zip(self.xs, self.counts, self.partials):
            h = harmonic_number(x)
            out.append(Checkpoint(x, c, c / x, math.fsum(parts) / h if h else 0.0))
        return out


def density_report(members: Iterable[int], X: int) -> list[Checkpoint]:
    """Natural and logarithmic density estimates of a set at the checkpoint grid.

    The logarithmic estimate is normalized by H(x) = sum_{n <= x} 1/n, so the
    full set [1, x] has estimate exactly 1.
    """
    ms = np.asarray(list(members) if not isinstance(members, np.ndarray) else members, dtype=np.int64)
    if ms.size and (ms[0] < 1 or ms[-1] > X or np.any(np.diff(ms) <= 0)):
        raise InvalidRangeError("members must be strictly increasing within [1, X]")
    acc = _Accumulator(checkpoint_grid(X))
    acc.add(ms)
    return acc.checkpoints()


def _as_comparable(vals: np.ndarray, scale: int, b: int) -> np.ndarray:
    if vals.dtype == object:
        return vals
    if vals.size and (int(np.abs(vals).max()) * scale + abs(b)) >= _I64_SAFE:
        return vals.astype(object)
    return vals


def _scan(fdef: MultFuncDef, s: int, A: int, B: int, b: int, N: int, block: int):
    """Yield arrays of m in [1, N] with A f(m+s) = B f(m) + b, block by block."""
    lo = 1
    while lo <= N:
        hi = min(N, lo + block - 1)
        vals = _as_comparable(evaluate_block(fdef, lo, hi + s), max(abs(A), abs(B)), b)
        left = A * vals[s:]
        right = B * vals[: hi - lo + 1] + b
        hit = np.flatnonzero(left == right)
        yield hit.astype(np.int64) + lo
        lo = hi + 1


def enumerate_solutions(
    fdef: MultFuncDef,
    a: int,
    b: int,
    A: int = 1,
    B: int = 1,
    X: int = 10**6,
    *,
    block: int = DEFAULT_BLOCK,
    store_limit: int = STORE_LIMIT,
    stride: int = 10,
) -> SolutionSetReport:
    """All n <= X with n + a >= 1 and A f(n+a) = B f(n) + b.

    Negative a is handled through m = n + a, which turns the relation into
    B f(m + |a|) = A f(m) - b.
    """
    if a == 0 or A == 0 or B == 0:
        raise InvalidParameterError("need aAB != 0")
    if X < 1:
        raise InvalidRangeError("X must be >= 1")
    if a > 0:
        stream = _scan(fdef, a, A, B, b, X, block)
        offset = 0
    else:
        stream = _scan(fdef, -a, B, A, -b, X + a, block)
        offset = -a
    acc = _Accumulator(checkpoint_grid(X))
    kept: list[np.ndarray] = []
    count = 0
    step = 1
    for ms in stream:
        ms = ms + offset
        acc.add(ms)
        if count + ms.size > store_limit and step == 1:
            room = max(0, store_limit - count)
            kept.append(ms[:room])
            tail = ms[room:]
            step = stride
            kept.append(tail[::step])
            phase = (tail.size) % step
        elif step > 1:
            first = (-phase) % step
            kept.append(ms[first::step])
            phase = (phase + ms.size) % step
        else:
            kept.append(ms)
        count += ms.size
    members = np.concatenate(kept) if kept else np.empty(0, dtype=np.int64)
    return SolutionSetReport(a, b, A, B, X, members, count, acc.checkpoints(), step)


def naive_solutions(fdef: MultFuncDef, a: int, b: int, A: int, B: int, X: int) -> list[int]:
    """Reference loop: evaluates f twice per n, no windowing."""
    from .functions import evaluate

    return [
        n
        for n in range(1, X + 1)
        if n + a >= 1 and A * evaluate(fdef, n + a) == B * evaluate(fdef, n) + b
    ]


# ---------------------------------------------------------------------------
# equidistribution defect


@dataclass
class DefectReport:
    X: int
    limit: int
    deltas: dict[int, Fraction]
    aggregate: float  # sum of Delta^2 / p^nu over p^nu <= limit
    flagged: list[int] = field(default_factory=list)
    total: int = 0
    aggregate_q_weighted: float = 0.0  # sum of p^nu * Delta^2, kept for comparison

    def rows(self) -> list[dict]:
        return [{"q": q, "delta": float(d)} for q, d in self.deltas.items()]


def indicator(members: Iterable[int], X: int) -> np.ndarray:
    ind = np.zeros(X + 1, dtype=bool)
    ms = np.asarray(list(members) if not isinstance(members, np.ndarray) else members, dtype=np.int64)
    ms = ms[(ms >= 1) & (ms <= X)]
    ind[ms] = True
    return ind


def exact_division_counts(ind: np.ndarray, limit: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For each prime power q = p^nu <= limit, the number of marked n with q || n.

    ind is a boolean array over 0..X.  Returns (q, p, counts).
    """
    X = ind.size - 1
    qs, ps, _ = prime_powers_up_to(limit)
    counts = np.empty(qs.size, dtype=np.int64)
    for i, (q, p) in enumerate(zip(qs.tolist(), ps.tolist())):
        c = int(np.count_nonzero(ind[q::q]))
        if q * p <= X:
            c -= int(np.count_nonzero(ind[q * p :: q * p]))
        counts[i] = c
    return qs, ps, counts


def equidistribution_defect(
    members: Iterable[int], X: int, limit: int, threshold: float | None = None
) -> DefectReport:
    """Delta_{p^nu}(X) = |(p^nu/X) #{n in N, p^nu || n} - (1 - 1/p) |N|/X| for p^nu <= limit.

    The aggregate is sum Delta^2 / p^nu, the normalized left side of Elliott's
    dual Turan-Kubilius inequality; it is << |N| / X.
    """
    if limit > X:
        raise InvalidRangeError("limit must not exceed X")
    ind = indicator(members, X)
    total = int(np.count_nonzero(ind))
    qs, ps, counts = exact_division_counts(ind, limit)
    deltas: dict[int, Fraction] = {}
    terms, wterms = [], []
    for q, p, c in zip(qs.tolist(), ps.tolist(), counts.tolist()):
        d = abs(Fraction(p * q * c - (p - 1) * total, p * X))
        deltas[q] = d
        terms.append(float(d) ** 2 / q)
        wterms.append(float(d) ** 2 * q)
    flagged = [q for q, d in deltas.items() if threshold is not None and d > threshold]
    return DefectReport(X, limit, deltas, math.fsum(terms), flagged, total, math.fsum(wterms))


# ---------------------------------------------------------------------------
# bounded gaps


@dataclass
class GapScanReport:
    C: int
    X: int
    counts: dict[int, int]
    aggregate_count: int
    log_density: float

    def rows(self) -> list[dict]:
        return [{"b": b, "count": c} for b, c in sorted(self.counts.items())]


def gap_scan(fdef: MultFuncDef, C: int, X: int, *, block: int = DEFAULT_BLOCK) -> GapScanReport:
    """Counts of n <= X with f(n+1) - f(n) = b for each |b| <= C, in one pass."""
    if C < 1:
        raise InvalidParameterError("C must be >= 1")
    counts = {b: 0 for b in range(-C, C + 1)}
    parts: list[float] = []
    lo = 1
    while lo <= X:
        hi = min(X, lo + block - 1)
        vals = _as_comparable(evaluate_block(fdef, lo, hi + 1), 1, 0)
        diff = vals[1:] - vals[:-1]
        if diff.dtype == object:
            small = np.array([abs(d) <= C for d in diff.tolist()], dtype=bool)
            dsmall = np.array([int(d) for d in diff[small].tolist()], dtype=np.int64)
        else:
            small = np.abs(diff) <= C
            dsmall = diff[small]
        idx = np.flatnonzero(small)
        if idx.size:
            bs, cs = np.unique(dsmall, return_counts=True)
            for bb, cc in zip(bs.tolist(), cs.tolist()):
                counts[bb] += cc
            parts.append(csum(1.0 / (idx + lo).astype(np.float64)))
        lo = hi + 1
    agg = sum(counts.values())
    return GapScanReport(C, X, counts, agg, math.fsum(parts) / harmonic_number(X))
