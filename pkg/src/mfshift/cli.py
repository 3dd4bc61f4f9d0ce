"""
Command line runner: ``mfshift run|validate|explain``.

Exit codes: 0 success, 2 config error, 3 verification failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .arith import character, primes_in_class
from .config import DEFAULT_OUTPUT_ENV, EXPERIMENTS, ConfigError, ExperimentConfig, explain, parse_config
from .constructions import (
    ConverseParams,
    build_converse,
    build_divisor_example,
    build_sparse_example,
    sample_random_T,
    verify_converse,
)
from .errors import MfshiftError
from .functions import MultFuncDef, omega, omega_S
from .local_power import find_local_power_exponent, fs_scan, s_f_density
from .pretentious import (
    DiscFunc,
    chi3,
    chi4,
    char_func,
    compose,
    distance_trajectory,
    elliott_defect,
    halasz_M,
    liouville_T,
    log_correlation,
    nit,
    one,
    pretentious_distance,
    tk_stats,
    zero,
)
from .sieve_density import Coprime, ExactDivision, brute_force_density, zero_dim_density
from .solutions import enumerate_solutions, equidistribution_defect, gap_scan

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


class VerificationFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting


def fmt(v: Any) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    if isinstance(v, (list, tuple, frozenset, set)):
        return " ".join(str(x) for x in sorted(v))
    return str(v)


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: fmt(v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# building objects from config


def _range_hint(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    for k in ("X", "x"):
        v = p.get(k)
        if isinstance(v, list):
            v = max(v) if v else None
        if v:
            return int(v)
    return 10**6


def resolve_T(cfg: ExperimentConfig) -> frozenset[int]:
    fn = cfg.function
    if fn["T_seed"] is None:
        return frozenset(fn["T"])
    bound = fn["T_X"] or _range_hint(cfg) + 1
    return sample_random_T(fn["S"], max(bound, 2), fn["T_seed"])


def build_function(cfg: ExperimentConfig) -> MultFuncDef:
    fn = cfg.function
    c = fn["construction"]
    if c == "sparse":
        f = build_sparse_example(fn["S"], fn["p1"], fn["p2"], fn["b"])
    elif c == "divisor":
        f = build_divisor_example(fn["a"], fn["d"], fn["b"], fn["S"], fn["p1"], fn["p2"])
    elif c == "converse":
        f = build_converse(converse_params(cfg)).fdef
    else:
        exc = {p: 1 for p in fn["S"]}
        f = MultFuncDef(fn["rule"], fn["k"], fn["complete"], resolve_T(cfg), tuple(exc.items()))
    if fn["exceptions"]:
        f = f.with_exceptions(dict(fn["exceptions"]))
    return f


def converse_params(cfg: ExperimentConfig) -> ConverseParams:
    fn = cfg.function
    return ConverseParams(fn["a"], fn["d"], fn["b"], frozenset(fn["S"]), resolve_T(cfg))


def build_disc(spec: str, cfg: ExperimentConfig, f: MultFuncDef | None = None) -> DiscFunc:
    parts = [s.strip() for s in spec.split("*")]
    out = None
    for s in parts:
        g = _disc_atom(s, cfg, f)
        out = g if out is None else out * g
    return out


def _disc_atom(s: str, cfg: ExperimentConfig, f: MultFuncDef | None) -> DiscFunc:
    head, *args = s.split(":")
    if head == "1":
        return one()
    if head == "0":
        return zero()
    if head == "lambda":
        return liouville_T()
    if head == "lambda_T":
        return liouville_T(resolve_T(cfg))
    if head == "chi3":
        return chi3()
    if head == "chi4":
        return chi4()
    if head == "nit" and len(args) == 1:
        return nit(float(args[0]))
    if head == "chi" and len(args) == 2:
        return char_func(character(int(args[0]), int(args[1])))
    if head == "chi_f" and len(args) == 2:
        return compose(character(int(args[0]), int(args[1])), f if f is not None else build_function(cfg))
    raise ConfigError(f"cannot parse disc function {s!r}", "g")


# ---------------------------------------------------------------------------
# experiments: each returns (report rows, summary dict, extra files)


def _solutions(cfg, f):
    p = cfg.parameters
    return enumerate_solutions(f, p["a"], p["b"], p["A"], p["B"], p["X"])


def run_solutions(cfg, f):
    r = _solutions(cfg, f)
    extra = {}
    if cfg.output["members"]:
        extra["members.txt"] = "".join(f"{n}\n" for n in r.members.tolist())
    return r.rows(), {"count": r.count, "stored": int(r.members.size), "stride": r.stride}, extra


def run_density(cfg, f):
    r = _solutions(cfg, f)
    p = cfg.parameters
    d = equidistribution_defect(r.members, p["X"], p["limit"], p["delta"] / 4)
    flagged = set(d.flagged)
    rows = [{"q": q, "delta": float(v), "delta_exact": v, "flagged": q in flagged} for q, v in d.deltas.items()]
    summ = {"count": r.count, "aggregate": d.aggregate, "aggregate_q_weighted": d.aggregate_q_weighted, "members_over_X": r.count / p["X"]}
    return rows, summ, {}


def run_gap_scan(cfg, f):
    p = cfg.parameters
    r = gap_scan(f, p["C"], p["X"])
    return r.rows(), {"aggregate_count": r.aggregate_count, "log_density": r.log_density}, {}


def run_distance(cfg, f):
    p = cfg.parameters
    g1, g2 = build_disc(p["g1"], cfg, f), build_disc(p["g2"], cfg, f)
    res = distance_trajectory(g1, g2, p["x"])
    rows = [{"x": r.x, "squared": r.squared, "value": r.value, "prime_count": r.prime_count} for r in res]
    return rows, {}, {}


def run_halasz(cfg, f):
    p = cfg.parameters
    g = build_disc(p["g"], cfg, f)
    M, t = halasz_M(g, p["x"], p["T"], p["grid_points"])
    d0 = pretentious_distance(g, one(), p["x"]).squared
    return [{"x": p["x"], "T": p["T"], "M": M, "t_min": t, "D2_at_0": d0}], {}, {}


def run_tk(cfg, f):
    p = cfg.parameters
    if p["additive"] == "omega":
        g = omega()
    elif p["additive"] == "class":
        g = omega_S(primes_in_class(p["r"], p["q"]))
    else:
        g = omega_S(p["primes"])
    s = tk_stats(g, p["X"])
    return [{"X": p["X"], "A": s.A, "B2": s.B2, "variance": s.variance, "ratio": s.ratio}], {}, {}


def run_elliott(cfg, f):
    r = _solutions(cfg, f)
    p = cfg.parameters
    e = elliott_defect(r.members, p["X"], p["limit"])
    return [{"X": p["X"], "limit": p["limit"], "lhs": e.lhs, "rhs": e.rhs, "ratio": e.ratio}], {"count": r.count}, {}


def run_correlation(cfg, f):
    p = cfg.parameters
    g1, g2 = build_disc(p["g1"], cfg, f), build_disc(p["g2"], cfg, f)
    v = log_correlation(g1, g2, p["a"], p["b"], p["c"], p["d"], p["x"])
    return [{"x": p["x"], "real": v.real, "imag": v.imag, "abs": abs(v)}], {}, {}


def run_local_power(cfg, f):
    p = cfg.parameters
    r = find_local_power_exponent(f, p["D"], p["ell"], p["X"], p["mode"])
    row = r.row()
    row.update({"status": r.status, "exceptions": sorted(r.exceptions), "candidates": list(r.candidates)})
    return [row], {}, {}


def run_fs_scan(cfg, f):
    p = cfg.parameters
    s = fs_scan(f, p["L"], p["X"])
    summ = {"listed": [e for e, _ in s.entries], "failed_count": len(s.failed), "ambiguous": s.ambiguous,
            "global_k": "" if s.global_k is None else s.global_k, "global_power": s.global_power}
    return s.rows(), summ, {}


def run_sf_density(cfg, f):
    p = cfg.parameters
    s = s_f_density(f, p["X"])
    return s.rows(), {"count": int(s.members.size), "reciprocal_sum": s.reciprocal_sum, "dirichlet_estimate": s.dirichlet_estimate}, {}


def run_converse_verify(cfg, f):
    p = cfg.parameters
    params = converse_params(cfg)
    rep = verify_converse(f, params, p["X"])
    summ = {"k": params.k, "ok": rep.ok, "failures": "; ".join(rep.failures)}
    extra = {}
    if cfg.output["members"]:
        extra["members.txt"] = "".join(f"{n}\n" for n in rep.members.tolist())
    if not rep.ok:
        return rep.rows(), summ, extra, VerificationFailure("; ".join(rep.failures))
    return rep.rows(), summ, extra


def run_sieve_predict(cfg, f):
    p = cfg.parameters
    cons = [ExactDivision(q, nu, s) for q, nu, s in p["exact"]] + [Coprime(q, s) for q, s in p["coprime"]]
    pred = zero_dim_density(cons, p["S"], p["shifts"])
    row = {"prediction": pred.value, "prediction_float": float(pred.value), "degenerate": pred.degenerate}
    if p["X"] > 0:
        full = cons + [Coprime(q, s) for q in p["S"] for s in p["shifts"]]
        cnt = brute_force_density(full, p["X"])
        row.update({"X": p["X"], "count": cnt, "empirical": cnt / p["X"]})
    return [row], {}, {}


def run_random_T(cfg, f):
    p = cfg.parameters
    X = p["X"]
    ll = math.log(math.log(X))
    rows = []
    for seed in p["seeds"]:
        T = sample_random_T(p["S"], X, seed)
        lam = liouville_T(T)
        s = math.fsum(1.0 / t for t in sorted(T))
        rows.append({
            "seed": seed, "size": len(T), "reciprocal_sum": s, "over_loglog": s / ll,
            "D2_one": pretentious_distance(lam, one(), X).squared,
            "D2_chi3": pretentious_distance(lam, chi3(), X).squared,
            "D2_chi4": pretentious_distance(lam, chi4(), X).squared,
        })
    return rows, {"loglog_X": ll}, {}


RUNNERS = {
    "solutions": run_solutions,
    "density": run_density,
    "gap-scan": run_gap_scan,
    "distance": run_distance,
    "halasz": run_halasz,
    "tk": run_tk,
    "elliott": run_elliott,
    "correlation": run_correlation,
    "local-power": run_local_power,
    "fs-scan": run_fs_scan,
    "sf-density": run_sf_density,
    "converse-verify": run_converse_verify,
    "sieve-predict": run_sieve_predict,
    "random-T": run_random_T,
}
assert set(RUNNERS) == set(EXPERIMENTS)


# ---------------------------------------------------------------------------
# run


def output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    return Path(override or cfg.output["dir"] or os.environ.get(DEFAULT_OUTPUT_ENV) or "mfshift-out")


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def run(cfg: ExperimentConfig, out: Path, threads: int | None = None) -> int:
    """Run one experiment, write report.csv, summary.csv and manifest.json, return the exit code."""
    f = build_function(cfg)
    res = RUNNERS[cfg.experiment](cfg, f)
    rows, summary, extra = res[:3]
    failure = res[3] if len(res) > 3 else None
    files = {"report.csv": csv_text(rows)}
    if summary:
        files["summary.csv"] = csv_text([{"key": k, "value": v} for k, v in summary.items()])
    files.update(extra)
    resolved = cfg.to_text()
    manifest = {
        "tool": "mfshift",
        "version": __version__,
        "experiment": cfg.experiment,
        "config": resolved,
        "config_sha256": sha256(resolved),
        "derived": cfg.derived,
        "threads": threads,
        "status": "verification-failed" if failure else "ok",
        "outputs": {name: sha256(body) for name, body in files.items()},
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    out.mkdir(parents=True, exist_ok=True)
    for name, body in files.items():
        (out / name).write_text(body)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if failure:
        print(f"verification failed: {failure}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _read(path: str) -> str:
    return Path(path).read_text()


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="mfshift", description="Experiments on shifted values of multiplicative functions.")
    ap.add_argument("--version", action="version", version=f"mfshift {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config", help="INI config path")
    r.add_argument("-o", "--output", help=f"output directory (overrides [output] dir and ${DEFAULT_OUTPUT_ENV})")
    r.add_argument("--threads", type=int, default=None, help="cap on worker threads (recorded in the manifest)")
    v = sub.add_parser("validate", help="parse and validate a config, print the resolved form")
    v.add_argument("config")
    e = sub.add_parser("explain", help="print the parameter schema of an experiment")
    e.add_argument("experiment", choices=sorted(EXPERIMENTS))
    args = ap.parse_args(argv)

    if args.verb == "explain":
        print(explain(args.experiment), end="")
        return EXIT_OK
    try:
        text = _read(args.config)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        if args.verb == "validate":
            build_function(cfg)
            print(cfg.to_text(), end="")
            for k, val in cfg.derived.items():
                print(f"# derived {k} = {val}")
            return EXIT_OK
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("must be >= 1", "--threads")
        return run(cfg, output_dir(cfg, args.output), args.threads)
    except MfshiftError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
