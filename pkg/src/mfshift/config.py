"""
Experiment configuration: an INI document with four sections.

    [function]    the multiplicative function under study
    [experiment]  name = one of EXPERIMENTS
    [parameters]  experiment-specific keys (see ``explain``)
    [output]      dir, members

Integers accept ``1000000``, ``1e6``, ``10^6`` and ``10**6``.  Lists are
comma separated, optionally in brackets.  Pairs are written ``p:v``.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import MfshiftError
from .functions import RULES

DEFAULT_OUTPUT_ENV = "MFSHIFT_OUTPUT_DIR"


class ConfigError(MfshiftError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key is not None:
            where = f"key '{key}'" + (f" (line {line})" if line else "") + ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


# ---------------------------------------------------------------------------
# scalar parsers

_POW = re.compile(r"^\s*(-?\d+)\s*(?:\^|\*\*)\s*(\d+)\s*$")


def parse_int(s: str) -> int:
    s = s.strip()
    m = _POW.match(s)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(s)
    except ValueError:
        pass
    v = float(s)
    if not v.is_integer():
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def parse_float(s: str) -> float:
    return float(s.strip())


def parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _items(s: str) -> list[str]:
    s = s.strip()
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1]
    return [t.strip() for t in s.split(",") if t.strip()]


def parse_intlist(s: str) -> list[int]:
    return [parse_int(t) for t in _items(s)]


def parse_tuples(width: int) -> Callable[[str], list[tuple[int, ...]]]:
    def parse(s: str) -> list[tuple[int, ...]]:
        out = []
        for t in _items(s):
            parts = t.split(":")
            if len(parts) != width:
                raise ValueError(f"{t!r} should have {width} ':'-separated fields")
            out.append(tuple(parse_int(x) for x in parts))
        return out

    return parse


def parse_str(s: str) -> str:
    return s.strip()


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return ", ".join(":".join(str(x) for x in e) if isinstance(e, tuple) else str(e) for e in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any = None
    required: bool = False
    choices: tuple = ()
    doc: str = ""


INT, FLOAT, BOOL, STR, INTS = parse_int, parse_float, parse_bool, parse_str, parse_intlist
PAIRS, TRIPLES = parse_tuples(2), parse_tuples(3)

FUNCTION_KEYS: dict[str, Key] = {
    "rule": Key(STR, "identity", choices=RULES, doc="default value at primes"),
    "k": Key(INT, 1, doc="exponent for the monomial rule"),
    "complete": Key(BOOL, True, doc="completely multiplicative"),
    "exceptions": Key(PAIRS, [], doc="p:f(p) overrides, applied last"),
    "S": Key(INTS, [], doc="primes sent to 1 (or the S of a construction)"),
    "T": Key(INTS, [], doc="primes where lambda_T = -1"),
    "T_seed": Key(INT, None, doc="draw T at random with this seed instead of listing it"),
    "T_X": Key(INT, None, doc="bound for the random T (default: parameters X or x)"),
    "construction": Key(STR, "none", choices=("none", "sparse", "divisor", "converse"), doc="build f from a, d, b, p1, p2, S"),
    "a": Key(INT, None),
    "d": Key(INT, None),
    "b": Key(INT, None),
    "p1": Key(INT, None),
    "p2": Key(INT, None),
}

_SHIFT = {
    "a": Key(INT, required=True, doc="shift (nonzero)"),
    "b": Key(INT, required=True, doc="additive constant"),
    "A": Key(INT, 1, doc="left multiplier (nonzero)"),
    "B": Key(INT, 1, doc="right multiplier (nonzero)"),
    "X": Key(INT, required=True, doc="range end"),
}

DISC_DOC = "disc function: 1, 0, lambda, lambda_T, chi3, chi4, nit:<t>, chi:<q>:<j>, chi_f:<q>:<j>, joined by *"

EXPERIMENTS: dict[str, dict[str, Key]] = {
    "solutions": dict(_SHIFT),
    "density": {**_SHIFT, "limit": Key(INT, 1000, doc="largest prime power"), "delta": Key(FLOAT, 0.1, doc="flag Delta > delta/4")},
    "gap-scan": {"C": Key(INT, required=True), "X": Key(INT, required=True)},
    "distance": {"g1": Key(STR, required=True, doc=DISC_DOC), "g2": Key(STR, "1", doc=DISC_DOC), "x": Key(INTS, required=True, doc="checkpoints")},
    "halasz": {
        "g": Key(STR, required=True, doc=DISC_DOC),
        "x": Key(INT, required=True),
        "T": Key(FLOAT, 1.0),
        "grid_points": Key(INT, 4097),
    },
    "tk": {
        "additive": Key(STR, "omega", choices=("omega", "class", "set"), doc="omega, omega over a residue class, or over a prime list"),
        "r": Key(INT, 1),
        "q": Key(INT, 4),
        "primes": Key(INTS, []),
        "X": Key(INT, required=True),
    },
    "elliott": {**_SHIFT, "limit": Key(INT, 1000)},
    "correlation": {
        "g1": Key(STR, required=True, doc=DISC_DOC),
        "g2": Key(STR, required=True, doc=DISC_DOC),
        "a": Key(INT, 1),
        "b": Key(INT, 0),
        "c": Key(INT, 1),
        "d": Key(INT, 1),
        "x": Key(INT, required=True),
    },
    "local-power": {
        "ell": Key(INT, required=True),
        "D": Key(INT, 1),
        "X": Key(INT, required=True),
        "mode": Key(STR, "exact", choices=("exact", "weighted")),
    },
    "fs-scan": {"L": Key(INT, required=True), "X": Key(INT, 10**4)},
    "sf-density": {"X": Key(INT, required=True)},
    "converse-verify": {"X": Key(INT, required=True)},
    "sieve-predict": {
        "exact": Key(TRIPLES, [], doc="p:nu:shift for p^nu || n+shift"),
        "coprime": Key(PAIRS, [], doc="p:shift for gcd(n+shift, p) = 1"),
        "S": Key(INTS, []),
        "shifts": Key(INTS, [0]),
        "X": Key(INT, 0, doc="brute-force count up to X when > 0"),
    },
    "random-T": {"X": Key(INT, required=True), "seeds": Key(INTS, required=True), "S": Key(INTS, [])},
}

OUTPUT_KEYS: dict[str, Key] = {
    "dir": Key(STR, None, doc=f"output directory (default ${DEFAULT_OUTPUT_ENV} or ./mfshift-out)"),
    "members": Key(BOOL, False, doc="also write members.txt where applicable"),
}

EXPERIMENT_KEYS: dict[str, Key] = {"name": Key(STR, required=True, choices=tuple(EXPERIMENTS))}

SECTIONS = ("function", "experiment", "parameters", "output")


@dataclass
class ExperimentConfig:
    function: dict[str, Any]
    experiment: str
    parameters: dict[str, Any]
    output: dict[str, Any]
    derived: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_text(self) -> str:
        """Canonical INI text with every key resolved; parses back to an equal config."""
        lines = ["[function]"]
        lines += [f"{k} = {_fmt(self.function[k])}" for k in FUNCTION_KEYS]
        lines += ["", "[experiment]", f"name = {self.experiment}", "", "[parameters]"]
        lines += [f"{k} = {_fmt(self.parameters[k])}" for k in EXPERIMENTS[self.experiment]]
        lines += ["", "[output]"]
        lines += [f"{k} = {_fmt(self.output[k])}" for k in OUTPUT_KEYS]
        return "\n".join(lines) + "\n"


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            name = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            if name == key:
                return i
    return None


def _resolve(text: str, section: str, raw: dict[str, str], schema: dict[str, Key]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k in raw:
        if k not in schema:
            raise ConfigError(f"unknown key in [{section}]; allowed: {', '.join(schema)}", k, _line_of(text, section, k))
    for k, spec in schema.items():
        if k not in raw or raw[k].strip() == "":
            if spec.required:
                raise ConfigError(f"required in [{section}]", k, _line_of(text, section))
            d = spec.default
            out[k] = list(d) if isinstance(d, list) else d
            continue
        try:
            v = spec.parse(raw[k])
        except ValueError as e:
            raise ConfigError(f"type mismatch: {e}", k, _line_of(text, section, k)) from None
        if spec.choices and v not in spec.choices:
            raise ConfigError(f"must be one of {', '.join(spec.choices)}", k, _line_of(text, section, k))
        out[k] = v
    return out


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (A vs a)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed document: {e}") from None
    for s in cp.sections():
        if s not in SECTIONS:
            raise ConfigError(f"unknown section [{s}]; expected {', '.join(SECTIONS)}", s, _line_of(text, s))
    raw = {s: dict(cp[s]) if cp.has_section(s) else {} for s in SECTIONS}
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section", "name")
    exp = _resolve(text, "experiment", raw["experiment"], EXPERIMENT_KEYS)["name"]
    fn = _resolve(text, "function", raw["function"], FUNCTION_KEYS)
    params = _resolve(text, "parameters", raw["parameters"], EXPERIMENTS[exp])
    out = _resolve(text, "output", raw["output"], OUTPUT_KEYS)
    cfg = ExperimentConfig(fn, exp, params, out)
    cfg.derived = _validate(cfg, text)
    return cfg


def _validate(cfg: ExperimentConfig, text: str) -> dict[str, Any]:
    """Cross-key constraints; returns derived quantities."""
    p, fn, exp = cfg.parameters, cfg.function, cfg.experiment

    def fail(msg: str, section: str, key: str):
        raise ConfigError(msg, key, _line_of(text, section, key))

    if exp in ("solutions", "density", "elliott"):
        for k in ("a", "A", "B"):
            if p[k] == 0:
                fail("aAB ≠ 0 is required", "parameters", k)
        if p["X"] < 1:
            fail("X must be >= 1", "parameters", "X")
    if exp in ("density", "elliott") and p["limit"] > p["X"]:
        fail("limit must not exceed X", "parameters", "limit")
    if exp == "correlation":
        if p["a"] < 1 or p["c"] < 1:
            fail("a and c must be positive", "parameters", "a" if p["a"] < 1 else "c")
        if p["a"] * p["d"] - p["b"] * p["c"] == 0:
            fail("ad - bc ≠ 0 is required", "parameters", "d")
    if exp == "gap-scan" and p["C"] < 1:
        fail("C must be >= 1", "parameters", "C")
    if exp == "local-power" and p["X"] < p["ell"]:
        fail("X must be >= ell", "parameters", "X")
    if exp == "converse-verify" and fn["construction"] != "converse":
        fail("converse-verify needs construction = converse in [function]", "function", "construction")
    if fn["rule"] == "monomial" and fn["k"] < 0:
        fail("monomial exponent must be >= 0", "function", "k")

    derived: dict[str, Any] = {}
    c = fn["construction"]
    need = {"sparse": ("p1", "p2", "b"), "divisor": ("a", "d", "b", "p1", "p2"), "converse": ("a", "d", "b")}.get(c, ())
    for k in need:
        if fn[k] is None:
            fail(f"required by construction = {c}", "function", k)
    if c == "converse":
        a, d, b = fn["a"], fn["d"], fn["b"]
        if a == 0 or d < 1 or a % d:
            fail("need a != 0 and a positive divisor d of a", "function", "d")
        if b % (a // d):
            fail("a/d must divide b", "function", "b")
        derived["k"] = d * b // a
    return derived


def explain(experiment: str) -> str:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment; choose from {', '.join(EXPERIMENTS)}", "name")
    out = [f"[experiment]\nname = {experiment}\n", "[parameters]"]
    for k, spec in EXPERIMENTS[experiment].items():
        req = "required" if spec.required else f"default {_fmt(spec.default) or '(none)'}"
        extra = f"; one of {', '.join(spec.choices)}" if spec.choices else ""
        doc = f"  {spec.doc}" if spec.doc else ""
        out.append(f"  {k:<12} {req}{extra}{doc}")
    out.append("\n[function]")
    for k, spec in FUNCTION_KEYS.items():
        extra = f"; one of {', '.join(spec.choices)}" if spec.choices else ""
        out.append(f"  {k:<12} default {_fmt(spec.default) or '(none)'}{extra}  {spec.doc}".rstrip())
    out.append("\n[output]")
    for k, spec in OUTPUT_KEYS.items():
        out.append(f"  {k:<12} {spec.doc}")
    return "\n".join(out) + "\n"
