"""Flat ``key = value`` run configuration.

Grammar, one statement per line::

    # comment (also allowed after a value)
    scenario = cole-hopf
    problem.q = 2
    ladder.n = 100, 200, 400, 800

Keys are dotted names from :data:`KEYS`; list values are comma separated;
booleans are ``true``/``false``.  Unknown keys and repeated keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional


class ConfigError(ValueError):
    """Parse or validation failure; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


SCENARIO_NAMES = ("cole-hopf", "removability", "vss-convergence", "dichotomy-scan",
                  "dirichlet-vss", "universal-bounds", "subsolution-transform")


@dataclass(frozen=True)
class RunConfig:
    scenario: Optional[str] = None
    N: int = 1
    q: float = 2.0
    R: float = 10.0
    n: int = 400
    safety: float = 0.5
    t_end: float = 0.5
    data_kind: str = "gaussian"
    k: float = 10.0
    eps: float = 0.1
    M: float = 100.0
    eta: float = 0.2
    z0_peak: float = 0.5
    variance4: float = 1.0
    ladder_n: Optional[tuple] = None
    ladder_k: Optional[tuple] = None
    ladder_eps: Optional[tuple] = None
    ladder_eta: Optional[tuple] = None
    ladder_q: Optional[tuple] = None
    ladder_t: Optional[tuple] = None
    ladder_caps: Optional[tuple] = None
    target_k: float = 1.3
    outdir: Optional[str] = None
    workers: int = 1


# key -> (RunConfig attribute, kind)
KEYS = {
    "scenario": ("scenario", "str"),
    "problem.N": ("N", "int"),
    "problem.q": ("q", "float"),
    "grid.R": ("R", "float"),
    "grid.n": ("n", "int"),
    "stepper.safety": ("safety", "float"),
    "stepper.t_end": ("t_end", "float"),
    "data.kind": ("data_kind", "str"),
    "data.k": ("k", "float"),
    "data.eps": ("eps", "float"),
    "data.M": ("M", "float"),
    "data.eta": ("eta", "float"),
    "data.z0_peak": ("z0_peak", "float"),
    "data.variance4": ("variance4", "float"),
    "ladder.n": ("ladder_n", "ints"),
    "ladder.k": ("ladder_k", "floats"),
    "ladder.eps": ("ladder_eps", "floats"),
    "ladder.eta": ("ladder_eta", "floats"),
    "ladder.q": ("ladder_q", "floats"),
    "ladder.t": ("ladder_t", "floats"),
    "ladder.caps": ("ladder_caps", "floats"),
    "transform.k": ("target_k", "float"),
    "run.outdir": ("outdir", "str"),
    "run.workers": ("workers", "int"),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYS.items()}


def _convert(kind: str, raw: str, key: str, line: int | None):
    try:
        if kind == "str":
            if not raw:
                raise ValueError("empty value")
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        conv = int if kind == "ints" else float
        return tuple(conv(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})", line, key) from None


def validate(cfg: RunConfig) -> RunConfig:
    def bad(attr, msg):
        raise ConfigError(f"{_ATTR_TO_KEY[attr]}: {msg}", key=_ATTR_TO_KEY[attr])

    if cfg.scenario is not None and cfg.scenario not in SCENARIO_NAMES:
        bad("scenario", f"unknown scenario {cfg.scenario!r}; choose from {', '.join(SCENARIO_NAMES)}")
    if cfg.N < 1:
        bad("N", "dimension must be >= 1")
    if not cfg.q > 1:
        bad("q", f"exponent must satisfy q > 1, got {cfg.q}")
    if not cfg.R > 0:
        bad("R", "outer radius must be positive")
    if cfg.n < 8:
        bad("n", "need at least 8 cells")
    if not 0 < cfg.safety <= 1:
        bad("safety", "safety must lie in (0, 1]")
    if not cfg.t_end >= 0:
        bad("t_end", "t_end must be nonnegative")
    if cfg.data_kind not in ("dirac", "plateau", "gaussian"):
        bad("data_kind", "data kind must be dirac, plateau or gaussian")
    if cfg.workers < 1:
        bad("workers", "worker count must be >= 1")
    for attr in ("ladder_n", "ladder_k", "ladder_eps", "ladder_eta", "ladder_q", "ladder_t",
                 "ladder_caps"):
        v = getattr(cfg, attr)
        if v is None:
            continue
        if not all(math.isfinite(x) for x in v):
            bad(attr, "ladder entries must be finite")
        up = all(b > a for a, b in zip(v, v[1:]))
        down = all(b < a for a, b in zip(v, v[1:]))
        if not (up or down):
            bad(attr, "ladder must be strictly sorted")
    if cfg.ladder_q is not None and min(cfg.ladder_q) <= 1:
        bad("ladder_q", "every q must satisfy q > 1")
    return cfg


def parse_config(text: str) -> RunConfig:
    values = {}
    seen = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in seen:
            raise ConfigError(f"key {key!r} repeated (first on line {seen[key]})", lineno, key)
        seen[key] = lineno
        attr, kind = KEYS[key]
        values[attr] = _convert(kind, raw, key, lineno)
    return validate(RunConfig(**values))


def _format(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config`; unset optional entries are omitted."""
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{_ATTR_TO_KEY[f.name]} = {_format(v)}")
    return "\n".join(lines) + "\n"


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Set ``{dotted key: raw string}`` on top of ``cfg`` and revalidate."""
    changes = {}
    for key, raw in overrides.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        attr, kind = KEYS[key]
        changes[attr] = _convert(kind, str(raw), key, None)
    return validate(replace(cfg, **changes))
