"""Flat ``key = value`` run configuration with dotted ``shape.*`` keys.

Example::

    dim = 2
    nodes = 161
    extent = 2.0
    shape.kind = sphere
    shape.center = 0.0, 0.0
    shape.radius = 0.5
    epsilon = 0.05
    delta = 0.0025
    scheme = yosida
    dt = auto
    t_end = 0.06
    snapshot_every = 500
    diagnostics_every = 500
    output_dir = out/reference

Blank lines and ``#`` comments are ignored.  ``nodes`` and ``extent`` take
one value (same on every axis) or one per axis.
"""
from __future__ import annotations

import math
from pathlib import Path

from .errors import ConfigError
from .grid import Grid
from .initial_data import Annulus, Sphere, TwoSpheres
from .solver import SCHEMES, YOSIDA, SolverConfig, stability_limit

SHAPE_KEYS = {
    "sphere": ("shape.center", "shape.radius"),
    "annulus": ("shape.center", "shape.r_inner", "shape.r_outer"),
    "union": ("shape.c1", "shape.r1", "shape.c2", "shape.r2"),
}
BASE_KEYS = (
    "dim", "nodes", "extent", "shape.kind", "epsilon", "delta", "scheme", "dt",
    "t_end", "snapshot_every", "diagnostics_every", "output_dir",
)
OPTIONAL_KEYS = {"delta", "output_dir", "dt", "snapshot_every", "diagnostics_every"}


def _read_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(key, "given twice")
        pairs[key] = value
    return pairs


def _float(key, value, lo=None, hi=None, lo_open=True, hi_open=True):
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(key, f"not a number: {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(key, "must be finite")
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ConfigError(key, f"{x} is below the allowed range")
    if hi is not None and (x > hi or (hi_open and x == hi)):
        raise ConfigError(key, f"{x} is above the allowed range")
    return x


def _int(key, value, lo):
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(key, f"not an integer: {value!r}") from None
    if n < lo:
        raise ConfigError(key, f"must be >= {lo}")
    return n


def _vector(key, value, dim, conv):
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if len(parts) == 1:
        parts = parts * dim
    if len(parts) != dim:
        raise ConfigError(key, f"expected 1 or {dim} values, got {len(parts)}")
    return tuple(conv(key, p) for p in parts)


def config_from_dict(pairs: dict) -> SolverConfig:
    kind = pairs.get("shape.kind")
    if kind is None:
        raise ConfigError("shape.kind", "missing")
    if kind not in SHAPE_KEYS:
        raise ConfigError("shape.kind", f"unknown shape {kind!r}; use one of {sorted(SHAPE_KEYS)}")
    allowed = set(BASE_KEYS) | set(SHAPE_KEYS[kind])
    for key in pairs:
        if key not in allowed:
            raise ConfigError(key, "unknown key")
    for key in allowed - OPTIONAL_KEYS:
        if key not in pairs:
            raise ConfigError(key, "missing")

    dim = _int("dim", pairs["dim"], 1)
    if dim > 3:
        raise ConfigError("dim", "must be 1, 2 or 3")
    nodes = _vector("nodes", pairs["nodes"], dim, lambda k, v: _int(k, v, 16))
    extent = _vector("extent", pairs["extent"], dim, lambda k, v: _float(k, v, lo=0.0))
    try:
        grid = Grid(nodes, extent)
    except ValueError as exc:
        raise ConfigError("nodes", str(exc)) from None

    def point(key):
        return _vector(key, pairs[key], dim, lambda k, v: _float(k, v))

    def radius(key):
        return _float(key, pairs[key], lo=0.0)

    try:
        if kind == "sphere":
            shape = Sphere(point("shape.center"), radius("shape.radius"))
        elif kind == "annulus":
            shape = Annulus(point("shape.center"), radius("shape.r_inner"), radius("shape.r_outer"))
        else:
            shape = TwoSpheres(point("shape.c1"), radius("shape.r1"), point("shape.c2"), radius("shape.r2"))
    except ValueError as exc:
        raise ConfigError("shape." + kind, str(exc)) from None

    eps = _float("epsilon", pairs["epsilon"], lo=0.0)
    scheme = pairs["scheme"].lower()
    if scheme not in SCHEMES:
        raise ConfigError("scheme", f"unknown scheme {pairs['scheme']!r}; use yosida or projection")
    delta = None
    if scheme == YOSIDA:
        if "delta" not in pairs:
            raise ConfigError("delta", "required by the yosida scheme")
        delta = _float("delta", pairs["delta"], lo=0.0, hi=0.5)
    elif "delta" in pairs:
        raise ConfigError("delta", "the projection scheme takes no delta")

    dt_raw = pairs.get("dt", "auto")
    dt = "auto" if dt_raw == "auto" else _float("dt", dt_raw, lo=0.0)
    t_end = _float("t_end", pairs["t_end"], lo=0.0, lo_open=False)
    snap = _int("snapshot_every", pairs.get("snapshot_every", "1"), 0)
    diag = _int("diagnostics_every", pairs.get("diagnostics_every", "1"), 0)
    out = pairs.get("output_dir")
    cfg = SolverConfig(grid, shape, eps, delta, scheme, dt, t_end, snap, diag, out)
    if dt != "auto":
        lim = stability_limit(cfg)
        if dt > lim * (1.0 + 1e-12):
            raise ConfigError("dt", f"{dt} exceeds the stability limit {lim:.6g}")
    return cfg


def parse_config_text(text: str) -> SolverConfig:
    return config_from_dict(_read_pairs(text))


def parse_config(path) -> SolverConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("path", f"{p} does not exist")
    return parse_config_text(p.read_text(encoding="utf-8"))


def _vec(v):
    return ", ".join(repr(float(x)) for x in v)


def to_dict(cfg: SolverConfig) -> dict:
    d = {
        "dim": str(cfg.grid.dim),
        "nodes": ", ".join(str(n) for n in cfg.grid.nodes),
        "extent": _vec(cfg.grid.extent),
        "shape.kind": cfg.shape.kind,
    }
    s = cfg.shape
    if isinstance(s, Sphere):
        d.update({"shape.center": _vec(s.center), "shape.radius": repr(float(s.radius))})
    elif isinstance(s, Annulus):
        d.update({"shape.center": _vec(s.center), "shape.r_inner": repr(float(s.r_inner)),
                  "shape.r_outer": repr(float(s.r_outer))})
    else:
        d.update({"shape.c1": _vec(s.c1), "shape.r1": repr(float(s.r1)),
                  "shape.c2": _vec(s.c2), "shape.r2": repr(float(s.r2))})
    d["epsilon"] = repr(float(cfg.epsilon))
    if cfg.scheme == YOSIDA:
        d["delta"] = repr(float(cfg.delta))
    d["scheme"] = cfg.scheme
    d["dt"] = "auto" if cfg.dt == "auto" else repr(float(cfg.dt))
    d["t_end"] = repr(float(cfg.t_end))
    d["snapshot_every"] = str(cfg.snapshot_every)
    d["diagnostics_every"] = str(cfg.diagnostics_every)
    if cfg.output_dir is not None:
        d["output_dir"] = str(cfg.output_dir)
    return d


def serialize(cfg: SolverConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_dict(cfg).items())
