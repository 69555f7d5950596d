"""Command line entry point: ``run``, ``sweep``, ``diagnose`` and ``profile-check``.

Errors are reported as a one-line JSON object on stderr with a nonzero exit
code (2 for configuration problems, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, kernels
from .config import config_from_dict, parse_config, to_dict
from .errors import ConfigError, ObstacleMCFError
from .grid import Grid
from .measures import diagnose, xi_vanishing_study
from .potential import (
    ProfileParam,
    profile_ode_residual,
    profile_q_delta,
    profile_q_delta_deriv,
    sigma_delta,
)
from .solver import YOSIDA, SolverConfig, run, stability_limit

RUN_JSON = "run.json"
MANIFEST_JSON = "manifest.json"
XI_TABLE = "xi_table.csv"
DEFAULT_OUTPUT = "obstacle_mcf_out"
THREADS_ENV = "OBSTACLE_MCF_THREADS"


def _output_dir(cfg: SolverConfig) -> Path:
    return Path(cfg.output_dir if cfg.output_dir is not None else DEFAULT_OUTPUT)


def _run_echo(cfg: SolverConfig) -> dict:
    return {
        "config": to_dict(cfg),
        "dt": cfg.time_step,
        "n_steps": cfg.n_steps,
        "stability_limit": stability_limit(cfg),
    }


def cmd_run(cfg: SolverConfig) -> dict:
    """Run one configuration, persisting snapshots, the diagnostics CSV and a manifest."""
    start = time.perf_counter()
    out = _output_dir(cfg)
    if (out / io.SNAPSHOT_DIR).exists() and any((out / io.SNAPSHOT_DIR).iterdir()):
        raise ConfigError("output_dir", f"{out} already holds snapshots")
    out.mkdir(parents=True, exist_ok=True)
    (out / RUN_JSON).write_text(json.dumps(_run_echo(cfg), indent=2) + "\n", encoding="utf-8")
    counter = [0]

    def on_snapshot(snap, diss, lam):
        extras = {"dissipation_accum": diss, "lambda_mass": lam}
        io.save_snapshot(snap, out / io.SNAPSHOT_DIR / io.snapshot_name(counter[0]), extras)
        counter[0] += 1

    with io.CSVWriter(out / io.CSV_NAME) as writer:
        run(cfg, on_snapshot=on_snapshot, on_record=writer.write, keep_snapshots=False)
    files = [f for f in io.file_listing(out) if f["path"] != MANIFEST_JSON]
    manifest = {
        "config": to_dict(cfg),
        "output_dir": str(out),
        "files": files,
        "snapshots": counter[0],
        "backend": kernels.BACKEND,
        "duration_s": time.perf_counter() - start,
    }
    (out / MANIFEST_JSON).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def cmd_diagnose(run_dir, out_csv=None) -> Path:
    """Recompute diagnostics from persisted snapshots.

    One row per snapshot; with ``snapshot_every == diagnostics_every`` this
    reproduces the in-run CSV byte for byte.
    """
    run_dir = Path(run_dir)
    echo = json.loads((run_dir / RUN_JSON).read_text(encoding="utf-8"))
    cfg = config_from_dict(echo["config"])
    kernel = cfg.kernel()
    dt = echo["dt"]
    snaps = io.list_snapshots(run_dir)
    if not snaps:
        raise ObstacleMCFError(f"no snapshots under {run_dir}")
    out_csv = Path(out_csv) if out_csv is not None else run_dir / "diagnostics_offline.csv"
    with io.CSVWriter(out_csv) as writer:
        for d in snaps:
            state, meta = io.load_snapshot(d)
            writer.write(diagnose(state, kernel, meta.get("dissipation_accum", 0.0),
                                  meta.get("lambda_mass", 0.0), dt=dt))
    return out_csv


def sweep_configs(base: SolverConfig, epsilons) -> list:
    """Member configs keeping ``h/eps`` (and ``delta/eps**2``) of the base run fixed.

    A numeric base ``dt`` is rescaled by the ratio of stability limits.
    """
    ratio = base.grid.h / base.epsilon
    root = _output_dir(base)
    out = []
    for eps in epsilons:
        eps = float(eps)
        nodes = tuple(int(round(e / (ratio * eps))) + 1 for e in base.grid.extent)
        grid = Grid(nodes, base.grid.extent)
        delta = base.delta * (eps / base.epsilon) ** 2 if base.scheme == YOSIDA else None
        cfg = replace(base, grid=grid, epsilon=eps, delta=delta,
                      output_dir=str(root / f"eps_{eps:g}"))
        if base.dt != "auto":
            cfg = replace(cfg, dt=float(base.dt) * stability_limit(cfg) / stability_limit(base))
        out.append(cfg)
    return out


def worker_count(n_jobs: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(THREADS_ENV, f"not an integer: {raw!r}") from None
        if cap < 1:
            raise ConfigError(THREADS_ENV, "must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def cmd_sweep(base: SolverConfig, epsilons) -> dict:
    """Run one member per epsilon and tabulate ``max_t xi_mass`` on the common window."""
    if len(epsilons) == 0:
        raise ConfigError("epsilons", "empty list")
    cfgs = sweep_configs(base, epsilons)
    workers = worker_count(len(cfgs))
    if workers == 1:
        manifests = [cmd_run(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            manifests = list(pool.map(cmd_run, cfgs))
    window = min(c.t_end for c in cfgs)
    runs = {}
    for c in cfgs:
        recs = io.read_records(_output_dir(c) / io.CSV_NAME)
        runs[c.epsilon] = [r for r in recs if r.t <= window]
    table = xi_vanishing_study(runs)
    root = _output_dir(base)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / XI_TABLE, "w", encoding="utf-8") as fh:
        fh.write("epsilon,max_xi_mass\n")
        for eps, xm in table:
            fh.write(f"{io.fmt_float(eps)},{io.fmt_float(xm)}\n")
    masses = [row[1] for row in table]
    return {
        "manifests": manifests,
        "xi_table": table,
        "strictly_decreasing": all(b < a for a, b in zip(masses, masses[1:])),
        "workers": workers,
    }


PROFILE_DELTAS = (0.3, 0.1, 0.01, 1e-4)


def cmd_profile_check(eps: float = 0.05, samples: int = 1000) -> dict:
    """Self-test of the profile identities and the surface-tension table."""
    rows = []
    ok = True
    for d in PROFILE_DELTAS:
        p = ProfileParam(eps, d)
        r1 = eps * math.asin(math.sqrt(1.0 - d))
        r = np.linspace(-4.0 * r1, 4.0 * r1, samples)
        res = float(np.max(np.abs(profile_ode_residual(r, p))))
        ends = max(abs(profile_q_delta(r1, p) - 1.0), abs(profile_q_delta(-r1, p) + 1.0))
        slope = float(np.max(np.abs(profile_q_delta_deriv(r, p)))) * eps
        closed, quad = sigma_delta(d), sigma_delta(d, method="quad")
        row = {
            "delta": d,
            "ode_residual": res,
            "endpoint_error": ends,
            "eps_sup_q_r": slope,
            "sigma_closed": closed,
            "sigma_quad": quad,
            "sigma_gap": abs(closed - quad),
        }
        row["pass"] = res < 1e-12 and ends < 1e-12 and slope <= 2.0 and row["sigma_gap"] < 1e-8
        ok = ok and row["pass"]
        rows.append(row)
    return {"epsilon": eps, "rows": rows, "sigma_limit": sigma_delta(None), "pass": ok}


def _parse_epsilons(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--epsilons", f"not a comma-separated list of numbers: {text!r}") from None
    if not vals or any(not (v > 0) for v in vals):
        raise ConfigError("--epsilons", "need positive values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="obstacle-mcf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one configuration")
    p.add_argument("config")
    p = sub.add_parser("sweep", help="run the configuration at several epsilons")
    p.add_argument("config")
    p.add_argument("--epsilons", required=True, help="comma-separated, e.g. 0.1,0.05,0.025")
    p = sub.add_parser("diagnose", help="recompute diagnostics from a run directory")
    p.add_argument("dir")
    p.add_argument("--out", default=None, help="CSV path (default: <dir>/diagnostics_offline.csv)")
    sub.add_parser("profile-check", help="check profile identities and surface tension")
    return ap


def _emit(obj):
    print(json.dumps(obj, indent=2, default=str))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            m = cmd_run(parse_config(args.config))
            _emit({k: m[k] for k in ("output_dir", "snapshots", "duration_s")} | {"files": len(m["files"])})
        elif args.command == "sweep":
            res = cmd_sweep(parse_config(args.config), _parse_epsilons(args.epsilons))
            _emit({"xi_table": res["xi_table"], "strictly_decreasing": res["strictly_decreasing"],
                   "runs": [m["output_dir"] for m in res["manifests"]]})
        elif args.command == "diagnose":
            _emit({"csv": str(cmd_diagnose(args.dir, args.out))})
        else:
            rep = cmd_profile_check()
            _emit(rep)
            return 0 if rep["pass"] else 1
    except ObstacleMCFError as exc:
        err = {"error": exc.code, "type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            err["key"] = exc.key
        print(json.dumps(err), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": "io" if isinstance(exc, OSError) else "value",
                          "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
