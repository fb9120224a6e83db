"""Command-line entry point ``vhj``.

Exit codes: 0 Pass, 1 Fail, 2 Indeterminate, 3 configuration error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from . import experiments as ex
from .config import ConfigError, RunConfig, apply_overrides, parse_config, serialize
from .evolution import (GaussianCH, MollifiedDirac, Plateau, StepperConfig, evolve,
                        make_initial_data, run_manifest)
from .grid import RadialGrid, write_field_csv
from .params import GaussianInitialData, ProblemParams, derive_exponents
from .profile import shoot_vss

EXIT = {ex.Verdict.PASS: 0, ex.Verdict.FAIL: 1, ex.Verdict.INDETERMINATE: 2}
EXIT_CONFIG = 3


def _pick(value, default):
    return default if value is None else value


def scenario_kwargs(cfg: RunConfig) -> dict:
    """Translate a config into keyword arguments of the named scenario."""
    s = cfg.scenario
    if s == "cole-hopf":
        return dict(N=cfg.N, ns=_pick(cfg.ladder_n, (100, 200, 400, 800)), R=cfg.R,
                    t_check=cfg.t_end, z0_peak=cfg.z0_peak, variance4=cfg.variance4,
                    safety=cfg.safety, workers=cfg.workers)
    if s == "removability":
        kw = dict(N=cfg.N, q=cfg.q, k=cfg.k, R=cfg.R, safety=cfg.safety, workers=cfg.workers,
                  eps_ladder=_pick(cfg.ladder_eps, (0.2, 0.1, 0.05, 0.025)))
        if cfg.ladder_t is not None:
            if len(cfg.ladder_t) != 2:
                raise ConfigError("ladder.t: removability window needs exactly t1, t2", key="ladder.t")
            kw["window_t"] = tuple(cfg.ladder_t)
        return kw
    if s == "vss-convergence":
        return dict(N=cfg.N, q=cfg.q, eps=cfg.eps, R=cfg.R, safety=cfg.safety,
                    k_ladder=_pick(cfg.ladder_k, (1.0, 10.0, 100.0, 1000.0)),
                    t_probes=_pick(cfg.ladder_t, (0.25, 0.5, 1.0)))
    if s == "dichotomy-scan":
        return dict(N=cfg.N, k=cfg.k, eps=cfg.eps, R=cfg.R, t_probe=cfg.t_end,
                    safety=cfg.safety, workers=cfg.workers,
                    q_grid=_pick(cfg.ladder_q, (1.3, 1.4, 1.45, 1.49, 1.51, 1.55, 1.6)))
    if s == "dirichlet-vss":
        return dict(N=cfg.N, q=cfg.q, R=cfg.R, n=cfg.n, t_probe=cfg.t_end, safety=cfg.safety,
                    workers=cfg.workers,
                    k_ladder=_pick(cfg.ladder_k, (1e4, 1e5, 1e6, 1e7)),
                    eta_ladder=_pick(cfg.ladder_eta, (0.005, 0.0025, 0.00125)),
                    cap_schedule=_pick(cfg.ladder_caps, (1e9, 1e10, 1e11)))
    if s == "universal-bounds":
        if cfg.data_kind == "gaussian":
            raise ConfigError("data.kind: universal bounds need singular data (dirac or plateau)",
                              key="data.kind")
        run = ex.SingularRun(label=f"{cfg.data_kind}-q{cfg.q}", q=cfg.q, N=cfg.N,
                             kind=cfg.data_kind, k=cfg.k, eps=cfg.eps, M=cfg.M, eta=cfg.eta,
                             R=cfg.R, n=cfg.n, t_end=cfg.t_end)
        return dict(runs=(run,), workers=cfg.workers)
    if s == "subsolution-transform":
        return dict(N=cfg.N, q=cfg.q, k_exp=cfg.target_k, eta=cfg.eta, z0_peak=cfg.z0_peak,
                    variance4=cfg.variance4, R=cfg.R, n=cfg.n, t_end=cfg.t_end,
                    safety=cfg.safety)
    raise ConfigError("scenario: missing or unknown scenario", key="scenario")


def outdir_for(cfg: RunConfig, flag: str | None = None) -> Path:
    return Path(flag or cfg.outdir or os.environ.get("VHJ_OUTDIR") or "runs")


def run_experiment(cfg: RunConfig) -> ex.ExperimentReport:
    kwargs = scenario_kwargs(cfg)
    try:
        return ex.SCENARIOS[cfg.scenario](**kwargs)
    except ValueError as exc:  # scenario-level validation of the inputs
        raise ConfigError(str(exc)) from exc


def run(cfg: RunConfig, outdir: str | None = None) -> int:
    """Run the configured scenario, write its report, return the exit code."""
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = report.write(outdir_for(cfg, outdir))
    for line in report.summary:
        print(line)
    print(f"report: {path}")
    return EXIT[report.verdict]


def _load(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())


def _data_spec(cfg: RunConfig):
    if cfg.data_kind == "dirac":
        return MollifiedDirac(cfg.k, cfg.eps)
    if cfg.data_kind == "plateau":
        return Plateau(cfg.M, cfg.eta)
    return GaussianCH(GaussianInitialData(cfg.z0_peak, cfg.variance4))


def cmd_solve(cfg: RunConfig, outdir: str | None) -> int:
    grid = RadialGrid(cfg.R, cfg.n)
    spec = _data_spec(cfg)
    try:
        f0 = make_initial_data(spec, grid, cfg.N)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    config = StepperConfig(cfg.t_end, safety=cfg.safety)
    manifest = run_manifest(grid, cfg.q, cfg.N, config, spec)
    traj = evolve(f0, config, cfg.q, cfg.N)
    run_dir = outdir_for(cfg, outdir) / f"solve-{ex.manifest_hash(manifest)}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    traj.to_csv(run_dir / "trajectory.csv")
    write_field_csv(traj.final, run_dir / "final.csv")
    print(f"t={cfg.t_end}: sup={traj.sup[-1]:.6g} mass={traj.mass[-1]:.6g} steps={traj.steps}")
    print(f"run: {run_dir}")
    return 0


def cmd_shoot(cfg: RunConfig, outdir: str | None) -> int:
    bundle = derive_exponents(ProblemParams(cfg.N, cfg.q))
    if cfg.q >= 2:
        print("configuration error: problem.q: shooting needs q < 2", file=sys.stderr)
        return EXIT_CONFIG
    prof = shoot_vss(bundle)
    key = ex.manifest_hash({"N": cfg.N, "q": cfg.q})
    run_dir = outdir_for(cfg, outdir) / f"shoot-{key}"
    run_dir.mkdir(parents=True, exist_ok=True)
    if prof:
        prof.write(run_dir / "profile.csv", run_dir / "profile.json")
        print(f"N={cfg.N} q={cfg.q}: f0* = {prof.f0_star:.10g}")
    else:
        (run_dir / "profile.json").write_text(json.dumps(
            {"N": cfg.N, "q": cfg.q, "classification": "NoFastDecayProfile",
             "scan": prof.scan}, indent=2, sort_keys=True))
        print(f"N={cfg.N} q={cfg.q}: no fast-decay profile")
    print(f"run: {run_dir}")
    return 0


def _sweep_point(args):
    cfg, outdir = args
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        return {"verdict": "ConfigError", "error": str(exc), "run_dir": ""}
    path = report.write(outdir)
    return {"verdict": report.verdict.value, "error": "", "run_dir": str(path)}


def _sort_key(raw: str):
    try:
        return (0, float(raw), raw)
    except ValueError:
        return (1, 0.0, raw)


def cmd_sweep(cfg: RunConfig, vary: list, outdir: str | None, workers: int) -> int:
    """Cartesian product over ``--vary KEY V1 V2 ...``; one experiment per point."""
    if cfg.scenario is None:
        print("configuration error: sweep needs a scenario", file=sys.stderr)
        return EXIT_CONFIG
    keys = [v[0] for v in vary]
    if len(set(keys)) != len(keys):
        print("configuration error: a key is varied twice", file=sys.stderr)
        return EXIT_CONFIG
    points = []
    for combo in itertools.product(*[v[1:] for v in vary]):
        overrides = dict(zip(keys, combo))
        try:
            points.append((overrides, replace(apply_overrides(cfg, overrides), workers=1)))
        except ConfigError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    root = outdir_for(cfg, outdir)
    args = [(p, root) for _, p in points]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, args))
    else:
        results = [_sweep_point(a) for a in args]
    rows = sorted(({**{k: o[k] for k in keys}, **r} for (o, _), r in zip(points, results)),
                  key=lambda r: tuple(_sort_key(r[k]) for k in keys))
    root.mkdir(parents=True, exist_ok=True)
    lines = [",".join(keys + ["verdict", "run_dir"])]
    lines += [",".join([str(r[k]) for k in keys] + [r["verdict"], r["run_dir"]]) for r in rows]
    (root / "sweep.csv").write_text("\n".join(lines) + "\n")
    for line in lines[1:]:
        print(line)
    verdicts = {r["verdict"] for r in rows}
    if "ConfigError" in verdicts:
        return EXIT_CONFIG
    if "Fail" in verdicts:
        return 1
    if "Indeterminate" in verdicts:
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vhj", description="viscous Hamilton-Jacobi laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", help="key = value config file")
        sp.add_argument("-o", "--outdir", help="output root (default $VHJ_OUTDIR or ./runs)")
        sp.add_argument("--workers", type=int, default=None, help="worker processes")

    common(sub.add_parser("solve", help="single evolution; writes trajectory and final field"))
    common(sub.add_parser("shoot", help="single profile shot; writes profile CSV and JSON"))
    e = sub.add_parser("experiment", help="run a named scenario")
    e.add_argument("name")
    common(e)
    s = sub.add_parser("sweep", help="cartesian product of config overrides")
    common(s)
    s.add_argument("--vary", nargs="+", action="append", default=[], metavar="KEY V",
                   help="a key followed by its values, e.g. --vary problem.q 1.3 1.4")
    sub.add_parser("version", help="print the version")
    sub.add_parser("show-config", help="print the parsed config").add_argument("-c", "--config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    try:
        cfg = _load(args.config)
        workers = getattr(args, "workers", None)
        if workers is not None:
            if workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg = replace(cfg, workers=workers)
        if args.command == "experiment":
            cfg = replace(cfg, scenario=args.name)
            scenario_kwargs(cfg)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "show-config":
        sys.stdout.write(serialize(cfg))
        return 0
    if args.command == "solve":
        return cmd_solve(cfg, args.outdir)
    if args.command == "shoot":
        return cmd_shoot(cfg, args.outdir)
    if args.command == "experiment":
        return run(cfg, args.outdir)
    if any(len(v) < 2 for v in args.vary):
        print("configuration error: --vary needs a key and at least one value", file=sys.stderr)
        return EXIT_CONFIG
    return cmd_sweep(cfg, args.vary, args.outdir, cfg.workers)


if __name__ == "__main__":
    sys.exit(main())
