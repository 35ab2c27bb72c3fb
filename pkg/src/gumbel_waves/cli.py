"""Command-line front door: one subcommand per simulator plus predictors
and analysis, with reproducible CSV/JSON outputs.

Every output file gets a JSON sidecar carrying the fully resolved
configuration, the package version, the seed, and any approximation flags.
Outputs are byte-stable for a fixed seed and configuration: floats are
written with shortest round-trip decimals and no timestamps are recorded.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    Verdict,
    standardized_density,
    verdicts_to_json,
    width_exponent,
)
from .engine import ModelParams, run, trajectory_to_csv
from .gw import GwConfig, envelope, run_ensemble, ensemble_to_csv
from .dfmm import DfmmConfig, wave_profile, wave_profile_to_csv
from .qmm import QmmConfig, qmm_run, snapshot_to_csv
from .sfmm import SfmmConfig, families_to_csv, run_sfmm, snapshot_to_csv as sfmm_snapshot_to_csv
from .tails import (
    GrowthPrediction,
    TypeI,
    predict,
    tail_from_fields,
    tail_to_config,
    wave_location,
    x_statistic,
)

_LOG10 = math.log(10.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(message)


class _Outputs:
    """Tracks files written by a command so failures leave no partial output."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        p = self.outdir / name
        self.written.append(p)
        return p

    def discard_all(self) -> None:
        for p in self.written:
            try:
                p.unlink()
            except OSError:
                pass

    def sidecar(self, name: str, payload: dict) -> None:
        payload = dict(payload)
        payload["version"] = __version__
        with open(self.path(name), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_config_section(path: Optional[str], section: str) -> Dict[str, str]:
    if not path:
        return {}
    parser = configparser.ConfigParser()
    parser.optionxform = str  # exact key preservation
    read = parser.read(path)
    if not read:
        raise UsageError(f"config file not found: {path}")
    if not parser.has_section(section):
        return {}
    return dict(parser.items(section))


def _resolve(args: argparse.Namespace, config: Dict[str, str], key: str, default, cast):
    cli_val = getattr(args, key.replace("-", "_"), None)
    if cli_val is not None:
        return cli_val
    if key in config:
        return cast(config[key])
    return default


def _tail_from_args(args, config) -> object:
    fields = {
        "tail": _resolve(args, config, "tail", "type1", str),
        "n": str(_resolve(args, config, "n", 1, int)),
        "alpha": str(_resolve(args, config, "alpha", 1.0, float)),
        "L": _resolve(args, config, "L", "", str),
        "c": str(_resolve(args, config, "c", 20.0 * _LOG10, float)),
    }
    return tail_from_fields(fields)


def _out_dir(args) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get("GUMBEL_WAVES_OUT")
    return Path(env) if env else Path(".")


def _record_times(args, horizon: int) -> List[int]:
    if getattr(args, "record_log2", False):
        times = [2**j for j in range(64) if 2**j <= horizon]
        return sorted(set(times + [horizon]))
    if getattr(args, "record_times", None):
        return sorted({int(t) for t in args.record_times})
    return [horizon]


# ---------------------------------------------------------------- commands


def _cmd_predict(args, out: _Outputs, config) -> None:
    spec = _tail_from_args(args, config)
    t = float(args.t)
    pred = predict(spec, t)
    if isinstance(pred, GrowthPrediction):
        line = f"u={pred.u!r} v={pred.v!r} s={pred.s!r} logX_scale={pred.log_x_scale!r} target={pred.exponent_target!r}"
    else:
        line = (
            f"x_target={pred.x_target!r} w_target={pred.w_target!r} "
            f"log_w_scale={pred.log_w_scale!r}"
        )
    print(line)
    if args.out:
        with open(out.path("predict.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            if isinstance(pred, GrowthPrediction):
                writer.writerow(["t", "u", "v", "s", "logX_scale", "target"])
                writer.writerow([repr(pred.t), repr(pred.u), repr(pred.v), repr(pred.s), repr(pred.log_x_scale), repr(pred.exponent_target)])
            else:
                writer.writerow(["t", "x_target", "w_target", "log_w_scale"])
                writer.writerow([repr(pred.t), repr(pred.x_target), repr(pred.w_target), repr(pred.log_w_scale)])
        out.sidecar("predict.json", {"command": "predict", "t": t, "tail": tail_to_config(spec), "seed": args.seed})


def _cmd_simulate(args, out: _Outputs, config) -> None:
    spec = _tail_from_args(args, config)
    beta = _resolve(args, config, "beta", 0.01, float)
    horizon = _resolve(args, config, "horizon", 100, int)
    variant = _resolve(args, config, "variant", "FMM", str).upper()
    replicas = _resolve(args, config, "replicas", 1, int)
    jobs = _resolve(args, config, "jobs", 1, int)
    initial = _parse_initial(_resolve(args, config, "initial", "1.0:1", str))
    max_log10_x = _resolve(args, config, "max-log10-x", None, float)
    max_log_x = max_log10_x * _LOG10 if max_log10_x is not None else None
    base = {
        "command": "simulate",
        "variant": variant,
        "beta": beta,
        "horizon": horizon,
        "tail": tail_to_config(spec),
        "seed": args.seed,
        "replicas": replicas,
        "initial": initial,
    }

    def one(rep: int):
        params = ModelParams(beta=beta, tail=spec, variant=variant, seed=args.seed)
        rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(rep,)))
        return run(params, horizon, initial=initial, max_log_x=max_log_x, rng=rng)

    if jobs > 1 and replicas > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(_simulate_worker, [(base, rep) for rep in range(replicas)]))
    else:
        trajs = [one(rep) for rep in range(replicas)]
    for rep, traj in enumerate(trajs):
        name = f"simulate_rep{rep}.csv"
        trajectory_to_csv(traj, str(out.path(name)))
        out.sidecar(
            f"simulate_rep{rep}.json",
            {**base, "replica": rep, "termination": traj.termination, "approx_flags": sorted(traj.approx_flags)},
        )


def _simulate_worker(payload):
    base, rep = payload
    from .tails import tail_from_config

    spec = tail_from_config(base["tail"])
    params = ModelParams(beta=base["beta"], tail=spec, variant=base["variant"], seed=base["seed"])
    rng = np.random.default_rng(np.random.SeedSequence(base["seed"], spawn_key=(rep,)))
    return run(params, base["horizon"], initial=base["initial"], rng=rng)


def _parse_initial(text: str) -> List:
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        fit, _, count = token.partition(":")
        out.append((float(fit), float(count or 1)))
    return out


def _cmd_dfmm(args, out: _Outputs, config) -> None:
    spec = _tail_from_args(args, config)
    if not isinstance(spec, TypeI):
        raise UsageError("deterministic profiles require --tail type1")
    beta = _resolve(args, config, "beta", 0.1, float)
    x0 = _resolve(args, config, "x0", 8, int)
    t = _resolve(args, config, "t", 10**5, int)
    cfg = DfmmConfig(spec, beta=beta, x0=x0, t=t)
    prof = wave_profile(cfg)
    wave_profile_to_csv(prof, str(out.path("dfmm_profile.csv")))
    out.sidecar(
        "dfmm_profile.json",
        {
            "command": "dfmm",
            "tail": tail_to_config(spec),
            "beta": beta,
            "x0": x0,
            "t": t,
            "seed": args.seed,
            "S": prof.s_mean,
            "sigma": prof.sigma,
            "logX": prof.log_x,
            "x_c": prof.x_c,
            "kappa": prof.kappa,
            "d": prof.d,
        },
    )


def _cmd_sfmm(args, out: _Outputs, config) -> None:
    spec = _tail_from_args(args, config)
    if not isinstance(spec, TypeI):
        raise UsageError("the semi-deterministic model requires --tail type1")
    beta = _resolve(args, config, "beta", 0.1, float)
    horizon = _resolve(args, config, "horizon", 10**4, int)
    replicas = _resolve(args, config, "replicas", 1, int)
    threshold = _resolve(args, config, "switch-threshold", 10**6, int)
    times = _record_times(args, horizon)
    for rep in range(replicas):
        cfg = SfmmConfig(spec, beta=beta, horizon=horizon, switch_threshold=threshold, seed=args.seed + rep)
        res = run_sfmm(cfg, record_times=times)
        for snap in res.snapshots:
            name = f"sfmm_rep{rep}_t{snap.t}.csv"
            sfmm_snapshot_to_csv(snap, str(out.path(name)))
            out.sidecar(
                f"sfmm_rep{rep}_t{snap.t}.json",
                {
                    "command": "sfmm",
                    "tail": tail_to_config(spec),
                    "beta": beta,
                    "horizon": horizon,
                    "switch_threshold": threshold,
                    "seed": args.seed,
                    "replica": rep,
                    "t": snap.t,
                    "S": snap.s_mean,
                    "sigma": snap.sigma,
                    "logX": snap.log_x,
                },
            )
        families_to_csv(res, str(out.path(f"sfmm_rep{rep}_families.csv")))
        out.sidecar(
            f"sfmm_rep{rep}_families.json",
            {"command": "sfmm", "replica": rep, "seed": args.seed, "horizon": horizon},
        )


def _cmd_qmm(args, out: _Outputs, config) -> None:
    alpha = _resolve(args, config, "alpha", 2.0, float)
    c = _resolve(args, config, "c", 20.0 * _LOG10, float)
    beta = _resolve(args, config, "beta", 1e-20, float)
    log10_x0 = _resolve(args, config, "log10-x0", 100.0, float)
    horizon = _resolve(args, config, "horizon", 10**4, int)
    half_bin = _resolve(args, config, "half-bin", 2, int)
    cfg = QmmConfig(alpha=alpha, c=c, beta=beta, log_x0=log10_x0 * _LOG10, horizon=horizon)
    times = _record_times(args, horizon)
    res = qmm_run(cfg, record_times=times)
    meta = {
        "command": "qmm",
        "alpha": alpha,
        "c": c,
        "beta": beta,
        "log10_x0": log10_x0,
        "horizon": horizon,
        "half_bin": half_bin,
        "seed": args.seed,
    }
    with open(out.path("qmm_series.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "S", "sigma", "log10X"])
        for t, s, sigma, lx in res.series:
            writer.writerow([t, repr(s), repr(sigma), repr(lx)])
    out.sidecar("qmm_series.json", meta)
    for snap in res.snapshots:
        name = f"qmm_t{snap.t}.csv"
        snapshot_to_csv(snap, cfg, str(out.path(name)), half_bin=half_bin)
        out.sidecar(f"qmm_t{snap.t}.json", {**meta, "t": snap.t})


def _cmd_gw_check(args, out: _Outputs, config) -> None:
    theta = _resolve(args, config, "theta", 50.0, float)
    eps = _resolve(args, config, "eps", 0.25, float)
    replicas = _resolve(args, config, "replicas", 1000, int)
    horizon = _resolve(args, config, "horizon", 20, int)
    threshold = _resolve(args, config, "switch-threshold", 10**6, int)
    cfg = GwConfig(theta=theta, switch_threshold=threshold, horizon=horizon)
    paths = run_ensemble(cfg, replicas, args.seed)
    ensemble_to_csv(paths, str(out.path("gw_ensemble.csv")))
    env = envelope(theta, eps)
    log_theta = math.log(theta)
    violations = 0
    for p in paths:
        for t in range(1, horizon + 1):
            size = p.sizes[t]
            ratio = math.exp(size.log - t * log_theta) if not size.is_zero else 0.0
            if abs(ratio - 1.0) > env.relaxed_halfwidth:
                violations += 1
                break
    out.sidecar(
        "gw_envelope.json",
        {
            "command": "gw-check",
            "theta": theta,
            "eps": eps,
            "replicas": replicas,
            "horizon": horizon,
            "switch_threshold": threshold,
            "seed": args.seed,
            "relaxed_halfwidth": env.relaxed_halfwidth,
            "failure_bound": env.failure_bound,
            "admissible": env.admissible,
            "violations": violations,
            "violation_frequency": violations / replicas,
            "within_bound": violations / replicas <= env.failure_bound,
        },
    )
    out.sidecar("gw_ensemble.json", {"command": "gw-check", "theta": theta, "seed": args.seed, "replicas": replicas})


def _read_qmm_outputs(indir: Path):
    series = []
    with open(indir / "qmm_series.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            series.append((int(row[0]), float(row[1]), float(row[2]), float(row[3])))
    snapshots = []
    for p in sorted(indir.glob("qmm_t*.csv"), key=lambda q: int(q.stem.split("_t")[1])):
        with open(p, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            t_row = next(reader)
            next(reader)
            data = np.array([[float(a), float(b)] for a, b in reader])
        snapshots.append(
            {
                "t": int(t_row[0]),
                "S": float(t_row[1]),
                "sigma": float(t_row[2]),
                "log10X": float(t_row[3]),
                "F": data[:, 0],
                "density": data[:, 1],
            }
        )
    return series, snapshots


def _cmd_analyze(args, out: _Outputs, config) -> None:
    kind = _resolve(args, config, "kind", "qmm", str)
    indir = Path(args.input or ".")
    if kind == "dfmm":
        _analyze_profile(args, out, indir)
        return
    if kind == "sfmm":
        _analyze_sfmm(args, out, indir)
        return
    if kind == "simulate":
        _analyze_trajectories(args, out, indir)
        return
    if kind != "qmm":
        raise UsageError(f"analyze understands kinds qmm, dfmm, sfmm, simulate; not {kind!r}")
    alpha = _resolve(args, config, "alpha", 2.0, float)
    series, snapshots = _read_qmm_outputs(indir)
    if not snapshots:
        raise RuntimeError(f"no qmm snapshots found under {indir}")
    spec = TypeI(1, alpha)
    verdicts: List[Verdict] = []
    final = snapshots[-1]
    ys = np.round(np.arange(-3.0, 3.0001, 0.1), 10)
    dens = standardized_density(final["F"], final["density"], final["S"], final["sigma"], ys)
    normal = np.exp(-0.5 * ys**2) / math.sqrt(2.0 * math.pi)
    sup = float(np.max(np.abs(dens - normal)))
    verdicts.append(Verdict.check("wave_density_supnorm", sup, 0.0, 0.02))
    _write_fig1(out, final["F"], final["density"], final["S"], final["sigma"])
    with open(out.path("fig2_panels.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "dF", "psi"])
        for snap in snapshots:
            for f, d in zip(snap["F"], snap["density"]):
                writer.writerow([snap["t"], repr(float(f - snap["S"])), repr(float(d))])
    with open(out.path("growth_exponents.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "statistic", "target"])
        for t, _, _, lx in series:
            if t < 3:
                continue
            stat = x_statistic(spec, float(t), lx * _LOG10)
            writer.writerow([t, repr(stat), repr(1.0 / alpha)])
    pts = [(float(t), sig) for t, _, sig, _ in series if t >= 1]
    try:
        slope, stderr = width_exponent(pts)
        verdicts.append(
            Verdict.check("width_exponent", slope, 1.0 / alpha - 0.5, 0.05, note=f"stderr={stderr!r}")
        )
    except ValueError as exc:
        verdicts.append(Verdict("width_exponent", math.nan, 1.0 / alpha - 0.5, 0.05, False, str(exc)))
    t_last, s_last = series[-1][0], series[-1][1]
    ratio = s_last / wave_location(spec, float(t_last))
    verdicts.append(Verdict.check("mean_fitness_ratio", ratio, 1.0, 0.10))
    if args.verdicts:
        verdicts_to_json(verdicts, str(out.path("verdicts.json")))
    out.sidecar(
        "analysis.json",
        {"command": "analyze", "kind": kind, "alpha": alpha, "input": str(indir), "seed": args.seed},
    )


def _write_fig1(out: _Outputs, fitness, dens, s_mean: float, sigma: float) -> None:
    ys = np.round(np.arange(-3.0, 3.0001, 0.1), 10)
    curve = standardized_density(np.asarray(fitness), np.asarray(dens), s_mean, sigma, ys)
    normal = np.exp(-0.5 * ys**2) / math.sqrt(2.0 * math.pi)
    with open(out.path("fig1_standardized.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "sigma_psi", "normal"])
        for y, d, g in zip(ys, curve, normal):
            writer.writerow([repr(float(y)), repr(float(d)), repr(float(g))])


def _analyze_profile(args, out: _Outputs, indir: Path) -> None:
    """Verdicts for a deterministic profile, plus its standardized density
    for the figure renderer."""
    from .analysis import load_profile_csv
    from .tails import gaussian_cdf, tail_from_config

    side = json.loads((indir / "dfmm_profile.json").read_text())
    efd = load_profile_csv(str(indir / "dfmm_profile.csv"), source="dfmm")
    spec = tail_from_config(side["tail"])
    t = float(side["t"])
    dev = max(
        abs(efd.psi_at(efd.s_mean + efd.sigma * y) - gaussian_cdf(y))
        for y in (-2.0, -1.0, 0.0, 1.0, 2.0)
    )
    ratio = efd.s_mean / wave_location(spec, t)
    verdicts = [
        Verdict.check("profile_gaussian_dev", dev, 0.0, 0.02),
        Verdict.check("profile_mean_ratio", ratio, 1.0, 0.05),
    ]
    # cell-centered density of the cumulative profile on its natural grid
    f = efd.fitness
    if len(f) > 2:
        w = np.diff(np.concatenate([[0.0], efd.cum]))
        widths = np.empty_like(f)
        widths[1:-1] = 0.5 * (f[2:] - f[:-2])
        widths[0] = f[1] - f[0]
        widths[-1] = f[-1] - f[-2]
        keep = widths > 0.0
        _write_fig1(out, f[keep], (w / np.maximum(widths, 1e-300))[keep], efd.s_mean, efd.sigma)
    if args.verdicts:
        verdicts_to_json(verdicts, str(out.path("verdicts.json")))
    out.sidecar("analysis.json", {"command": "analyze", "kind": "dfmm", "input": str(indir), "seed": args.seed})


def _analyze_sfmm(args, out: _Outputs, indir: Path) -> None:
    """Replica-median wave verdicts from the family-ensemble snapshots."""
    from .analysis import load_profile_csv
    from .tails import gaussian_cdf, tail_from_config

    snaps = sorted(indir.glob("sfmm_rep*_t*.csv"))
    if not snaps:
        raise RuntimeError(f"no family-ensemble snapshots under {indir}")
    by_t: Dict[int, list] = {}
    tail_cfg = None
    for p in snaps:
        side = json.loads(p.with_suffix(".json").read_text())
        tail_cfg = side["tail"]
        by_t.setdefault(int(side["t"]), []).append(p)
    spec = tail_from_config(tail_cfg)
    t = max(by_t)
    devs, ratios = [], []
    for p in by_t[t]:
        efd = load_profile_csv(str(p), source="sfmm")
        devs.append(
            max(
                abs(efd.psi_at(efd.s_mean + efd.sigma * y) - gaussian_cdf(y))
                for y in (-1.0, 0.0, 1.0)
            )
        )
        ratios.append(efd.s_mean / wave_location(spec, float(t)))
    verdicts = [
        Verdict.check("ensemble_wave_dev", float(np.median(devs)), 0.0, 0.05),
        Verdict.check("ensemble_mean_ratio", float(np.median(ratios)), 1.0, 0.10),
    ]
    if args.verdicts:
        verdicts_to_json(verdicts, str(out.path("verdicts.json")))
    out.sidecar(
        "analysis.json",
        {"command": "analyze", "kind": "sfmm", "input": str(indir), "t": t, "replicas": len(by_t[t]), "seed": args.seed},
    )


def _analyze_trajectories(args, out: _Outputs, indir: Path) -> None:
    """Merge per-replica runs into one normalized growth-statistic CSV."""
    from .analysis import growth_exponents, load_trajectory_csv
    from .tails import tail_from_config

    reps = sorted(indir.glob("simulate_rep*.csv"))
    if not reps:
        raise RuntimeError(f"no simulation replicas under {indir}")
    with open(out.path("growth_analysis.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replica", "t", "x_stat", "x_target", "w_stat", "w_target"])
        for p in reps:
            side = json.loads(p.with_suffix(".json").read_text())
            spec = tail_from_config(side["tail"])
            rows = load_trajectory_csv(str(p))
            stats = growth_exponents(
                ((float(r.t), r.log_x, r.w if r.w > 0 else None) for r in rows if not r.extinct),
                spec,
            )
            rep = int(side["replica"])
            for g in stats:
                writer.writerow(
                    [
                        rep,
                        int(g.t),
                        repr(g.x_stat),
                        repr(g.x_target),
                        "" if g.w_stat is None else repr(g.w_stat),
                        repr(g.w_target),
                    ]
                )
    out.sidecar(
        "growth_analysis.json",
        {"command": "analyze", "kind": "simulate", "input": str(indir), "replicas": len(reps), "seed": args.seed},
    )


# ------------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="gumbel-waves", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file with [sections]")
        p.add_argument("--seed", type=int, default=0, help="random seed (echoed in outputs)")
        p.add_argument("--out", help="output directory (or $GUMBEL_WAVES_OUT)")

    def tail_opts(p):
        p.add_argument("--tail", choices=["type1", "type2", "discrete"])
        p.add_argument("--n", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--L", help="slowly varying factors, e.g. '1:0.5 2:-1'")
        p.add_argument("--c", type=float, help="grid constant for the discrete tail")

    p = sub.add_parser("predict", help="closed-form growth/wave predictors")
    common(p)
    tail_opts(p)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("simulate", help="stochastic generation dynamics (FMM/MMM)")
    common(p)
    tail_opts(p)
    p.add_argument("--variant", choices=["fmm", "mmm", "FMM", "MMM"])
    p.add_argument("--beta", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--initial", help="comma list fitness:count, e.g. '1.0:1,2.0:5'")
    p.add_argument("--max-log10-x", type=float, dest="max_log10_x")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("dfmm", help="deterministic wave profile")
    common(p)
    tail_opts(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--x0", type=int)
    p.add_argument("--t", type=int)
    p.set_defaults(func=_cmd_dfmm)

    p = sub.add_parser("sfmm", help="semi-deterministic family ensemble")
    common(p)
    tail_opts(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--switch-threshold", type=int, dest="switch_threshold")
    p.add_argument("--record-times", type=int, nargs="+", dest="record_times")
    p.add_argument("--record-log2", action="store_true")
    p.set_defaults(func=_cmd_sfmm)

    p = sub.add_parser("qmm", help="deterministic frequency recursion")
    common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--log10-x0", type=float, dest="log10_x0")
    p.add_argument("--horizon", type=int)
    p.add_argument("--half-bin", type=int, dest="half_bin")
    p.add_argument("--record-times", type=int, nargs="+", dest="record_times")
    p.add_argument("--record-log2", action="store_true")
    p.set_defaults(func=_cmd_qmm)

    p = sub.add_parser("gw-check", help="branching ensembles and envelopes")
    common(p)
    p.add_argument("--theta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--switch-threshold", type=int, dest="switch_threshold")
    p.set_defaults(func=_cmd_gw_check)

    p = sub.add_parser("analyze", help="verdicts and figure CSVs from run outputs")
    common(p)
    p.add_argument("--kind", choices=["qmm", "dfmm", "sfmm", "simulate"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--in", dest="input", help="directory with run outputs")
    p.add_argument("--verdicts", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    config = {}
    out = _Outputs(_out_dir(args))
    try:
        if args.config:
            config = _load_config_section(args.config, args.command)
        args.func(args, out, config)
    except UsageError as exc:
        out.discard_all()
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure: clean partial outputs
        out.discard_all()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
