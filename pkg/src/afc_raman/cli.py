"""
Command-line entry point.

    afc-raman simulate CONFIG [--out DIR]
    afc-raman sweep CONFIG [--out FILE]
    afc-raman optimize [CONFIG] [--alpha-l X] [--objective NAME]
    afc-raman link [CONFIG] [--preset NAME]
    afc-raman presets list

Exit codes: 0 success, 2 invalid configuration, 3 protocol/regime violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytic, dynamics, link, optimize
from .analytic import ProtocolError, ProtocolParams
from .comb import CombParams
from .config import ConfigError, RunConfig, dumps, expand_range, link_params, load_config

EXIT_OK, EXIT_CONFIG, EXIT_REGIME = 0, 2, 3
THREADS_ENV = "AFC_RAMAN_THREADS"

SWEEP_COLUMNS = ["alpha_L", "finesse", "theta0_sq", "p_stokes", "eta_readout",
                 "noise_per_mode", "snr_lower_bound", "echo_time", "mode_capacity",
                 "photons_per_write_attempt"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _require(cfg: RunConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{', '.join(missing)}: required for this command")


def _overrides(args) -> dict:
    return {"theta0_sq": getattr(args, "theta0_sq", None),
            "alpha_L": getattr(args, "alpha_l", None),
            "finesse": getattr(args, "finesse", None)}


def simulate_report(cfg: RunConfig) -> tuple[dict, dynamics.FieldTrace]:
    _require(cfg, "comb", "protocol")
    c, p = cfg.comb, cfg.protocol
    p.check_timing(c)
    opts = cfg.options.get("simulate", {})
    direction = opts.get("direction", "backward")
    mismatch = opts.get("phase_mismatch", 0.0)

    grid = dynamics.build_grid(c, cfg.grid)
    state = dynamics.write_step(grid, p)
    readout = dynamics.heralded_readout if direction == "backward" else dynamics.forward_readout
    trace = readout(state, grid, p, phase_mismatch=mismatch)
    stokes = dynamics.stokes_flux(state, grid, [p.t_d])
    noise = dynamics.noise_flux(grid, p)

    report = analytic.full_report(c, p).to_dict()
    eta_analytic = (report["eta_readout"] if direction == "backward"
                    else analytic.readout_efficiency_forward(c))
    echo_time, echo_count = trace.echo()
    dyn = {
        "eta_readout": echo_count,
        "echo_peak_time": echo_time,
        "echo_predicted_time": p.tau + c.echo_time,
        "time_step": trace.time_step,
        "window_counts": trace.window_integral(echo_time),
        "total_counts": trace.total_counts,
        "stokes_per_mode": stokes.mode_count(),
        "noise_per_mode": noise.mode_count(),
        "abar_L": grid.abar_L,
        "n_z": grid.n_z,
        "n_freq": grid.n_freq,
    }

    def rel(a, b):
        return None if b == 0 else (a - b) / b

    out = {
        "command": "simulate",
        "direction": direction,
        "phase_mismatch": mismatch,
        "comb": c.to_dict(),
        "protocol": p.to_dict(),
        "analytic": {**report, "eta_readout_direction": eta_analytic,
                     "stokes_unexpanded": analytic.stokes_photons_unexpanded(c, p)},
        "dynamics": dyn,
        "relative_delta": {
            "eta_readout": rel(dyn["eta_readout"], eta_analytic),
            "stokes_per_mode": rel(dyn["stokes_per_mode"], report["p_stokes"]),
            "stokes_unexpanded": rel(dyn["stokes_per_mode"],
                                     analytic.stokes_photons_unexpanded(c, p)),
            "noise_per_mode": rel(dyn["noise_per_mode"], report["noise_per_mode"]),
        },
        "files": {"trace": "trace.csv", "report": "report.json"},
    }
    return out, trace


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    report, trace = simulate_report(cfg)
    outdir = Path(args.out or cfg.output_path or "afc_simulate")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "trace.csv").write_text(trace.to_csv(), encoding="utf-8", newline="")
    (outdir / "report.json").write_text(dumps(report), encoding="utf-8", newline="")
    print(f"wrote {outdir / 'trace.csv'} and {outdir / 'report.json'}")
    return EXIT_OK


def _sweep_row(base: CombParams, proto: ProtocolParams | None, point, cfg, with_dynamics):
    alpha_L, finesse, theta0_sq = point
    c = CombParams(gamma_fwhm=base.gamma_fwhm, delta0=finesse * base.gamma_fwhm,
                   big_gamma=base.big_gamma, alpha_L=alpha_L)
    pd = proto.to_dict() if proto else {}
    pd["theta0_sq"] = theta0_sq
    p = ProtocolParams(**pd)
    p.check_timing(c)
    row = {"alpha_L": alpha_L, "finesse": finesse, "theta0_sq": theta0_sq,
           **analytic.full_report(c, p).to_dict()}
    if with_dynamics:
        g = dynamics.build_grid(c, cfg.grid)
        row["eta_dynamics"] = dynamics.heralded_readout(dynamics.write_step(g, p), g, p).echo()[1]
    return row


def sweep_rows(cfg: RunConfig) -> list[dict]:
    _require(cfg, "comb")
    opts = cfg.options.get("sweep")
    if not opts:
        raise ConfigError("sweep: section required for this command")
    base = cfg.comb
    alphas = expand_range(opts["alpha_L"]) if "alpha_L" in opts else [base.alpha_L]
    fins = expand_range(opts["finesse"]) if "finesse" in opts else [base.delta0 / base.gamma_fwhm]
    default_theta = cfg.protocol.theta0_sq if cfg.protocol else 0.1
    thetas = expand_range(opts["theta0_sq"]) if "theta0_sq" in opts else [default_theta]
    points = list(itertools.product(alphas, fins, thetas))
    try:
        for a, f, t in points:
            CombParams(gamma_fwhm=base.gamma_fwhm, delta0=f * base.gamma_fwhm,
                       big_gamma=base.big_gamma, alpha_L=a)
            ProtocolParams(theta0_sq=t)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from None
    with_dyn = opts.get("dynamics", False)
    job = lambda pt: _sweep_row(base, cfg.protocol, pt, cfg, with_dyn)  # noqa: E731
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, points))  # map keeps input order
    return [job(pt) for pt in points]


def rows_to_csv(rows: list[dict]) -> str:
    cols = SWEEP_COLUMNS + (["eta_dynamics"] if rows and "eta_dynamics" in rows[0] else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow(["" if r[k] is None else repr(r[k]) for k in cols])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    rows = sweep_rows(cfg)
    if cfg.output_format == "json":
        text = dumps({"command": "sweep", "columns": SWEEP_COLUMNS, "rows": rows})
    else:
        text = rows_to_csv(rows)
    _emit(text, args.out or cfg.output_path)
    return EXIT_OK


def optimize_result(opts: dict) -> dict:
    alpha_L = opts.get("alpha_L", 0.1)
    objective = opts.get("objective", "raman_backward")
    kwargs = {k: opts[k] for k in ("f_min", "f_max", "tol") if k in opts}
    try:
        r = optimize.optimize_finesse(alpha_L, objective, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"optimize: {exc}") from None
    return {"command": "optimize", **r.to_dict()}


def cmd_optimize(args) -> int:
    opts, path = {}, args.out
    if args.config:
        cfg = load_config(args.config)
        opts = dict(cfg.options.get("optimize", {}))
        path = path or cfg.output_path
    if args.alpha_l is not None:
        opts["alpha_L"] = args.alpha_l
    if args.objective is not None:
        opts["objective"] = args.objective
    _emit(dumps(optimize_result(opts)), path)
    return EXIT_OK


def link_result(opts: dict, protocol: ProtocolParams | None = None) -> dict:
    try:
        lp = link_params(opts)
        preset = link.get_preset(opts.get("preset", "pr_yso_606nm"))
        pp = protocol or ProtocolParams(theta0_sq=0.1)
        rep = link.feasibility_report(preset, lp, pp, heralds=opts.get("heralds", 1e4),
                                      p_from_comb=opts.get("p_from_comb", False))
    except KeyError as exc:
        raise ConfigError(f"link/preset: {exc.args[0]}") from None
    except link.LinkError:
        raise
    except ValueError as exc:
        raise ConfigError(f"link: {exc}") from None
    return {"command": "link", **rep}


def cmd_link(args) -> int:
    opts, proto, path = {}, None, args.out
    if args.config:
        cfg = load_config(args.config)
        opts = dict(cfg.options.get("link", {}))
        proto = cfg.protocol
        path = path or cfg.output_path
    for key in ("preset", "distance_km", "rate_hz", "p", "eta_c", "eta_d"):
        value = getattr(args, key)
        if value is not None:
            opts[key] = value
    if args.full_distance:
        opts["half_distance"] = False
    _emit(dumps(link_result(opts, proto)), path)
    return EXIT_OK


def cmd_presets(args) -> int:
    presets = link.load_presets()
    sys.stdout.write(dumps({"command": "presets",
                            "presets": [p.to_dict() for p in presets.values()]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="afc-raman",
                                 description="Comb-shaped spontaneous Raman pair source toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_overrides(p):
        p.add_argument("--theta0-sq", type=float, dest="theta0_sq")
        p.add_argument("--alpha-l", type=float, dest="alpha_l")
        p.add_argument("--finesse", type=float)

    p = sub.add_parser("simulate", help="run the dynamics oracle and compare with closed forms")
    p.add_argument("config")
    p.add_argument("--out", help="output directory")
    add_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Cartesian sweep over alpha_L, finesse, theta0_sq")
    p.add_argument("config")
    p.add_argument("--out", help="output file (stdout if omitted)")
    add_overrides(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="best finesse at fixed optical depth")
    p.add_argument("config", nargs="?")
    p.add_argument("--alpha-l", type=float, dest="alpha_l")
    p.add_argument("--objective", choices=sorted(optimize.OBJECTIVES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("link", help="repeater-link feasibility numbers")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset")
    p.add_argument("--distance-km", type=float, dest="distance_km")
    p.add_argument("--rate-hz", type=float, dest="rate_hz")
    p.add_argument("--p", type=float)
    p.add_argument("--eta-c", type=float, dest="eta_c")
    p.add_argument("--eta-d", type=float, dest="eta_d")
    p.add_argument("--full-distance", action="store_true",
                   help="attenuate over the full separation instead of half")
    p.add_argument("--out")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("presets", help="material presets")
    psub = p.add_subparsers(dest="action", required=True)
    pl = psub.add_parser("list")
    pl.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConfigError, link.LinkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
