"""Command-line front end: ``msrate {check,bounds,sweep,simulate,rate}``.

Exit codes: 0 success, 1 domain failure (degenerate system, no converged
stage, oracle failure, non-positive energy), 2 usage or parse error.
All numeric CSV fields are written with 17 significant digits.
"""

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import certify, model, rnvi, simulate
from .errors import (
    ConfigError,
    Degenerate,
    DimensionMismatch,
    InvalidSigma,
    MSRateError,
    NoConvergedStage,
    NonPositiveEnergy,
    OracleNonConvergence,
    ParseError,
)

USAGE_ERRORS = (ParseError, DimensionMismatch, InvalidSigma, ConfigError, FileNotFoundError, ValueError)
DOMAIN_ERRORS = (Degenerate, NoConvergedStage, OracleNonConvergence, NonPositiveEnergy)

PER_TAU_COLUMNS = ["tau", "J_low", "J_up", "rho_low", "rho_up", "Delta", "lambda_max_Pinv", "inner_iters", "converged"]
CERTIFICATE_COLUMNS = ["J_low_best", "J_up_best", "rho_low", "rho_up", "tau_low", "tau_up", "width"]
SWEEP_COLUMNS = ["value", "rho_low", "rho_up", "J_low", "J_up", "width", "tau_low", "tau_up", "status"]


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def _write_atomic(path, write):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    return _write_atomic(path, write)


def write_manifest(out_dir, command, params, spec, outputs, started):
    manifest = {
        "command": command,
        "parameters": params,
        "config_sha256": model.config_hash(spec),
        "outputs": sorted(str(Path(p).relative_to(out_dir)) for p in outputs),
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    return _write_atomic(
        Path(out_dir) / "manifest.json",
        lambda fh: fh.write(json.dumps(manifest, indent=2) + "\n"),
    )


def load_gain(path, spec):
    try:
        K = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if K.shape != (spec.m, spec.n):
        raise DimensionMismatch(f"gain in {path} has shape {K.shape}, expected {(spec.m, spec.n)}")
    return K


def parse_floats(text):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _rnvi_config(args):
    grid = rnvi.default_tau_grid(args.tau_start, args.tau_end, args.tau_count)
    return rnvi.RnviConfig(tau_grid=grid, epsilon=args.epsilon, max_inner_iters=args.max_inner_iters)


def _rnvi_params(args):
    return {
        "tau_start": args.tau_start,
        "tau_end": args.tau_end,
        "tau_count": args.tau_count,
        "epsilon": args.epsilon,
        "max_inner_iters": args.max_inner_iters,
    }


def _require_nondegenerate(spec):
    report = model.validate(spec)
    if not report.nondegenerate:
        raise Degenerate(f"[B; sigma*B_bar] has rank {report.stacked_rank} < m = {spec.m}")


def solve_bounds(spec, cfg):
    """Continuation run plus certificate for one spec."""
    _require_nondegenerate(spec)
    result = rnvi.run_continuation(spec, cfg)
    return result, certify.aggregate(spec, result)


def per_tau_rows(spec, result):
    rows = []
    for rec in result.records:
        if rec.converged:
            s = certify.bounds_at(spec, rec)
            rows.append([rec.tau, s.J_low, s.J_up, s.rho_low, s.rho_up, s.Delta,
                         s.lambda_max_Pinv, rec.inner_iters, True])
        else:
            nan = float("nan")
            rows.append([rec.tau, nan, nan, nan, nan, nan, nan, rec.inner_iters, False])
    return rows


def certificate_row(cert):
    return [cert.J_low_best, cert.J_up_best, cert.rho_low, cert.rho_up,
            cert.tau_low, cert.tau_up, cert.width]


def cmd_check(args):
    spec = model.load_spec(args.config)
    report = model.validate(spec)
    print(f"config: {args.config}  (n={spec.n}, m={spec.m}, sigma={spec.sigma:g})")
    for line in report.lines():
        print(line)
    return 0 if report.nondegenerate else 1


def cmd_bounds(args):
    started = time.perf_counter()
    spec = model.load_spec(args.config)
    cfg = _rnvi_config(args)
    result, cert = solve_bounds(spec, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = [
        write_csv(out / "per_tau.csv", PER_TAU_COLUMNS, per_tau_rows(spec, result)),
        write_csv(out / "certificate.csv", CERTIFICATE_COLUMNS, [certificate_row(cert)]),
        write_csv(out / "gain.csv", None, cert.K_up.tolist()),
    ]
    write_manifest(out, "bounds", {"config": str(args.config), **_rnvi_params(args)}, spec, outputs, started)
    print(f"J* in [{cert.J_low_best:.4f}, {cert.J_up_best:.4f}]")
    print(f"rho* in [{cert.rho_low:.4f}, {cert.rho_up:.4f}]  (tau_low={fmt(cert.tau_low)}, tau_up={fmt(cert.tau_up)})")
    print("K_up =", np.array2string(cert.K_up, precision=4))
    return 0


def _threads():
    raw = os.environ.get("MSRATE_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError as exc:
        raise ConfigError(f"MSRATE_THREADS must be an integer, got {raw!r}") from exc


def cmd_sweep(args):
    started = time.perf_counter()
    spec = model.load_spec(args.config)
    if args.linspace is not None:
        start, stop, count = args.linspace
        if int(count) != count or count < 1:
            raise ConfigError("--linspace count must be a positive integer")
        values = np.linspace(start, stop, int(count)).tolist()
    else:
        values = parse_floats(args.values or "")
    if not values:
        raise ConfigError("sweep needs at least one value")
    cfg = _rnvi_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(index_value):
        i, value = index_value
        sub = out / f"value_{i:03d}"
        sub.mkdir(exist_ok=True)
        try:
            if args.mode == "sigma":
                instance = model.with_sigma(spec, value)
            else:
                instance = model.scale_A(spec, value)
            result, cert = solve_bounds(instance, cfg)
        except (MSRateError, ValueError) as exc:
            nan = float("nan")
            row = [value, nan, nan, nan, nan, nan, None, None, f"error: {type(exc).__name__}"]
            return row, []
        files = [write_csv(sub / "per_tau.csv", PER_TAU_COLUMNS, per_tau_rows(instance, result)),
                 write_csv(sub / "gain.csv", None, cert.K_up.tolist())]
        row = [value, cert.rho_low, cert.rho_up, cert.J_low_best, cert.J_up_best,
               cert.width, cert.tau_low, cert.tau_up, "ok"]
        return row, files

    jobs = list(enumerate(values))
    threads = _threads()
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]

    rows = [row for row, _ in results]
    outputs = [f for _, files in results for f in files]
    outputs.append(write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows))
    params = {"config": str(args.config), "mode": args.mode, "values": values, **_rnvi_params(args)}
    write_manifest(out, "sweep", params, spec, outputs, started)

    print(f"{args.mode:>8}  rho_low  rho_up")
    for row in rows:
        if row[-1] == "ok":
            print(f"{row[0]:8.3f}  [{row[1]:.4f}, {row[2]:.4f}]")
        else:
            print(f"{row[0]:8.3f}  {row[-1]}")
    return 0


def cmd_simulate(args):
    started = time.perf_counter()
    spec = model.load_spec(args.config)
    if args.gain is not None:
        K = load_gain(args.gain, spec)
    else:
        _, cert = solve_bounds(spec, _rnvi_config(args))
        K = cert.K_up
    x0 = np.array(parse_floats(args.x0))
    if x0.shape != (spec.n,):
        raise DimensionMismatch(f"--x0 has {x0.size} entries, expected {spec.n}")
    window = (args.fit_start, args.fit_end if args.fit_end is not None else args.horizon)
    cfg = simulate.SimConfig(x0=x0, K=K, horizon=args.horizon, num_traj=args.num_traj,
                             seed=args.seed, fit_window=window)
    exact = simulate.propagate_exact(spec, K, x0, args.horizon)
    mc = simulate.monte_carlo(spec, cfg)
    fits = {kind: simulate.fit_slope(traj, cfg.fit_window) for kind, traj in (("exact", exact), ("monte_carlo", mc))}
    rho = certify.closed_loop_rate(spec, K)
    reference = 2.0 * math.log(rho) if rho > 0.0 else -math.inf

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = [
        write_csv(out / "energy_exact.csv", ["k", "energy"], enumerate(exact.energies)),
        write_csv(out / "energy_mc.csv", ["k", "energy"], enumerate(mc.energies)),
        write_csv(out / "slopes.csv", ["kind", "slope", "stderr", "reference_slope"],
                  [[kind, s, e, reference] for kind, (s, e) in fits.items()]),
    ]
    if args.gain is None:
        outputs.append(write_csv(out / "gain.csv", None, K.tolist()))
    params = {
        "config": str(args.config),
        "gain": str(args.gain) if args.gain else "from-bounds",
        "x0": x0.tolist(),
        "horizon": args.horizon,
        "num_traj": args.num_traj,
        "seed": args.seed,
        "fit_window": list(cfg.fit_window),
    }
    if args.gain is None:
        params.update(_rnvi_params(args))
    write_manifest(out, "simulate", params, spec, outputs, started)
    print(f"rho(K) = {rho:.4f}; reference slope 2 log rho = {reference:.4f}")
    for kind, (s, e) in fits.items():
        print(f"{kind:>12}: slope {s:.4f} +/- {e:.4f}")
    return 0


def cmd_rate(args):
    spec = model.load_spec(args.config)
    K = load_gain(args.gain, spec)
    rho = certify.closed_loop_rate(spec, K)
    print(f"rho(K) = {rho:.17g}")
    print(f"2 log rho(K) = {fmt(2.0 * math.log(rho)) if rho > 0 else '-inf'}")
    verdict = "diverges (rho >= 1)" if rho >= 1.0 else "mean-square stable (rho < 1)"
    print(f"verdict: {verdict}")
    return 0


def _add_rnvi_flags(p):
    p.add_argument("--tau-start", type=float, default=rnvi.DEFAULT_TAU_START)
    p.add_argument("--tau-end", type=float, default=rnvi.DEFAULT_TAU_END)
    p.add_argument("--tau-count", type=int, default=rnvi.DEFAULT_TAU_COUNT)
    p.add_argument("--epsilon", type=float, default=rnvi.DEFAULT_EPSILON)
    p.add_argument("--max-inner-iters", type=int, default=rnvi.DEFAULT_MAX_INNER_ITERS)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="msrate",
        description="Certified bounds on the optimal mean-square stabilizing rate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a config and report nondegeneracy")
    p.add_argument("config")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", help="run the continuation solver and certify bounds")
    p.add_argument("config")
    _add_rnvi_flags(p)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="bounds over a list of sigma or theta values")
    p.add_argument("config")
    p.add_argument("--mode", choices=("sigma", "theta"), required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--values", help="comma-separated list")
    group.add_argument("--linspace", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    _add_rnvi_flags(p)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="exact and Monte Carlo mean-square energies")
    p.add_argument("config")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--gain", help="CSV file with the m x n gain")
    src.add_argument("--gain-from-bounds", action="store_true", help="use K_up from a fresh bounds run")
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--horizon", type=int, default=simulate.DEFAULT_HORIZON)
    p.add_argument("--num-traj", type=int, default=simulate.DEFAULT_NUM_TRAJ)
    p.add_argument("--seed", type=int, default=simulate.DEFAULT_SEED)
    p.add_argument("--fit-start", type=int, default=simulate.DEFAULT_FIT_WINDOW[0])
    p.add_argument("--fit-end", type=int, default=None)
    _add_rnvi_flags(p)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rate", help="closed-loop mean-square rate of a given gain")
    p.add_argument("config")
    p.add_argument("--gain", required=True)
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
