"""Batch command-line surface.

    spinlab phase-diagram --p 3 --tmin 0.5 --tmax 1.2 --points 100 --out DIR
    spinlab audit --p 3 --samples 10000 --out DIR
    spinlab simulate {covariance,planted-band,exit-times} --config FILE --out DIR

Every run directory receives a manifest.json recording the command, the
parameters, the seed, and the produced files; re-running with the same
parameters reproduces the data files bit-for-bit at fixed parallelism.
Exit codes: 0 success, 1 audit/validation failure, 2 usage error.

The environment variable SPINLAB_THREADS caps BLAS parallelism; it must act
before numpy loads, which is why this module defers all numeric imports.
"""
import argparse
import csv
import datetime
import json
import os
import sys
import tempfile


def _apply_thread_cap() -> None:
    cap = os.environ.get("SPINLAB_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


_apply_thread_cap()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SHATTER_VALUE_TOL = 1e-6
Q_MATCH_TOL = 1e-6


# ---------------------------------------------------------------------------
# atomic file helpers and the run manifest

def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path: str, header, rows) -> None:
    import io
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC-4180 style, CRLF line endings
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())


def write_columns(path: str, pairs) -> None:
    lines = [f"{a:.12g} {b:.12g}" for a, b in pairs]
    _atomic_write(path, "\n".join(lines) + "\n")


class Manifest:
    def __init__(self, command: str, parameters: dict, seed: int | None):
        from spinlab import __version__
        self.record = {
            "command": command,
            "parameters": parameters,
            "seed": seed,
            "tool_version": __version__,
            "started": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "finished": None,
            "output_paths": [],
        }

    def add(self, path: str) -> str:
        self.record["output_paths"].append(os.path.basename(path))
        return path

    def write(self, out_dir: str) -> None:
        self.record["finished"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        self.record["output_paths"].append("manifest.json")
        write_json(os.path.join(out_dir, "manifest.json"), self.record)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


# ---------------------------------------------------------------------------
# config files: flat key=value, '#' comments

def parse_config(path: str) -> dict:
    from spinlab.errors import ConfigError
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _typed(cfg: dict, schema: dict, path: str) -> dict:
    """schema: key -> (converter, required, default). Unknown keys error."""
    from spinlab.errors import ConfigError
    unknown = set(cfg) - set(schema)
    if unknown:
        raise ConfigError(f"{path}: unknown config key {sorted(unknown)[0]!r}")
    out = {}
    for key, (conv, required, default) in schema.items():
        if key not in cfg:
            if required:
                raise ConfigError(f"{path}: missing required key {key!r}")
            out[key] = default
            continue
        try:
            out[key] = conv(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad value for key {key!r}: {exc}") from exc
    return out


def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_int_list(s: str) -> list:
    return [int(tok) for tok in s.replace(" ", "").split(",") if tok]


# ---------------------------------------------------------------------------
# commands

def cmd_phase_diagram(args) -> int:
    import numpy as np
    from spinlab.errors import EmptyFeasibleSet, SpinLabError
    from spinlab.landscape import (asymptotic_complexity, bbm_maximize,
                                   critical_temperatures, energy_landmarks)
    if args.tmin >= args.tmax or args.points < 2:
        print("phase-diagram: need tmin < tmax and points >= 2", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(args.out, exist_ok=True)
    manifest = Manifest("phase-diagram", {
        "p": args.p, "tmin": args.tmin, "tmax": args.tmax,
        "points": args.points, "shatter_tol": args.shatter_tol}, None)

    temps = critical_temperatures(args.p)
    lm = energy_landmarks(args.p)
    header = ["p", "T", "beta", "t_s", "t_sh", "t_bbm", "E_opt", "q_opt",
              "V_max", "theta_at_opt", "interior", "shattered", "note"]
    rows, gap_pairs, eopt_pairs = [], [], []
    for T in np.linspace(args.tmin, args.tmax, args.points):
        beta = 1.0 / T
        note = ""
        try:
            opt = bbm_maximize(args.p, beta)
            theta_opt = asymptotic_complexity(args.p, opt.E_opt)
            shattered = (opt.interior
                         and abs(opt.value - 0.5 * beta * beta) <= args.shatter_tol
                         and theta_opt > 0.0
                         and temps.t_s < T <= temps.t_sh)
            rows.append([_fmt(v) for v in (
                args.p, T, beta, temps.t_s, temps.t_sh, temps.t_bbm,
                opt.E_opt, opt.q_opt, opt.value, theta_opt,
                opt.interior, shattered, note)])
            gap_pairs.append((T, opt.value - 0.5 * beta * beta))
            eopt_pairs.append((T, opt.E_opt))
        except EmptyFeasibleSet:
            note = "empty_feasible_set"
            rows.append([_fmt(v) for v in (
                args.p, T, beta, temps.t_s, temps.t_sh, temps.t_bbm,
                None, None, None, None, False, False, note)])
        except SpinLabError as exc:
            print(f"phase-diagram failed at T={T}: {exc}", file=sys.stderr)
            return EXIT_FAILURE

    write_csv(manifest.add(os.path.join(args.out, "phase.csv")), header, rows)
    write_json(manifest.add(os.path.join(args.out, "landmarks.json")), {
        "p": args.p,
        "e_infinity": lm.e_infinity,
        "e_zero": lm.e_zero,
        "theta_at_e_infinity": lm.theta_at_e_infinity,
        "t_s": temps.t_s,
        "t_sh": temps.t_sh,
        "t_bbm": temps.t_bbm,
        "t_beta_star_einf": temps.t_beta_star_einf,
        "manifest": "manifest.json",
    })
    write_columns(manifest.add(os.path.join(args.out, "plot_vgap.txt")), gap_pairs)
    write_columns(manifest.add(os.path.join(args.out, "plot_eopt.txt")), eopt_pairs)
    manifest.write(args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    from spinlab.errors import SpinLabError
    from spinlab.landscape import critical_temperatures, envelope_audit, identity_audits
    os.makedirs(args.out, exist_ok=True)
    manifest = Manifest("audit", {"p": args.p, "samples": args.samples,
                                  "tamper": args.tamper}, args.seed)
    report = identity_audits(args.p, args.samples, seed=args.seed,
                             _tamper=args.tamper)
    payload = {
        "p": args.p,
        "samples": args.samples,
        "seed": args.seed,
        "identities": {
            item.name: {
                "passed": item.passed,
                "max_residual": item.max_residual,
                "threshold": item.threshold,
                "worst_case": list(item.worst_case) if item.worst_case else None,
            } for item in report.items
        },
        "manifest": "manifest.json",
    }
    all_ok = report.all_passed
    try:
        temps = critical_temperatures(args.p)
        beta_s, beta_sh = 1.0 / temps.t_s, 1.0 / temps.t_sh
        step = 1e-3
        grid = [beta_s - step * (k + 2) for k in range(20)]
        grid = [b for b in grid if b > beta_sh + step]
        deviation = envelope_audit(args.p, grid)
        payload["envelope"] = {"max_deviation": deviation,
                               "passed": deviation <= 1e-4,
                               "grid_points": len(grid), "grid_step": step}
        all_ok = all_ok and deviation <= 1e-4
    except SpinLabError as exc:
        payload["envelope"] = {"passed": False, "error": str(exc)}
        all_ok = False
    payload["all_passed"] = all_ok
    write_json(manifest.add(os.path.join(args.out, "audit.json")), payload)
    manifest.write(args.out)
    return EXIT_OK if all_ok else EXIT_FAILURE


_SIM_SCHEMAS = {
    "covariance": {
        "p": (int, True, None), "N": (int, True, None),
        "draws": (int, False, 10_000), "seed": (int, True, None),
    },
    "planted-band": {
        "p": (int, True, None), "N": (int, True, None),
        "E": (float, True, None), "T": (float, True, None),
        "q": (float, True, None), "eta": (float, True, None),
        "n_samples": (int, False, 200_000), "seed": (int, True, None),
        "override": (_parse_bool, False, False),
    },
    "exit-times": {
        "p": (int, True, None), "N_list": (_parse_int_list, True, None),
        "E": (float, True, None), "T": (float, True, None),
        "q": (float, True, None), "eta": (float, True, None),
        "replicas": (int, True, None), "horizon": (float, True, None),
        "dt": (float, False, None), "seed": (int, True, None),
        "override": (_parse_bool, False, False),
    },
}


def _validate_band_q(cfg: dict, override: bool, path: str) -> None:
    from spinlab.errors import ConfigError, SpinLabError
    from spinlab.landscape import solve_fixed_point
    if override:
        return
    try:
        expected = solve_fixed_point(cfg["p"], cfg["E"], 1.0 / cfg["T"]).q_star
    except SpinLabError as exc:
        raise ConfigError(
            f"{path}: key 'q' cannot be validated, the fixed point has no "
            f"solution at (E={cfg['E']}, T={cfg['T']}): {exc}") from exc
    if abs(expected - cfg["q"]) > Q_MATCH_TOL:
        raise ConfigError(
            f"{path}: key 'q' must equal q_star(E, 1/T) = {expected:.8f} "
            f"within {Q_MATCH_TOL} (got {cfg['q']}); set override=true to force")


def cmd_simulate(args) -> int:
    from spinlab.errors import ConfigError, SpinLabError
    schema = _SIM_SCHEMAS[args.subcommand]
    try:
        cfg = _typed(parse_config(args.config), schema, args.config)
        if args.subcommand in ("planted-band", "exit-times"):
            _validate_band_q(cfg, cfg["override"] or args.override, args.config)
    except ConfigError as exc:
        print(f"simulate {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    os.makedirs(args.out, exist_ok=True)
    manifest = Manifest(f"simulate {args.subcommand}", dict(cfg), cfg["seed"])
    try:
        if args.subcommand == "covariance":
            _run_covariance(cfg, args.out, manifest)
        elif args.subcommand == "planted-band":
            _run_planted_band(cfg, args.out, manifest)
        else:
            _run_exit_times(cfg, args.out, manifest)
    except SpinLabError as exc:
        print(f"simulate {args.subcommand} failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    manifest.write(args.out)
    return EXIT_OK


def _run_covariance(cfg, out_dir, manifest) -> None:
    from spinlab.simulate import covariance_experiment
    probes = covariance_experiment(cfg["p"], cfg["N"], cfg["draws"], cfg["seed"])
    header = ["model", "q", "overlap", "empirical", "exact", "std_err", "z_score"]
    rows = [[_fmt(v) for v in (pr.model, pr.q, pr.overlap, pr.empirical,
                               pr.exact, pr.std_err, pr.z_score)]
            for pr in probes]
    write_csv(manifest.add(os.path.join(out_dir, "results.csv")), header, rows)
    write_json(manifest.add(os.path.join(out_dir, "summary.json")), {
        "max_z_score": max(pr.z_score for pr in probes),
        "n_probes": len(probes),
        "draws": cfg["draws"],
        "all_within_3_sigma": all(pr.z_score < 3.0 for pr in probes),
        "manifest": "manifest.json",
    })


def _run_planted_band(cfg, out_dir, manifest) -> None:
    from spinlab.landscape import f_rs
    from spinlab.simulate import BandSpec, mc_restricted_free_energy, plant_critical_field
    field = plant_critical_field(cfg["p"], cfg["N"], cfg["E"], cfg["seed"])
    band = BandSpec(center=field.center, q=cfg["q"], eta=cfg["eta"])
    beta = 1.0 / cfg["T"]
    est = mc_restricted_free_energy(field, beta, band, cfg["n_samples"], cfg["seed"])
    prediction = f_rs(cfg["p"], cfg["E"], cfg["q"], beta)
    header = ["estimate", "std_err", "ess", "n_samples", "prediction", "abs_error"]
    write_csv(manifest.add(os.path.join(out_dir, "results.csv")), header,
              [[_fmt(v) for v in (est.estimate, est.std_err, est.ess,
                                  est.n_samples, prediction,
                                  abs(est.estimate - prediction))]])
    write_json(manifest.add(os.path.join(out_dir, "summary.json")), {
        "estimate": est.estimate,
        "std_err": est.std_err,
        "ess": est.ess,
        "prediction": prediction,
        "abs_error": abs(est.estimate - prediction),
        "manifest": "manifest.json",
    })


def _run_exit_times(cfg, out_dir, manifest) -> None:
    from spinlab.simulate import exit_time_experiment
    stats = exit_time_experiment(
        cfg["p"], cfg["N_list"], cfg["E"], cfg["T"], cfg["q"], cfg["eta"],
        cfg["replicas"], cfg["horizon"], cfg["seed"], dt=cfg["dt"])
    header = ["N", "replica", "exit_time", "censored"]
    rows = []
    for N, st in stats.items():
        for r in range(st.n_replicas):
            rows.append([_fmt(v) for v in (N, r, float(st.exit_times[r]),
                                           bool(st.censored[r]))])
    write_csv(manifest.add(os.path.join(out_dir, "results.csv")), header, rows)
    write_json(manifest.add(os.path.join(out_dir, "summary.json")), {
        "per_N": {str(N): {
            "mean_log_exit": st.mean_log_exit,
            "mean_exit": st.mean_exit,
            "censored_fraction": st.censored_fraction,
            "replicas": st.n_replicas,
            "horizon": st.horizon,
            "burn_in_steps": st.burn_in_steps,
        } for N, st in stats.items()},
        "manifest": "manifest.json",
    })


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinlab",
        description="Phase portraits and Langevin experiments for p-spin landscapes")
    sub = ap.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("phase-diagram", help="temperature sweep of the band functional")
    pd.add_argument("--p", type=int, required=True)
    pd.add_argument("--tmin", type=float, required=True)
    pd.add_argument("--tmax", type=float, required=True)
    pd.add_argument("--points", type=int, required=True)
    pd.add_argument("--out", required=True)
    pd.add_argument("--shatter-tol", type=float, default=SHATTER_VALUE_TOL)
    pd.set_defaults(func=cmd_phase_diagram)

    au = sub.add_parser("audit", help="identity and envelope audits")
    au.add_argument("--p", type=int, required=True)
    au.add_argument("--samples", type=int, required=True)
    au.add_argument("--out", required=True)
    au.add_argument("--seed", type=int, default=0)
    au.add_argument("--tamper", action="store_true", help=argparse.SUPPRESS)
    au.set_defaults(func=cmd_audit)

    si = sub.add_parser("simulate", help="drive the stochastic experiments")
    si.add_argument("subcommand", choices=sorted(_SIM_SCHEMAS))
    si.add_argument("--config", required=True)
    si.add_argument("--out", required=True)
    si.add_argument("--override", action="store_true",
                    help="skip the q = q_star(E, 1/T) consistency check")
    si.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
