"""Command-line entry point.

Subcommands: estimate, sweep-snr, sweep-n, ric, demo-fig2, budget. Each run
creates <out>/<subcommand>-<timestamp>/ holding the result CSVs, a
meta.json sidecar with the fully resolved configuration (sufficient to
reproduce the run exactly), and a gnuplot script where a plot makes sense.
The run directory path is printed on the first stdout line.

Configuration is a flat JSON file whose keys are the experiment/estimator
field names; command-line flags override file values; unknown keys are an
error, never ignored. A previously emitted meta.json can be fed back via
--config (its "config" block is used). Exit status: 0 on success, 2 for a
malformed configuration, 3 when a solver failed (diagnostics path printed).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

from . import estimators, experiments, model

EXPERIMENT_KEYS = {f.name for f in fields(experiments.ExperimentConfig)} - {"estimator"}
ESTIMATOR_KEYS = {f.name for f in fields(estimators.EstimatorConfig)}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


class ConfigError(Exception):
    pass


class SolverFailure(Exception):
    def __init__(self, message: str, diagnostics_path: Path):
        super().__init__(message)
        self.diagnostics_path = diagnostics_path


def _parse_lambda(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"expected 'auto' or a real number, got {text!r}") from exc


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsechan",
        description="Sparse multipath channel estimation toolkit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_sweep_flags=True):
        p.add_argument("--config", type=Path, default=None, help="flat JSON config file")
        p.add_argument("--out", type=Path, default=Path("runs"), help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base seed (base_seed)")
        p.add_argument("--L", type=int, default=None, help="channel length")
        p.add_argument("--T", type=int, default=None, help="number of dominant taps")
        if with_sweep_flags:
            p.add_argument("--M", type=int, default=None, help="Monte Carlo trials per point")
            p.add_argument("--methods", type=str, default=None, help="comma-separated method list")
            p.add_argument("--snr", type=str, default=None, help="SNR dB value(s), comma-separated")
            p.add_argument("--n", type=str, default=None, help="training length(s), comma-separated")
            p.add_argument("--lambda-ds", dest="lambda_ds", type=str, default=None)
            p.add_argument("--lambda-lasso", dest="lambda_lasso", type=str, default=None)
            p.add_argument("--workers", type=int, default=None)
            p.add_argument("--distribution", type=str, default=None,
                           choices=model.TRAINING_DISTRIBUTIONS)

    add_common(sub.add_parser("estimate", help="run all configured methods on one instance"))
    add_common(sub.add_parser("sweep-snr", help="MSE versus SNR sweep"))
    add_common(sub.add_parser("sweep-n", help="MSE versus training-length sweep"))

    ric = sub.add_parser("ric", help="restricted isometry constant table")
    add_common(ric, with_sweep_flags=False)
    ric.add_argument("--n", type=str, default="8", help="training length")
    ric.add_argument("--order", type=int, default=2, help="isometry order T")
    ric.add_argument("--max-supports", type=int, default=100_000)
    ric.add_argument("--distribution", type=str, default="gaussian",
                     choices=model.TRAINING_DISTRIBUTIONS)

    demo = sub.add_parser("demo-fig2", help="fixed five-tap channel demo: LS vs DS")
    add_common(demo)

    budget = sub.add_parser("budget", help="minimum training length for a sparsity level")
    budget.add_argument("--T", type=int, required=True)
    budget.add_argument("--p", type=int, required=True)
    budget.add_argument("--c", type=float, default=2.0)
    budget.add_argument("--out", type=Path, default=None)

    return parser


def _load_config_file(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    # Accept an emitted meta.json directly: its "config" block is the config.
    if "config" in raw and isinstance(raw["config"], dict):
        raw = raw["config"]
    flat = {}
    for key, value in raw.items():
        if key == "estimator" and isinstance(value, dict):
            for ekey, evalue in value.items():
                flat[ekey] = evalue
        else:
            flat[key] = value
    return flat


def resolve_config(args) -> experiments.ExperimentConfig:
    """Merge defaults, config file, and flag overrides into a config."""
    values: dict = {}
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            if key in EXPERIMENT_KEYS or key in ESTIMATOR_KEYS:
                values[key] = value
            else:
                raise ConfigError(f"unknown config key: {key!r}")

    overrides = {
        "base_seed": getattr(args, "seed", None),
        "L": getattr(args, "L", None),
        "T": getattr(args, "T", None),
        "trials": getattr(args, "M", None),
        "workers": getattr(args, "workers", None),
        "distribution": getattr(args, "distribution", None),
    }
    if getattr(args, "methods", None) is not None:
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if getattr(args, "lambda_ds", None) is not None:
        overrides["lambda_ds"] = _parse_lambda(args.lambda_ds)
    if getattr(args, "lambda_lasso", None) is not None:
        overrides["lambda_lasso"] = _parse_lambda(args.lambda_lasso)

    snr_text = getattr(args, "snr", None)
    n_text = getattr(args, "n", None)
    sub = args.subcommand
    if snr_text is not None:
        snr_values = _parse_float_list(snr_text)
        if sub == "sweep-snr":
            overrides["snr_grid_db"] = snr_values
        else:
            if len(snr_values) != 1:
                raise ConfigError(f"{sub} takes a single --snr value")
            overrides["fixed_snr_db"] = snr_values[0]
    if n_text is not None:
        n_values = _parse_int_list(n_text)
        if sub == "sweep-n":
            overrides["n_grid"] = n_values
        else:
            if len(n_values) != 1:
                raise ConfigError(f"{sub} takes a single --n value")
            overrides["fixed_n"] = n_values[0]

    for key, value in overrides.items():
        if value is not None:
            values[key] = value

    est_kwargs = {k: v for k, v in values.items() if k in ESTIMATOR_KEYS}
    exp_kwargs = {k: v for k, v in values.items() if k in EXPERIMENT_KEYS}
    if "methods" in exp_kwargs:
        exp_kwargs["methods"] = tuple(exp_kwargs["methods"])
    for grid_key in ("snr_grid_db", "n_grid"):
        if grid_key in exp_kwargs:
            exp_kwargs[grid_key] = tuple(exp_kwargs[grid_key])
    try:
        estimator = estimators.EstimatorConfig(**est_kwargs)
        return experiments.ExperimentConfig(estimator=estimator, **exp_kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _make_run_dir(out: Path, subcommand: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = out / f"{subcommand}-{stamp}"
    run_dir = base
    suffix = 1
    while run_dir.exists():
        run_dir = Path(f"{base}-{suffix}")
        suffix += 1
    run_dir.mkdir()
    return run_dir


def _write_meta(run_dir: Path, payload: dict) -> Path:
    path = run_dir / "meta.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _flat_config_dict(cfg: experiments.ExperimentConfig) -> dict:
    data = asdict(cfg)
    data["methods"] = list(data["methods"])
    data["snr_grid_db"] = list(data["snr_grid_db"])
    data["n_grid"] = list(data["n_grid"])
    return data


def _sweep_plot_script(axis_label: str, methods) -> str:
    lines = [
        "set datafile separator ','",
        "set logscale y",
        f"set xlabel '{axis_label}'",
        "set ylabel 'MSE'",
        "set grid",
        "set key outside right",
    ]
    clauses = [
        f"'result.csv' every ::1 using (strcol(3) eq '{m}' ? column(2) : 1/0):4 "
        f"with linespoints title '{m}'"
        for m in methods
    ]
    lines.append("plot \\\n  " + ", \\\n  ".join(clauses))
    return "\n".join(lines) + "\n"


def _run_sweep_command(args, cfg, axis: str) -> int:
    run_dir = _make_run_dir(args.out, args.subcommand)
    print(run_dir)
    if axis == experiments.AXIS_SNR:
        result = experiments.sweep_snr(cfg)
        axis_label = "SNR (dB)"
    else:
        result = experiments.sweep_training_length(cfg)
        axis_label = "training length n"
    experiments.write_sweep_csv(result, run_dir / "result.csv")
    experiments.write_sweep_csv(result, run_dir / "result_normalized.csv", normalized=True)
    meta = experiments.sweep_metadata(result)
    meta_path = _write_meta(run_dir, meta)
    (run_dir / "plot.gp").write_text(_sweep_plot_script(axis_label, result.methods))
    failed = sum(agg.failed for agg in result.cells.values())
    if failed:
        print(f"{failed} estimator cell(s) failed; see {meta_path}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _run_estimate(args, cfg) -> int:
    run_dir = _make_run_dir(args.out, args.subcommand)
    print(run_dir)
    snr = cfg.fixed_snr_db
    n = cfg.fixed_n
    seed_ch = experiments.derive_trial_seed(cfg.base_seed, snr, n, 0, 1)
    seed_tr = experiments.derive_trial_seed(cfg.base_seed, snr, n, 0, 2)
    seed_nz = experiments.derive_trial_seed(cfg.base_seed, snr, n, 0, 3)
    channel = model.generate_sparse_channel(cfg.L, cfg.T, seed=seed_ch)
    X = model.build_toeplitz_training(n, cfg.L, cfg.distribution, seed=seed_tr)
    obs = model.observe(X, channel, snr, seed=seed_nz)

    model.save_taps_csv(run_dir / "channel_true.csv", channel.taps)
    diagnostics = {}
    for method in cfg.methods:
        try:
            est = estimators.run_estimator(
                method, X, obs, cfg.estimator,
                true_support=channel.support, true_sparsity=channel.sparsity,
            )
        except Exception as exc:
            diag_path = run_dir / "diagnostics.json"
            diagnostics[method] = {"failed": True, "error": f"{type(exc).__name__}: {exc}"}
            diag_path.write_text(json.dumps(diagnostics, indent=2, default=str) + "\n")
            print(f"solver failure in {method}; diagnostics at {diag_path}", file=sys.stderr)
            return EXIT_SOLVER
        model.save_taps_csv(run_dir / f"estimate_{method}.csv", est.h_hat)
        diagnostics[method] = {
            "support_hat": list(est.support_hat),
            "mse": experiments.mse(channel, est),
            **{k: v for k, v in est.diagnostics.items() if _json_safe(v)},
        }
    (run_dir / "diagnostics.json").write_text(
        json.dumps(diagnostics, indent=2, default=str) + "\n"
    )
    _write_meta(run_dir, {
        "subcommand": "estimate",
        "config": _flat_config_dict(cfg),
        "instance": {"snr_db": snr, "n": n, "true_support": list(channel.support),
                     "noise_variance": obs.noise_variance},
    })
    return EXIT_OK


def _json_safe(value) -> bool:
    try:
        json.dumps(value)
        return True
    except TypeError:
        return False


def _run_ric(args, cfg_seed: int, L: int) -> int:
    try:
        n_values = _parse_int_list(args.n)
        if len(n_values) != 1:
            raise ConfigError("ric takes a single --n value")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run_dir = _make_run_dir(args.out, args.subcommand)
    print(run_dir)
    X = model.build_toeplitz_training(n_values[0], L, args.distribution, seed=cfg_seed)
    estimate = model.restricted_isometry_constant(
        X, args.order, max_supports=args.max_supports, seed=cfg_seed
    )
    with open(run_dir / "result.csv", "w", newline="") as fh:
        fh.write("support,min_eig,max_eig\n")
        for support, lo, hi in estimate.per_support_extremes:
            fh.write("|".join(str(i) for i in support) + f",{lo!r},{hi!r}\n")
    _write_meta(run_dir, {
        "subcommand": "ric",
        "N": X.N, "L": X.L, "order": estimate.order,
        "distribution": args.distribution, "seed": cfg_seed,
        "max_supports": args.max_supports,
        "delta": estimate.delta,
        "rip_violated": estimate.rip_violated,
        "exact": estimate.exact,
        "supports_checked": estimate.supports_checked,
    })
    print(f"delta_{estimate.order} = {estimate.delta!r} "
          f"({'exact' if estimate.exact else 'sampled lower bound'})")
    return EXIT_OK


def _demo_plot_script() -> str:
    return "\n".join([
        "set datafile separator ','",
        "set xlabel 'tap index'",
        "set ylabel 'modulus'",
        "set grid",
        "set key outside right",
        "plot \\",
        "  'result.csv' every ::1 using 1:2 with impulses lw 2 title 'true', \\",
        "  'result.csv' every ::1 using 1:3 with points pt 1 ps 1.4 title 'ls', \\",
        "  'result.csv' every ::1 using 1:4 with points pt 6 ps 1.4 title 'ds'",
    ]) + "\n"


def _run_demo(args, cfg) -> int:
    run_dir = _make_run_dir(args.out, args.subcommand)
    print(run_dir)
    channel = model.fixed_channel_figure_demo(seed=cfg.base_seed)
    L = channel.length
    n = 30
    snr = 10.0
    X = model.build_toeplitz_training(
        n, L, cfg.distribution,
        seed=experiments.derive_trial_seed(cfg.base_seed, snr, n, 0, 2),
    )
    obs = model.observe(
        X, channel, snr,
        seed=experiments.derive_trial_seed(cfg.base_seed, snr, n, 0, 3),
    )
    try:
        est_ls = estimators.ls_estimate(X, obs)
        est_ds = estimators.ds_estimate(X, obs, cfg.estimator)
    except Exception as exc:
        diag_path = run_dir / "diagnostics.json"
        diag_path.write_text(json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        print(f"solver failure; diagnostics at {diag_path}", file=sys.stderr)
        return EXIT_SOLVER

    model.save_taps_csv(run_dir / "channel_true.csv", channel.taps)
    model.save_taps_csv(run_dir / "estimate_ls.csv", est_ls.h_hat)
    model.save_taps_csv(run_dir / "estimate_ds.csv", est_ds.h_hat)
    with open(run_dir / "result.csv", "w", newline="") as fh:
        fh.write("index,true_mod,ls_mod,ds_mod\n")
        for i in range(L):
            mods = (abs(channel.taps[i]), abs(est_ls.h_hat[i]), abs(est_ds.h_hat[i]))
            fh.write(f"{i}," + ",".join(repr(float(m)) for m in mods) + "\n")
    with open(run_dir / "support_ds.csv", "w", newline="") as fh:
        fh.write("index,real,imag,modulus\n")
        for i in est_ds.support_hat:
            v = complex(est_ds.h_hat[i])
            fh.write(f"{i},{v.real!r},{v.imag!r},{abs(v)!r}\n")
    (run_dir / "plot.gp").write_text(_demo_plot_script())
    _write_meta(run_dir, {
        "subcommand": "demo-fig2",
        "config": _flat_config_dict(cfg),
        "instance": {
            "n": n, "snr_db": snr, "true_support": list(channel.support),
            "ds_support": list(est_ds.support_hat),
            "ds_lambda": est_ds.diagnostics["lambda"],
        },
    })
    return EXIT_OK


def _run_budget(args) -> int:
    try:
        budget = model.measurement_budget(args.T, args.p, args.c)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(budget.n_min)
    if args.out is not None:
        run_dir = _make_run_dir(args.out, "budget")
        _write_meta(run_dir, {"subcommand": "budget", "T": budget.T, "p": budget.p,
                              "c": budget.c, "n_min": budget.n_min})
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.subcommand == "budget":
        return _run_budget(args)

    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.subcommand == "sweep-snr":
        return _run_sweep_command(args, cfg, experiments.AXIS_SNR)
    if args.subcommand == "sweep-n":
        return _run_sweep_command(args, cfg, experiments.AXIS_TRAINING)
    if args.subcommand == "estimate":
        return _run_estimate(args, cfg)
    if args.subcommand == "ric":
        return _run_ric(args, cfg.base_seed, cfg.L)
    if args.subcommand == "demo-fig2":
        return _run_demo(args, cfg)
    raise AssertionError(f"unhandled subcommand {args.subcommand}")


if __name__ == "__main__":
    sys.exit(main())
