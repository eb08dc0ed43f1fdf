"""Command line entry point: ``gcperim <subcommand> [--config FILE] [flags]``."""

from __future__ import annotations

import argparse
import csv
import sys
import warnings

from . import inference
from .constants import surface_tension, unit_ball_volume, variance_constant
from .geometry import parse_shape
from .harness.config import ConfigError, ExperimentConfig, read_config_file
from .harness.experiments import EXPERIMENTS
from .harness.report import format_value, write_result
from .neighbor_graph import graph_perimeter
from .nonlocal_functional import InsufficientSignalError, bias_curve
from .sampling import make_cloud

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 2, 3

# flag name -> ExperimentConfig field
_CONFIG_FLAGS = {
    "shape": str,
    "d": int,
    "n": str,
    "eps": str,
    "eps_rule": str,
    "eps_c": float,
    "eps_gamma": float,
    "trials": int,
    "seed": int,
    "alpha": float,
    "rho": float,
    "alt_shape": str,
    "width": str,
    "p": str,
    "workers": int,
    "output": str,
    "json": str,
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file; flags override its values")
    for name, kind in _CONFIG_FLAGS.items():
        parser.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None)
    parser.add_argument("--assert", dest="assert_checks", action="store_true", help="exit 3 if any check fails")


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _CONFIG_FLAGS:
        value = getattr(args, name)
        if value is not None:
            values[name] = value
    if "shape" not in values:
        raise ConfigError("a shape is required (--shape or shape= in the config)")
    return ExperimentConfig.from_mapping(values)


def _run_experiment(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    result = EXPERIMENTS[args.command](cfg)
    text = write_result(result, cfg.output, cfg.json)
    if not cfg.output:
        sys.stdout.write(text)
    failed = [c for c in result.checks if not c.passed]
    for check in failed:
        print(f"check failed: {check.name} {check.detail}", file=sys.stderr)
    return EXIT_ASSERT if failed and args.assert_checks else EXIT_OK


def _cmd_constants(args: argparse.Namespace) -> int:
    if args.d is None or args.d < 2:
        raise ConfigError("constants needs --d >= 2")
    d = args.d
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["d", "sigma_d", "alpha_d", "C_d"])
    writer.writerow([d] + [f"{v:.12g}" for v in (surface_tension(d), unit_ball_volume(d), variance_constant(d))])
    return EXIT_OK


def _parse_eps_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad eps list {text!r}") from exc
    if not values or any(not v > 0 for v in values):
        raise ConfigError("eps values must be positive")
    return values


def _shape_from_args(args: argparse.Namespace):
    if not args.shape:
        raise ConfigError("--shape is required")
    try:
        return parse_shape(args.shape, args.d)
    except ValueError as exc:
        raise ConfigError(f"bad shape: {exc}") from exc


def _cmd_bias(args: argparse.Namespace) -> int:
    shape = _shape_from_args(args)
    if not args.eps:
        raise ConfigError("--eps is required")
    try:
        curve = bias_curve(shape, _parse_eps_list(args.eps), samples=args.samples, seed=args.seed or 0)
    except InsufficientSignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["eps", "p_eps", "bias", "abs_bias", "error_bound"])
    for row in zip(curve.eps, curve.p_eps, curve.bias, curve.abs_bias, curve.error_bound):
        writer.writerow([format_value(float(v)) for v in row])
    print(f"# slope={curve.slope!r}")
    print(f"# intercept={curve.intercept!r}")
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    shape = _shape_from_args(args)
    try:
        n = int(float(args.n))
        eps = float(args.eps)
    except (TypeError, ValueError) as exc:
        raise ConfigError("estimate needs a single --n and --eps") from exc
    if n < 2 or not eps > 0:
        raise ConfigError("estimate needs n >= 2 and eps > 0")
    alpha = 0.05 if args.alpha is None else args.alpha
    if not 0 < alpha < 0.5:
        raise ConfigError("alpha must lie in (0, 0.5)")
    if args.rho is not None and not args.rho > 0:
        raise ConfigError("rho must be positive")
    cut = graph_perimeter(make_cloud(shape, n, args.seed or 0), eps)
    est = inference.estimate_from_cut(cut, shape.d)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", inference.WindowWarning)
        ci = inference.confidence_interval(est, alpha)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    l_n, decision = "", ""
    if args.rho is not None:
        test = inference.hypothesis_test(est, args.rho, alpha)
        l_n, decision = format_value(test.l_n), "accept" if test.accept else "reject"
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["per_hat", "a_minus", "a_plus", "l_n", "decision"])
    writer.writerow([format_value(est.per_hat), format_value(ci.a_minus), format_value(ci.a_plus), l_n, decision])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcperim", description="Graph-cut perimeter estimation and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print sigma_d, alpha_d and C_d")
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(handler=_cmd_constants)

    p = sub.add_parser("bias", help="tabulate P_eps - sigma_d Per over eps")
    p.add_argument("--shape", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--eps", required=True, help="comma or space separated list")
    p.add_argument("--samples", type=int, default=4_000_000, help="Monte Carlo budget when no closed form applies")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_bias)

    p = sub.add_parser("estimate", help="estimate a perimeter from one simulated cloud")
    p.add_argument("--shape", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--n", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.set_defaults(handler=_cmd_estimate)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_config_flags(p)
        p.set_defaults(handler=_run_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors count as config errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
