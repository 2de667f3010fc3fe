"""Command line entry point: ``cfma {rate,check,montecarlo,sweep}``.

Exit status is 0 on success, 1 for bad input and 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiment
from .model import (CfmaError, CodingChoice, InputError, NumericalError,
                    channel_from_dict, load_channel_json)
from .rates import achievable_pair
from .sumcap import check_sum_capacity
from .waterfill import POLICIES, input_covariances

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def parse_pair(text: str, kind=float) -> tuple:
    try:
        parts = tuple(kind(v) for v in str(text).split(","))
    except ValueError as exc:
        raise InputError(f"cannot parse {text!r} as a pair") from exc
    if len(parts) != 2:
        raise InputError(f"expected two comma-separated values, got {text!r}")
    return parts


def parse_db_grid(text) -> list:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0:
                raise InputError("grid step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(n)]
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse grid {text!r}") from exc


def parse_gamma_grid(text):
    """``lo:hi:n`` gives ``n`` log-spaced points; None means automatic."""
    if text is None:
        return None
    try:
        lo, hi, n = str(text).split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise InputError(f"cannot parse gamma grid {text!r}; expected lo:hi:n") from exc
    if not (0 < lo <= hi) or n < 1:
        raise InputError("gamma grid needs 0 < lo <= hi and n >= 1")
    return np.geomspace(lo, hi, n)


def _load_channel(source):
    if isinstance(source, dict):
        return channel_from_dict(source)
    if source is None:
        raise InputError("--channel is required")
    return load_channel_json(source)


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, default=lambda o: np.asarray(o).tolist())
    sys.stdout.write("\n")


def cmd_rate(args) -> int:
    ch, P, cov = _load_channel(args.channel)
    if args.power is not None:
        P = args.power
    if cov is None or args.power is not None:
        if P is None:
            raise InputError("no covariances in the channel file and no --power given")
        cov = input_covariances(ch, P, policy=args.policy).covariance()
    choice = CodingChoice(parse_pair(args.a, int), parse_pair(args.b, int),
                          parse_pair(args.beta, float))
    res = achievable_pair(ch, cov, choice)
    _dump({"R1": res.R1, "R2": res.R2, "sum_rate": res.sum_rate, "valid": res.valid,
           "r1_a": res.r1_first, "r2_a": res.r2_first,
           "r1_b": res.r1_second, "r2_b": res.r2_second})
    return EXIT_OK


def cmd_check(args) -> int:
    ch, P, _ = _load_channel(args.channel)
    P = args.power if args.power is not None else P
    if P is None:
        raise InputError("--power is required when the channel file has no P")
    v = check_sum_capacity(ch, P, diagonal=args.diagonal, policy=args.policy)
    _dump({"achievable": v.achievable, "gamma_witness": v.gamma_witness,
           "gamma_interval": [list(iv) for iv in v.gamma_interval],
           "root_count": v.root_count, "boundary": v.boundary,
           "C_sum": v.capacity.C_sum, "C_d": v.capacity.C_d,
           "witness_sum_rate": v.witness_sum_rate,
           "g_coeffs": v.g_poly.coeffs.tolist(),
           "K1": v.capacity.K1_star, "K2": v.capacity.K2_star})
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    opts = {}
    if args.config:
        try:
            opts = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.config}: {exc}") from exc
    for key in ("model", "trials", "seed", "policy", "workers"):
        if getattr(args, key) is not None:
            opts[key] = getattr(args, key)
    if args.p_grid_db is not None:
        opts["p_grid_db"] = args.p_grid_db
    if args.out is not None:
        opts["output_path"] = args.out
    if "p_grid_db" in opts:
        opts["p_grid_db"] = parse_db_grid(opts["p_grid_db"])
    try:
        cfg = experiment.ExperimentConfig(**opts)
    except TypeError as exc:
        raise InputError(f"bad experiment config: {exc}") from exc
    points = experiment.run_montecarlo(cfg)
    if cfg.output_path:
        experiment.emit_csv(points, cfg.output_path)
    for p in points:
        print(f"{cfg.model:>10}  P={p.p_db:5.1f} dB  R_A={p.R_A:.4f} "
              f"+/- {p.wilson_halfwidth:.4f}  failures={p.failure_count}")
    return EXIT_NUMERIC if any(p.failure_count for p in points) else EXIT_OK


def cmd_sweep(args) -> int:
    ch, P, _ = _load_channel(args.channel)
    p_grid = parse_db_grid(args.p) if args.p is not None else ([P] if P else None)
    if not p_grid:
        raise InputError("--p is required when the channel file has no P")
    rows = experiment.run_sweep(ch, p_grid, parse_gamma_grid(args.gamma_grid),
                                policy=args.policy, diagonal=args.diagonal)
    if args.out:
        experiment.emit_csv(rows, args.out)
    else:
        experiment.write_csv(rows, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfma", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, power=True):
        p.add_argument("--config", help="JSON file supplying any of these options")
        p.add_argument("--channel", help="channel JSON file")
        if power:
            p.add_argument("--power", type=float, help="power budget P (linear)")
        p.add_argument("--policy", choices=POLICIES, default=None,
                       help="input covariance policy (default: joint)")

    p = sub.add_parser("rate", help="rate pair for fixed a, b, beta")
    common(p)
    p.add_argument("--a", default="1,1")
    p.add_argument("--b", default="1,0")
    p.add_argument("--beta", default="1.0,1.0")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("check", help="decide sum-capacity achievability")
    common(p)
    p.add_argument("--diagonal", action="store_true",
                   help="restrict covariances to diagonal matrices")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("montecarlo", help="R_A versus power over random channels")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--model", choices=experiment.MODELS)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--p-grid-db", dest="p_grid_db", help="start:step:stop or list (dB)")
    p.add_argument("--policy", choices=POLICIES, default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("sweep", help="rates and g(gamma) over a gamma grid")
    common(p, power=False)
    p.add_argument("--p", help="power(s), linear; comma list allowed")
    p.add_argument("--gamma-grid", dest="gamma_grid", help="lo:hi:n (log-spaced)")
    p.add_argument("--diagonal", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def _subparser_defaults(parser, command) -> dict:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return {a.dest: a.default for a in sub.choices[command]._actions}


def _apply_config(args, parser) -> None:
    """Options still at their defaults are taken from ``--config`` (not montecarlo)."""
    if args.command == "montecarlo" or not getattr(args, "config", None):
        return
    try:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.config}: {exc}") from exc
    defaults = _subparser_defaults(parser, args.command)
    for key, val in doc.items():
        key = key.replace("-", "_")
        if key not in defaults or key == "config":
            raise InputError(f"{args.config}: unknown option {key!r}")
        if getattr(args, key) != defaults[key]:
            continue  # command line wins
        if key in ("a", "b", "beta", "p") and isinstance(val, (list, tuple)):
            val = ",".join(str(v) for v in val)
        elif key == "p":
            val = str(val)
        setattr(args, key, val)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args, parser)
        if args.command != "montecarlo" and args.policy is None:
            args.policy = "joint"
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CfmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
