"""Command line entry point: ``agtf run``, ``agtf sweep`` and ``agtf synth``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from .datasets import synth_dataset
from .experiment import (
    EXIT_OK,
    EXIT_USAGE,
    ExperimentConfig,
    StageError,
    run_experiment,
    sweep,
    sweep_points,
)


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _floats(text):
    return [float(t) for t in text.split(",") if t]


def _ints(text):
    return [int(t) for t in text.split(",") if t]


# flag -> ExperimentConfig field
RUN_FLAGS = {
    "--manifest": ("manifest", str),
    "--k": ("K", int),
    "--anchor-rate": ("anchor_rate", float),
    "--neighbor-k": ("neighbor_k", int),
    "--anchor-method": ("anchor_method", str),
    "--p": ("p", float),
    "--lambda1": ("lambda1", float),
    "--lambda2": ("lambda2", float),
    "--epsilon": ("epsilon", float),
    "--max-iter": ("max_iter", int),
    "--eta": ("eta", float),
    "--rotate-prox": ("rotate_prox", _bool),
    "--seed": ("seed", int),
    "--trials": ("trials", int),
    "--out": ("out", str),
}


def _add_run_flags(parser):
    parser.add_argument("--config", help="JSON file with flat ExperimentConfig keys")
    for flag, (dest, typ) in RUN_FLAGS.items():
        parser.add_argument(flag, dest=dest, type=typ, default=None)
    g = parser.add_argument_group("synthetic data (instead of --manifest)")
    g.add_argument("--synth-n", type=int, default=None)
    g.add_argument("--synth-dims", type=_ints, default=None, help="comma separated, e.g. 10,8,12")
    g.add_argument("--synth-std", type=float, default=None)


def _experiment_config(args):
    values = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise StageError("config", f"cannot read {args.config}: {exc}", EXIT_USAGE) from exc
    for dest, _ in RUN_FLAGS.values():
        if getattr(args, dest) is not None:
            values[dest] = getattr(args, dest)
    if args.synth_n is not None or args.synth_dims is not None:
        synth = dict(values.get("synth") or {})
        if args.synth_n is not None:
            synth["n"] = args.synth_n
        if args.synth_dims is not None:
            synth["view_dims"] = args.synth_dims
        if args.synth_std is not None:
            synth["cluster_std"] = args.synth_std
        values["synth"] = synth
        if args.manifest is None:
            values.pop("manifest", None)
    return ExperimentConfig.from_dict(values)


def build_parser():
    parser = argparse.ArgumentParser(prog="agtf", description="Anchor graph tensor factorization clustering")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="cluster one dataset")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid and write sweep.csv")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=["anchor_rate", "p", "lambda"])
    p_sweep.add_argument("--values", required=True, type=_floats)
    p_sweep.add_argument("--lambda2-values", type=_floats, default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_synth = sub.add_parser("synth", help="write a synthetic multi-view dataset")
    p_synth.add_argument("--k", type=int, default=4)
    p_synth.add_argument("--n", type=int, default=400)
    p_synth.add_argument("--dims", type=_ints, default=[10, 8, 12])
    p_synth.add_argument("--cluster-std", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--format", choices=["csv", "f64le"], default="f64le")
    p_synth.add_argument("--out", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "synth":
            try:
                _, _, path = synth_dataset(args.k, args.n, args.dims, args.cluster_std, args.seed,
                                           out_dir=args.out, fmt=args.format)
            except ValueError as exc:
                raise StageError("synth", str(exc), EXIT_USAGE) from exc
            print(path)
        elif args.command == "run":
            summary = run_experiment(_experiment_config(args))
            print(json.dumps({k: summary[k] for k in summary if k not in ("config", "trials")}, sort_keys=True))
        else:
            config = _experiment_config(args)
            rows = sweep(config, sweep_points(args.param, args.values, args.lambda2_values), jobs=args.jobs)
            print(Path(config.out) / "sweep.csv")
            failed = [r for r in rows if r["status"] != "ok"]
            for r in failed:
                print(f"point {r['point']}: {r['status']}", file=sys.stderr)
    except StageError as exc:
        print(f"agtf: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
