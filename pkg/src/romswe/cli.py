"""Command-line entry point.

Subcommands map one-to-one onto the experiment harness:

    romswe fom            full-order run, snapshots + invariant series
    romswe pod            POD basis + singular-value report
    romswe nonparametric  single-parameter study over the r-list
    romswe prediction     training-window / prediction-window study
    romswe parametric     multi-parameter train/test study
    romswe lcurve         regression tolerance sweep per state equation

Every subcommand accepts --config (flat key=value file) plus flag
overrides; all randomness flows through the single --seed value, and the
CSV outputs are bitwise reproducible under a fixed seed.
"""

import argparse
import sys

from . import experiments
from .config import ConfigError, load_config


def _add_common(sub):
    sub.add_argument("--config", metavar="PATH",
                     help="flat key=value config file")
    sub.add_argument("--seed", type=int, metavar="INT",
                     help="seed for all randomized stages")
    sub.add_argument("--out", metavar="DIR", help="output directory")
    sub.add_argument("--grid", type=int, metavar="N", dest="n",
                     help="grid points per direction")
    sub.add_argument("--r", metavar="LIST", dest="r_list",
                     help="comma-separated reduced dimensions, e.g. 5,10,20")
    sub.add_argument("--stride", type=int, metavar="INT",
                     help="snapshot subsampling stride")
    sub.add_argument("--steps", type=int, metavar="K",
                     help="number of time steps")
    sub.add_argument("--no-reprojection", action="store_true",
                     help="fit on plainly projected data instead of "
                          "re-projected data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="romswe",
        description="Reduced-order modeling studies for the rotating "
                    "thermal shallow water equations.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("fom", help="run the full-order model")
    _add_common(sub)

    sub = subs.add_parser("pod", help="compute a POD basis")
    _add_common(sub)
    sub.add_argument("--snapshots", metavar="PATH",
                     help="reuse a stored snapshot file instead of rerunning "
                          "the full-order model")

    sub = subs.add_parser("nonparametric", help="single-parameter study")
    _add_common(sub)

    sub = subs.add_parser("prediction", help="train/predict window study")
    _add_common(sub)
    sub.add_argument("--k-train", metavar="LIST", dest="k_train_list",
                     help="comma-separated training-window lengths")

    sub = subs.add_parser("parametric", help="multi-parameter study")
    _add_common(sub)

    sub = subs.add_parser("lcurve", help="regression tolerance sweep")
    _add_common(sub)

    return parser


#: Per-subcommand config defaults applied when the flag is not given.
_STUDY_DEFAULTS = {
    "parametric": {"steps": 300, "stride": 2, "r_list": (2, 5, 10)},
}


def _int_list(text):
    if text is None or isinstance(text, tuple):
        return text
    return tuple(int(p) for p in text.replace(",", " ").split())


def _resolve_config(args):
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "n": getattr(args, "n", None),
        "r_list": _int_list(getattr(args, "r_list", None)),
        "stride": getattr(args, "stride", None),
        "steps": getattr(args, "steps", None),
        "k_train_list": _int_list(getattr(args, "k_train_list", None)),
    }
    if getattr(args, "no_reprojection", False):
        overrides["reprojection"] = False
    for key, value in _STUDY_DEFAULTS.get(args.command, {}).items():
        if overrides.get(key) is None:
            overrides[key] = value
    return load_config(args.config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"romswe: configuration error: {exc}", file=sys.stderr)
        return 2

    runners = {
        "fom": lambda: experiments.run_fom_only(config),
        "pod": lambda: experiments.run_pod_only(
            config, snapshot_path=getattr(args, "snapshots", None)),
        "nonparametric": lambda: experiments.run_nonparametric(config),
        "prediction": lambda: experiments.run_prediction(config),
        "parametric": lambda: experiments.run_parametric(config),
        "lcurve": lambda: experiments.run_lcurve(config),
    }
    try:
        paths = runners[args.command]()
    except Exception as exc:
        print(f"romswe: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
