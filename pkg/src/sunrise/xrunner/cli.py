"""Command-line entry point: ``train``, ``toyreg``, ``ablate`` and ``plot``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ..diffcore.errors import SunriseError
from .ablate import AXES, run_ablation_grid
from .config import RunConfig, resolve_seeds
from .plot import emit_plot
from .toyreg import run_toy_regression
from .train import run_training

_LIST_FIELDS = {"hidden", "seeds"}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_config_flags(p: argparse.ArgumentParser):
    group = p.add_argument_group("config overrides")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _LIST_FIELDS:
            group.add_argument(flag, dest=f"cfg_{f.name}", type=int, nargs="+")
        elif f.type in ("bool", bool):
            group.add_argument(flag, dest=f"cfg_{f.name}", type=_parse_bool, metavar="BOOL")
        elif f.type in ("int", int):
            group.add_argument(flag, dest=f"cfg_{f.name}", type=int)
        elif f.type in ("float", float):
            group.add_argument(flag, dest=f"cfg_{f.name}", type=float)
        else:
            group.add_argument(flag, dest=f"cfg_{f.name}", type=str)


def _config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        data = RunConfig.load(args.config).to_dict()
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f"cfg_{f.name}")
        if v is not None:
            data[f.name] = v
    return RunConfig.from_dict(data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sunrise", allow_abbrev=False,
                                description="Ensemble off-policy RL experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", allow_abbrev=False, help="train and log evaluation metrics")
    t.add_argument("--config", type=Path, help="JSON run config")
    t.add_argument("--out", type=Path, required=True, help="metrics CSV path")
    t.add_argument("--seed", type=int, help="single seed (overrides config and SUNRISE_SEED)")
    _add_config_flags(t)

    r = sub.add_parser("toyreg", allow_abbrev=False, help="bootstrap ensemble on the cubic")
    r.add_argument("--out", type=Path, required=True, help="predictions CSV (x, mean, std)")
    r.add_argument("--seed", type=int)
    r.add_argument("--members", type=int, default=10)
    r.add_argument("--beta", type=float, default=0.3)
    r.add_argument("--steps", type=int, default=1000)
    r.add_argument("--lr", type=float, default=3e-2)

    a = sub.add_parser("ablate", allow_abbrev=False, help="run an ablation grid")
    a.add_argument("--config", type=Path, help="base JSON run config")
    a.add_argument("--axis", choices=AXES, required=True)
    a.add_argument("--out", type=Path, required=True, help="output directory")
    a.add_argument("--values", nargs="+", help="axis values (defaults per axis)")
    a.add_argument("--threshold", type=float, help="return threshold for steps-to-threshold")
    a.add_argument("--seed", type=int)
    _add_config_flags(a)

    pl = sub.add_parser("plot", allow_abbrev=False, help="SVG learning curves")
    pl.add_argument("inputs", nargs="+", type=Path,
                    help="metric CSVs, cell directories, or an ablation directory")
    pl.add_argument("--out", type=Path, required=True)
    pl.add_argument("--title", default="evaluation return")
    pl.add_argument("--column", default="eval_return")
    return p


def _plot_groups(inputs):
    groups = {}
    for path in inputs:
        if path.is_dir() and (path / "runs.csv").exists():
            for cell in sorted(d for d in path.iterdir() if d.is_dir()):
                groups[cell.name] = sorted(cell.glob("*.csv"))
        elif path.is_dir():
            groups[path.name] = sorted(path.glob("*.csv"))
        elif path.exists():
            groups[path.stem] = [path]
        else:
            raise FileNotFoundError(f"no such metrics file or directory: {path}")
    return groups


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = _config_from_args(args)
            run_training(cfg, args.out, resolve_seeds(cfg, args.seed))
            print(args.out)
        elif args.command == "toyreg":
            seed = resolve_seeds(RunConfig(), args.seed)[0]
            res = run_toy_regression(seed, args.out, n_members=args.members, beta=args.beta,
                                     steps=args.steps, lr=args.lr)
            print(f"{res.path} spread_ratio={res.spread_ratio():.4f}")
        elif args.command == "ablate":
            cfg = _config_from_args(args)
            out = run_ablation_grid(cfg, args.axis, resolve_seeds(cfg, args.seed), args.out,
                                    args.values, args.threshold)
            print(out / "summary.csv")
        elif args.command == "plot":
            print(emit_plot(_plot_groups(args.inputs), args.out, args.title, args.column))
    except (SunriseError, ValueError, OSError, KeyError) as exc:
        print(f"sunrise {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
