"""Command line entry point: ``starcache {train,baseline,sweep,eval}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..config import ALGOS, PHASES, VARIANTS, ConfigError, ScenarioConfig, format_config, load_config
from .io import CheckpointError
from .runner import CKPT_NAME, baseline_run, evaluate, sweep, train_run


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value scenario file")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--phase", choices=PHASES)
    p.add_argument("--algo", choices=ALGOS)
    p.add_argument("--episodes", type=int)
    p.add_argument("--steps", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starcache", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("train", help="train one agent and write metrics.csv plus agent.ckpt"))
    _common(sub.add_parser("baseline", help="train a comparison system (see --variant)"))
    sp = sub.add_parser("sweep", help="train over an alpha or cache-size grid and aggregate over seeds")
    _common(sp)
    sp.add_argument("--axis", choices=("alpha", "cache_size"), required=True)
    sp.add_argument("--values", required=True, help="comma separated grid, e.g. 0.4,1.2")
    sp.add_argument("--n-seeds", type=int)
    sp.add_argument("--workers", type=int, default=1)
    ep = sub.add_parser("eval", help="greedy roll-outs of a saved checkpoint")
    _common(ep)
    ep.add_argument("--checkpoint", type=Path, help=f"defaults to <out>/{CKPT_NAME}")
    return parser


def resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    over = {k: getattr(args, k) for k in ("seed", "variant", "phase", "algo", "episodes", "steps")
            if getattr(args, k, None) is not None}
    if getattr(args, "n_seeds", None) is not None:
        over["n_seeds"] = args.n_seeds
    if "seed" in over and not 0 <= over["seed"] < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    return cfg.replace(**over).validate()


def _parse_values(text: str, axis: str):
    try:
        vals = [float(v) if axis == "alpha" else int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values {text!r}") from exc
    if not vals:
        raise ConfigError("--values is empty")
    return vals


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "eval":
            ckpt = args.checkpoint or args.out / CKPT_NAME
            res = evaluate(ckpt, episodes=args.episodes or 10, out_dir=args.out, seed=args.seed)
        else:
            cfg = resolve_config(args)
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "config.txt").write_text(format_config(cfg))
            if args.command == "sweep":
                table = sweep(cfg, args.axis, _parse_values(args.values, args.axis), args.out, args.workers)
                print(json.dumps(table, indent=2))
                return 0
            res = (train_run if args.command == "train" else baseline_run)(cfg, args.out)
        print(json.dumps(res.summary, sort_keys=True))
    except (ConfigError, CheckpointError, OSError) as exc:
        print(f"starcache {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
