"""Command line entry point: ``heomdpt run | validate | presets``."""
import argparse
import sys

from .embedding import LINDBLAD_ALIASES, LINDBLAD_PRESETS
from .errors import ConfigError
from .experiments import TASKS, load_config, run_experiment
from .models import PRESET_PARAMETERS


def _cmd_run(args):
    cfg = load_config(args.config)
    paths = run_experiment(cfg, out_dir=args.out_dir, threads=args.threads,
                           tol=args.tol)
    for task, (csv_path, json_path) in paths.items():
        print(f"{task}: {csv_path}")
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    npts = len(cfg.grid())
    print(f"ok: preset={cfg.preset} tasks={','.join(cfg.tasks)} "
          f"points={npts} k_max={cfg.k_max}")
    return 0


def _cmd_presets(args):
    print("hierarchy presets:")
    for name, keys in PRESET_PARAMETERS.items():
        print(f"  {name}: {', '.join(keys)}")
    print("lindblad presets:")
    for name, (_, keys) in LINDBLAD_PRESETS.items():
        print(f"  {name}: {', '.join(keys)}")
    for alias, name in LINDBLAD_ALIASES.items():
        print(f"  {alias}: alias of {name}")
    print("tasks: " + ", ".join(TASKS))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="heomdpt",
        description="Batch HEOM Liouvillian experiments for collective "
                    "spin models.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every task of a config file")
    run.add_argument("--config", required=True, help="experiment config path")
    run.add_argument("--out-dir", default=None,
                     help="output directory (overrides the config)")
    run.add_argument("--threads", type=int, default=None,
                     help="worker threads for sweep points")
    run.add_argument("--tol", type=float, default=None,
                     help="convergence threshold for k_max=auto and converge")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    pre = sub.add_parser("presets", help="list presets and their parameters")
    pre.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
