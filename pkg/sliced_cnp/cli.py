"""Command line front end of sliced-cnp.

Sub-commands
------------
train
    train one task and write metrics, checkpoints and plot data
compare
    train one task under several objectives on identical data
eval
    evaluate a checkpoint, write plot ready CSV
sample
    draw model predictions for a fresh episode from a checkpoint
selfcheck
    run the embedded numeric oracle suite

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.
"""

import argparse
import logging
import subprocess
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from json import dumps
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence

import numpy as np

from .cnp import (decode_targets, encode_context, load_checkpoint,
                  split_gaussian)
from .constants import C, GAUSSIAN, LG, R, RED, TASKS, Y
from .exceptions import ConfigError, SlicedCNPError
from .losses import OBJECTIVES
from .selfcheck import run_selfcheck
from .tasks import make_task
from .trainer import SCHEDULES, TrainConfig, run_comparison, run_experiment
from .utils import lprint
from .version import __version__

if TYPE_CHECKING:
    from .abstract import TaskABC
    from .cnp import ModelParams

__all__ = ["main", "RunManifest"]

log = logging.getLogger(__name__)

#: command line flags mapped to configuration fields
_TRAIN_FLAGS = ("objective", "joint", "n_proj", "p", "seed", "epochs",
                "lr_base", "lr_max", "cycle_steps", "p0", "p1", "image_dir",
                "limit", "hidden", "r_dim", "schedule", "halfwidth",
                "eval_every", "checkpoint_every", "n_images", "timing")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _build_id() -> str:
    """Package version plus short git revision when run from a checkout."""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).parent, capture_output=True, text=True,
            timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"{__version__}+{rev}" if rev else __version__


@dataclass
class RunManifest:
    """Record of one command invocation, written as ``manifest.json``.

    Parameters
    ----------
    command: str
        sub-command name
    config: Dict[str, Any]
        effective configuration
    build: str
        package version and git revision
    started: str
        ISO timestamp
    finished: Optional[str]
        ISO timestamp, set by :meth:`write`
    outputs: List[str]
        files relative to the output directory
    """

    command: str
    config: Dict[str, Any]
    build: str = field(default_factory=_build_id)
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    outputs: List[str] = field(default_factory=list)

    def write(self, out: Path) -> Path:
        """Finish the record and write it, only existing outputs are listed."""
        path = out / "manifest.json"
        self.finished = _now()
        self.outputs = sorted({o for o in self.outputs if (out / o).is_file()}
                              | {path.name})
        path.write_text(dumps(asdict(self), indent=2, sort_keys=True))
        return path


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: getattr(args, k, None) for k in _TRAIN_FLAGS}


def _resolve_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig.from_sources(args.task, args.config,
                                    **_overrides(args))


def cmd_train(args: argparse.Namespace) -> int:
    """Run one experiment, see :func:`~sliced_cnp.trainer.run_experiment`."""
    config = _resolve_config(args)
    out = Path(args.out)
    manifest = RunManifest("train", config.to_dict())
    summary = run_experiment(config.task, config, out, quiet=args.quiet)
    manifest.outputs = summary["outputs"]
    manifest.write(out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    """Train under every requested objective and write ``comparison.csv``."""
    config = _resolve_config(args)
    out = Path(args.out)
    manifest = RunManifest("compare", config.to_dict())
    summaries = run_comparison(config.task, config, out, args.objectives,
                               quiet=args.quiet)
    manifest.outputs = ["comparison.csv"] + [
        f"{objective}/{o}" for objective, s in summaries.items()
        for o in s["outputs"]
    ]
    manifest.write(out)

    printer = lprint(args.quiet)
    for objective, s in summaries.items():
        printer(f"  {objective}: {s['initial_eval']['metric']:.4g} -> "
                f"{s['final_eval']['metric']:.4g}")
    return 0


def _load(args: argparse.Namespace):
    """Checkpoint, task and configuration for eval and sample commands."""
    params, header = load_checkpoint(args.checkpoint)
    saved = dict(header.get("config") or {})
    saved.pop("task", None)
    if "theta" in saved:
        saved["theta"] = tuple(saved["theta"])
    name = args.task or header.get("task")
    if name is None:
        raise ConfigError("task", "checkpoint does not name its task, pass "
                                  "--task")
    if args.seed is not None:
        saved["seed"] = args.seed
    config = TrainConfig.for_task(name, **saved)
    config.validate()

    task = make_task(config)
    task.check_params(params)
    return params, task, config


def cmd_eval(args: argparse.Namespace) -> int:
    """Write evaluation rows of a checkpoint and print its held-out metric."""
    params, task, config = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("eval", config.to_dict())

    columns, table = task.eval_table(params, args.n_samples, config.seed)
    path = out / f"eval_{task.name}.csv"
    np.savetxt(path, table, fmt="%.10g", delimiter=",",
               header=",".join(columns), comments="")
    result = task.evaluate(params)
    manifest.outputs = [path.name]
    manifest.write(out)

    lprint(args.quiet)(
        f"{C}{task.name}{R} " + ", ".join(f"{k}={v:.4g}"
                                          for k, v in result.items())
        + f", rows in {LG}{path}{R}"
    )
    return 0


def _draw(params: "ModelParams", task: "TaskABC", gen: np.random.Generator):
    episode = task.episode(gen)
    out = decode_targets(params, episode.x_target,
                         encode_context(params, episode.x_context,
                                        episode.y_context))
    if params.head != GAUSSIAN:
        return episode, out.numpy()
    mu, sigma = split_gaussian(out, params.d_y)
    noise = gen.standard_normal(mu.shape)
    return episode, mu.numpy() + sigma.numpy() * noise


def cmd_sample(args: argparse.Namespace) -> int:
    """Predict a fresh episode, gaussian heads are sampled, not averaged."""
    params, task, config = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("sample", config.to_dict())

    episode, samples = _draw(params, task, np.random.default_rng(config.seed))
    path = episode.to_csv(out / f"samples_{task.name}.csv", samples)
    manifest.outputs = [path.name]
    manifest.write(out)
    lprint(args.quiet)(f"{episode.n_target} samples written to {LG}{path}{R}")
    return 0


def cmd_selfcheck(args: argparse.Namespace) -> int:
    """Exit 0 only when every oracle check passes."""
    seed = 0 if args.seed is None else args.seed
    results = run_selfcheck(seed=seed, quiet=args.quiet)
    return 0 if all(r.passed for r in results) else 1


def _add_train_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--task", choices=TASKS, default=None,
                        help="experiment to run")
    parser.add_argument("--objective", choices=tuple(OBJECTIVES),
                        help="training objective")
    joint = parser.add_mutually_exclusive_group()
    joint.add_argument("--joint", dest="joint", action="store_const",
                       const=True, help="sliced distance over (x, y) points")
    joint.add_argument("--no-joint", dest="joint", action="store_const",
                       const=False, help="sliced distance over outputs only")
    parser.add_argument("--n-proj", type=int, help="projection count")
    parser.add_argument("--power", dest="p", type=float,
                        help="Wasserstein power")
    parser.add_argument("--epochs", type=int, help="training steps")
    parser.add_argument("--lr-base", type=float, help="base learning rate")
    parser.add_argument("--lr-max", type=float, help="peak learning rate")
    parser.add_argument("--cycle-steps", type=int,
                        help="cyclic schedule period")
    parser.add_argument("--schedule", choices=SCHEDULES,
                        help="learning rate schedule")
    parser.add_argument("--p0", type=float, help="min context fraction")
    parser.add_argument("--p1", type=float, help="max context fraction")
    parser.add_argument("--hidden", type=int, help="hidden layer width")
    parser.add_argument("--r-dim", type=int, help="representation width")
    parser.add_argument("--halfwidth", type=float,
                        help="uniform noise tube half width")
    parser.add_argument("--eval-every", type=int, help="evaluation period")
    parser.add_argument("--checkpoint-every", type=int,
                        help="checkpoint period")
    parser.add_argument("--n-images", type=int, help="synthetic images")
    parser.add_argument("--image-dir", help="directory of PGM/PPM images")
    parser.add_argument("--limit", type=int, help="max images to read")
    parser.add_argument("--timing", action="store_const", const=True,
                        help="record step wall time in metrics")


def _add_checkpoint_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--checkpoint", required=True,
                        help="checkpoint written by train")
    parser.add_argument("--task", choices=TASKS, default=None,
                        help="task, defaults to the one stored in checkpoint")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with all sub-commands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true",
                        help="no progress bar or status output")

    parser = argparse.ArgumentParser(
        prog="sliced-cnp",
        description="Conditional neural processes trained with sliced "
                    "Wasserstein distances",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="train one task")
    _add_train_flags(train)
    train.set_defaults(func=cmd_train)

    compare = sub.add_parser("compare", parents=[common],
                             help="train under several objectives")
    _add_train_flags(compare)
    compare.add_argument("--objectives", nargs="+",
                         choices=tuple(OBJECTIVES),
                         default=["swd", "gaussian_nll"],
                         help="objectives to compare")
    compare.set_defaults(func=cmd_compare)

    evaluate = sub.add_parser("eval", parents=[common],
                              help="evaluate checkpoint")
    _add_checkpoint_flags(evaluate)
    evaluate.add_argument("--n-samples", type=int, default=200,
                          help="grid points, samples or images")
    evaluate.set_defaults(func=cmd_eval)

    sample = sub.add_parser("sample", parents=[common],
                            help="sample predictions from checkpoint")
    _add_checkpoint_flags(sample)
    sample.set_defaults(func=cmd_sample)

    check = sub.add_parser("selfcheck", parents=[common],
                           help="run numeric oracle suite")
    check.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``sliced-cnp`` console script.

    Parameters
    ----------
    argv: Optional[Sequence[str]]
        arguments without program name, defaults to ``sys.argv[1:]``

    Returns
    -------
    int
        process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "n_samples", 1) < 1:
        print(f"{RED}--n-samples must be >= 1{R}", file=sys.stderr)
        return 2

    try:
        return args.func(args)
    except ConfigError as e:
        print(f"{RED}configuration error{R}: {e}", file=sys.stderr)
        return 2
    except (SlicedCNPError, OSError) as e:
        print(f"{RED}{type(e).__name__}{R}: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print(f"{Y}interrupted{R}", file=sys.stderr)
        return 1
