"""Training loop: context sampling, forward pass, objective and Adam step.

One episode per step. Episodes, context fractions and projection directions
are all drawn from a single generator seeded by ``config.seed``, so a run is
a deterministic function of its configuration.
"""

import logging
import time
from json import dumps
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Sequence, Tuple

import numpy as np

from ..cnp import (ModelParams, decode_targets, encode_context, init_params,
                   save_checkpoint, split_gaussian)
from ..constants import G, LG, R
from ..diffmath import Tape, Tensor
from ..exceptions import ContractError, NumericalError
from ..losses import (LossReport, gaussian_nll, head_for, swd_loss,
                      uniform_loglik)
from ..tasks import TaskBatch, make_task
from ..utils import ProgressBar, as_generator, lprint
from ._metrics import METRIC_COLUMNS, CsvLog, format_value
from .config import TrainConfig
from .optim import OptimizerState, adam_step

if TYPE_CHECKING:
    from ..typeshed import _PATH, _RNG

__all__ = ["sample_context", "compute_objective", "train_step",
           "run_experiment", "run_comparison"]

log = logging.getLogger(__name__)

#: objectives compared by default, sliced distance against the NP baseline
COMPARED = ("swd", "gaussian_nll")


def sample_context(n: int, p0: float, p1: float, rng: "_RNG" = None
                   ) -> np.ndarray:
    """Random context subset whose size is a uniform fraction of n.

    ``p ~ U(p0, p1)``, count ``max(1, round(p * n))`` capped at n, indices
    drawn without replacement.

    Examples
    --------
    >>> len(sample_context(500, 0.1, 0.1, rng=0))
    50
    """
    if n < 1:
        raise ContractError(f"need at least one target point, got {n}")
    gen = as_generator(rng)
    p = gen.uniform(p0, p1)
    count = min(n, max(1, int(round(p * n))))
    return gen.choice(n, size=count, replace=False)


def compute_objective(config: TrainConfig, out: Tensor, batch: TaskBatch,
                      rng: "_RNG" = None) -> LossReport:
    """Evaluate the configured objective on decoder output for all targets."""
    y = batch.y_target
    if config.objective == "swd":
        return swd_loss(out, y, batch.x_target, joint=config.joint,
                        n_proj=config.n_proj, p=config.p, rng=rng)
    elif config.objective == "gaussian_nll":
        mu, sigma = split_gaussian(out, batch.d_y)
        return gaussian_nll(mu, sigma, y)
    elif config.objective == "uniform_loglik":
        return uniform_loglik(out, y, config.halfwidth)
    else:
        raise ContractError(f"unknown objective '{config.objective}'")


def _check_finite(what: str, arrays: Dict[str, np.ndarray]):
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            raise NumericalError(f"{what} {name} is not finite")


def train_step(params: ModelParams, episode: TaskBatch, config: TrainConfig,
               state: OptimizerState, rng: "_RNG" = None
               ) -> Tuple[ModelParams, OptimizerState, LossReport]:
    """One inner loop iteration.

    Context is resampled with :func:`sample_context` unless the task keeps
    its own, then the context is encoded, all targets are decoded and the
    objective gradient goes through :func:`adam_step`. A degenerate loss
    leaves parameters and optimizer state untouched.

    Parameters
    ----------
    params: ModelParams
        current model
    episode: TaskBatch
        targets of this step
    config: TrainConfig
        objective, schedule and context settings
    state: OptimizerState
        optimizer moments
    rng: _RNG
        generator for context and projections

    Returns
    -------
    Tuple[ModelParams, OptimizerState, LossReport]
        new parameters and state with the loss before the update

    Raises
    ------
    NumericalError
        if the loss, a gradient or an updated parameter is not finite
    """
    gen = as_generator(rng)
    batch = episode
    if not config.fixed_context:
        batch = episode.with_context(
            sample_context(episode.n_target, config.p0, config.p1, gen)
        )

    tape = Tape()
    bound = params.bind(tape)
    r_C = encode_context(bound, batch.x_context, batch.y_context)
    out = decode_targets(bound, batch.x_target, r_C)
    report = compute_objective(config, out, batch, gen)

    if report.degenerate:
        log.debug(f"degenerate loss at optimizer step {state.step}, "
                  f"update skipped")
        return params, state, report
    if not np.isfinite(report.value):
        raise NumericalError(f"loss is {report.value} at optimizer step "
                             f"{state.step}")

    grads = bound.gradients(tape.backward(report.loss))
    _check_finite("gradient of", grads)
    params, state = adam_step(params, grads, state, config.lr(state.step))
    _check_finite("parameter", params.weights)
    return params, state, report


def _prepare_output(output_dir: "_PATH") -> Path:
    out = Path(output_dir).expanduser()
    try:
        out.mkdir(parents=True, exist_ok=True)
        marker = out / ".write-check"
        marker.write_bytes(b"")
        marker.unlink()
    except OSError as e:
        raise OSError(f"output directory {out} is not writable: {e}") from e
    return out


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not np.isfinite(value):
        return format_value(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def run_experiment(name: str, config: TrainConfig, output_dir: "_PATH",
                   quiet: bool = True) -> Dict[str, Any]:
    """Train one task and write every output file.

    Files written to output_dir: ``metrics.csv`` (one row per step),
    ``eval.csv`` (held-out evaluation every eval_every steps and at step 0),
    ``checkpoints/step_NNNNNN.ckpt``, ``model.ckpt``, ``summary.json`` and
    the task's predicted-vs-true artifacts.

    Parameters
    ----------
    name: str
        task name, overrides ``config.task``
    config: TrainConfig
        run configuration
    output_dir: _PATH
        created when missing
    quiet: bool
        hide progress bar and status lines

    Returns
    -------
    Dict[str, Any]
        the summary also stored in ``summary.json``

    Raises
    ------
    ConfigError
        if the configuration is invalid
    OSError
        if output_dir is not writable, raised before training starts
    """
    config = config.replace(task=name)
    config.validate()
    out = _prepare_output(output_dir)
    printer = lprint(quiet)

    task = make_task(config)
    gen = np.random.default_rng(config.seed)
    params = init_params(task.d_x, task.d_y, config.hidden, config.r_dim,
                         head_for(config.objective), rng=gen)
    initial = params
    state = OptimizerState.zeros_like(params)
    log.info(f"training {name} with {config.objective}, "
             f"{params.n_params} parameters, seed {config.seed}")

    ckpt_dir = out / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    written: List[Path] = []

    first_eval = task.evaluate(params)
    eval_keys = list(first_eval)
    history = [(0, first_eval)]
    degenerate = 0
    report = None

    with CsvLog(out / "metrics.csv", METRIC_COLUMNS) as metrics, \
            CsvLog(out / "eval.csv", ["step"] + eval_keys) as evals, \
            ProgressBar(total=config.epochs, desc=name,
                        quiet=quiet) as progress:
        evals.append(0, *first_eval.values())
        for step in range(config.epochs):
            start = time.perf_counter()
            lr = config.lr(state.step)
            params, state, report = train_step(params, task.episode(gen),
                                               config, state, gen)
            wall = ((time.perf_counter() - start) * 1000
                    if config.timing else 0)
            degenerate += report.degenerate
            metrics.append(step, lr, report.value, report.metric,
                           report.degenerate, int(wall))
            progress.update_bar(report.value, report.metric)

            done = step + 1
            if done % config.eval_every == 0 or done == config.epochs:
                result = task.evaluate(params)
                evals.append(done, *(result[k] for k in eval_keys))
                history.append((done, result))
                log.debug(f"step {done}: eval {result}")
            if done % config.checkpoint_every == 0:
                written.append(save_checkpoint(
                    ckpt_dir / f"step_{done:06d}.ckpt", params,
                    seed=config.seed, step=done, task=name,
                    objective=config.objective
                ))

    written.append(save_checkpoint(out / "model.ckpt", params,
                                   seed=config.seed, step=config.epochs,
                                   task=name, objective=config.objective,
                                   config=config.to_dict()))
    written.extend(task.write_artifacts(params, out))

    summary = {
        "task": name,
        "objective": config.objective,
        "seed": config.seed,
        "steps": config.epochs,
        "optimizer_steps": state.step,
        "degenerate_steps": degenerate,
        "final_loss": report.value,
        "final_metric": report.metric,
        "initial_eval": first_eval,
        "final_eval": history[-1][1],
        "eval_history": [[s, r["metric"]] for s, r in history],
        "params_unchanged": params.equal(initial),
        "n_params": params.n_params,
        "config": config.to_dict(),
    }
    summary_path = out / "summary.json"
    outputs = [out / "metrics.csv", out / "eval.csv", summary_path] + written
    summary["outputs"] = sorted(str(p.relative_to(out)) for p in outputs)
    summary_path.write_text(dumps(_jsonable(summary), indent=2,
                                  sort_keys=True))

    printer(f"{G}{name}/{config.objective} finished{R}: eval metric "
            f"{first_eval['metric']:.4g} -> {history[-1][1]['metric']:.4g}, "
            f"outputs in {LG}{out}{R}")
    return summary


def run_comparison(name: str, config: TrainConfig, output_dir: "_PATH",
                   objectives: Sequence[str] = COMPARED, quiet: bool = True
                   ) -> Dict[str, Dict[str, Any]]:
    """Train one task under several objectives on identical data.

    Every objective runs in its own sub-directory with the same seed, so the
    episodes are identical. ``comparison.csv`` collects the held-out metric
    of all objectives per evaluation step.

    Returns
    -------
    Dict[str, Dict[str, Any]]
        run summary per objective
    """
    if len(set(objectives)) != len(objectives) or not objectives:
        raise ContractError(f"objectives must be unique and non-empty, got "
                            f"{objectives}")
    out = _prepare_output(output_dir)
    summaries = {}
    for objective in objectives:
        summaries[objective] = run_experiment(
            name, config.replace(objective=objective), out / objective,
            quiet=quiet
        )

    steps = [s for s, _ in summaries[objectives[0]]["eval_history"]]
    with CsvLog(out / "comparison.csv", ["step"] + list(objectives)) as table:
        for i, step in enumerate(steps):
            table.append(step, *(summaries[o]["eval_history"][i][1]
                                 for o in objectives))
    log.info(f"comparison of {', '.join(objectives)} written to "
             f"{out / 'comparison.csv'}")
    return summaries
