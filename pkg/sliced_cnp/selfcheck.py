"""Embedded numeric oracle suite run by ``sliced-cnp selfcheck``.

Every check is small enough that the whole suite finishes in seconds.
"""

import logging
from typing import Callable, Dict, List, NamedTuple, Tuple

import numpy as np
from scipy.stats import norm

from .cnp import BoundParams, decode_targets, encode_context, init_params
from .constants import C, G, R, RED
from .diffmath import (Tape, abs_pow, check_gradient, check_gradients,
                       concat_cols, div, log, matmul, mean, softplus,
                       sort_rows, tanh, tile_rows, total)
from .losses import swd_loss, uniform_loglik
from .tasks import (GkParams, gk_quantile, image_to_tiles, synth_images,
                    tiles_to_image)
from .transport import (sample_projections, sliced_wasserstein_pow,
                        wasserstein_1d_bruteforce, wasserstein_1d_pow)
from .utils import context_timeit, lprint

__all__ = ["CheckResult", "CHECKS", "run_selfcheck"]

log_ = logging.getLogger(__name__)

#: tolerance of finite difference comparisons
GRAD_TOL = 1e-4


class CheckResult(NamedTuple):
    """Outcome of one oracle check."""

    name: str
    passed: bool
    detail: str


def _primitive_gradients(gen: np.random.Generator) -> Tuple[bool, str]:
    a = gen.normal(size=(3, 4))
    b = gen.normal(size=(4, 2))
    target = gen.normal(size=(3, 4))
    pos = gen.uniform(0.5, 2.0, size=(3, 4))
    builders: Dict[str, Callable] = {
        "matmul": lambda t: total(tanh(matmul(t, b))),
        "tanh": lambda t: total(tanh(t)),
        "softplus": lambda t: mean(softplus(t)),
        "abs_pow": lambda t: mean(abs_pow(t, 3.0)),
        "sort_rows": lambda t: total(
            abs_pow(sort_rows(t)[0] - target, 2.0)),
        "concat_tile": lambda t: total(tanh(concat_cols(
            t, tile_rows(mean(t, 0), 3)))),
    }
    errors = {k: check_gradient(f, a) for k, f in builders.items()}
    errors["div_log"] = max(check_gradients(
        lambda t: total(div(log(t["p"]), t["q"])),
        {"p": pos, "q": pos[::-1].copy()}
    ).values())
    worst = max(errors, key=errors.get)
    return errors[worst] <= GRAD_TOL, f"worst {worst} {errors[worst]:.2e}"


def _pipeline_gradient(gen: np.random.Generator) -> Tuple[bool, str]:
    params = init_params(1, 1, hidden=8, r_dim=4, rng=gen)
    x = gen.uniform(-2, 2, size=(12, 1))
    y = x + gen.normal(0, 0.5, size=(12, 1))
    seed = int(gen.integers(2 ** 31))

    def build(tensors):
        bound = BoundParams(params, tensors)
        out = decode_targets(bound, x, encode_context(bound, x[:5], y[:5]))
        return swd_loss(out, y, x, n_proj=10, rng=seed).loss

    errors = check_gradients(build, dict(params.items()))
    worst = max(errors, key=errors.get)
    return errors[worst] <= GRAD_TOL, f"worst {worst} {errors[worst]:.2e}"


def _ot_bruteforce(gen: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(50):
        m = int(gen.integers(1, 8))
        a, b = gen.normal(size=m), gen.normal(size=m)
        p = float(gen.choice([1.0, 2.0]))
        diff = abs(wasserstein_1d_pow(a, b, p).item()
                   - wasserstein_1d_bruteforce(a, b, p))
        worst = max(worst, diff)
    return worst <= 1e-12, f"max difference {worst:.1e} over 50 pairs"


def _gk_collapse(gen: np.random.Generator) -> Tuple[bool, str]:
    r = np.linspace(0.01, 0.99, 99)
    diff = np.abs(gk_quantile(GkParams(0, 1, 0, 0), r) - norm.ppf(r)).max()
    monotone = np.all(np.diff(gk_quantile(GkParams(3, 1, 2, 0.5), r)) >= 0)
    return bool(diff <= 1e-9 and monotone), \
        f"collapse error {diff:.1e}, monotone {bool(monotone)}"


def _permutation_invariance(gen: np.random.Generator) -> Tuple[bool, str]:
    params = init_params(2, 1, hidden=16, r_dim=8, rng=gen)
    x, y = gen.normal(size=(20, 2)), gen.normal(size=(20, 1))
    base = encode_context(params, x, y).numpy()
    worst = 0.0
    for _ in range(100):
        perm = gen.permutation(20)
        r = encode_context(params, x[perm], y[perm]).numpy()
        worst = max(worst, float(np.abs(r - base).max()))
    return worst <= 1e-10, f"max change {worst:.1e} over 100 permutations"


def _sliced_calibration(gen: np.random.Generator) -> Tuple[bool, str]:
    offset = 1.5
    X = np.zeros((10, 2))
    Y = X + np.array([offset, 0.0])
    proj = sample_projections(1000, 2, gen)
    value = sliced_wasserstein_pow(X, Y, proj, 2.0).item()
    expected = offset ** 2 / 2
    rel = abs(value - expected) / expected
    return rel <= 0.1, f"SW2^2 {value:.4f}, expected {expected:.4f}"


def _tile_roundtrip(gen: np.random.Generator) -> Tuple[bool, str]:
    images = synth_images(3, channels=3, seed=int(gen.integers(2 ** 31)))
    exact = all(np.array_equal(tiles_to_image(image_to_tiles(i)), i)
                for i in images)
    return exact, "bit exact" if exact else "reconstruction differs"


def _uniform_zero_gradient(gen: np.random.Generator) -> Tuple[bool, str]:
    y = gen.normal(size=(6, 1))
    pred = y + gen.uniform(-0.5, 0.5, size=(6, 1))

    tape = Tape()
    x = tape.watch(pred)
    grads = tape.backward(uniform_loglik(x, y, halfwidth=1.0).loss)
    grad = grads[x.node].values  # type: ignore
    zero = bool(np.all(grad == 0))
    return zero, "gradient exactly zero" if zero else "non-zero gradient"


#: named checks in execution order
CHECKS: Dict[str, Callable[[np.random.Generator], Tuple[bool, str]]] = {
    "primitive gradients": _primitive_gradients,
    "SWD through CNP gradient": _pipeline_gradient,
    "1D OT brute force": _ot_bruteforce,
    "g-and-kappa collapse": _gk_collapse,
    "context permutation invariance": _permutation_invariance,
    "sliced distance calibration": _sliced_calibration,
    "tile round trip": _tile_roundtrip,
    "uniform likelihood zero gradient": _uniform_zero_gradient,
}


def run_selfcheck(seed: int = 0, quiet: bool = False) -> List[CheckResult]:
    """Run every check and print a colored pass/fail report.

    A check raising an exception counts as failed.

    Returns
    -------
    List[CheckResult]
        one result per entry of :data:`CHECKS`
    """
    printer = lprint(quiet)
    printer(f"{C}Running {len(CHECKS)} self-checks{R}")
    results = []
    with context_timeit(quiet):
        for name, check in CHECKS.items():
            gen = np.random.default_rng(seed)
            try:
                passed, detail = check(gen)
            except Exception as e:
                log_.exception(f"self-check {name} raised")
                passed, detail = False, f"{type(e).__name__}: {e}"
            results.append(CheckResult(name, bool(passed), detail))
            mark = f"{G}PASS{R}" if passed else f"{RED}FAIL{R}"
            printer(f"  [{mark}] {name}: {detail}")

    n_ok = sum(r.passed for r in results)
    color = G if n_ok == len(results) else RED
    printer(f"{color}{n_ok}/{len(results)} checks passed{R}")
    return results
