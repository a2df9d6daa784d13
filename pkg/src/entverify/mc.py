"""Monte Carlo estimation of acceptance probabilities.

Sampling is organised in fixed-size blocks.  Block ``b`` draws its uniforms
from an independent Philox stream keyed by ``(seed, b)``, so the estimate
depends only on ``(strategy, noise, trials, seed)`` and never on the number
of worker threads or the backend.  Workers just farm out whole blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .analytic import embedding_q
from .models import (
    DomainError,
    NoiseKind,
    NoiseModel,
    StrategySpec,
    StrategyVariant,
)
from .speedup import backend_name

# Roughly 16 MB of uniforms per block; the floor keeps tiny-n blocks from
# degenerating into per-trial scheduling.
BLOCK_DOUBLES = 1 << 21
MIN_BLOCK_TRIALS = 512

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class MCResult:
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    trials: int
    accepts: int
    seed: int
    backend: str


def block_size(columns: int) -> int:
    return max(MIN_BLOCK_TRIALS, BLOCK_DOUBLES // columns)


def iter_blocks(trials: int, columns: int):
    """Yield ``(block_index, block_trials)`` covering ``trials`` draws."""
    size = block_size(columns)
    b = 0
    done = 0
    while done < trials:
        take = min(size, trials - done)
        yield b, take
        done += take
        b += 1


def block_uniforms(seed: int, block: int, rows: int, columns: int) -> np.ndarray:
    key = np.array([seed & _MASK64, block], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.random((rows, columns))


def _wilson_interval(accepts: int, trials: int) -> tuple[float, float]:
    # Wilson score, z = 1.96; stays inside [0, 1] even at the edges.
    z = 1.959963984540054
    p = accepts / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


def _counter_params(strategy: StrategySpec, noise: NoiseModel):
    p0, p1, p2, p3 = (float(p) for p in noise.error_probs())
    d = strategy.aux_dimension()
    modulus = strategy.accept_modulus()
    if strategy.uses_embedded_aux():
        if noise.kind is NoiseKind.ISOTROPIC_QUDIT:
            q_aux = float(noise.q)
        else:
            q_aux = float(embedding_q(noise.fidelity, strategy.m_embed)[1])
    else:
        q_aux = 1.0
    return d, modulus, q_aux, p1, p1 + p2


def monte_carlo(
    strategy: StrategySpec,
    noise: NoiseModel,
    trials: int,
    seed: int = 0,
    workers: int = 1,
) -> MCResult:
    """Estimate the acceptance probability under ``noise``.

    For every strategy the accept event is the one whose probability the
    closed forms compute: counter readout congruent to zero for the
    collective variants, all copies passing for the sequential baseline.
    """
    if trials < 1:
        raise DomainError("trials must be positive")
    if workers < 1:
        raise DomainError("workers must be positive")
    seed = int(seed)
    if seed < 0:
        raise DomainError("seed must be non-negative")

    n = strategy.n
    columns = n + 2
    if strategy.variant is StrategyVariant.SINGLE_COPY_BASELINE:
        _, _, _, _, t2 = _counter_params(strategy, noise)
        t3 = t2 + float(noise.error_probs()[3])

        def run(block: int, rows: int) -> int:
            u = block_uniforms(seed, block, rows, columns)
            return kernels.baseline_accepts(u, n, t3)

    else:
        d, modulus, q_aux, t1, t2 = _counter_params(strategy, noise)

        def run(block: int, rows: int) -> int:
            u = block_uniforms(seed, block, rows, columns)
            return kernels.counter_accepts(u, n, d, modulus, q_aux, t1, t2)

    blocks = list(iter_blocks(trials, columns))
    if workers == 1 or len(blocks) == 1:
        accepts = sum(run(b, rows) for b, rows in blocks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accepts = sum(pool.map(lambda br: run(*br), blocks))

    estimate = accepts / trials
    std_error = math.sqrt(max(estimate * (1.0 - estimate), 0.0) / trials)
    ci_low, ci_high = _wilson_interval(accepts, trials)
    return MCResult(
        estimate=estimate,
        std_error=std_error,
        ci_low=ci_low,
        ci_high=ci_high,
        trials=trials,
        accepts=accepts,
        seed=seed,
        backend=backend_name(),
    )
