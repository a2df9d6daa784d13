"""Vectorised Monte Carlo: statistical agreement, determinism, backends.

The estimator must be bit-identical across worker counts and across the
numba/numpy kernel backends; the backend half of that claim runs this test
module a second time in a subprocess with the accelerator disabled.
"""

import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from entverify import mc, oracle
from entverify.models import DomainError, NoiseModel, StrategySpec, StrategyVariant
from entverify.speedup import backend_name

F8 = Fraction(8, 10)
F9 = Fraction(9, 10)

CASES = [
    (StrategySpec(StrategyVariant.WERNER_FULL, 5), NoiseModel.werner(F8)),
    (StrategySpec(StrategyVariant.WERNER_FULL, 9), NoiseModel.werner(F9)),
    (StrategySpec(StrategyVariant.WERNER_SUBSPACE, 9, m=2), NoiseModel.werner(F9)),
    (StrategySpec(StrategyVariant.RANK2_FULL, 6), NoiseModel.rank2(F8)),
    (StrategySpec(StrategyVariant.RANK2_SUBSPACE, 7, m=1), NoiseModel.rank2(F9)),
    (StrategySpec(StrategyVariant.EMBED_ENG, 3, m_embed=2), NoiseModel.werner(F9)),
    (
        StrategySpec(StrategyVariant.EMBED_ENG_SUBSPACE, 3, m_embed=2, m=1),
        NoiseModel.werner(F9),
    ),
    (StrategySpec(StrategyVariant.SINGLE_COPY_BASELINE, 7), NoiseModel.werner(F8)),
]


@pytest.mark.parametrize("strategy,noise", CASES, ids=[s.variant.value for s, _ in CASES])
def test_estimate_within_sigma(strategy, noise):
    trials = 200_000
    exact = float(oracle.enumerate_strategy_failure(strategy, noise))
    res = mc.monte_carlo(strategy, noise, trials, seed=11)
    sigma = max((exact * (1 - exact) / trials) ** 0.5, 1e-12)
    assert abs(res.estimate - exact) < 4 * sigma
    assert res.ci_low <= exact <= res.ci_high
    assert res.trials == trials


def test_worker_count_invariance():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 9)
    noise = NoiseModel.werner(0.85)
    base = mc.monte_carlo(s, noise, 300_000, seed=3, workers=1)
    for workers in (2, 4):
        res = mc.monte_carlo(s, noise, 300_000, seed=3, workers=workers)
        assert res.accepts == base.accepts
        assert res.estimate == base.estimate


def test_seed_changes_stream():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 9)
    noise = NoiseModel.werner(0.85)
    a = mc.monte_carlo(s, noise, 100_000, seed=0)
    b = mc.monte_carlo(s, noise, 100_000, seed=1)
    assert a.accepts != b.accepts


def test_trials_not_multiple_of_block():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 4)
    res = mc.monte_carlo(s, NoiseModel.werner(0.8), 12_345, seed=5)
    assert res.trials == 12_345


def test_block_uniforms_independent_of_consumption():
    # block b's draws depend on (seed, b) only, never on how many blocks
    # were consumed before; this is what makes worker scheduling irrelevant
    a = mc.block_uniforms(42, 3, 100, 7)
    b = mc.block_uniforms(42, 3, 100, 7)
    assert np.array_equal(a, b)
    c = mc.block_uniforms(42, 4, 100, 7)
    assert not np.array_equal(a, c)


def test_iter_blocks_covers_trials():
    sizes = [take for _, take in mc.iter_blocks(1_000_000, 11)]
    assert sum(sizes) == 1_000_000
    assert max(sizes) <= mc.block_size(11)


def test_pure_target_always_accepts():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 6)
    res = mc.monte_carlo(s, NoiseModel.pure_target(), 50_000, seed=0)
    assert res.estimate == 1.0


def test_result_metadata():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 4)
    res = mc.monte_carlo(s, NoiseModel.werner(0.8), 10_000, seed=9)
    assert res.seed == 9
    assert res.backend == backend_name()
    assert 0 <= res.ci_low <= res.estimate <= res.ci_high <= 1


def test_rejects_bad_arguments():
    s = StrategySpec(StrategyVariant.WERNER_FULL, 4)
    with pytest.raises(DomainError):
        mc.monte_carlo(s, NoiseModel.werner(0.8), 0)
    with pytest.raises(DomainError):
        mc.monte_carlo(s, NoiseModel.isotropic_qudit(4, 0.5), 100)


def test_backends_bit_identical():
    """Accept counts from the numba and plain-numpy kernels must match."""
    if backend_name() != "numba":
        pytest.skip("accelerated backend not active; nothing to compare")
    expected = {}
    for strategy, noise in CASES[:4]:
        res = mc.monte_carlo(strategy, noise, 100_000, seed=21)
        expected[strategy.variant.value] = res.accepts

    code = (
        "import json\n"
        "from fractions import Fraction\n"
        "from entverify import mc\n"
        "from entverify.models import NoiseModel, StrategySpec, StrategyVariant\n"
        "from entverify.speedup import backend_name\n"
        "assert backend_name() == 'numpy'\n"
        "F8, F9 = Fraction(8, 10), Fraction(9, 10)\n"
        "cases = [\n"
        "    (StrategySpec(StrategyVariant.WERNER_FULL, 5), NoiseModel.werner(F8)),\n"
        "    (StrategySpec(StrategyVariant.WERNER_FULL, 9), NoiseModel.werner(F9)),\n"
        "    (StrategySpec(StrategyVariant.WERNER_SUBSPACE, 9, m=2), NoiseModel.werner(F9)),\n"
        "    (StrategySpec(StrategyVariant.RANK2_FULL, 6), NoiseModel.rank2(F8)),\n"
        "]\n"
        "out = {s.variant.value: mc.monte_carlo(s, n, 100_000, seed=21).accepts"
        " for s, n in cases}\n"
        "print(json.dumps(out))\n"
    )
    env = dict(os.environ, ENTVERIFY_DISABLE_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    import json

    assert json.loads(proc.stdout) == expected
