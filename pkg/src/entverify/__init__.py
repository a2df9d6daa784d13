"""Collective verification of entangled-state ensembles.

Core objects: a :class:`NoiseModel` describes the per-copy error channel, a
:class:`StrategySpec` picks the verification strategy, and the `analytic`,
`oracle`, `mc` and `densesim` modules answer the same question (acceptance
probability of a noisy ensemble) at different levels of rigor and cost.
"""

from .models import (
    CrossCheckError,
    DomainError,
    ErrorKind,
    ErrorLabel,
    NoiseKind,
    NoiseModel,
    ResourceLimitError,
    RunOutcome,
    StrategySpec,
    StrategyVariant,
    Verdict,
    fidelity_to_q,
    q_to_fidelity,
)
from .analytic import (
    ResourceReport,
    copies_required,
    direct_measure_delta,
    embed_eng_delta,
    embed_eng_delta_subspace,
    embedding_q,
    improvement_ratio,
    mixture_route_delta,
    mixture_route_delta_subspace,
    rank2_delta_full,
    rank2_delta_subspace,
    single_copy_copies,
    strategy_failure,
    werner_delta_full,
    werner_delta_subspace,
    werner_pr_j,
)
from .engine import sample_run
from .ghz import GHZDiagonalState, ghz_failure_probability, ghz_monte_carlo, ghz_verify
from .mc import MCResult, monte_carlo
from .oracle import enumerate_shift_distribution, enumerate_strategy_failure

__all__ = [
    "CrossCheckError",
    "DomainError",
    "ErrorKind",
    "ErrorLabel",
    "GHZDiagonalState",
    "MCResult",
    "NoiseKind",
    "NoiseModel",
    "ResourceLimitError",
    "ResourceReport",
    "RunOutcome",
    "StrategySpec",
    "StrategyVariant",
    "Verdict",
    "copies_required",
    "direct_measure_delta",
    "embed_eng_delta",
    "embed_eng_delta_subspace",
    "embedding_q",
    "enumerate_shift_distribution",
    "enumerate_strategy_failure",
    "fidelity_to_q",
    "ghz_failure_probability",
    "ghz_monte_carlo",
    "ghz_verify",
    "improvement_ratio",
    "mixture_route_delta",
    "mixture_route_delta_subspace",
    "monte_carlo",
    "q_to_fidelity",
    "rank2_delta_full",
    "rank2_delta_subspace",
    "sample_run",
    "single_copy_copies",
    "strategy_failure",
    "werner_delta_full",
    "werner_delta_subspace",
    "werner_pr_j",
]

__version__ = "0.1.0"
