"""Symbolic protocol layer: counter arithmetic, readouts, single runs.

A protocol run never touches state vectors here.  Each noisy pair is reduced
to a classical error label, the auxiliary qudit pair to its amplitude index
``j``, and the accumulation gate to modular index arithmetic.  This layer is
the reference implementation of the protocol semantics; the vectorised Monte
Carlo kernels (:mod:`entverify.mc`) and the dense simulator
(:mod:`entverify.densesim`) must reproduce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import embedding_q
from .models import (
    SUBSPACE_VARIANTS,
    DomainError,
    ErrorKind,
    ErrorLabel,
    NoiseKind,
    NoiseModel,
    QuditBellLabel,
    RunOutcome,
    StrategySpec,
    StrategyVariant,
    Verdict,
)


@dataclass(frozen=True)
class SymbolicAux:
    """Amplitude index j of a d-dimensional auxiliary pair."""

    d: int
    j: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("auxiliary dimension must be >= 2")
        if not 0 <= self.j < self.d:
            raise DomainError(f"index j = {self.j} outside [0, {self.d})")


def counter_update(label: ErrorLabel, aux: SymbolicAux) -> SymbolicAux:
    """Advance the counter by one control pair: j -> (j + shift) mod d.

    Target and phase-type controls leave j unchanged, the two amplitude
    errors move it by +1 and -1.
    """
    if label.kind is ErrorKind.SHIFT:
        raise DomainError("qudit shifts go through qudit_counter_update")
    return SymbolicAux(aux.d, (aux.j + label.shift) % aux.d)


def computational_counter_update(m: int, n: int, aux: SymbolicAux) -> SymbolicAux:
    """Counter action of a computational control |mn>: j -> (j - m + n) mod d."""
    if m not in (0, 1) or n not in (0, 1):
        raise DomainError("computational control bits must be 0 or 1")
    return SymbolicAux(aux.d, (aux.j - m + n) % aux.d)


def qudit_counter_update(control: QuditBellLabel, aux: SymbolicAux) -> SymbolicAux:
    """Qudit-control counter action: j -> (j - n + m) mod D.

    Note the index roles are transposed relative to the qubit gate; the two
    conventions differ by a relabelling of the control basis.
    """
    m, n = control.phase_index, control.amplitude_index
    return SymbolicAux(aux.d, (aux.j - n + m) % aux.d)


def run_accumulation(labels: Sequence[ErrorLabel], aux: SymbolicAux) -> SymbolicAux:
    """Fold the counter over an ensemble's labels, one control pair each.

    The counter can only resolve up to d - 1 controls without wrapping, so
    longer ensembles are rejected.
    """
    labels = list(labels)
    if len(labels) > aux.d - 1:
        raise DomainError(
            f"{len(labels)} copies overflow a d = {aux.d} counter (max d - 1)"
        )
    for label in labels:
        aux = counter_update(label, aux)
    return aux


def readout_full(aux: SymbolicAux) -> int:
    """Measure both qudits; the outcome difference reveals j exactly."""
    return aux.j


@dataclass(frozen=True)
class SubspaceReadout:
    verdict: Verdict
    residual: SymbolicAux
    parities: tuple[int, ...]

    @property
    def rounds_performed(self) -> int:
        return len(self.parities)


def readout_subspace(
    aux: SymbolicAux, rounds: int, abort_on_odd: bool = True
) -> SubspaceReadout:
    """Iterated parity rounds on the least significant index bit.

    Each round measures one embedded qubit pair: the parity of the current
    index is revealed, the measured pair is discarded, and the register
    halves.  An odd parity proves j != 0; by default the run aborts there
    (protocol semantics) and the residual is the register as it stood.  With
    abort_on_odd=False all rounds are performed, using the floor residual
    j >> 1 after an odd round, so the collected parities are exactly the
    binary digits of j, least significant first.
    """
    if rounds < 1:
        raise DomainError("need at least one parity round")
    d, j = aux.d, aux.j
    if d % (1 << rounds) != 0:
        raise DomainError(f"d = {d} does not contain {rounds} parity rounds")
    parities: list[int] = []
    for _ in range(rounds):
        parity = j & 1
        parities.append(parity)
        if parity and abort_on_odd:
            return SubspaceReadout(Verdict.REJECT, SymbolicAux(d, j), tuple(parities))
        j >>= 1
        d //= 2
    verdict = Verdict.REJECT if any(parities) else Verdict.ACCEPT
    residual = SymbolicAux(d, j) if d >= 2 else SymbolicAux(2, j)
    return SubspaceReadout(verdict, residual, tuple(parities))


def embedded_aux_mixing_weight(noise: NoiseModel, m_embed: int):
    """Mixing weight q of the auxiliary register built from m_embed copies."""
    if noise.kind is NoiseKind.PURE_TARGET:
        return 1
    if noise.kind is NoiseKind.ISOTROPIC_QUDIT:
        if noise.d != 1 << m_embed:
            raise DomainError("isotropic auxiliary dimension mismatch")
        return noise.q
    return embedding_q(noise.fidelity, m_embed)[1]


def _sample_label(rng: np.random.Generator, probs) -> ErrorLabel:
    _, p1, p2, p3 = (float(p) for p in probs)
    u = rng.random()
    if u < p1:
        return ErrorLabel.type1()
    if u < p1 + p2:
        return ErrorLabel.type2()
    if u < p1 + p2 + p3:
        return ErrorLabel.type3()
    return ErrorLabel.target()


def _sample_aux_index(rng: np.random.Generator, d: int, q_aux) -> int:
    # isotropic auxiliary: index 0 with the pure weight, else uniform
    if rng.random() < float(q_aux):
        return 0
    return int(rng.integers(d))


def sample_run(
    strategy: StrategySpec,
    noise: NoiseModel,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> RunOutcome:
    """One protocol run, sampled label by label; returns the full accounting.

    Deterministic given the seed (counter-based Philox stream).  The hot
    path for large trial counts is :func:`entverify.mc.monte_carlo`, which
    runs the same semantics vectorised.
    """
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=seed))
    v = strategy.variant
    probs = noise.error_probs()

    if v is StrategyVariant.SINGLE_COPY_BASELINE:
        # measure copies one by one, stop at the first failed projection
        for i in range(strategy.n):
            if _sample_label(rng, probs).kind is not ErrorKind.TARGET:
                return RunOutcome(Verdict.REJECT, copies_consumed=i + 1, ebits_consumed=0)
        return RunOutcome(Verdict.ACCEPT, copies_consumed=strategy.n, ebits_consumed=0)

    d = strategy.aux_dimension()
    if strategy.uses_embedded_aux():
        q_aux = embedded_aux_mixing_weight(noise, strategy.m_embed)
        j0 = _sample_aux_index(rng, d, q_aux)
    else:
        j0 = 0

    labels = [_sample_label(rng, probs) for _ in range(strategy.n)]
    aux = run_accumulation(labels, SymbolicAux(d, j0))

    if v in SUBSPACE_VARIANTS:
        readout = readout_subspace(aux, strategy.m)
        rounds = readout.rounds_performed
        if v is StrategyVariant.EMBED_ENG_SUBSPACE:
            # each parity round measures (and so spends) one embedded copy
            return RunOutcome(
                readout.verdict,
                copies_consumed=rounds,
                ebits_consumed=0,
                subspaces_measured=rounds,
            )
        return RunOutcome(
            readout.verdict,
            copies_consumed=0,
            ebits_consumed=rounds,
            subspaces_measured=rounds,
        )

    j = readout_full(aux)
    verdict = Verdict.ACCEPT if j == 0 else Verdict.REJECT
    if strategy.uses_embedded_aux():
        return RunOutcome(
            verdict, copies_consumed=strategy.m_embed, ebits_consumed=0, measured_j=j
        )
    return RunOutcome(
        verdict, copies_consumed=0, ebits_consumed=math.log2(d), measured_j=j
    )
