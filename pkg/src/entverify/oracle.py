"""Exact reference oracle for counter-accumulation statistics.

Everything in here is deliberately brute force and exactly rational: the
final index distribution is obtained by walking every label assignment and
applying the counter update copy by copy, with probabilities carried as
integer numerators over a common denominator.  No binomial identities, no
closed forms.  The analytic module, the Monte Carlo kernels and the dense
simulator are all validated against these numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .models import (
    DomainError,
    NoiseKind,
    NoiseModel,
    ResourceLimitError,
    StrategySpec,
    StrategyVariant,
)

ENUM_MAX_N = 12
DP_MAX_N = 10_000
DP_MAX_CELLS = 20_000_000


@dataclass(frozen=True)
class ExactDistribution:
    """Distribution of the final counter index over Z_d, exact weights."""

    d: int
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.weights) != self.d:
            raise DomainError("weight vector length must equal d")
        if sum(self.weights) != 1:
            raise DomainError("weights must sum to exactly 1")

    def __getitem__(self, j: int) -> Fraction:
        return self.weights[j % self.d]

    def marginal_multiples(self, modulus: int) -> Fraction:
        """Total weight on indices divisible by `modulus`."""
        if modulus < 1 or self.d % modulus != 0:
            raise DomainError(f"modulus {modulus} does not divide d = {self.d}")
        return sum(self.weights[j] for j in range(0, self.d, modulus))

    def as_floats(self):
        return [float(w) for w in self.weights]


def _rational_class_table(noise: NoiseModel):
    """Per-copy classes as (shift, integer numerator) over a common denominator."""
    probs = [Fraction(p) for p in noise.error_probs()]
    if sum(probs) != 1:
        raise DomainError("class probabilities must sum to 1 exactly")
    den = lcm(*(p.denominator for p in probs))
    numerators = [int(p * den) for p in probs]
    shifts = [0, 1, -1, 0]
    return list(zip(shifts, numerators)), den


def enumerate_shift_distribution(
    noise: NoiseModel, n: int, d: int, method: str = "auto"
) -> ExactDistribution:
    """Exact distribution of the final counter index after n copies.

    method: "enumerate" walks all 4**n label assignments (n <= 12),
    "dp" convolves the per-copy class table index by index (n <= 10^4),
    "auto" picks enumeration when it is affordable.  Both paths apply the
    literal counter rule j -> (j + shift) mod d.
    """
    if noise.kind is NoiseKind.ISOTROPIC_QUDIT:
        raise DomainError("ensemble copies are qubit pairs; isotropic noise is auxiliary-only")
    if not noise.is_exact():
        raise DomainError("the oracle requires rational noise parameters")
    if n < 0:
        raise DomainError("n must be >= 0")
    if d < 2:
        raise DomainError("d must be >= 2")
    if method == "auto":
        method = "enumerate" if n <= ENUM_MAX_N else "dp"
    if method == "enumerate":
        return _enumerate_assignments(noise, n, d)
    if method == "dp":
        return _dp_convolve(noise, n, d)
    raise DomainError(f"unknown oracle method {method!r}")


def _enumerate_assignments(noise: NoiseModel, n: int, d: int) -> ExactDistribution:
    if n > ENUM_MAX_N:
        raise ResourceLimitError(f"enumeration capped at n = {ENUM_MAX_N}, got {n}")
    classes, den = _rational_class_table(noise)
    acc = [0] * d

    def walk(copy: int, j: int, weight: int):
        if copy == n:
            acc[j] += weight
            return
        for shift, numerator in classes:
            if numerator:
                walk(copy + 1, (j + shift) % d, weight * numerator)

    walk(0, 0, 1)
    total = den**n
    return ExactDistribution(d, tuple(Fraction(a, total) for a in acc))


def _dp_convolve(noise: NoiseModel, n: int, d: int) -> ExactDistribution:
    if n > DP_MAX_N:
        raise ResourceLimitError(f"DP capped at n = {DP_MAX_N}, got {n}")
    if n * d > DP_MAX_CELLS:
        raise ResourceLimitError(f"DP table n*d = {n * d} exceeds {DP_MAX_CELLS}")
    classes, den = _rational_class_table(noise)
    acc = [0] * d
    acc[0] = 1
    for _ in range(n):
        new = [0] * d
        for shift, numerator in classes:
            if not numerator:
                continue
            for j in range(d):
                new[(j + shift) % d] += numerator * acc[j]
        acc = new
    total = den**n
    return ExactDistribution(d, tuple(Fraction(a, total) for a in acc))


def _embedded_mixing_weight(noise: NoiseModel, m_embed: int) -> Fraction:
    # independent of the analytic module on purpose
    if noise.kind is NoiseKind.PURE_TARGET:
        return Fraction(1)
    F = Fraction(noise.fidelity)
    if F < Fraction(1, 2):
        raise DomainError(f"embedded auxiliary needs F >= 1/2, got {F}")
    d2 = Fraction((1 << m_embed) ** 2)
    return (d2 * F**m_embed - 1) / (d2 - 1)


def enumerate_strategy_failure(strategy: StrategySpec, noise: NoiseModel) -> Fraction:
    """Exact Pr(Accept | noisy ensemble) for one strategy.

    For the noisy promise this is the protocol's failure probability: the
    verifier accepts although every copy was noisy.
    """
    if strategy.variant is StrategyVariant.SINGLE_COPY_BASELINE:
        p_target = Fraction(noise.error_probs()[0])
        return p_target**strategy.n

    d = strategy.aux_dimension()
    modulus = strategy.accept_modulus()
    if strategy.n == 0:
        ensemble_pass = Fraction(1)
    else:
        dist = enumerate_shift_distribution(noise, strategy.n, d)
        ensemble_pass = dist.marginal_multiples(modulus)

    if not strategy.uses_embedded_aux():
        return ensemble_pass

    # pure branch needs the ensemble to pass; the uniform branch passes
    # with probability 1/modulus regardless of the ensemble
    q_aux = _embedded_mixing_weight(noise, strategy.m_embed)
    return q_aux * ensemble_pass + (1 - q_aux) * Fraction(1, modulus)
