"""Core domain objects for collective ensemble verification.

The protocols in this package certify an ensemble of noisy entangled pairs by
accumulating amplitude errors, copy by copy, onto the amplitude index of one
auxiliary qudit pair.  Everything downstream (closed forms, exact oracle,
symbolic engine, dense simulator) shares the small vocabulary defined here:
Bell-basis labels, error classes with their counter shifts, noise models, and
the accounting record a protocol run produces.

Numeric polymorphism: every formula-level helper returns exact rationals when
fed ``fractions.Fraction`` inputs and floats otherwise.  Tests that demand
exact equality go through the Fraction path.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


class DomainError(ValueError):
    """Raised when an argument is outside an operation's documented domain."""


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds a documented capacity bound."""


class CrossCheckError(AssertionError):
    """Raised when independent computation routes disagree beyond tolerance."""


def is_exact(*values) -> bool:
    """True when every value supports exact rational arithmetic."""
    return all(isinstance(v, Rational) for v in values)


class Verdict(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class ErrorKind(enum.Enum):
    """Classical error classes of a noisy pair, named by their counter action.

    TARGET and TYPE3 (phase flip) leave the auxiliary amplitude index
    invariant; TYPE1 shifts it by +1, TYPE2 by -1.  SHIFT generalises the
    pair of qubit amplitude errors to qudit controls with an arbitrary shift.
    PHASE marks a multipartite phase error, invisible to amplitude rounds.
    """

    TARGET = "target"
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"
    SHIFT = "shift"
    PHASE = "phase"


_CANONICAL_SHIFTS = {
    ErrorKind.TARGET: 0,
    ErrorKind.TYPE1: 1,
    ErrorKind.TYPE2: -1,
    ErrorKind.TYPE3: 0,
    ErrorKind.PHASE: 0,
}


@dataclass(frozen=True)
class ErrorLabel:
    """One sampled error class together with its amplitude-counter shift."""

    kind: ErrorKind
    shift: int = 0

    def __post_init__(self):
        if self.kind in _CANONICAL_SHIFTS:
            expected = _CANONICAL_SHIFTS[self.kind]
            if self.shift != expected:
                raise DomainError(
                    f"{self.kind.value} carries shift {expected}, got {self.shift}"
                )

    @classmethod
    def target(cls) -> "ErrorLabel":
        return cls(ErrorKind.TARGET)

    @classmethod
    def type1(cls) -> "ErrorLabel":
        return cls(ErrorKind.TYPE1, 1)

    @classmethod
    def type2(cls) -> "ErrorLabel":
        return cls(ErrorKind.TYPE2, -1)

    @classmethod
    def type3(cls) -> "ErrorLabel":
        return cls(ErrorKind.TYPE3)

    @classmethod
    def general_shift(cls, s: int) -> "ErrorLabel":
        return cls(ErrorKind.SHIFT, int(s))

    @classmethod
    def phase(cls) -> "ErrorLabel":
        return cls(ErrorKind.PHASE)


TARGET = ErrorLabel.target()
TYPE1 = ErrorLabel.type1()
TYPE2 = ErrorLabel.type2()
TYPE3 = ErrorLabel.type3()
PHASE = ErrorLabel.phase()


@dataclass(frozen=True)
class BellLabel:
    """Bell-basis label (phase_bit, amplitude_bit) of a two-qubit pair."""

    phase_bit: int
    amplitude_bit: int

    def __post_init__(self):
        if self.phase_bit not in (0, 1) or self.amplitude_bit not in (0, 1):
            raise DomainError("Bell label bits must be 0 or 1")

    def to_error_label(self) -> ErrorLabel:
        """Counter class of the label, defined only for amplitude bit 0.

        The amplitude-flipped Bell states are coherent combinations of the
        two computational error states and have no single classical counter
        class; asking for one is a modelling error.
        """
        if self.amplitude_bit != 0:
            raise DomainError(
                "amplitude-flipped Bell states carry no classical counter class"
            )
        return TYPE3 if self.phase_bit else TARGET


@dataclass(frozen=True)
class QuditBellLabel:
    """Computational index pair (m, n) of a two-qudit control, 0 <= m, n < d."""

    d: int
    phase_index: int
    amplitude_index: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("qudit dimension must be >= 2")
        for idx in (self.phase_index, self.amplitude_index):
            if not 0 <= idx < self.d:
                raise DomainError(f"index {idx} outside [0, {self.d})")


def werner_error_probs(F):
    """Error-class distribution (p_target, p1, p2, p3) of a Werner pair.

    The identity part of the state spreads uniformly over the three
    non-target classes, so p1 = p2 = p3 = (1 - F)/3.
    """
    _check_werner_fidelity(F)
    e = (1 - F) / 3
    return (F, e, e, e)


def fidelity_to_q(F):
    """Werner mixing weight q from the qubit-pair fidelity, q = (4F - 1)/3."""
    _check_werner_fidelity(F)
    return (4 * F - 1) / 3


def q_to_fidelity(q):
    """Inverse of :func:`fidelity_to_q`, F = (1 + 3q)/4."""
    if not 0 <= q <= 1:
        raise DomainError(f"mixing weight q = {q} outside [0, 1]")
    return (1 + 3 * q) / 4


def _check_werner_fidelity(F):
    # q = (4F - 1)/3 must be a probability, hence F in [1/4, 1].
    if not Fraction(1, 4) <= F <= 1:
        raise DomainError(f"Werner fidelity F = {F} outside [1/4, 1]")


class NoiseKind(enum.Enum):
    PURE_TARGET = "pure-target"
    RANK2 = "rank2"
    WERNER = "werner"
    ISOTROPIC_QUDIT = "isotropic-qudit"


@dataclass(frozen=True)
class NoiseModel:
    """Noise channel acting identically and independently on every pair."""

    kind: NoiseKind
    fidelity: object = None
    d: int | None = None
    q: object = None

    def __post_init__(self):
        if self.kind is NoiseKind.RANK2:
            if not 0 <= self.fidelity <= 1:
                raise DomainError(f"fidelity {self.fidelity} outside [0, 1]")
        elif self.kind is NoiseKind.WERNER:
            _check_werner_fidelity(self.fidelity)
        elif self.kind is NoiseKind.ISOTROPIC_QUDIT:
            if self.d is None or self.d < 2:
                raise DomainError("isotropic noise needs a dimension d >= 2")
            if not 0 <= self.q <= 1:
                raise DomainError(f"mixing weight q = {self.q} outside [0, 1]")

    @classmethod
    def pure_target(cls) -> "NoiseModel":
        return cls(NoiseKind.PURE_TARGET, fidelity=1)

    @classmethod
    def rank2(cls, F) -> "NoiseModel":
        """Target with probability F, amplitude error |01> otherwise."""
        return cls(NoiseKind.RANK2, fidelity=F)

    @classmethod
    def werner(cls, F) -> "NoiseModel":
        return cls(NoiseKind.WERNER, fidelity=F)

    @classmethod
    def isotropic_qudit(cls, d: int, q) -> "NoiseModel":
        """Weight q on the target qudit pair, uniform noise otherwise."""
        return cls(NoiseKind.ISOTROPIC_QUDIT, d=d, q=q)

    def error_probs(self):
        """(p_target, p_type1, p_type2, p_type3); sums to one by construction."""
        F = self.fidelity
        if self.kind is NoiseKind.PURE_TARGET:
            return (1, 0, 0, 0)
        if self.kind is NoiseKind.RANK2:
            return (F, 1 - F, 0, 0)
        if self.kind is NoiseKind.WERNER:
            return werner_error_probs(F)
        raise DomainError(f"{self.kind.value} has no qubit error-class split")

    def is_exact(self) -> bool:
        values = [v for v in (self.fidelity, self.q) if v is not None]
        return is_exact(*values)


@dataclass(frozen=True)
class EnsemblePromise:
    """Verification promise: n copies, all target or all at distance >= epsilon."""

    n: int
    epsilon: object
    noise: NoiseModel

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("ensemble size must be >= 1")
        if not 0 < self.epsilon <= 1:
            raise DomainError(f"epsilon = {self.epsilon} outside (0, 1]")
        if self.noise.kind is not NoiseKind.PURE_TARGET:
            if self.noise.fidelity > 1 - self.epsilon:
                raise DomainError(
                    "noise fidelity exceeds the promised infidelity gap"
                )


@dataclass(frozen=True)
class RunOutcome:
    """Accounting record of one protocol run."""

    verdict: Verdict
    copies_consumed: int
    ebits_consumed: float
    measured_j: int | None = None
    subspaces_measured: int = 0

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


class StrategyVariant(enum.Enum):
    RANK2_FULL = "rank2-full"
    RANK2_SUBSPACE = "rank2-subspace"
    WERNER_FULL = "werner-full"
    WERNER_SUBSPACE = "werner-subspace"
    DIRECT_EMBED_MEASURE = "direct-embed"
    EMBED_ENG = "embed-eng"
    EMBED_ENG_SUBSPACE = "embed-eng-subspace"
    SINGLE_COPY_BASELINE = "single-copy"


SUBSPACE_VARIANTS = frozenset(
    {
        StrategyVariant.RANK2_SUBSPACE,
        StrategyVariant.WERNER_SUBSPACE,
        StrategyVariant.EMBED_ENG_SUBSPACE,
    }
)

EMBED_VARIANTS = frozenset(
    {
        StrategyVariant.DIRECT_EMBED_MEASURE,
        StrategyVariant.EMBED_ENG,
        StrategyVariant.EMBED_ENG_SUBSPACE,
    }
)


def pow2_ceil_exponent(x: int) -> int:
    """Smallest k with 2**k >= x."""
    return max(0, (x - 1).bit_length())


@dataclass(frozen=True)
class StrategySpec:
    """Which protocol to run, on how many copies, with which readout.

    n is the size of the measured ensemble (0 is allowed for the embedded
    variants, which then only test the auxiliary itself).  m is the number
    of subspace parity rounds, m_embed the number of noisy copies merged
    into the auxiliary register.
    """

    variant: StrategyVariant
    n: int
    m: int | None = None
    m_embed: int | None = None

    def __post_init__(self):
        v = self.variant
        min_n = 0 if v in EMBED_VARIANTS else 1
        if self.n < min_n:
            raise DomainError(f"{v.value} needs n >= {min_n}, got {self.n}")
        if v in SUBSPACE_VARIANTS:
            if self.m is None or self.m < 1:
                raise DomainError(f"{v.value} needs subspace rounds m >= 1")
        elif self.m is not None:
            raise DomainError(f"{v.value} takes no subspace parameter")
        if v is StrategyVariant.DIRECT_EMBED_MEASURE and self.n != 0:
            raise DomainError("direct measurement takes no ensemble; use n = 0")
        if v in EMBED_VARIANTS:
            if self.m_embed is None or self.m_embed < 1:
                raise DomainError(f"{v.value} needs m_embed >= 1")
            if (1 << self.m_embed) < self.n + 1:
                raise DomainError(
                    f"auxiliary dimension 2**{self.m_embed} cannot count "
                    f"{self.n} copies; need 2**m_embed >= n + 1"
                )
        elif self.m_embed is not None:
            raise DomainError(f"{v.value} takes no embedding parameter")
        if self.m is not None and self.m > self.aux_exponent():
            raise DomainError(
                f"m = {self.m} parity rounds exceed log2(d) = {self.aux_exponent()}"
            )

    def aux_exponent(self) -> int:
        """log2 of the auxiliary dimension, for the power-of-two strategies."""
        if self.variant in EMBED_VARIANTS:
            return self.m_embed
        return pow2_ceil_exponent(self.n + 1)

    def aux_dimension(self) -> int | None:
        """Counter dimension d, or None for the single-copy baseline.

        The full-readout pure-auxiliary strategies use the minimal
        sufficient d = n + 1 (any d > n keeps the net shift unwrapped);
        subspace and embedded strategies need a power of two so parity
        rounds decompose into qubit-pair measurements.
        """
        v = self.variant
        if v is StrategyVariant.SINGLE_COPY_BASELINE:
            return None
        if v in (StrategyVariant.RANK2_FULL, StrategyVariant.WERNER_FULL):
            return self.n + 1
        return 1 << self.aux_exponent()

    def accept_modulus(self) -> int | None:
        """Accept iff the final index is 0 modulo this."""
        if self.variant is StrategyVariant.SINGLE_COPY_BASELINE:
            return None
        if self.variant in SUBSPACE_VARIANTS:
            return 1 << self.m
        return self.aux_dimension()

    def uses_embedded_aux(self) -> bool:
        return self.variant in EMBED_VARIANTS
