"""Verification of m-party GHZ ensembles.

The bipartite counter construction lifts to GHZ states: every party applies
a controlled-X from its share of a copy onto its share of an m-party d-level
GHZ auxiliary register.  A computational control (i_1 .. i_m) updates the
auxiliary amplitude vector componentwise, j'_k = (j_k + i_{k+1} - i_1) mod d,
so the target and pure phase errors leave it untouched while computational
amplitude errors shift it.  Phase errors need a second round with a two-level
auxiliary acting as control, which picks up the ensemble's net phase parity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .mc import MCResult, _wilson_interval, block_uniforms, iter_blocks
from .models import (
    DomainError,
    ResourceLimitError,
    Verdict,
    is_exact,
    pow2_ceil_exponent,
)
from .speedup import backend_name

ENUM_MAX_ASSIGNMENTS = 1 << 22


@dataclass(frozen=True)
class GHZLabel:
    """Label of one GHZ-basis element: phase bit and amplitude vector."""

    parties: int
    phase_bit: int
    amplitude_vector: tuple[int, ...]

    def __post_init__(self):
        if self.parties < 2:
            raise DomainError("need at least two parties")
        if self.phase_bit not in (0, 1):
            raise DomainError("phase bit must be 0 or 1")
        if len(self.amplitude_vector) != self.parties - 1:
            raise DomainError("amplitude vector length must be parties - 1")
        if any(not isinstance(j, int) or j < 0 for j in self.amplitude_vector):
            raise DomainError("amplitude vector entries must be non-negative ints")


def amplitude_vector_of(k: int, parties: int) -> tuple[int, ...]:
    """Bits of k as an amplitude vector, most significant digit first."""
    w = parties - 1
    if not 0 <= k < (1 << w):
        raise DomainError("index out of range for this party count")
    return tuple((k >> (w - 1 - t)) & 1 for t in range(w))


@dataclass(frozen=True)
class GHZDiagonalState:
    """GHZ-diagonal noise: target weight, phase-error weight, and one weight
    per conjugate pair of computational amplitude errors.

    lambdas[k-1] is the weight of each member of the pair
    {|0,k>, |1,not-k>}, so the weights satisfy
    fidelity + lambda0 + 2*sum(lambdas) = 1.
    """

    parties: int
    fidelity: object
    lambda0: object
    lambdas: tuple

    def __post_init__(self):
        m = self.parties
        if m < 2:
            raise DomainError("need at least two parties")
        if len(self.lambdas) != (1 << (m - 1)) - 1:
            raise DomainError("expected one weight per nonzero amplitude index")
        weights = (self.fidelity, self.lambda0, *self.lambdas)
        if any(w < 0 for w in weights):
            raise DomainError("weights must be non-negative")
        total = self.fidelity + self.lambda0 + 2 * sum(self.lambdas)
        if is_exact(*weights):
            if total != 1:
                raise DomainError(f"weights sum to {total}, expected 1")
        elif abs(total - 1) > 1e-9:
            raise DomainError(f"weights sum to {total}, expected 1")

    def is_exact(self) -> bool:
        return is_exact(self.fidelity, self.lambda0, *self.lambdas)

    @classmethod
    def single_error(cls, parties: int, fidelity, k: int, lambda0=0):
        """All amplitude-error weight on index pair k."""
        count = (1 << (parties - 1)) - 1
        if not 1 <= k <= count:
            raise DomainError("amplitude index out of range")
        one = Fraction(1) if is_exact(fidelity, lambda0) else 1.0
        rest = (one - fidelity - lambda0) / 2
        lams = [rest * 0] * count
        lams[k - 1] = rest
        return cls(parties, fidelity, lambda0, tuple(lams))

    def error_classes(self):
        """(probability, shift vector, phase flip) for each pure component."""
        m = self.parties
        out = [(self.fidelity, (0,) * (m - 1), 0), (self.lambda0, (0,) * (m - 1), 1)]
        for k, lam in enumerate(self.lambdas, start=1):
            if lam == 0:
                continue
            vec = amplitude_vector_of(k, m)
            out.append((lam, vec, 0))
            out.append((lam, tuple(-v for v in vec), 0))
        return [(p, v, f) for (p, v, f) in out if p != 0]


def mcx_update(
    control_bits: Sequence[int], vector: Sequence[int], d: int
) -> tuple[int, ...]:
    """Amplitude-vector update for a computational-basis control."""
    bits = tuple(control_bits)
    vec = tuple(vector)
    if len(bits) != len(vec) + 1:
        raise DomainError("control needs one bit per party")
    if any(b not in (0, 1) for b in bits):
        raise DomainError("control bits must be 0 or 1")
    if d < 2:
        raise DomainError("auxiliary dimension must be at least 2")
    i1 = bits[0]
    return tuple((j + bits[t + 1] - i1) % d for t, j in enumerate(vec))


def default_aux_dim(n: int) -> int:
    # smallest power of two covering all reachable totals, as in the
    # bipartite subspace variants
    return 1 << pow2_ceil_exponent(n + 1)


@dataclass(frozen=True)
class GHZRunOutcome:
    """One sampled verification run; the measured quantity is a vector, so
    this does not reuse the bipartite outcome record."""

    verdict: Verdict
    copies_consumed: int
    ebits_consumed: float
    measured_vector: tuple[int, ...]
    phase_parity: int | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


def ghz_verify(
    noise: GHZDiagonalState,
    n: int,
    d: int | None = None,
    seed: int = 0,
    rng=None,
    phase_round: bool = True,
) -> GHZRunOutcome:
    """Sample one run: amplitude round over n copies, then optionally the
    phase round on the surviving ensemble."""
    if n < 1:
        raise DomainError("need at least one copy")
    if d is None:
        d = default_aux_dim(n)
    if d < 2:
        raise DomainError("auxiliary dimension must be at least 2")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(seed))
    classes = noise.error_classes()
    cum = []
    acc = 0.0
    for p, _, _ in classes:
        acc += float(p)
        cum.append(acc)

    m = noise.parties
    vec = [0] * (m - 1)
    parity = 0
    for _ in range(n):
        u = rng.random()
        c = 0
        while c < len(cum) - 1 and u >= cum[c]:
            c += 1
        _, shift, flip = classes[c]
        for t in range(m - 1):
            vec[t] = (vec[t] + shift[t]) % d
        parity ^= flip

    measured = tuple(vec)
    ebits = math.log2(d)
    if any(measured):
        return GHZRunOutcome(Verdict.REJECT, 0, ebits, measured)
    if not phase_round:
        return GHZRunOutcome(Verdict.ACCEPT, 0, ebits, measured)
    ebits += 1.0
    verdict = Verdict.ACCEPT if parity == 0 else Verdict.REJECT
    return GHZRunOutcome(verdict, 0, ebits, measured, phase_parity=parity)


def ghz_failure_probability(
    noise: GHZDiagonalState,
    n: int,
    d: int | None = None,
    phase_round: bool = False,
    method: str = "dp",
):
    """Probability the verifier accepts n noisy copies.

    Exact dynamic programming over the reachable (vector, parity) states;
    ``method="enum"`` walks every error assignment instead, as an
    independent cross-check for small n.
    """
    if n < 1:
        raise DomainError("need at least one copy")
    if d is None:
        d = default_aux_dim(n)
    m = noise.parties
    cells = (d ** (m - 1)) * 2
    classes = noise.error_classes()
    zero = noise.fidelity * 0

    if method == "enum":
        if len(classes) ** n > ENUM_MAX_ASSIGNMENTS:
            raise ResourceLimitError("assignment enumeration too large")
        total = zero

        def walk(copy, vec, parity, weight):
            nonlocal total
            if copy == n:
                if all(v % d == 0 for v in vec) and (not phase_round or parity == 0):
                    total += weight
                return
            for p, shift, flip in classes:
                walk(
                    copy + 1,
                    tuple((v + s) % d for v, s in zip(vec, shift)),
                    parity ^ flip,
                    weight * p,
                )

        walk(0, (0,) * (m - 1), 0, zero + 1)
        return total

    if method != "dp":
        raise DomainError(f"unknown method {method!r}")
    if n * cells * len(classes) > 200_000_000:
        raise ResourceLimitError("state space too large for the exact pass")

    def idx(vec, parity):
        out = 0
        for v in vec:
            out = out * d + v
        return out * 2 + parity

    # per-copy transition applied to a dense table over (vector, parity)
    table = [zero] * cells
    table[0] = zero + 1
    for _ in range(n):
        new = [zero] * cells
        for i, w in enumerate(table):
            if w == 0:
                continue
            parity = i & 1
            rest = i >> 1
            vec = []
            for t in range(m - 1):
                vec.append((rest // (d ** (m - 2 - t))) % d)
            for p, shift, flip in classes:
                j = idx(
                    tuple((v + s) % d for v, s in zip(vec, shift)), parity ^ flip
                )
                new[j] += w * p
        table = new

    total = zero
    for parity in (0, 1):
        if phase_round and parity:
            continue
        total += table[idx((0,) * (m - 1), parity)]
    return total


def ghz_monte_carlo(
    noise: GHZDiagonalState,
    n: int,
    trials: int,
    d: int | None = None,
    phase_round: bool = False,
    seed: int = 0,
    workers: int = 1,
) -> MCResult:
    """Accept-probability estimate with the same block scheme as the
    bipartite driver (deterministic in seed, independent of workers)."""
    if trials < 1:
        raise DomainError("trials must be positive")
    if d is None:
        d = default_aux_dim(n)
    classes = noise.error_classes()
    probs = np.array([float(p) for p, _, _ in classes])
    cum = np.cumsum(probs)
    shifts = np.array([[s % d for s in vec] for _, vec, _ in classes], dtype=np.int64)
    phases = np.array([f for _, _, f in classes], dtype=np.int64)

    columns = n
    blocks = list(iter_blocks(trials, columns))

    def run(block: int, rows: int) -> int:
        u = block_uniforms(seed, block, rows, columns)
        return kernels.ghz_accepts(u, cum, shifts, phases, d, phase_round)

    if workers == 1 or len(blocks) == 1:
        accepts = sum(run(b, rows) for b, rows in blocks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accepts = sum(pool.map(lambda br: run(*br), blocks))

    estimate = accepts / trials
    std_error = math.sqrt(max(estimate * (1 - estimate), 0.0) / trials)
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


# ------------------------------------------------------------ dense layer


def make_ghz_qudit(d: int, parties: int, phase_index: int, vector: Sequence[int]):
    """Dense |Phi^d_{i,j}> over `parties` axes of dimension d."""
    from .densesim import DenseState

    vec = tuple(vector)
    if len(vec) != parties - 1:
        raise DomainError("amplitude vector length must be parties - 1")
    shape = (d,) * parties
    t = np.zeros(shape, dtype=np.complex128)
    for k in range(d):
        pos = (k,) + tuple((k - j) % d for j in vec)
        t[pos] = np.exp(2j * math.pi * k * phase_index / d) / math.sqrt(d)
    return DenseState(t, copy=False)


def make_ghz_basis(parties: int, phase_bit: int, vector: Sequence[int]):
    return make_ghz_qudit(2, parties, phase_bit, vector)


def ghz_depolarize(state) -> GHZDiagonalState:
    """Project a noisy m-party qubit state onto the GHZ-diagonal form,
    keeping the target and pure-phase-error weights."""
    from .densesim import as_mixture

    mix = as_mixture(state)
    m = len(mix.dims)
    if any(dd != 2 for dd in mix.dims):
        raise DomainError("expected an m-qubit state")
    f = mix.target_fidelity(make_ghz_basis(m, 0, (0,) * (m - 1)))
    lam0 = mix.target_fidelity(make_ghz_basis(m, 1, (0,) * (m - 1)))
    lams = []
    for k in range(1, 1 << (m - 1)):
        vec = amplitude_vector_of(k, m)
        a = mix.target_fidelity(make_ghz_basis(m, 0, vec))
        b = mix.target_fidelity(make_ghz_basis(m, 1, vec))
        lams.append((a + b) / 2)
    return GHZDiagonalState(m, f, lam0, tuple(lams))


def noise_branches_ghz(noise: GHZDiagonalState):
    """The GHZ-diagonal state as a mixture of pure m-qubit branches."""
    from .densesim import BranchMixture, DenseState

    m = noise.parties
    out = []
    f = float(noise.fidelity)
    if f:
        out.append((f, make_ghz_basis(m, 0, (0,) * (m - 1))))
    lam0 = float(noise.lambda0)
    if lam0:
        out.append((lam0, make_ghz_basis(m, 1, (0,) * (m - 1))))
    for k, lam in enumerate(noise.lambdas, start=1):
        w = float(lam)
        if not w:
            continue
        vec = amplitude_vector_of(k, m)
        for lead in (0, 1):
            bits = (lead,) + tuple(b ^ lead for b in vec)
            t = np.zeros((2,) * m, dtype=np.complex128)
            t[bits] = 1.0
            out.append((w, DenseState(t, copy=False)))
    return BranchMixture(tuple(out))


def dense_amplitude_round(noise: GHZDiagonalState, n: int, d: int):
    """Joint distribution of the measured auxiliary amplitude vector after
    the counter round, computed on the full state vector."""
    from .densesim import BranchMixture, apply_cx

    m = noise.parties
    if (2 ** (m * n)) * d**m > (1 << 20):
        raise ResourceLimitError("dense amplitude round exceeds amplitude cap")
    aux = BranchMixture.pure(make_ghz_qudit(d, m, 0, (0,) * (m - 1)))
    mix = aux
    copies = noise_branches_ghz(noise)
    for _ in range(n):
        mix = copies.tensor_with(mix)
    base = n * m

    def run(st):
        for c in range(n):
            for p in range(m):
                st = apply_cx(st, c * m + p, base + p)
        return st

    evolved = mix.map_states(run)

    probs = np.zeros((d,) * (m - 1))
    for w, st in evolved.branches:
        arr = np.moveaxis(st.tensor, tuple(range(base, base + m)), tuple(range(m)))
        flat = np.abs(arr.reshape((d,) * m + (-1,))) ** 2
        marg = flat.sum(axis=-1)
        for pos in np.ndindex(*(d,) * m):
            p = marg[pos]
            if p:
                k = pos[0]
                vec = tuple((k - kk) % d for kk in pos[1:])
                probs[vec] += w * p
    return probs
