"""Dense state-vector simulation of the counter protocol.

Ground truth for the symbolic layer.  States live as full complex vectors
with one axis per subsystem; mixed inputs are represented as weighted
mixtures of pure branches, which is exact here because every noise model in
the package is a mixture of pure states and the protocol never creates
coherence between branches.

Conventions fixed once and used everywhere:

* a pair register stores the A-side axis first, then the B-side axis;
* the amplitude index of a qudit pair is the Z-outcome difference
  ``(k_A - k_B) mod d``;
* the controlled-X target shift is the down-shift ``|k> -> |k-1 mod d>``;
* when a qubit is merged into a qudit register it becomes the least
  significant digit, so a parity round measures and strips exactly one
  binary digit of the amplitude index.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .models import (
    DomainError,
    NoiseKind,
    NoiseModel,
    ResourceLimitError,
)

MAX_AMPLITUDES = 1 << 20
ATOL = 1e-10


class DenseState:
    """Pure state vector over an ordered list of subsystems."""

    __slots__ = ("tensor",)

    def __init__(self, tensor: np.ndarray, copy: bool = True):
        arr = np.asarray(tensor, dtype=np.complex128)
        if arr.size > MAX_AMPLITUDES:
            raise ResourceLimitError(
                f"state has {arr.size} amplitudes, cap is {MAX_AMPLITUDES}"
            )
        if arr.size == 0:
            raise DomainError("empty state")
        self.tensor = arr.copy() if copy else arr

    @property
    def dims(self) -> tuple[int, ...]:
        return self.tensor.shape

    @property
    def size(self) -> int:
        return self.tensor.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def normalized(self) -> "DenseState":
        n = self.norm()
        if n < 1e-14:
            raise DomainError("cannot normalise a null vector")
        return DenseState(self.tensor / n, copy=False)

    def overlap(self, other: "DenseState") -> complex:
        if self.dims != other.dims:
            raise DomainError("subsystem layouts differ")
        return complex(np.vdot(self.tensor, other.tensor))

    def fidelity(self, other: "DenseState") -> float:
        return abs(self.overlap(other)) ** 2

    def tensor_with(self, other: "DenseState") -> "DenseState":
        if self.size * other.size > MAX_AMPLITUDES:
            raise ResourceLimitError("tensor product exceeds amplitude cap")
        out = np.tensordot(self.tensor, other.tensor, axes=0)
        return DenseState(out, copy=False)


Branches = Sequence[tuple[float, DenseState]]


@dataclass(frozen=True)
class BranchMixture:
    """Statistical mixture of pure states with matching layouts."""

    branches: tuple[tuple[float, DenseState], ...]

    def __post_init__(self):
        if not self.branches:
            raise DomainError("mixture needs at least one branch")
        dims = self.branches[0][1].dims
        total = 0.0
        for w, st in self.branches:
            if w < -1e-12:
                raise DomainError("negative branch weight")
            if st.dims != dims:
                raise DomainError("branch layouts differ")
            total += w
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"branch weights sum to {total}, expected 1")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.branches[0][1].dims

    @classmethod
    def pure(cls, state: DenseState) -> "BranchMixture":
        return cls(((1.0, state),))

    def map_states(self, fn) -> "BranchMixture":
        return BranchMixture(tuple((w, fn(st)) for w, st in self.branches))

    def tensor_with(self, other: "BranchMixture") -> "BranchMixture":
        out = []
        for w1, s1 in self.branches:
            for w2, s2 in other.branches:
                out.append((w1 * w2, s1.tensor_with(s2)))
        return BranchMixture(tuple(out))

    def target_fidelity(self, target: DenseState) -> float:
        return sum(w * st.fidelity(target) for w, st in self.branches)


def as_mixture(state) -> BranchMixture:
    if isinstance(state, DenseState):
        return BranchMixture.pure(state)
    return state


# ---------------------------------------------------------------- states


def make_bell(i: int, j: int) -> DenseState:
    """Two-qubit state (|0,j> + (-1)^i |1,1-j>)/sqrt(2), axes (A, B)."""
    if i not in (0, 1) or j not in (0, 1):
        raise DomainError("Bell indices must be bits")
    t = np.zeros((2, 2), dtype=np.complex128)
    t[0, j] = 1.0 / math.sqrt(2.0)
    t[1, 1 - j] = (-1.0) ** i / math.sqrt(2.0)
    return DenseState(t, copy=False)


def make_computational_pair(a: int, b: int, d: int = 2) -> DenseState:
    t = np.zeros((d, d), dtype=np.complex128)
    t[a, b] = 1.0
    return DenseState(t, copy=False)


def make_qudit_bell(d: int, m: int, n: int) -> DenseState:
    """Pair state sum_k w^{km} |k>|k-n mod d> / sqrt(d), axes (A, B)."""
    if d < 2:
        raise DomainError("qudit dimension must be at least 2")
    m %= d
    n %= d
    t = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        t[k, (k - n) % d] = np.exp(2j * math.pi * k * m / d) / math.sqrt(d)
    return DenseState(t, copy=False)


def noise_branches(noise: NoiseModel) -> BranchMixture:
    """One verified pair drawn from ``noise`` as a pure-state mixture."""
    if noise.kind is NoiseKind.PURE_TARGET:
        return BranchMixture.pure(make_bell(0, 0))
    if noise.kind is NoiseKind.ISOTROPIC_QUDIT:
        d = noise.d
        q = float(noise.q)
        out = [(q, make_qudit_bell(d, 0, 0))]
        unif = (1.0 - q) / (d * d)
        for a in range(d):
            for b in range(d):
                out.append((unif, make_computational_pair(a, b, d)))
        return BranchMixture(tuple(out))
    p0, p1, p2, p3 = (float(p) for p in noise.error_probs())
    out = [(p0, make_bell(0, 0))]
    if p1:
        out.append((p1, make_computational_pair(0, 1)))
    if p2:
        out.append((p2, make_computational_pair(1, 0)))
    if p3:
        out.append((p3, make_bell(1, 0)))
    return BranchMixture(tuple(out))


def ensemble_with_aux(noise: NoiseModel, n: int, aux: BranchMixture) -> BranchMixture:
    """n independent noisy pairs followed by the auxiliary pair.

    Axis layout: (A_1, B_1, ..., A_n, B_n, A_aux, B_aux).
    """
    mix = aux
    copies = noise_branches(noise)
    for _ in range(n):
        mix = copies.tensor_with(mix)
    return mix


# ---------------------------------------------------------------- gates


def _apply_controlled_shift(arr: np.ndarray, control_axis: int, target_axis: int, shift: int):
    """In place: when the control qubit is 1, shift the target index by
    ``-shift`` mod d (shift=+1 is the down-shift X, -1 its inverse)."""
    view = np.moveaxis(arr, (control_axis, target_axis), (0, 1))
    view[1] = np.roll(view[1], -shift, axis=0)


def apply_cx(state: DenseState, control_axis: int, target_axis: int, inverse: bool = False) -> DenseState:
    """Hybrid controlled-X: |0><0| x 1 + |1><1| x X_d, X_d|k> = |k-1 mod d>."""
    if state.dims[control_axis] != 2:
        raise DomainError("control must be a qubit axis")
    out = state.tensor.copy()
    _apply_controlled_shift(out, control_axis, target_axis, -1 if inverse else 1)
    return DenseState(out, copy=False)


def apply_bcx(
    state: DenseState,
    control_pair: tuple[int, int],
    target_pair: tuple[int, int],
    inverse: bool = False,
) -> DenseState:
    """Bilateral controlled-X from a qubit pair onto a qudit pair."""
    ca, cb = control_pair
    ta, tb = target_pair
    if state.dims[ca] != 2 or state.dims[cb] != 2:
        raise DomainError("control pair must be qubit axes")
    if state.dims[ta] != state.dims[tb]:
        raise DomainError("target pair axes must share a dimension")
    out = state.tensor.copy()
    s = -1 if inverse else 1
    _apply_controlled_shift(out, ca, ta, s)
    _apply_controlled_shift(out, cb, tb, s)
    return DenseState(out, copy=False)


def _aux_axes(state) -> tuple[int, int]:
    nd = len(state.dims)
    return nd - 2, nd - 1


def apply_eng(state, n: int, inverse: bool = False):
    """Counter gate from each of the n leading pairs onto the trailing aux pair.

    Works on a DenseState or a BranchMixture laid out as produced by
    ``ensemble_with_aux``.
    """
    mix = as_mixture(state)
    ta, tb = _aux_axes(mix)
    if len(mix.dims) != 2 * n + 2:
        raise DomainError("layout does not match n pairs plus an aux pair")

    def run(st: DenseState) -> DenseState:
        for i in range(n):
            st = apply_bcx(st, (2 * i, 2 * i + 1), (ta, tb), inverse=inverse)
        return st

    out = mix.map_states(run)
    return out if isinstance(state, BranchMixture) else out.branches[0][1]


def apply_eng_inverse(state, n: int):
    return apply_eng(state, n, inverse=True)


def apply_pair_shift(state: DenseState, pair: tuple[int, int], delta: int) -> DenseState:
    """Shift the amplitude index of a qudit pair by ``delta``.

    Implemented with local down-shifts only: A-side powers lower the index,
    B-side powers raise it.
    """
    a, b = pair
    out = state.tensor.copy()
    if delta >= 0:
        out = np.roll(out, -delta, axis=b)
    else:
        out = np.roll(out, delta, axis=a)
    return DenseState(out, copy=False)


# ---------------------------------------------------------------- twirls


def twirl_to_werner(state) -> NoiseModel:
    """Depolarise a two-qubit pair to Werner form, keeping the fidelity."""
    mix = as_mixture(state)
    if mix.dims != (2, 2):
        raise DomainError("expected a single qubit pair")
    f = mix.target_fidelity(make_bell(0, 0))
    return NoiseModel.werner(f)


def twirl_to_isotropic(state) -> NoiseModel:
    """Depolarise a qudit pair to isotropic form, keeping the fidelity."""
    mix = as_mixture(state)
    if len(mix.dims) != 2 or mix.dims[0] != mix.dims[1]:
        raise DomainError("expected a single qudit pair")
    d = mix.dims[0]
    g = mix.target_fidelity(make_qudit_bell(d, 0, 0))
    q = (d * d * g - 1.0) / (d * d - 1.0)
    return NoiseModel.isotropic_qudit(d, q)


# ------------------------------------------------------------ measurement


@dataclass(frozen=True)
class MeasurementRecord:
    """One outcome of the Z measurement on a parity qubit pair."""

    label: str  # M1..M4
    outcomes: tuple[int, int]
    probability: float
    post_state: object  # BranchMixture with the measured pair removed, or None

    @property
    def parity_even(self) -> bool:
        return self.outcomes[0] == self.outcomes[1]


_PARITY_LABELS = {(0, 0): "M1", (0, 1): "M2", (1, 0): "M3", (1, 1): "M4"}


def _split_lsb(arr: np.ndarray, axis: int) -> np.ndarray:
    """Reshape one axis of dimension d into (d//2, 2): index k -> (k//2, k%2)."""
    d = arr.shape[axis]
    shape = arr.shape[:axis] + (d // 2, 2) + arr.shape[axis + 1 :]
    return arr.reshape(shape)


def measure_parity_pair(state, pair: tuple[int, int]) -> list[MeasurementRecord]:
    """Measure the least significant digit of each side of a qudit pair.

    Returns all four outcome records; impossible outcomes carry probability
    zero and no post state.  The measured digits are removed, halving the
    pair dimension.
    """
    mix = as_mixture(state)
    a, b = pair
    if a >= b:
        raise DomainError("pair axes must be given in (A, B) order")
    d = mix.dims[a]
    if d % 2 or mix.dims[b] != d:
        raise DomainError("parity round needs an even-dimension qudit pair")

    collected: dict[tuple[int, int], list[tuple[float, DenseState]]] = {
        k: [] for k in _PARITY_LABELS
    }
    probs = {k: 0.0 for k in _PARITY_LABELS}
    for w, st in mix.branches:
        arr = _split_lsb(_split_lsb(st.tensor, b), a)
        # split axes: a -> (a, a+1), former b shifted by one -> (b+1, b+2)
        a_hi, a_lo = a, a + 1
        b_hi, b_lo = b + 1, b + 2
        moved = np.moveaxis(arr, (a_lo, b_lo), (0, 1))
        for (oa, ob) in _PARITY_LABELS:
            sub = moved[oa, ob]
            p = float(np.sum(np.abs(sub) ** 2))
            if p <= 1e-300:
                continue
            probs[(oa, ob)] += w * p
            collected[(oa, ob)].append((w * p, DenseState(sub / math.sqrt(p))))

    records = []
    for key, label in _PARITY_LABELS.items():
        p = probs[key]
        if collected[key]:
            post = BranchMixture(
                tuple((bw / p, bst) for bw, bst in collected[key])
            )
        else:
            post = None
        records.append(
            MeasurementRecord(label=label, outcomes=key, probability=p, post_state=post)
        )
    return records


def amplitude_difference_distribution(state, pair: tuple[int, int]) -> np.ndarray:
    """Distribution of (k_A - k_B) mod d from a Z measurement of the pair."""
    mix = as_mixture(state)
    a, b = pair
    d = mix.dims[a]
    if mix.dims[b] != d:
        raise DomainError("pair axes must share a dimension")
    out = np.zeros(d)
    for w, st in mix.branches:
        moved = np.moveaxis(st.tensor, (a, b), (0, 1))
        flat = moved.reshape(d, d, -1)
        probs = np.sum(np.abs(flat) ** 2, axis=2)
        for ka in range(d):
            for kb in range(d):
                out[(ka - kb) % d] += w * probs[ka, kb]
    return out


# ----------------------------------------------------- Appendix-A recovery


def merge_fresh_pair(state, pair: tuple[int, int], fresh: DenseState):
    """Append a fresh qubit pair as the new least significant digit of a
    qudit pair, doubling its dimension: index k becomes 2k + bit."""
    mix = as_mixture(state)
    a, b = pair
    if fresh.dims != (2, 2):
        raise DomainError("fresh pair must be two qubits")

    def run(st: DenseState) -> DenseState:
        joined = st.tensor_with(fresh).tensor
        nd = joined.ndim
        fa, fb = nd - 2, nd - 1
        # place each fresh qubit right after its qudit axis, then fuse
        moved = np.moveaxis(joined, (fa, fb), (a + 1, b + 2))
        s = moved.shape
        # after the move: qudit A at a, fresh A at a+1, qudit B at b+1,
        # fresh B at b+2; fuse each adjacent (qudit, qubit) pair
        new_shape = s[:a] + (s[a] * 2,) + s[a + 2 : b + 1] + (s[b + 1] * 2,) + s[b + 3 :]
        return DenseState(moved.reshape(new_shape), copy=False)

    out = mix.map_states(run)
    return out if isinstance(state, BranchMixture) else out.branches[0][1]


_CORRECTION_SHIFT = {"M1": 0, "M4": 0, "M2": -1, "M3": +1}


def reembed_and_correct(state, pair: tuple[int, int], record: MeasurementRecord, fresh: DenseState):
    """Restore the pre-measurement aux register after one parity round.

    The fresh pair doubles the index to 2j', then the outcome-dependent
    local shift undoes the residual map of the round: outcomes (0,1) mapped
    j to (j+1)/2, so the merged index j+1 is lowered by one; outcomes (1,0)
    mapped j to (j-1)/2, so it is raised by one.
    """
    merged = merge_fresh_pair(state, pair, fresh)
    shift = _CORRECTION_SHIFT[record.label]
    if shift == 0:
        return merged
    mix = as_mixture(merged)
    out = mix.map_states(lambda st: apply_pair_shift(st, pair, shift))
    return out if isinstance(merged, BranchMixture) else out.branches[0][1]


# ------------------------------------------------------------- distances


def trace_distance(state_a, state_b) -> float:
    """Trace distance between two branch mixtures.

    Both operators are sums of signed pure projectors, so the difference is
    supported on the span of the branch vectors.  Projecting onto an
    orthonormal basis of that span gives a small Hermitian matrix whose
    eigenvalues are the nonzero eigenvalues of the difference; this keeps
    the cost polynomial in the branch count instead of the dimension, and
    eigvalsh avoids the accuracy loss a non-Hermitian solver shows when the
    difference is (near) zero.
    """
    ma, mb = as_mixture(state_a), as_mixture(state_b)
    if ma.dims != mb.dims:
        raise DomainError("subsystem layouts differ")
    vecs = []
    signs = []
    for w, st in ma.branches:
        vecs.append(math.sqrt(max(w, 0.0)) * st.tensor.ravel())
        signs.append(1.0)
    for w, st in mb.branches:
        vecs.append(math.sqrt(max(w, 0.0)) * st.tensor.ravel())
        signs.append(-1.0)
    v = np.array(vecs)
    _, sv, basis = np.linalg.svd(v, full_matrices=False)
    keep = sv > 1e-14 * (sv[0] if sv.size else 1.0)
    coords = v @ basis[keep].conj().T
    small = np.einsum("i,ia,ib->ab", np.array(signs), coords, coords.conj())
    eig = np.linalg.eigvalsh(small)
    return 0.5 * float(np.sum(np.abs(eig)))


# ------------------------------------------------------------------- io


_MAGIC = b"DSTV"


def dump_state(state: DenseState, path: str):
    """Write a state vector: magic, axis count, dims, row-major complex
    pairs, all little-endian."""
    arr = np.ascontiguousarray(state.tensor, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.astype("<c16").tobytes())


def load_state(path: str) -> DenseState:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise DomainError("not a dense state dump")
        (ndim,) = struct.unpack("<I", fh.read(4))
        dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != math.prod(dims):
        raise DomainError("dump payload does not match header dims")
    return DenseState(data.astype(np.complex128).reshape(dims))
