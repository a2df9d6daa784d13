"""Accept-count kernels for the Monte Carlo drivers.

Each kernel exists twice: a scalar loop (compiled with numba when enabled)
and a vectorised numpy equivalent.  Both read the same pre-drawn uniform
block laid out as ``u[trial, column]`` and return the number of accepted
trials, so the two backends agree bit for bit.

Column layout for the pair-verification kernels:

* column 0: auxiliary branch choice (compared against ``q_aux``),
* column 1: auxiliary index draw for the uniform branch,
* columns 2 .. n+1: per-copy error-class draws.

A draw ``x`` in a copy column maps to type-1 for ``x < t1``, type-2 for
``t1 <= x < t2`` and to a counter-invariant class otherwise.  Strategies
with a pure auxiliary register pass ``q_aux = 1.0`` so the branch draw
always lands on ``j0 = 0``.
"""

from __future__ import annotations

import numpy as np

from .speedup import USE_NUMBA, njit


def _counter_scalar(u, n, d, modulus, q_aux, t1, t2):
    accepts = 0
    for t in range(u.shape[0]):
        if u[t, 0] < q_aux:
            j0 = 0
        else:
            j0 = int(u[t, 1] * d)
            if j0 >= d:
                j0 = d - 1
        delta = 0
        for i in range(n):
            x = u[t, 2 + i]
            if x < t1:
                delta += 1
            elif x < t2:
                delta -= 1
        if (j0 + delta) % modulus == 0:
            accepts += 1
    return accepts


def _counter_numpy(u, n, d, modulus, q_aux, t1, t2):
    idx = np.minimum((u[:, 1] * d).astype(np.int64), d - 1)
    j0 = np.where(u[:, 0] < q_aux, 0, idx)
    x = u[:, 2 : 2 + n]
    plus = (x < t1).sum(axis=1)
    minus = ((x >= t1) & (x < t2)).sum(axis=1)
    accept = (j0 + plus - minus) % modulus == 0
    return int(accept.sum())


def _baseline_scalar(u, n, t3):
    accepts = 0
    for t in range(u.shape[0]):
        passed = True
        for i in range(n):
            if u[t, 2 + i] < t3:
                passed = False
                break
        if passed:
            accepts += 1
    return accepts


def _baseline_numpy(u, n, t3):
    x = u[:, 2 : 2 + n]
    return int((x >= t3).all(axis=1).sum())


def _ghz_scalar(u, cum, shifts, phases, d, check_phase, scratch):
    # scratch: int64 workspace of length shifts.shape[1], reused per trial
    accepts = 0
    parties = shifts.shape[1]
    nclass = cum.shape[0]
    for t in range(u.shape[0]):
        for p in range(parties):
            scratch[p] = 0
        parity = 0
        for i in range(u.shape[1]):
            c = np.searchsorted(cum, u[t, i], side="right")
            if c >= nclass:
                c = nclass - 1
            for p in range(parties):
                scratch[p] += shifts[c, p]
            parity += phases[c]
        ok = True
        for p in range(parties):
            if scratch[p] % d != 0:
                ok = False
                break
        if ok and check_phase and parity % 2 != 0:
            ok = False
        if ok:
            accepts += 1
    return accepts


def _ghz_numpy(u, cum, shifts, phases, d, check_phase):
    idx = np.minimum(
        np.searchsorted(cum, u, side="right"), cum.shape[0] - 1
    )
    totals = shifts[idx].sum(axis=1) % d
    accept = (totals == 0).all(axis=1)
    if check_phase:
        accept &= phases[idx].sum(axis=1) % 2 == 0
    return int(accept.sum())


_counter_jit = njit(_counter_scalar)
_baseline_jit = njit(_baseline_scalar)
_ghz_jit = njit(_ghz_scalar)


def counter_accepts(u, n, d, modulus, q_aux, t1, t2) -> int:
    if USE_NUMBA:
        return int(_counter_jit(u, n, d, modulus, q_aux, t1, t2))
    return _counter_numpy(u, n, d, modulus, q_aux, t1, t2)


def baseline_accepts(u, n, t3) -> int:
    if USE_NUMBA:
        return int(_baseline_jit(u, n, t3))
    return _baseline_numpy(u, n, t3)


def ghz_accepts(u, cum, shifts, phases, d, check_phase) -> int:
    if USE_NUMBA:
        scratch = np.zeros(shifts.shape[1], dtype=np.int64)
        return int(_ghz_jit(u, cum, shifts, phases, d, check_phase, scratch))
    return _ghz_numpy(u, cum, shifts, phases, d, check_phase)
