"""Acceptance gate: every release criterion, one pass/fail line each.

Run through pytest (each criterion is one test) or directly with
``python3 tests/test_acceptance.py`` for the plain report.  Tolerances are
stated inline; exact means Fraction equality.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np

from entverify import analytic, densesim as ds, ghz, mc, oracle
from entverify.models import (
    NoiseModel,
    StrategySpec,
    StrategyVariant,
    Verdict,
    fidelity_to_q,
    pow2_ceil_exponent,
)

FIDELITY_GRID = [Fraction(x, 100) for x in range(50, 100, 5)] + [Fraction(99, 100)]


def _report(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


# --------------------------------------------------------------------------


def test_oracle_equivalence():
    """Closed forms equal exhaustive enumeration, n <= 10, four fidelities."""
    t0 = time.perf_counter()
    fids = [Fraction(1, 2), Fraction(7, 10), Fraction(9, 10), Fraction(99, 100)]
    worst_float = 0.0
    checks = 0
    ok = True
    for F in fids:
        for n in range(1, 11):
            s = StrategySpec(StrategyVariant.RANK2_FULL, n)
            ex = oracle.enumerate_strategy_failure(s, NoiseModel.rank2(F))
            ok &= analytic.rank2_delta_full(F, n) == ex == F**n
            worst_float = max(
                worst_float, abs(analytic.rank2_delta_full(float(F), n) - float(ex))
            )
            s = StrategySpec(StrategyVariant.WERNER_FULL, n)
            ex = oracle.enumerate_strategy_failure(s, NoiseModel.werner(F))
            ok &= analytic.werner_delta_full(F, n) == ex
            worst_float = max(
                worst_float, abs(analytic.werner_delta_full(float(F), n) - float(ex))
            )
            checks += 2
            for m in range(1, pow2_ceil_exponent(n + 1) + 1):
                s = StrategySpec(StrategyVariant.WERNER_SUBSPACE, n, m=m)
                ex = oracle.enumerate_strategy_failure(s, NoiseModel.werner(F))
                ok &= analytic.werner_delta_subspace(F, n, m) == ex
                worst_float = max(
                    worst_float,
                    abs(analytic.werner_delta_subspace(float(F), n, m) - float(ex)),
                )
                checks += 1
    elapsed = time.perf_counter() - t0
    ok &= worst_float <= 1e-12 and elapsed < 60.0
    _report(
        "oracle equivalence, n <= 10",
        ok,
        f"{checks} exact checks, float dev {worst_float:.2e}, {elapsed:.1f}s",
    )


def test_mixture_route_consistency():
    """The q-mixture closed form equals the shift-count form, exactly."""
    ok = True
    for F in FIDELITY_GRID:
        q = fidelity_to_q(F)
        for n in range(1, 13):
            ok &= analytic.mixture_route_delta(q, n) == analytic.werner_delta_full(F, n)
            for m in range(1, pow2_ceil_exponent(n + 1) + 1):
                ok &= analytic.mixture_route_delta_subspace(
                    q, n, m
                ) == analytic.werner_delta_subspace(F, n, m)
    _report("mixture-route identity, n <= 12, full grid", ok, "exact equality")


def test_monte_carlo_validation():
    """10^6-trial estimates inside 4 sigma for twelve configurations."""
    F12, F7, F8, F9 = Fraction(1, 2), Fraction(7, 10), Fraction(8, 10), Fraction(9, 10)
    cases = [
        (StrategySpec(StrategyVariant.RANK2_FULL, 4), NoiseModel.rank2(F9)),
        (StrategySpec(StrategyVariant.RANK2_FULL, 10), NoiseModel.rank2(F12)),
        (StrategySpec(StrategyVariant.RANK2_SUBSPACE, 7, m=1), NoiseModel.rank2(F9)),
        (StrategySpec(StrategyVariant.RANK2_SUBSPACE, 6, m=2), NoiseModel.rank2(F7)),
        (StrategySpec(StrategyVariant.WERNER_FULL, 5), NoiseModel.werner(F8)),
        (StrategySpec(StrategyVariant.WERNER_FULL, 9), NoiseModel.werner(F9)),
        (StrategySpec(StrategyVariant.WERNER_SUBSPACE, 9, m=2), NoiseModel.werner(F9)),
        (StrategySpec(StrategyVariant.WERNER_SUBSPACE, 5, m=1), NoiseModel.werner(F7)),
        (StrategySpec(StrategyVariant.EMBED_ENG, 3, m_embed=2), NoiseModel.werner(F9)),
        (
            StrategySpec(StrategyVariant.EMBED_ENG_SUBSPACE, 3, m_embed=2, m=1),
            NoiseModel.werner(F9),
        ),
        (
            StrategySpec(StrategyVariant.DIRECT_EMBED_MEASURE, 0, m_embed=2),
            NoiseModel.werner(F9),
        ),
        (StrategySpec(StrategyVariant.SINGLE_COPY_BASELINE, 7), NoiseModel.werner(F8)),
    ]
    trials = 1_000_000
    worst = 0.0
    deterministic = True
    for i, (strategy, noise) in enumerate(cases):
        exact = float(oracle.enumerate_strategy_failure(strategy, noise))
        res = mc.monte_carlo(strategy, noise, trials, seed=101)
        sigma = max(math.sqrt(exact * (1 - exact) / trials), 1e-12)
        worst = max(worst, abs(res.estimate - exact) / sigma)
        if i < 3:
            multi = mc.monte_carlo(strategy, noise, trials, seed=101, workers=3)
            deterministic &= multi.accepts == res.accepts
    ok = worst < 4.0 and deterministic
    _report(
        "Monte Carlo vs oracle, 12 cases at 10^6 trials",
        ok,
        f"worst {worst:.2f} sigma (tol 4), worker-identical: {deterministic}",
    )


def test_gate_level_counter_action():
    """Counter gate on every Bell-basis control and every start index."""
    tol = 1e-10
    worst = 1.0
    for d in (2, 4, 8):
        for i in (0, 1):
            for j in (0, 1):
                control = ds.make_bell(i, j)
                for jj in range(d):
                    state = control.tensor_with(ds.make_qudit_bell(d, 0, jj))
                    out = ds.apply_bcx(state, (0, 1), (2, 3))
                    if j == 0:
                        expected = state  # invariance of the unflipped controls
                    else:
                        up = ds.make_computational_pair(0, 1).tensor_with(
                            ds.make_qudit_bell(d, 0, (jj + 1) % d)
                        )
                        down = ds.make_computational_pair(1, 0).tensor_with(
                            ds.make_qudit_bell(d, 0, (jj - 1) % d)
                        )
                        expected = ds.DenseState(
                            (up.tensor + (-1.0) ** i * down.tensor) / math.sqrt(2.0),
                            copy=False,
                        )
                    worst = min(worst, out.fidelity(expected))
    ok = worst >= 1.0 - tol
    _report(
        "counter gate on all Bell controls, d in {2,4,8}",
        ok,
        f"min fidelity 1 - {1.0 - worst:.2e} (tol 1e-10)",
    )


def test_joint_state_reproduction():
    """Accumulated state at n = 3, F = 0.8, d = 4 vs direct construction."""
    n, F, d = 3, 0.8, 4
    aux = ds.BranchMixture.pure(ds.make_qudit_bell(d, 0, 0))
    out = ds.apply_eng(ds.ensemble_with_aux(NoiseModel.rank2(F), n, aux), n)

    target, err = ds.make_bell(0, 0), ds.make_computational_pair(0, 1)
    branches = []
    for picks in itertools.product((0, 1), repeat=n):
        w = 1.0
        st = None
        for e in picks:
            w *= (1 - F) if e else F
            st = (err if e else target) if st is None else st.tensor_with(err if e else target)
        branches.append((w, st.tensor_with(ds.make_qudit_bell(d, 0, sum(picks)))))
    dist = ds.trace_distance(out, ds.BranchMixture(tuple(branches)))
    ok = dist <= 1e-10
    _report("joint counter state at n=3, F=0.8, d=4", ok, f"trace distance {dist:.2e}")


def test_recovery_round_trip():
    """Parity round, fresh-pair re-embed, correction, inverse accumulation."""
    n, d = 3, 8
    noise = NoiseModel.werner(0.85)
    aux = ds.BranchMixture.pure(ds.make_qudit_bell(d, 0, 0))
    joint = ds.apply_eng(ds.ensemble_with_aux(noise, n, aux), n)
    pair = (2 * n, 2 * n + 1)

    probs = [float(p) for p in noise.error_probs()]
    pures = [
        ds.make_bell(0, 0),
        ds.make_computational_pair(0, 1),
        ds.make_computational_pair(1, 0),
        ds.make_bell(1, 0),
    ]
    shifts = [0, 1, -1, 0]
    aux0 = ds.make_qudit_bell(d, 0, 0)

    def expected_for(parity: int, total: float) -> ds.BranchMixture:
        branches = []
        for assign in itertools.product(range(4), repeat=n):
            j = sum(shifts[k] for k in assign) % d
            if j % 2 != parity:
                continue
            w = math.prod(probs[k] for k in assign)
            st = pures[assign[0]]
            for k in assign[1:]:
                st = st.tensor_with(pures[k])
            branches.append((w / total, st.tensor_with(aux0)))
        return ds.BranchMixture(tuple(branches))

    worst = 0.0
    records = [r for r in ds.measure_parity_pair(joint, pair) if r.probability > 1e-12]
    for parity in (0, 1):
        group = [r for r in records if (0 if r.parity_even else 1) == parity]
        total = sum(r.probability for r in group)
        want = expected_for(parity, total)
        for record in group:
            restored = ds.reembed_and_correct(
                record.post_state, pair, record, ds.make_bell(0, 0)
            )
            final = ds.apply_eng_inverse(restored, n)
            worst = max(worst, ds.trace_distance(final, want))
    ok = worst <= 1e-10
    _report(
        "recovery round trip at d=8, n=3",
        ok,
        f"worst product-form trace distance {worst:.2e}",
    )


def test_embedding_formula():
    """Dense twirl of two noisy copies and the direct-measure statistics."""
    F = 0.9
    pair = ds.noise_branches(NoiseModel.werner(F))

    def fuse(st):
        return ds.DenseState(np.transpose(st.tensor, (2, 0, 3, 1)).reshape(4, 4))

    fused = ds.as_mixture(pair.tensor_with(pair)).map_states(fuse)
    iso = ds.twirl_to_isotropic(fused)
    q_dev = abs(iso.q - (16 * 0.81 - 1) / 15)

    dist = ds.amplitude_difference_distribution(ds.noise_branches(iso), (0, 1))
    delta_dev = abs(dist[0] - 0.848)
    ok = q_dev <= 1e-12 and delta_dev <= 1e-12
    _report(
        "embedding twirl and direct measurement",
        ok,
        f"q dev {q_dev:.2e}, delta dev {delta_dev:.2e} (tol 1e-12)",
    )


def test_asymptotic_constancy():
    """Subspace failure at n = 1023 sits within 5% of its 2^-m limit."""
    worst = 0.0
    for F in (0.7, 0.9):
        for m in (1, 2, 3):
            v = analytic.werner_delta_subspace(F, 1023, m)
            worst = max(worst, abs(v - 2.0**-m) / 2.0**-m)
    ok = worst <= 0.05
    _report("subspace asymptote at n=1023", ok, f"worst relative dev {worst:.2e}")


def test_resource_curve_structure():
    """Copy-count anchors and orderings behind the resource figure."""
    t0 = time.perf_counter()
    base = analytic.copies_required(StrategyVariant.SINGLE_COPY_BASELINE, 0.9, 0.1)
    coll = analytic.copies_required(StrategyVariant.RANK2_FULL, 0.9, 0.1)
    ok = base.copies_consumed == 22 and coll.n == 22 and coll.copies_consumed == 5

    sub_counts = set()
    for F in FIDELITY_GRID:
        rep = analytic.copies_required(StrategyVariant.RANK2_SUBSPACE, float(F), 0.1)
        sub_counts.add(rep.copies_consumed)
        b = analytic.copies_required(StrategyVariant.SINGLE_COPY_BASELINE, float(F), 0.1)
        c = analytic.copies_required(StrategyVariant.RANK2_FULL, float(F), 0.1)
        ok &= b.copies_consumed >= c.copies_consumed
        ok &= b.copies_consumed == analytic.single_copy_copies(0.1, float(F))
        ok &= c.copies_consumed == pow2_ceil_exponent(c.n + 1)
    ok &= sub_counts == {4}

    # the integer-rounded ratio is stepwise, so monotonicity is asserted on
    # the continuous copies ratio the steps are drawn from
    ratios = [analytic.improvement_ratio(0.1, float(F)) for F in FIDELITY_GRID]
    ok &= all(b > a for a, b in zip(ratios, ratios[1:]))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    _report(
        "resource curves: anchors, constancy, monotone ratio",
        ok,
        f"baseline 22 vs collective 5, subspace 4, {elapsed:.2f}s",
    )


def test_ghz_criteria():
    """Phase blindness, deterministic phase round, exact and dense passes."""
    phase_only = ghz.GHZDiagonalState(
        3, Fraction(0), Fraction(1), (Fraction(0),) * 3
    )
    blind = all(
        ghz.ghz_failure_probability(phase_only, n) == 1 for n in range(1, 5)
    )

    phase_det = all(
        ghz.ghz_verify(phase_only, 1, seed=s).verdict is Verdict.REJECT
        for s in range(40)
    )

    noise = ghz.GHZDiagonalState(
        3, Fraction(8, 10), Fraction(1, 20), (Fraction(0), Fraction(3, 40), Fraction(0))
    )
    exact = all(
        ghz.ghz_failure_probability(noise, n, method="dp")
        == ghz.ghz_failure_probability(noise, n, method="enum")
        for n in range(1, 7)
    )

    worst_tv = 0.0
    for n in (1, 2, 3):
        d = ghz.default_aux_dim(n)
        dense = ghz.dense_amplitude_round(noise, n, d)
        classes = noise.error_classes()
        ref = np.zeros((d,) * 2)
        for assign in itertools.product(range(len(classes)), repeat=n):
            w, vec = 1.0, [0, 0]
            for c in assign:
                p, shift, _ = classes[c]
                w *= float(p)
                vec = [(v + s) % d for v, s in zip(vec, shift)]
            ref[tuple(vec)] += w
        worst_tv = max(worst_tv, 0.5 * float(np.abs(dense - ref).sum()))

    ok = blind and phase_det and exact and worst_tv <= 1e-10
    _report(
        "GHZ: phase blindness, phase round, exact + dense agreement",
        ok,
        f"amplitude-round phase detection 0: {blind}, dense TVD {worst_tv:.2e}",
    )


# --------------------------------------------------------------------------

_CRITERIA = [
    test_oracle_equivalence,
    test_mixture_route_consistency,
    test_monte_carlo_validation,
    test_gate_level_counter_action,
    test_joint_state_reproduction,
    test_recovery_round_trip,
    test_embedding_formula,
    test_asymptotic_constancy,
    test_resource_curve_structure,
    test_ghz_criteria,
]


def main() -> int:
    failures = 0
    for criterion in _CRITERIA:
        try:
            criterion()
        except AssertionError:
            failures += 1
    print(f"{len(_CRITERIA) - failures}/{len(_CRITERIA)} criteria passed")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
