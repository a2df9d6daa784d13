"""Command-line experiment runner.

Four subcommands: ``analytic`` evaluates closed forms (JSON), ``simulate``
runs the Monte Carlo estimator (CSV), ``reproduce`` sweeps the default
grids behind the figure datasets (CSV files), and ``crosscheck`` runs the
cross-layer equivalence suite.

Exit codes: 0 success, 2 domain error, 3 resource limit, 4 cross-check
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytic, densesim, ghz, oracle
from .mc import monte_carlo
from .models import (
    CrossCheckError,
    DomainError,
    NoiseKind,
    NoiseModel,
    ResourceLimitError,
    StrategySpec,
    StrategyVariant,
    fidelity_to_q,
    pow2_ceil_exponent,
)

CSV_HEADER = [
    "strategy",
    "F",
    "n",
    "m",
    "m_embed",
    "delta",
    "copies_consumed",
    "ebits_consumed",
    "method",
    "trials",
    "estimate",
    "ci_low",
    "ci_high",
    "seed",
]

# default reproduction grid; the source figures do not tabulate theirs
FIDELITY_GRID = [x / 100 for x in range(50, 100, 5)] + [0.99]
DELTA_TARGET = 0.1


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row(**fields) -> list[str]:
    unknown = set(fields) - set(CSV_HEADER)
    if unknown:
        raise ValueError(f"unknown CSV fields: {unknown}")
    return [_fmt(fields.get(col)) for col in CSV_HEADER]


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(rows)


def _parse_number(text: str, exact: bool):
    return Fraction(text) if exact else float(text)


def _strategy_from_args(args) -> StrategySpec:
    variant = StrategyVariant(args.strategy)
    return StrategySpec(
        variant,
        n=args.n if args.n is not None else 0,
        m=args.m,
        m_embed=args.m_embed,
    )


def _resource_fields(strategy: StrategySpec) -> tuple[int, float]:
    """(copies consumed, ebits consumed) for one full run of the strategy."""
    v = strategy.variant
    if v is StrategyVariant.SINGLE_COPY_BASELINE:
        return strategy.n, 0.0
    if strategy.uses_embedded_aux():
        copies = strategy.m_embed
        if v is StrategyVariant.EMBED_ENG_SUBSPACE:
            copies = strategy.m
        return copies, 0.0
    d = strategy.aux_dimension()
    if v in (StrategyVariant.RANK2_SUBSPACE, StrategyVariant.WERNER_SUBSPACE):
        return 0, float(strategy.m)
    return 0, math.log2(d)


def _noise_for(strategy: StrategySpec, fidelity, kind: str) -> NoiseModel:
    if kind == "pure-target":
        return NoiseModel.pure_target()
    if kind == "rank2":
        return NoiseModel.rank2(fidelity)
    if kind == "werner":
        return NoiseModel.werner(fidelity)
    # auto: rank-2 variants sample rank-2 noise, everything else Werner
    if strategy.variant in (
        StrategyVariant.RANK2_FULL,
        StrategyVariant.RANK2_SUBSPACE,
    ):
        return NoiseModel.rank2(fidelity)
    return NoiseModel.werner(fidelity)


# ------------------------------------------------------------ subcommands


def cmd_analytic(args) -> int:
    fidelity = _parse_number(args.fidelity, args.exact)
    if args.delta is not None and args.n is None:
        delta_target = _parse_number(args.delta, args.exact)
        report = analytic.copies_required(
            StrategyVariant(args.strategy), fidelity, delta_target
        )
        out = {
            "strategy": report.variant.value,
            "F": float(report.fidelity),
            "delta_target": float(report.delta_target),
            "n": report.n,
            "copies": report.copies_consumed,
            "delta": float(report.failure),
        }
        if args.exact and isinstance(report.failure, Fraction):
            out["delta_exact"] = str(report.failure)
    else:
        if args.n is None:
            raise DomainError("provide --n for a failure query or --delta for a resource query")
        strategy = _strategy_from_args(args)
        delta = analytic.strategy_failure(strategy, fidelity)
        copies, ebits = _resource_fields(strategy)
        out = {
            "strategy": strategy.variant.value,
            "F": float(fidelity),
            "n": strategy.n,
            "m": strategy.m,
            "m_embed": strategy.m_embed,
            "delta": float(delta),
            "copies_consumed": copies,
            "ebits_consumed": ebits,
        }
        if args.exact and isinstance(delta, Fraction):
            out["delta_exact"] = str(delta)
    print(json.dumps(out))
    return 0


def cmd_simulate(args) -> int:
    fidelity = float(args.fidelity)
    strategy = _strategy_from_args(args)
    noise = _noise_for(strategy, fidelity, args.noise)
    result = monte_carlo(
        strategy, noise, trials=args.trials, seed=args.seed, workers=args.workers
    )
    copies, ebits = _resource_fields(strategy)
    row = _row(
        strategy=strategy.variant.value,
        F=fidelity,
        n=strategy.n,
        m=strategy.m,
        m_embed=strategy.m_embed,
        copies_consumed=copies,
        ebits_consumed=ebits,
        method="mc",
        trials=result.trials,
        estimate=result.estimate,
        ci_low=result.ci_low,
        ci_high=result.ci_high,
        seed=result.seed,
    )
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerow(row)
    if args.out:
        _write_csv(args.out, [row])
    return 0


def _fig2a_rows():
    rows = []
    for f in FIDELITY_GRID:
        for variant in (
            StrategyVariant.SINGLE_COPY_BASELINE,
            StrategyVariant.RANK2_FULL,
            StrategyVariant.RANK2_SUBSPACE,
        ):
            rep = analytic.copies_required(variant, f, DELTA_TARGET)
            rows.append(
                _row(
                    strategy=variant.value,
                    F=f,
                    n=rep.n,
                    m=rep.copies_consumed if rep.n is None else None,
                    delta=float(rep.failure),
                    copies_consumed=rep.copies_consumed,
                    method="analytic",
                )
            )
    return rows


def _fig2b_rows():
    # nine consumed copies each way: measure nine, or embed nine into a
    # d = 512 auxiliary and verify the largest window n = d - 1
    rows = []
    m_embed = 9
    n_embed = (1 << m_embed) - 1
    for f in FIDELITY_GRID:
        rows.append(
            _row(
                strategy=StrategyVariant.SINGLE_COPY_BASELINE.value,
                F=f,
                n=m_embed,
                delta=f**m_embed,
                copies_consumed=m_embed,
                method="analytic",
            )
        )
        rows.append(
            _row(
                strategy=StrategyVariant.EMBED_ENG.value,
                F=f,
                n=n_embed,
                m_embed=m_embed,
                delta=float(analytic.embed_eng_delta(f, n_embed, m_embed)),
                copies_consumed=m_embed,
                method="analytic",
            )
        )
    return rows


def _ratio_rows(full_variant, subspace_variant):
    rows = []
    for f in FIDELITY_GRID:
        base = analytic.copies_required(
            StrategyVariant.SINGLE_COPY_BASELINE, f, DELTA_TARGET
        )
        for variant in (full_variant, subspace_variant):
            rep = analytic.copies_required(variant, f, DELTA_TARGET)
            rows.append(
                _row(
                    strategy=variant.value,
                    F=f,
                    n=rep.n,
                    m=rep.copies_consumed if rep.n is None else None,
                    delta=float(rep.failure),
                    copies_consumed=rep.copies_consumed,
                    method="ratio",
                    estimate=base.copies_consumed / rep.copies_consumed,
                )
            )
    return rows


def _app_c_c_rows():
    rows = []
    for f in FIDELITY_GRID:
        for m_embed in range(1, 10):
            rows.append(
                _row(
                    strategy=StrategyVariant.DIRECT_EMBED_MEASURE.value,
                    F=f,
                    n=0,
                    m_embed=m_embed,
                    delta=float(analytic.direct_measure_delta(f, m_embed)),
                    copies_consumed=m_embed,
                    method="analytic",
                )
            )
            rows.append(
                _row(
                    strategy=StrategyVariant.SINGLE_COPY_BASELINE.value,
                    F=f,
                    n=m_embed,
                    delta=f**m_embed,
                    copies_consumed=m_embed,
                    method="analytic",
                )
            )
    return rows


def _app_c_d_rows():
    # equal consumed resources c: a pure 2^c-dimensional auxiliary (c ebits)
    # versus an auxiliary embedded from c ensemble copies
    rows = []
    for f in FIDELITY_GRID:
        for c in range(1, 10):
            n = (1 << c) - 1
            d = 1 << c
            rows.append(
                _row(
                    strategy=StrategyVariant.WERNER_FULL.value,
                    F=f,
                    n=n,
                    delta=float(analytic.werner_pr_j(f, n, d, 0)),
                    copies_consumed=0,
                    ebits_consumed=float(c),
                    method="analytic",
                )
            )
            rows.append(
                _row(
                    strategy=StrategyVariant.EMBED_ENG.value,
                    F=f,
                    n=n,
                    m_embed=c,
                    delta=float(analytic.embed_eng_delta(f, n, c)),
                    copies_consumed=c,
                    ebits_consumed=0.0,
                    method="analytic",
                )
            )
    return rows


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    figures = {
        "2a": {"fig2a.csv": _fig2a_rows},
        "2b": {"fig2b.csv": _fig2b_rows},
        "app-c": {
            "app_c_a.csv": lambda: _ratio_rows(
                StrategyVariant.RANK2_FULL, StrategyVariant.RANK2_SUBSPACE
            ),
            "app_c_b.csv": lambda: _ratio_rows(
                StrategyVariant.WERNER_FULL, StrategyVariant.WERNER_SUBSPACE
            ),
            "app_c_c.csv": _app_c_c_rows,
            "app_c_d.csv": _app_c_d_rows,
        },
    }
    chosen = figures[args.figure] if args.figure != "all" else {
        name: fn for group in figures.values() for name, fn in group.items()
    }
    for name, builder in chosen.items():
        _write_csv(out_dir / name, builder())
        print(f"wrote {out_dir / name}")
    return 0


def _check(name: str, deviation: float, tol: float, failures: list):
    status = "PASS" if deviation <= tol else "FAIL"
    print(f"{name}: max deviation {deviation:.3g} (tol {tol:g}) [{status}]")
    if status == "FAIL":
        failures.append(name)


def cmd_crosscheck(args) -> int:
    failures: list[str] = []
    fids = (Fraction(7, 10), Fraction(9, 10))

    # closed forms against the enumeration oracle, exact equality
    worst_exact = 0
    for f in fids:
        for noise in (NoiseModel.rank2(f), NoiseModel.werner(f)):
            for n in range(1, args.max_n + 1):
                for strat in _crosscheck_strategies(n):
                    if strat.variant in (
                        StrategyVariant.RANK2_FULL,
                        StrategyVariant.RANK2_SUBSPACE,
                    ) and noise.kind is not NoiseKind.RANK2:
                        continue
                    if strat.variant in (
                        StrategyVariant.WERNER_FULL,
                        StrategyVariant.WERNER_SUBSPACE,
                        StrategyVariant.EMBED_ENG,
                        StrategyVariant.EMBED_ENG_SUBSPACE,
                    ) and noise.kind is not NoiseKind.WERNER:
                        # the embed closed forms assume a Werner ensemble
                        continue
                    a = analytic.strategy_failure(strat, f)
                    b = oracle.enumerate_strategy_failure(strat, noise)
                    if a != b:
                        worst_exact = max(worst_exact, abs(float(a) - float(b)))
    _check("analytic-vs-oracle(exact)", worst_exact, 0.0, failures)

    # mixture-route closed form against the shift-count form
    worst_mix = 0
    for f in fids:
        q = fidelity_to_q(f)
        for n in range(1, args.max_n + 1):
            if analytic.mixture_route_delta(q, n) != analytic.werner_delta_full(f, n):
                worst_mix = 1
            for m in range(1, pow2_ceil_exponent(n + 1) + 1):
                if analytic.mixture_route_delta_subspace(
                    q, n, m
                ) != analytic.werner_delta_subspace(f, n, m):
                    worst_mix = 1
    _check("mixture-route-identity", worst_mix, 0.0, failures)

    # Monte Carlo against the closed forms
    worst_mc = 0.0
    for strat, noise in (
        (StrategySpec(StrategyVariant.RANK2_FULL, n=4), NoiseModel.rank2(0.9)),
        (StrategySpec(StrategyVariant.WERNER_SUBSPACE, n=5, m=1), NoiseModel.werner(0.7)),
        (StrategySpec(StrategyVariant.EMBED_ENG, n=3, m_embed=2), NoiseModel.werner(0.9)),
    ):
        exact = float(analytic.strategy_failure(strat, noise.fidelity))
        r = monte_carlo(strat, noise, args.trials, seed=args.seed)
        worst_mc = max(worst_mc, abs(r.estimate - exact) / max(r.std_error, 1e-12))
    _check("monte-carlo-vs-analytic(sigma)", worst_mc, 5.0, failures)

    # dense simulation against the oracle distribution
    worst_tv = 0.0
    for f in fids:
        noise_e = NoiseModel.werner(f)
        noise_f = NoiseModel.werner(float(f))
        for n in (1, 2, 3):
            d = n + 1
            aux = densesim.BranchMixture.pure(densesim.make_qudit_bell(d, 0, 0))
            ev = densesim.apply_eng(
                densesim.ensemble_with_aux(noise_f, n, aux), n
            )
            dist = densesim.amplitude_difference_distribution(ev, (2 * n, 2 * n + 1))
            ex = oracle.enumerate_shift_distribution(noise_e, n, d).as_floats()
            worst_tv = max(worst_tv, 0.5 * float(np.abs(dist - np.array(ex)).sum()))
    _check("dense-vs-oracle(tv)", worst_tv, 1e-10, failures)

    # GHZ layer: dynamic programming against plain enumeration, then MC
    gnoise = ghz.GHZDiagonalState.single_error(3, Fraction(8, 10), k=2, lambda0=Fraction(5, 100))
    worst_g = 0
    for n in (1, 2, 3, 4):
        for phase in (False, True):
            a = ghz.ghz_failure_probability(gnoise, n, phase_round=phase)
            b = ghz.ghz_failure_probability(gnoise, n, method="enum", phase_round=phase)
            if a != b:
                worst_g = 1
    _check("ghz-dp-vs-enum", worst_g, 0.0, failures)

    gf = ghz.GHZDiagonalState.single_error(3, 0.8, k=2, lambda0=0.05)
    exact = float(ghz.ghz_failure_probability(gnoise, 4))
    r = ghz.ghz_monte_carlo(gf, 4, args.trials, seed=args.seed)
    _check(
        "ghz-mc-vs-dp(sigma)",
        abs(r.estimate - exact) / max(r.std_error, 1e-12),
        5.0,
        failures,
    )

    if failures:
        raise CrossCheckError(f"cross-checks failed: {', '.join(failures)}")
    print("all cross-checks passed")
    return 0


def _crosscheck_strategies(n: int):
    out = [
        StrategySpec(StrategyVariant.RANK2_FULL, n=n),
        StrategySpec(StrategyVariant.WERNER_FULL, n=n),
        StrategySpec(StrategyVariant.SINGLE_COPY_BASELINE, n=n),
    ]
    for m in range(1, pow2_ceil_exponent(n + 1) + 1):
        out.append(StrategySpec(StrategyVariant.RANK2_SUBSPACE, n=n, m=m))
        out.append(StrategySpec(StrategyVariant.WERNER_SUBSPACE, n=n, m=m))
    for m_embed in (1, 2):
        if n <= (1 << m_embed) - 1:
            out.append(StrategySpec(StrategyVariant.EMBED_ENG, n=n, m_embed=m_embed))
            for m in range(1, m_embed + 1):
                out.append(
                    StrategySpec(
                        StrategyVariant.EMBED_ENG_SUBSPACE, n=n, m=m, m_embed=m_embed
                    )
                )
    return out


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="entverify",
        description="Collective verification of entangled-state ensembles.",
    )
    p.add_argument("--config", help="JSON file with default values for the flags")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="evaluate closed-form failure/resources")
    pa.add_argument("--strategy", required=True, choices=[v.value for v in StrategyVariant])
    pa.add_argument("--fidelity", required=True)
    pa.add_argument("--n", type=int)
    pa.add_argument("--m", type=int)
    pa.add_argument("--m-embed", dest="m_embed", type=int)
    pa.add_argument("--delta", help="failure target for a resource query")
    pa.add_argument("--exact", action="store_true", help="rational arithmetic")
    pa.set_defaults(func=cmd_analytic, subparser=pa)

    ps = sub.add_parser("simulate", help="Monte Carlo estimate of the accept probability")
    ps.add_argument("--strategy", required=True, choices=[v.value for v in StrategyVariant])
    ps.add_argument("--fidelity", required=True, type=float)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--m", type=int)
    ps.add_argument("--m-embed", dest="m_embed", type=int)
    ps.add_argument("--noise", choices=["auto", "pure-target", "rank2", "werner"], default="auto")
    ps.add_argument("--trials", type=int, default=100_000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--workers", type=int, default=1)
    ps.add_argument("--out", help="also write the CSV to this path")
    ps.set_defaults(func=cmd_simulate, subparser=ps)

    pr = sub.add_parser("reproduce", help="emit the figure datasets as CSV")
    pr.add_argument("--figure", choices=["2a", "2b", "app-c", "all"], required=True)
    pr.add_argument("--out", required=True, help="output directory")
    pr.set_defaults(func=cmd_reproduce, subparser=pr)

    pc = sub.add_parser("crosscheck", help="run the cross-layer equivalence suite")
    pc.add_argument("--max-n", dest="max_n", type=int, default=6)
    pc.add_argument("--trials", type=int, default=200_000)
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=cmd_crosscheck, subparser=pc)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = json.load(fh)
        # flag defaults live on the subcommand parser, not the root one
        sub = getattr(args, "subparser", parser)
        known = {a.replace("-", "_"): v for a, v in defaults.items()}
        for key, value in known.items():
            if getattr(args, key, None) in (None, sub.get_default(key)):
                setattr(args, key, value)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except CrossCheckError as exc:
        print(f"cross-check failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
