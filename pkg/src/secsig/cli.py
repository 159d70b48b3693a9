"""Command-line front door.

Subcommands: pareto, eval, check-persuasive, optimal-lp, dp, sweep, generate,
reproduce.  Exit codes: 0 success, 2 validation/usage error, 3 persuasiveness
violation found under --expect-persuasive.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .core import (
    Instance,
    Knowledge,
    ScenarioSpec,
    SecsigError,
    UtilityMode,
    format_rational,
    instance_to_json,
    load_instance,
    save_instance,
)
from .acceptance import AcceptanceConfig, reproduce
from .evaluate import best_so_far_dp, check_persuasive, exact_evaluate
from .instances import FAMILIES
from .lp import nested_lp_policy, _members
from .mechanisms import BestSoFarTable, MECHANISM_NAMES, make_mechanism
from .montecarlo import monte_carlo_evaluate
from .pareto import pareto_procedure
from .reports import (
    doc_to_json,
    eval_report_to_doc,
    flat_table,
    persuasiveness_to_doc,
)


class UsageError(Exception):
    pass


def _env_int(name: str, fallback: int | None) -> int | None:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}")


def _resolve_instance(args) -> Instance:
    raw = args.instance
    if raw is None:
        raise UsageError("--instance is required (a file path or family[:n[:seed]])")
    path = Path(raw)
    if path.exists():
        return load_instance(path)
    parts = raw.split(":")
    family = parts[0]
    if family not in FAMILIES:
        raise UsageError(
            f"--instance {raw!r} is neither a readable file nor a known family"
            f" (families: {', '.join(sorted(FAMILIES))})"
        )
    n = int(parts[1]) if len(parts) > 1 else (args.n or 8)
    seed = int(parts[2]) if len(parts) > 2 else (args.seed or 0)
    return FAMILIES[family](n, seed)


def _scenario_from(args) -> ScenarioSpec:
    return ScenarioSpec(
        knowledge=Knowledge.SECRETARY if args.scenario == "secretary" else Knowledge.BASIC,
        disclosure=bool(args.disclosure),
        sender_mode=UtilityMode(args.sender_utility),
        receiver_mode=UtilityMode(args.receiver_utility),
    )


def _mechanism_from(args, inst: Instance | None):
    table = None
    if args.mechanism == "best-so-far":
        if not args.table:
            raise UsageError("best-so-far needs --table <file>: one row per round, "
                             "either 'p' or 'p_sender p_receiver'")
        rows = [line.split() for line in Path(args.table).read_text().splitlines()
                if line.strip()]
        widths = {len(r) for r in rows}
        if widths == {1}:
            table = BestSoFarTable.symmetric([Fraction(r[0]) for r in rows])
        elif widths == {2}:
            table = BestSoFarTable(p_sender=tuple(Fraction(r[0]) for r in rows),
                                   p_receiver=tuple(Fraction(r[1]) for r in rows))
        else:
            raise UsageError("table rows must all have one or two entries")
    return make_mechanism(
        args.mechanism, inst=inst, n=args.n, s=args.s,
        sender_mode=UtilityMode(args.sender_utility), table=table,
    )


def _emit(args, docs: list[dict]) -> None:
    if args.format == "table":
        text = flat_table(docs)
    else:
        text = "\n".join(doc_to_json(d) for d in docs) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _scenario_doc(scenario: ScenarioSpec) -> dict:
    return {
        "knowledge": scenario.knowledge.value,
        "disclosure": scenario.disclosure,
        "sender_utility": scenario.sender_mode.value,
        "receiver_utility": scenario.receiver_mode.value,
    }


def cmd_pareto(args) -> int:
    inst = _resolve_instance(args)
    res = pareto_procedure(inst, UtilityMode(args.sender_utility))
    doc = {
        "kind": "pareto-result",
        "instance": inst.name or "-",
        "n": inst.n,
        "s": None,
        "a": res.a + 1,
        "b": res.b + 1,
        "alpha": format_rational(res.alpha),
        "mu": format_rational(res.mu_r),
        "metrics": {
            "opt": {"exact": format_rational(res.opt_value), "float": float(res.opt_value)},
        },
        "mechanism": "pareto",
    }
    _emit(args, [doc])
    return 0


def cmd_eval(args) -> int:
    inst = _resolve_instance(args)
    scenario = _scenario_from(args)
    mech = _mechanism_from(args, inst)
    if args.mc:
        report = monte_carlo_evaluate(inst, mech, scenario, samples=args.mc,
                                      seed=args.seed or 0, jobs=args.jobs)
    else:
        report = exact_evaluate(inst, mech, scenario)
    doc = eval_report_to_doc(report, mechanism=mech.name, instance=inst.name or "-",
                             n=inst.n, s=mech.param("s"), scenario=_scenario_doc(scenario))
    _emit(args, [doc])
    return 0


def cmd_check_persuasive(args) -> int:
    inst = _resolve_instance(args)
    scenario = _scenario_from(args)
    mech = _mechanism_from(args, inst)
    report = check_persuasive(inst, mech, scenario)
    doc = persuasiveness_to_doc(report, mechanism=mech.name, instance=inst.name or "-",
                                scenario=_scenario_doc(scenario))
    doc["n"] = inst.n
    _emit(args, [doc])
    if args.expect_persuasive and not report.persuasive:
        return 3
    return 0


def cmd_optimal_lp(args) -> int:
    inst = _resolve_instance(args)
    pol = nested_lp_policy(inst, UtilityMode(args.sender_utility))
    full = (1 << inst.n) - 1
    subsets = []
    for mask in sorted(pol.u_s, key=lambda m: (m.bit_count(), m)):
        subsets.append({
            "ids": [inst.candidates[p].id for p in _members(mask)],
            "sender_value": format_rational(pol.u_s[mask]),
            "receiver_value": format_rational(pol.u_r[mask]),
            "hire_probabilities": [format_rational(x) for x in pol.x[mask]],
        })
    doc = {
        "kind": "optimal-lp-report",
        "mechanism": "nested-lp",
        "instance": inst.name or "-",
        "n": inst.n,
        "s": None,
        "metrics": {
            "sender_value": {"exact": format_rational(pol.u_s[full]),
                             "float": float(pol.u_s[full])},
        },
        "full_set_policy": [format_rational(x) for x in pol.x[full]],
        "subsets": subsets,
    }
    _emit(args, [doc])
    return 0


def cmd_dp(args) -> int:
    if not args.n:
        raise UsageError("dp needs --n")
    table = best_so_far_dp(args.n)
    doc = {
        "kind": "dp-report",
        "mechanism": "best-so-far",
        "instance": "-",
        "n": args.n,
        "s": table.threshold - 1,
        "u": [format_rational(x) for x in table.u],
        "v": [format_rational(x) for x in table.v],
        "first_hire_round": table.threshold,
        "sample_rounds": table.threshold - 1,
        "metrics": {
            "success": {"exact": format_rational(table.u[0]), "float": float(table.u[0])},
        },
    }
    _emit(args, [doc])
    return 0


def cmd_sweep(args) -> int:
    if not args.n:
        raise UsageError("sweep needs --n")
    n = args.n
    lo, hi, step = (float(x) for x in args.s_grid.split(":"))
    rows = []
    inst = _resolve_instance(args) if args.instance else None
    scenario = _scenario_from(args)
    c = lo
    while c <= hi + 1e-9:
        s = max(1, min(n - 1, round(c * n)))
        bound_card = Fraction(s, n * (n - 1) * (n - 2)) * sum(t - 2 for t in range(s + 1, n))
        bound_ord = Fraction(s, (n - 1) * (n - 2)) * sum(Fraction(t - 2, t) for t in range(s + 1, n))
        row = {
            "kind": "sweep-point",
            "mechanism": args.mechanism,
            "instance": inst.name if inst else "-",
            "n": n,
            "s": s,
            "metrics": {
                "sample_fraction": {"exact": format_rational(Fraction(s, n)), "float": s / n},
                "bound_cardinal": {"exact": format_rational(bound_card), "float": float(bound_card)},
                "bound_ordinal": {"exact": format_rational(bound_ord), "float": float(bound_ord)},
            },
        }
        if inst is not None and args.mc:
            mech = make_mechanism(args.mechanism, inst=inst, n=n, s=s,
                                  sender_mode=UtilityMode(args.sender_utility))
            rep = monte_carlo_evaluate(inst, mech, scenario, samples=args.mc,
                                       seed=args.seed or 0, jobs=args.jobs)
            opt = float(pareto_procedure(inst, UtilityMode(args.sender_utility)).opt_value)
            metric = rep.sender_eu if args.sender_utility == "cardinal" else rep.sender_success
            row["metrics"]["mc_ratio"] = {"float": metric / opt if opt else float("nan")}
        rows.append(row)
        c += step
    _emit(args, rows)
    return 0


def cmd_generate(args) -> int:
    if args.family not in FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; choose from {', '.join(sorted(FAMILIES))}")
    if not args.n:
        raise UsageError("generate needs --n")
    inst = FAMILIES[args.family](args.n, args.seed or 0)
    if args.out:
        save_instance(inst, args.out)
    else:
        sys.stdout.write(instance_to_json(inst) + "\n")
    return 0


def cmd_reproduce(args) -> int:
    import dataclasses

    seed = args.seed if args.seed is not None else 42
    if args.quick:
        cfg = AcceptanceConfig.quick(seed=seed, jobs=args.jobs)
        if args.mc:
            cfg = dataclasses.replace(cfg, mc_samples=args.mc)
    else:
        cfg = AcceptanceConfig(seed=seed, jobs=args.jobs, mc_samples=args.mc or 1_000_000)
    results, json_text, table_text = reproduce(cfg, echo=print)
    out_dir = Path(args.out) if args.out else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "acceptance_report.json").write_text(json_text, encoding="utf-8")
    (out_dir / "acceptance_table.tsv").write_text(table_text, encoding="utf-8")
    print(f"reports written to {out_dir}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secsig",
        description="Signaling mechanisms and incentive checks for sequential hiring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mechanism=False):
        p.add_argument("--scenario", choices=["basic", "secretary"], default="basic")
        p.add_argument("--disclosure", action="store_true")
        p.add_argument("--sender-utility", choices=["ordinal", "cardinal"], default="cardinal")
        p.add_argument("--receiver-utility", choices=["ordinal", "cardinal"], default="cardinal")
        p.add_argument("--instance", help="instance file or family[:n[:seed]]")
        p.add_argument("--n", type=int)
        p.add_argument("--s", type=int)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mc", type=int, help="Monte Carlo sample count (omit for exact)")
        p.add_argument("--out")
        p.add_argument("--format", choices=["structured", "table"], default="structured")
        p.add_argument("--jobs", type=int, default=None)
        if mechanism:
            p.add_argument("--mechanism", choices=MECHANISM_NAMES, required=True)
            p.add_argument("--table", help="probability table file for best-so-far")
            p.add_argument("--expect-persuasive", action="store_true")

    p = sub.add_parser("pareto", help="print the benchmark-optimal lottery")
    common(p)
    p.set_defaults(fn=cmd_pareto)

    p = sub.add_parser("eval", help="evaluate a mechanism (exact or Monte Carlo)")
    common(p, mechanism=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("check-persuasive", help="best-response check over information sets")
    common(p, mechanism=True)
    p.set_defaults(fn=cmd_check_persuasive)

    p = sub.add_parser("optimal-lp", help="subset backward induction tables")
    common(p)
    p.set_defaults(fn=cmd_optimal_lp)

    p = sub.add_parser("dp", help="best-so-far recursion table")
    common(p)
    p.set_defaults(fn=cmd_dp)

    p = sub.add_parser("sweep", help="sample-size sweep with guarantee curves")
    common(p, mechanism=True)
    p.add_argument("--s-grid", default="0.1:0.9:0.1", help="lo:hi:step as fractions of n")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("generate", help="write an instance file")
    common(p)
    p.add_argument("--family", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("reproduce", help="run the acceptance suite and write reports")
    common(p)
    p.add_argument("--quick", action="store_true", help="reduced instance and sample counts")
    p.set_defaults(fn=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return exc.code if isinstance(exc.code, int) else 2
    if args.seed is None:
        args.seed = _env_int("SECSIG_SEED", None)
    if getattr(args, "jobs", None) is None:
        args.jobs = _env_int("SECSIG_JOBS", None) or os.cpu_count() or 1
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SecsigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
