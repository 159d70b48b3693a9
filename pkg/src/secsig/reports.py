"""Report serialization: a structured JSON document for machines and a flat
one-row-per-metric table for plotting pipelines.

Rationals serialize as "p/q" strings and parse back exactly, so emitted
reports round-trip to the in-memory values.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .core import format_rational, parse_rational
from .evaluate import EvalReport, PersuasivenessReport


def _value_fields(v) -> dict:
    if isinstance(v, Fraction):
        return {"exact": format_rational(v), "float": float(v)}
    return {"float": float(v)}


def eval_report_to_doc(report: EvalReport, *, mechanism: str, instance: str,
                       n: int, s: int | None = None, scenario: dict | None = None) -> dict:
    metrics = {
        "sender_success": report.sender_success,
        "sender_eu": report.sender_eu,
        "receiver_success": report.receiver_success,
        "receiver_eu": report.receiver_eu,
    }
    doc = {
        "kind": "eval-report",
        "mechanism": mechanism,
        "instance": instance,
        "n": n,
        "s": s,
        "scenario": scenario or {},
        "mode": report.mode,
        "metrics": {k: _value_fields(v) for k, v in metrics.items()},
        "hire_round_pmf": [
            format_rational(p) if isinstance(p, Fraction) else float(p)
            for p in report.hire_round_pmf
        ],
    }
    if report.mode == "monte-carlo":
        doc["samples"] = report.samples
        doc["seed"] = report.seed
        doc["halfwidth_95"] = report.halfwidths
    return doc


def persuasiveness_to_doc(report: PersuasivenessReport, *, mechanism: str,
                          instance: str, scenario: dict | None = None) -> dict:
    def notes(items):
        return [
            {
                "round": v.round,
                "signal": v.signal.value,
                "context": v.context,
                "obedient": format_rational(v.obedient_value),
                "deviation": format_rational(v.deviation_value),
            }
            for v in items
        ]

    return {
        "kind": "persuasiveness-report",
        "mechanism": mechanism,
        "instance": instance,
        "scenario": scenario or {},
        "persuasive": report.persuasive,
        "v_obedient": format_rational(report.v_obedient),
        "v_best_response": format_rational(report.v_best_response),
        "violations": notes(report.violations),
        "indifferent": notes(report.indifferent),
    }


def doc_to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def parse_report(text: str) -> dict:
    """Parse a structured report, converting every "p/q" field back to
    Fraction under an ``exact`` key or rational-valued field."""
    doc = json.loads(text)

    def convert(obj):
        if isinstance(obj, dict):
            return {
                k: parse_rational(v) if k in ("exact", "obedient", "deviation",
                                              "v_obedient", "v_best_response")
                and isinstance(v, (str, int)) else convert(v)
                for k, v in obj.items()
            }
        if isinstance(obj, list):
            return [convert(v) for v in obj]
        return obj

    return convert(doc)


def flat_rows(doc: dict) -> list[tuple]:
    """(metric, mechanism, n, s, exact, float) rows from a structured report."""
    rows = []
    mech = doc.get("mechanism", "-")
    n = doc.get("n", "-")
    s = doc.get("s")
    s = "-" if s is None else s
    for metric, fields in doc.get("metrics", {}).items():
        exact = fields.get("exact", "-")
        rows.append((metric, mech, n, s, exact, fields["float"]))
    if "persuasive" in doc:
        rows.append(("persuasive", mech, n, s, str(doc["persuasive"]).lower(), "-"))
    return rows


def flat_table(docs: list[dict]) -> str:
    lines = ["metric\tmechanism\tn\ts\texact\tfloat"]
    for doc in docs:
        for row in flat_rows(doc):
            lines.append("\t".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"
