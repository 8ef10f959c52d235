"""JSON payload builders shared by the CLI and the HTTP service.

Both surfaces must emit identical documents for identical requests, so all
serialization lives here. Payloads speak in student/item/KC string tokens,
never in internal indices.
"""

from __future__ import annotations

from dataclasses import asdict

from .analytics import AnalyticsBundle, ClassComparison, ErrorPatterns
from .explain import ContrastiveResult, CounterfactualQuery, CounterfactualResult
from .model import ModelParams, to_json_dict
from .posterior import PosteriorState
from .train import TrainReport


def kc_map(params: ModelParams, values) -> dict[str, float]:
    return {kc: float(v) for kc, v in zip(params.qmatrix.kc_ids, values)}


def model_payload(params: ModelParams) -> dict:
    return to_json_dict(params)


def train_report_payload(report: TrainReport) -> dict:
    return report.to_dict()


def diagnose_payload(params: ModelParams, state: PosteriorState, chain) -> dict:
    return {
        "mastery": kc_map(params, state.mastery),
        "steps_run": state.steps_run,
        "final_loss": state.final_loss,
        "reasoning_chain": [
            {
                "kc_id": step.kc_id,
                "mastery": step.mastery,
                "band": step.band,
                "conclusion": step.conclusion,
                "evidence": [
                    {"item_id": item, "correct": r} for item, r in step.evidence
                ],
            }
            for step in chain.steps
        ],
    }


def contrastive_payload(params: ModelParams, result: ContrastiveResult) -> dict:
    return {
        "mastery_1": kc_map(params, result.mastery_1),
        "mastery_2": kc_map(params, result.mastery_2),
        "delta": kc_map(params, result.delta),
    }


def counterfactual_payload(
    params: ModelParams, query: CounterfactualQuery, result: CounterfactualResult
) -> dict:
    items = params.qmatrix.item_ids
    return {
        "y_prime": {items[e]: y for e, y in result.y_prime.items()},
        "binary_pattern": {items[e]: b for e, b in result.binary_pattern.items()},
        "mastery_used": kc_map(params, result.mastery_used),
        "threshold": query.threshold,
    }


def _comparison_dict(cmp_: ClassComparison) -> dict:
    return {
        "class_accuracy": cmp_.class_accuracy,
        "item_gaps": [asdict(g) for g in cmp_.item_gaps],
        "class_mean_mastery": cmp_.class_mean_mastery,
        "student_deltas": cmp_.student_deltas,
        "kc_accuracy": cmp_.kc_accuracy,
        "kc_classwide_issue": cmp_.kc_classwide_issue,
        "thresholds": asdict(cmp_.thresholds),
    }


def _errors_dict(errors: ErrorPatterns) -> dict:
    return {
        "per_item": {
            item: [{"option": o, "count": c} for o, c in counts]
            for item, counts in errors.per_item.items()
        },
        "items_without_option_data": errors.items_without_option_data,
    }


def overview_payload(bundle: AnalyticsBundle) -> dict:
    return asdict(bundle.overview)


def items_payload(bundle: AnalyticsBundle) -> dict:
    return {
        "items": [
            {
                **asdict(st),
                "option_counts": (
                    None
                    if st.option_counts is None
                    else [{"option": o, "count": c} for o, c in st.option_counts]
                ),
            }
            for st in bundle.items
        ],
        "error_patterns": _errors_dict(bundle.errors),
    }


def kcs_payload(bundle: AnalyticsBundle) -> dict:
    return {"kcs": [asdict(kc) for kc in (bundle.kcs or [])]}


def comparison_payload(bundle: AnalyticsBundle) -> dict:
    if bundle.comparison is None:
        return {"comparison": None}
    return _comparison_dict(bundle.comparison)


def suggestions_payload(bundle: AnalyticsBundle) -> dict:
    return {"suggestions": [asdict(s) for s in bundle.suggestions]}


ANALYTICS_VIEWS = ("overview", "items", "kcs", "comparison", "suggestions")

_VIEW_BUILDERS = {
    "overview": overview_payload,
    "items": items_payload,
    "kcs": kcs_payload,
    "comparison": comparison_payload,
    "suggestions": suggestions_payload,
}


def analytics_payload(bundle: AnalyticsBundle, view: str) -> dict:
    return _VIEW_BUILDERS[view](bundle)


def report_payload(bundle: AnalyticsBundle) -> dict:
    return {view: analytics_payload(bundle, view) for view in ANALYTICS_VIEWS}


def _fmt(v, digits: int = 3) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def report_markdown(doc: dict) -> str:
    """Human-readable report; section order is fixed:
    Overview, Items, Knowledge Components, Suggestions."""
    ov = doc["overview"]
    lines = ["# Class report", "", "## Overview", ""]
    lines.append(f"- Students: {ov['n_students']}")
    lines.append(f"- Items: {ov['n_items']}")
    lines.append(f"- Knowledge components: {ov['n_kcs']}")
    lines.append(f"- Responses: {ov['n_records']}")
    lines.append(f"- Class accuracy: {_fmt(ov['class_accuracy'])}")
    lines += ["", "## Items", ""]
    lines.append(
        "| item | respondents | accuracy | difficulty | discrimination (pb) | gap | flags |"
    )
    lines.append("|---|---|---|---|---|---|---|")
    gaps = {g["item_id"]: g for g in doc["comparison"].get("item_gaps", [])} if doc[
        "comparison"
    ] else {}
    for st in doc["items"]["items"]:
        gap = gaps.get(st["item_id"], {})
        flags = []
        if gap.get("exceeds_class_ability"):
            flags.append("exceeds-class-ability")
        if st["accuracy"] is None:
            flags.append("no-respondents")
        lines.append(
            f"| {st['item_id']} | {st['respondents']} | {_fmt(st['accuracy'])} |"
            f" {_fmt(st['difficulty_classical'])} | {_fmt(st['discrimination_pb'])} |"
            f" {_fmt(gap.get('gap'))} | {', '.join(flags) or '-'} |"
        )
    missing = doc["items"]["error_patterns"]["items_without_option_data"]
    if missing:
        lines.append("")
        lines.append(
            f"No distractor data for: {', '.join(missing)}"
        )
    lines += ["", "## Knowledge Components", ""]
    kcs = doc["kcs"]["kcs"]
    if kcs:
        lines.append("| kc | weight | items | class mastery | easy/medium/hard |")
        lines.append("|---|---|---|---|---|")
        for kc in kcs:
            dist = kc["difficulty_distribution"]
            lines.append(
                f"| {kc['kc_id']} | {_fmt(kc['weight'])} | {kc['item_count']} |"
                f" {_fmt(kc['class_mean_mastery'])} |"
                f" {dist['easy']}/{dist['medium']}/{dist['hard']} |"
            )
    else:
        lines.append("No trained model supplied; KC statistics unavailable.")
    lines += ["", "## Suggestions", ""]
    suggestions = doc["suggestions"]["suggestions"]
    if suggestions:
        for s in suggestions:
            lines.append(f"- [{s['scope']}] {s['text']}")
    else:
        lines.append("No suggestions triggered.")
    lines.append("")
    return "\n".join(lines)
