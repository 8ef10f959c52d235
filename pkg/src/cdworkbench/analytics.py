"""Class-level decision-support statistics and templated teaching suggestions.

Classical statistics (accuracy, difficulty, point-biserial discrimination,
error patterns, KC weights) are pure functions of the response matrix, so
they can be cross-checked by brute force. Model-derived fields (per-KC
difficulty, discrimination gates, class mastery) are filled in only when
trained parameters are supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import STRONG_AT, WEAK_BELOW, mastery_band
from .errors import DomainError
from .ingest import EncodedDataset
from .model import SCALAR, ModelParams, sigmoid

EASY_BELOW = 0.3   # classical difficulty bands for the per-KC distribution
HARD_AT = 0.7


@dataclass(frozen=True)
class CompareThresholds:
    exceeds_gap: float = 0.3     # item difficulty above class ability by this much
    low_accuracy: float = 0.5    # class-wide issue cutoff per KC


@dataclass
class ItemStats:
    item_id: str
    respondents: int
    accuracy: float | None           # None (flagged) when nobody answered
    difficulty_classical: float | None
    discrimination_pb: float | None  # None when undefined (zero variance)
    option_counts: list[tuple[str, int]] | None  # wrong answers only
    difficulty_model: dict[str, float] | None = None
    discrimination_model: float | dict[str, float] | None = None


@dataclass
class ErrorPatterns:
    per_item: dict[str, list[tuple[str, int]]]
    items_without_option_data: list[str]


@dataclass
class KCStats:
    kc_id: str
    weight: float
    item_count: int
    class_mean_mastery: float
    difficulty_distribution: dict[str, int]


@dataclass
class ClassOverview:
    n_students: int
    n_items: int
    n_kcs: int
    n_records: int
    class_accuracy: float | None
    student_summaries: list[dict]
    kc_weights: dict[str, float]
    kc_class_mastery: dict[str, float] | None


@dataclass
class ItemGap:
    item_id: str
    difficulty: float | None
    gap: float | None
    exceeds_class_ability: bool


@dataclass
class ClassComparison:
    class_accuracy: float | None
    item_gaps: list[ItemGap]
    class_mean_mastery: dict[str, float]
    student_deltas: dict[str, dict[str, dict[str, float]]]
    kc_accuracy: dict[str, float | None]
    kc_classwide_issue: dict[str, bool]
    thresholds: CompareThresholds


@dataclass
class Suggestion:
    scope: str  # class | student | item | kc
    template_id: str
    text: str
    trigger: dict


@dataclass
class AnalyticsBundle:
    overview: ClassOverview
    items: list[ItemStats]
    errors: ErrorPatterns
    kcs: list[KCStats] | None
    comparison: ClassComparison | None
    suggestions: list[Suggestion] = field(default_factory=list)


def _check_alignment(dataset: EncodedDataset, params: ModelParams) -> None:
    if params.qmatrix != dataset.qmatrix:
        raise DomainError(
            "ModelMismatch", "model was trained against a different Q-matrix"
        )


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    cx = x - x.mean()
    cy = y - y.mean()
    denom = math.sqrt(float((cx * cx).sum()) * float((cy * cy).sum()))
    if denom == 0.0:
        return None
    return float((cx * cy).sum() / denom)


def item_stats(
    dataset: EncodedDataset, params: ModelParams | None = None
) -> list[ItemStats]:
    """Per-item accuracy, classical difficulty, and corrected point-biserial
    discrimination (item score vs. total score excluding the item)."""
    if params is not None:
        _check_alignment(dataset, params)

    answered: dict[int, list[tuple[int, int]]] = {e: [] for e in range(dataset.M)}
    totals = np.zeros(dataset.N)
    for obs in dataset.records:
        answered[obs.item].append((obs.student, obs.correct))
        totals[obs.student] += obs.correct
    option_counts = dataset.options

    out = []
    for e, item_id in enumerate(dataset.item_ids):
        rows = answered[e]
        n = len(rows)
        accuracy = difficulty = pb = None
        if n > 0:
            correct = sum(r for _, r in rows)
            accuracy = correct / n
            difficulty = 1.0 - accuracy
            if n >= 2:
                x = np.array([r for _, r in rows], dtype=np.float64)
                rest = np.array([totals[s] - r for s, r in rows], dtype=np.float64)
                pb = _pearson(x, rest)

        counts = None
        if option_counts is not None:
            mine = [(opt, c) for (it, opt), c in option_counts.items() if it == e]
            if mine:
                counts = sorted(mine, key=lambda oc: (-oc[1], oc[0]))

        stats = ItemStats(item_id, n, accuracy, difficulty, pb, counts)
        if params is not None:
            h_diff = sigmoid(params.B[e])
            stats.difficulty_model = {
                kc: float(h_diff[k])
                for k, kc in enumerate(dataset.kc_ids)
                if dataset.qmatrix.entries[e, k] == 1
            }
            h_disc = sigmoid(params.D[e])
            if params.hyper.discrimination_mode == SCALAR:
                stats.discrimination_model = float(h_disc[0])
            else:
                stats.discrimination_model = {
                    kc: float(h_disc[k])
                    for k, kc in enumerate(dataset.kc_ids)
                    if dataset.qmatrix.entries[e, k] == 1
                }
        out.append(stats)
    return out


def error_patterns(dataset: EncodedDataset) -> ErrorPatterns:
    """Distractor counts among incorrect responses, most frequent first.

    Items with no recorded option among their wrong answers are listed in
    the coverage note instead of appearing with empty counts.
    """
    counts = dataset.options or {}
    per_item: dict[str, list[tuple[str, int]]] = {}
    for e, item_id in enumerate(dataset.item_ids):
        mine = [(opt, c) for (it, opt), c in counts.items() if it == e]
        if mine:
            per_item[item_id] = sorted(mine, key=lambda oc: (-oc[1], oc[0]))
    missing = [it for it in dataset.item_ids if it not in per_item]
    return ErrorPatterns(per_item, missing)


def _difficulty_band(difficulty: float | None) -> str:
    if difficulty is None:
        return "unrated"
    if difficulty < EASY_BELOW:
        return "easy"
    if difficulty < HARD_AT:
        return "medium"
    return "hard"


def kc_stats(dataset: EncodedDataset, params: ModelParams) -> list[KCStats]:
    """Per-KC test weight, class mean mastery, and item difficulty mix."""
    _check_alignment(dataset, params)
    entries = dataset.qmatrix.entries
    total_links = int(entries.sum())
    mastery = sigmoid(params.A)  # (N, K)
    istats = item_stats(dataset)

    out = []
    for k, kc_id in enumerate(dataset.kc_ids):
        members = [e for e in range(dataset.M) if entries[e, k] == 1]
        dist: dict[str, int] = {"easy": 0, "medium": 0, "hard": 0, "unrated": 0}
        for e in members:
            dist[_difficulty_band(istats[e].difficulty_classical)] += 1
        out.append(
            KCStats(
                kc_id=kc_id,
                weight=int(entries[:, k].sum()) / total_links,
                item_count=len(members),
                class_mean_mastery=float(mastery[:, k].mean()),
                difficulty_distribution=dist,
            )
        )
    return out


def overview(
    dataset: EncodedDataset, params: ModelParams | None = None
) -> ClassOverview:
    """Topline numbers: class accuracy, per-student summaries, KC weights."""
    per_student = [[0, 0] for _ in range(dataset.N)]  # answered, correct
    n_correct = 0
    for obs in dataset.records:
        per_student[obs.student][0] += 1
        per_student[obs.student][1] += obs.correct
        n_correct += obs.correct
    students = [
        {
            "student_id": sid,
            "answered": a,
            "correct": c,
            "accuracy": c / a if a else None,
        }
        for sid, (a, c) in zip(dataset.student_ids, per_student)
    ]
    entries = dataset.qmatrix.entries
    total_links = int(entries.sum())
    weights = {
        kc: int(entries[:, k].sum()) / total_links
        for k, kc in enumerate(dataset.kc_ids)
    }
    kc_mastery = None
    if params is not None:
        _check_alignment(dataset, params)
        mastery = sigmoid(params.A)
        kc_mastery = {
            kc: float(mastery[:, k].mean()) for k, kc in enumerate(dataset.kc_ids)
        }
    return ClassOverview(
        n_students=dataset.N,
        n_items=dataset.M,
        n_kcs=dataset.K,
        n_records=len(dataset.records),
        class_accuracy=n_correct / len(dataset.records) if dataset.records else None,
        student_summaries=students,
        kc_weights=weights,
        kc_class_mastery=kc_mastery,
    )


def compare(
    dataset: EncodedDataset,
    params: ModelParams,
    thresholds: CompareThresholds | None = None,
) -> ClassComparison:
    """Item-vs-class difficulty gaps and student-vs-class mastery deltas.

    A KC is flagged as a class-wide issue when the pooled accuracy over its
    items falls below the low_accuracy threshold.
    """
    _check_alignment(dataset, params)
    thresholds = thresholds or CompareThresholds()
    istats = item_stats(dataset)
    n_correct = sum(obs.correct for obs in dataset.records)
    class_accuracy = n_correct / len(dataset.records) if dataset.records else None

    item_gaps = []
    for st in istats:
        gap = None
        exceeds = False
        if st.difficulty_classical is not None and class_accuracy is not None:
            gap = st.difficulty_classical - (1.0 - class_accuracy)
            exceeds = gap > thresholds.exceeds_gap
        item_gaps.append(ItemGap(st.item_id, st.difficulty_classical, gap, exceeds))

    mastery = sigmoid(params.A)
    class_mean = {
        kc: float(mastery[:, k].mean()) for k, kc in enumerate(dataset.kc_ids)
    }
    deltas: dict[str, dict[str, dict[str, float]]] = {}
    for row, sid in enumerate(params.student_ids):
        deltas[sid] = {
            kc: {
                "mastery": float(mastery[row, k]),
                "delta": float(mastery[row, k]) - class_mean[kc],
            }
            for k, kc in enumerate(dataset.kc_ids)
        }

    entries = dataset.qmatrix.entries
    kc_acc: dict[str, float | None] = {}
    kc_issue: dict[str, bool] = {}
    by_item: dict[int, list[int]] = {e: [] for e in range(dataset.M)}
    for obs in dataset.records:
        by_item[obs.item].append(obs.correct)
    for k, kc in enumerate(dataset.kc_ids):
        rs = [r for e in range(dataset.M) if entries[e, k] == 1 for r in by_item[e]]
        rate = sum(rs) / len(rs) if rs else None
        kc_acc[kc] = rate
        kc_issue[kc] = rate is not None and rate < thresholds.low_accuracy

    return ClassComparison(
        class_accuracy=class_accuracy,
        item_gaps=item_gaps,
        class_mean_mastery=class_mean,
        student_deltas=deltas,
        kc_accuracy=kc_acc,
        kc_classwide_issue=kc_issue,
        thresholds=thresholds,
    )


def compute_bundle(
    dataset: EncodedDataset,
    params: ModelParams | None = None,
    thresholds: CompareThresholds | None = None,
) -> AnalyticsBundle:
    bundle = AnalyticsBundle(
        overview=overview(dataset, params),
        items=item_stats(dataset, params),
        errors=error_patterns(dataset),
        kcs=kc_stats(dataset, params) if params is not None else None,
        comparison=compare(dataset, params, thresholds) if params is not None else None,
    )
    bundle.suggestions = suggest(bundle)
    return bundle


def _pct(v: float) -> str:
    return f"{v:.0%}"


def suggest(bundle: AnalyticsBundle) -> list[Suggestion]:
    """Walk the template rules in fixed order; every fired suggestion keeps a
    snapshot of the numbers that triggered it."""
    out: list[Suggestion] = []

    ov = bundle.overview
    if ov.class_accuracy is not None and ov.class_accuracy < 0.5:
        out.append(
            Suggestion(
                "class",
                "class_low_accuracy",
                f"Overall accuracy is {_pct(ov.class_accuracy)}. Revisit the"
                " tested material with the whole class before moving on.",
                {"class_accuracy": ov.class_accuracy},
            )
        )

    if bundle.kcs is not None:
        for kc in bundle.kcs:
            if kc.class_mean_mastery < WEAK_BELOW:
                out.append(
                    Suggestion(
                        "kc",
                        "kc_reteach",
                        f"Class mastery of {kc.kc_id} is low"
                        f" ({_pct(kc.class_mean_mastery)}). Plan a reteach of"
                        f" {kc.kc_id} before assessing it again.",
                        {"kc_id": kc.kc_id, "class_mean_mastery": kc.class_mean_mastery},
                    )
                )
            elif kc.class_mean_mastery >= STRONG_AT:
                out.append(
                    Suggestion(
                        "kc",
                        "kc_enrich",
                        f"Class mastery of {kc.kc_id} is strong"
                        f" ({_pct(kc.class_mean_mastery)}); extension work is"
                        " appropriate.",
                        {"kc_id": kc.kc_id, "class_mean_mastery": kc.class_mean_mastery},
                    )
                )

    if bundle.comparison is not None:
        cmp_ = bundle.comparison
        for kc, flagged in cmp_.kc_classwide_issue.items():
            if flagged:
                out.append(
                    Suggestion(
                        "kc",
                        "kc_classwide_accuracy",
                        f"Accuracy on items for {kc} is"
                        f" {_pct(cmp_.kc_accuracy[kc])} across the class; this"
                        " looks like a class-wide gap, not an individual one.",
                        {"kc_id": kc, "kc_accuracy": cmp_.kc_accuracy[kc]},
                    )
                )
        for sid, per_kc in cmp_.student_deltas.items():
            for kc, vals in per_kc.items():
                if vals["mastery"] < WEAK_BELOW:
                    out.append(
                        Suggestion(
                            "student",
                            "student_reteach",
                            f"Reteach {kc} with {sid}: estimated mastery is"
                            f" {_pct(vals['mastery'])}"
                            f" ({_pct(abs(vals['delta']))}"
                            f" {'below' if vals['delta'] < 0 else 'above'} the"
                            " class mean).",
                            {"student_id": sid, "kc_id": kc, **vals},
                        )
                    )
        for gap in cmp_.item_gaps:
            if gap.exceeds_class_ability:
                out.append(
                    Suggestion(
                        "item",
                        "item_exceeds_ability",
                        f"Item {gap.item_id} is far harder than the class"
                        f" level (difficulty {_pct(gap.difficulty)} vs. class"
                        f" average {_pct(1 - cmp_.class_accuracy)}); check"
                        " whether it goes beyond what was taught.",
                        {"item_id": gap.item_id, "gap": gap.gap},
                    )
                )

    for st in bundle.items:
        if st.discrimination_pb is not None and st.discrimination_pb < 0:
            out.append(
                Suggestion(
                    "item",
                    "item_negative_discrimination",
                    f"Item {st.item_id} discriminates negatively"
                    f" (point-biserial {st.discrimination_pb:.2f}): stronger"
                    " students miss it more often. Review its wording and key.",
                    {"item_id": st.item_id, "discrimination_pb": st.discrimination_pb},
                )
            )

    for item_id, counts in bundle.errors.per_item.items():
        total_wrong_with_option = sum(c for _, c in counts)
        top_option, top_count = counts[0]
        if top_count >= 2 and top_count / total_wrong_with_option >= 0.5:
            out.append(
                Suggestion(
                    "item",
                    "item_common_distractor",
                    f"On item {item_id}, option {top_option} attracts"
                    f" {top_count} of {total_wrong_with_option} wrong answers;"
                    " address the misconception behind it directly.",
                    {"item_id": item_id, "option": top_option, "count": top_count},
                )
            )
    return out
