"""Contrastive re-diagnosis, counterfactual what-if replay, and the
evidence-to-conclusion reasoning chain behind the diagnostic views.

Contrastive: diagnose the same student twice on two evidence subsets that
share the optimizer schedule and initial point, then report the per-KC
mastery difference. The difference is deliberately not attributed to
individual items.

Counterfactual: overwrite chosen mastery coordinates with asserted values
and run forward passes only; nothing is fitted and the model is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bands import mastery_band
from .errors import DomainError
from .model import ModelParams, check_mastery, forward
from .posterior import PosteriorConfig, PosteriorState, Response, diagnose

DEFAULT_VALUE_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ContrastiveQuery:
    """Two evidence subsets for one student: an explicit variant list, or
    the base with the listed items' correctness toggled."""

    base_responses: list[Response]
    variant_responses: list[Response] | None = None
    flip_items: list[int] | None = None
    config: PosteriorConfig = field(default_factory=PosteriorConfig)


@dataclass
class ContrastiveResult:
    mastery_1: np.ndarray
    mastery_2: np.ndarray
    delta: np.ndarray  # mastery_2 - mastery_1
    state_1: PosteriorState
    state_2: PosteriorState


@dataclass(frozen=True)
class CounterfactualQuery:
    base_mastery: np.ndarray
    overrides: dict[int, float]  # KC index -> asserted mastery
    value_grid: tuple[float, ...] = DEFAULT_VALUE_GRID
    threshold: float = DEFAULT_THRESHOLD
    target_items: list[int] | None = None  # None = every item


@dataclass
class CounterfactualResult:
    y_prime: dict[int, float]        # item index -> success probability
    binary_pattern: dict[int, int]   # 1 iff y_prime >= threshold
    mastery_used: np.ndarray


@dataclass
class ChainStep:
    kc_index: int
    kc_id: str
    evidence: list[tuple[str, int]]  # (item id, correct)
    mastery: float
    band: str
    conclusion: str


@dataclass
class ReasoningChain:
    steps: list[ChainStep]


def _variant_of(query: ContrastiveQuery) -> list[Response]:
    if query.variant_responses is not None and query.flip_items is not None:
        raise DomainError(
            "AmbiguousVariant", "give either variant_responses or flip_items, not both"
        )
    if query.variant_responses is not None:
        return list(query.variant_responses)
    if query.flip_items is None:
        return list(query.base_responses)
    base_items = {e for e, _ in query.base_responses}
    to_flip = list(dict.fromkeys(query.flip_items))
    for item in to_flip:
        if item not in base_items:
            raise DomainError(
                "FlipTargetNotInBase",
                f"item index {item} is not among the base responses",
            )
    flips = set(to_flip)
    return [(e, 1 - r if e in flips else r) for e, r in query.base_responses]


def contrastive(params: ModelParams, query: ContrastiveQuery) -> ContrastiveResult:
    """Diagnose both evidence subsets under one schedule and compare."""
    variant = _variant_of(query)
    state_1 = diagnose(params, list(query.base_responses), query.config)
    state_2 = diagnose(params, variant, query.config)
    delta = state_2.mastery - state_1.mastery
    return ContrastiveResult(state_1.mastery, state_2.mastery, delta, state_1, state_2)


def counterfactual(
    params: ModelParams, query: CounterfactualQuery
) -> CounterfactualResult:
    """Forward-only replay under asserted mastery values."""
    base = check_mastery(query.base_mastery, "base mastery")
    if base.shape != (params.K,):
        raise DomainError("ShapeMismatch", f"base mastery must have shape ({params.K},)")
    if not 0.0 < query.threshold < 1.0:
        raise DomainError("BadConfig", "threshold must lie strictly in (0, 1)")

    mastery = base.copy()
    for kc, value in query.overrides.items():
        if not 0 <= kc < params.K:
            raise DomainError("UnknownKC", f"KC index {kc} not in [0, {params.K})")
        if not 0.0 < value < 1.0:
            raise DomainError(
                "OverrideOutOfRange",
                f"override for KC {kc} must lie strictly in (0, 1), got {value}",
            )
        mastery[kc] = value

    if query.target_items is None:
        items = np.arange(params.M, dtype=np.intp)
    else:
        items = np.asarray(query.target_items, dtype=np.intp)
        if items.size and (items.min() < 0 or items.max() >= params.M):
            bad = int(items[(items < 0) | (items >= params.M)][0])
            raise DomainError("UnknownItem", f"item index {bad} is not in the model")

    y = forward(params, mastery, items).y
    y_prime = {int(e): float(p) for e, p in zip(items, y)}
    pattern = {e: int(p >= query.threshold) for e, p in y_prime.items()}
    return CounterfactualResult(y_prime, pattern, mastery)


_CONCLUSIONS = {
    "none": (
        "Insufficient evidence for {kc}: none of the answered items requires it;"
        " the {pct} estimate reflects the prior."
    ),
    "weak": (
        "{kc} looks weak ({pct}): the student missed {wrong} of {total}"
        " related item(s)."
    ),
    "partial": (
        "{kc} is partially mastered ({pct}): {right} of {total} related"
        " item(s) answered correctly."
    ),
    "strong": (
        "{kc} looks solid ({pct}): {right} of {total} related item(s)"
        " answered correctly."
    ),
}


def build_reasoning_chain(
    params: ModelParams, state: PosteriorState
) -> ReasoningChain:
    """Link each KC's mastery estimate to the responses that back it."""
    q = params.qmatrix
    steps = []
    for k, kc_id in enumerate(q.kc_ids):
        evidence = [
            (q.item_ids[e], r) for e, r in state.responses if q.entries[e, k] == 1
        ]
        mastery = float(state.mastery[k])
        pct = f"{mastery:.0%}"
        right = sum(r for _, r in evidence)
        total = len(evidence)
        if total == 0:
            band = mastery_band(mastery)
            text = _CONCLUSIONS["none"].format(kc=kc_id, pct=pct)
        else:
            band = mastery_band(mastery)
            text = _CONCLUSIONS[band].format(
                kc=kc_id, pct=pct, right=right, wrong=total - right, total=total
            )
        steps.append(ChainStep(k, kc_id, evidence, mastery, band, text))
    return ReasoningChain(steps)
