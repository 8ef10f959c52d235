"""Seeded synthetic populations with known per-KC mastery.

The generator is a noisy conjunctive model with continuous mastery: the
chance of a correct answer is the product of the required KCs' mastery,
squeezed between a guessing floor and a slip ceiling. It is deliberately a
different model family from the diagnosis engine, so recovery experiments
test the engine against an independent ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError
from .ingest import EncodedDataset, QMatrix, ResponseRecord, encode

MASTERY_LOW = 0.05
MASTERY_HIGH = 0.95
SECOND_KC_RATE = 0.3


@dataclass(frozen=True)
class SynthConfig:
    n_students: int
    n_items: int
    n_kcs: int
    items_per_kc: int = 25
    slip: float = 0.1
    guess: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if min(self.n_students, self.n_items, self.n_kcs) < 1:
            raise DomainError("InfeasibleConfig", "dimensions must be >= 1")
        if not (0.0 <= self.slip < 0.5 and 0.0 <= self.guess < 0.5):
            raise DomainError("InfeasibleConfig", "slip and guess must lie in [0, 0.5)")
        if self.items_per_kc < 1:
            raise DomainError("InfeasibleConfig", "items_per_kc must be >= 1")
        if self.n_items < self.items_per_kc * self.n_kcs:
            raise DomainError(
                "InfeasibleConfig",
                f"{self.n_items} items cannot give {self.n_kcs} KCs"
                f" {self.items_per_kc} items each; need at least"
                f" {self.items_per_kc * self.n_kcs}",
            )


@dataclass
class GroundTruth:
    true_mastery: np.ndarray    # (N, K) in (0, 1)
    qmatrix: QMatrix
    probabilities: np.ndarray   # (N, M) generating success probabilities
    slip: float
    guess: float
    seed: int


@dataclass
class RecoveryMetrics:
    spearman_per_kc: list[float | None]
    mad_per_kc: list[float]
    alignment_per_kc: list[float | None]
    alignment_overall: float | None


def _token(prefix: str, i: int, total: int) -> str:
    return f"{prefix}{i + 1:0{len(str(total))}d}"


def build_qmatrix(
    n_items: int, n_kcs: int, rng: np.random.Generator
) -> QMatrix:
    """Round-robin primary KC per item; some items pick up a second KC."""
    entries = np.zeros((n_items, n_kcs), dtype=np.int8)
    for e in range(n_items):
        entries[e, e % n_kcs] = 1
    if n_kcs > 1:
        extra = rng.random(n_items) < SECOND_KC_RATE
        offsets = rng.integers(1, n_kcs, size=n_items)
        for e in range(n_items):
            if extra[e]:
                entries[e, (e % n_kcs + offsets[e]) % n_kcs] = 1
    item_ids = [_token("i", e, n_items) for e in range(n_items)]
    kc_ids = [f"kc{k + 1}" for k in range(n_kcs)]
    return QMatrix(item_ids, kc_ids, entries)


def response_probabilities(
    true_mastery: np.ndarray, qmatrix: QMatrix, slip: float, guess: float
) -> np.ndarray:
    """p(correct) = guess + (1 - slip - guess) * prod of required masteries."""
    q = qmatrix.entries.astype(np.float64)  # (M, K)
    log_m = np.log(true_mastery)            # (N, K)
    conj = np.exp(log_m @ q.T)               # (N, M) product over required KCs
    return guess + (1.0 - slip - guess) * conj


def generate(config: SynthConfig) -> tuple[GroundTruth, EncodedDataset]:
    """Sample a population, its Q-matrix, and one full response matrix.

    Draw order (mastery, Q-matrix extras, responses) is fixed; identical
    configs produce bit-identical outputs.
    """
    rng = np.random.default_rng(config.seed)
    n, m, k = config.n_students, config.n_items, config.n_kcs
    true_mastery = rng.uniform(MASTERY_LOW, MASTERY_HIGH, size=(n, k))
    qmatrix = build_qmatrix(m, k, rng)
    probs = response_probabilities(true_mastery, qmatrix, config.slip, config.guess)
    responses = (rng.random(size=(n, m)) < probs).astype(int)

    student_ids = [_token("s", s, n) for s in range(n)]
    records = [
        ResponseRecord(student_ids[s], qmatrix.item_ids[e], int(responses[s, e]))
        for s in range(n)
        for e in range(m)
    ]
    dataset = encode(records, qmatrix)
    assert isinstance(dataset, EncodedDataset)  # generator output is always clean
    truth = GroundTruth(true_mastery, qmatrix, probs, config.slip, config.guess, config.seed)
    return truth, dataset


def empirical_kc_rates(dataset: EncodedDataset) -> np.ndarray:
    """Observed per-student correctness rate over each KC's items; NaN where
    a student answered none of them."""
    entries = dataset.qmatrix.entries
    hits = np.zeros((dataset.N, dataset.K))
    seen = np.zeros((dataset.N, dataset.K))
    for obs in dataset.records:
        req = entries[obs.item] == 1
        seen[obs.student, req] += 1
        hits[obs.student, req] += obs.correct
    with np.errstate(invalid="ignore"):
        return np.where(seen > 0, hits / np.maximum(seen, 1), np.nan)


def monotone_alignment(
    estimated: np.ndarray, empirical: np.ndarray
) -> float | None:
    """Share of student pairs whose estimated-mastery order matches their
    empirical-rate order. Pairs with tied empirical rates carry no order and
    are skipped; None when no pair is comparable."""
    n = len(estimated)
    matched = compared = 0
    for i in range(n):
        for j in range(i + 1, n):
            ri, rj = empirical[i], empirical[j]
            if np.isnan(ri) or np.isnan(rj) or ri == rj:
                continue
            compared += 1
            if (estimated[i] - estimated[j]) * (ri - rj) > 0:
                matched += 1
    return matched / compared if compared else None


def recovery_metrics(
    ground_truth: GroundTruth,
    estimated_mastery: np.ndarray,
    dataset: EncodedDataset,
) -> RecoveryMetrics:
    """Per-KC rank agreement with the true mastery and with observed rates.

    The alignment score needs the sampled responses, which live in the
    dataset rather than in the ground truth, hence the third argument.
    """
    true = ground_truth.true_mastery
    est = np.asarray(estimated_mastery, dtype=np.float64)
    if est.shape != true.shape:
        raise DomainError(
            "ShapeMismatch",
            f"estimated mastery must have shape {true.shape}, got {est.shape}",
        )
    rates = empirical_kc_rates(dataset)

    spearman: list[float | None] = []
    mad: list[float] = []
    alignment: list[float | None] = []
    for k in range(true.shape[1]):
        rho = stats.spearmanr(est[:, k], true[:, k]).statistic
        spearman.append(None if np.isnan(rho) else float(rho))
        mad.append(float(np.abs(est[:, k] - true[:, k]).mean()))
        alignment.append(monotone_alignment(est[:, k], rates[:, k]))
    defined = [a for a in alignment if a is not None]
    overall = sum(defined) / len(defined) if defined else None
    return RecoveryMetrics(spearman, mad, alignment, overall)
