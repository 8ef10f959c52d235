"""Diagnosis model: sigmoid student/item factors fused by a monotone MLP.

Per-KC mastery sigma(A[s]) is compared against per-KC item difficulty
sigma(B[e]), gated by item discrimination sigma(D[e]) and masked by the
Q-matrix row, then pushed through three sigmoid layers whose weights are
kept element-wise nonnegative. The nonnegativity constraint is what makes
the predicted success probability monotone in each required KC's mastery,
so every downstream explanation can rely on "more mastery never hurts".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .ingest import QMatrix

FORMAT_VERSION = 1

SCALAR = "scalar"
PER_KC = "per_kc"


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic; branches on sign to avoid overflow."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class HyperParams:
    K: int
    H1: int = 64
    H2: int = 32
    discrimination_mode: str = SCALAR

    def __post_init__(self):
        if self.H1 < 1 or self.H2 < 1:
            raise DomainError("BadHyperParams", "hidden widths must be >= 1")
        if self.discrimination_mode not in (SCALAR, PER_KC):
            raise DomainError(
                "BadHyperParams",
                f"discrimination_mode must be {SCALAR!r} or {PER_KC!r}",
            )


@dataclass(eq=False)
class ModelParams:
    """All learnable tensors plus the frozen Q-matrix and ID maps."""

    A: np.ndarray  # (N, K) student pre-activations
    B: np.ndarray  # (M, K) difficulty pre-activations
    D: np.ndarray  # (M, 1) or (M, K) discrimination pre-activations
    W1: np.ndarray  # (H1, K) nonnegative
    W2: np.ndarray  # (H2, H1) nonnegative
    W3: np.ndarray  # (1, H2) nonnegative
    b1: np.ndarray  # (H1,)
    b2: np.ndarray  # (H2,)
    b3: float
    hyper: HyperParams
    qmatrix: QMatrix
    student_ids: list[str]

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def M(self) -> int:
        return self.B.shape[0]

    @property
    def K(self) -> int:
        return self.A.shape[1]

    def copy(self) -> "ModelParams":
        return replace(
            self,
            A=self.A.copy(),
            B=self.B.copy(),
            D=self.D.copy(),
            W1=self.W1.copy(),
            W2=self.W2.copy(),
            W3=self.W3.copy(),
            b1=self.b1.copy(),
            b2=self.b2.copy(),
            student_ids=list(self.student_ids),
        )

    def validate_shapes(self) -> None:
        n, k = self.A.shape
        m = self.B.shape[0]
        h1, h2 = self.hyper.H1, self.hyper.H2
        d_cols = 1 if self.hyper.discrimination_mode == SCALAR else k
        ok = (
            self.B.shape == (m, k)
            and self.D.shape == (m, d_cols)
            and self.W1.shape == (h1, k)
            and self.W2.shape == (h2, h1)
            and self.W3.shape == (1, h2)
            and self.b1.shape == (h1,)
            and self.b2.shape == (h2,)
            and self.qmatrix.entries.shape == (m, k)
            and len(self.student_ids) == n
            and self.hyper.K == k
        )
        if not ok:
            raise DomainError("ShapeMismatch", "model tensors are inconsistent")


@dataclass(frozen=True)
class ForwardTrace:
    """Every intermediate of one prediction, for display and tests."""

    h_s: np.ndarray
    q_e: np.ndarray
    h_diff: np.ndarray
    h_disc: float | np.ndarray
    x: np.ndarray
    y: float


class Forward(NamedTuple):
    """Batched forward intermediates; rows align with the item batch."""

    q: np.ndarray       # (n, K)
    h_diff: np.ndarray  # (n, K)
    h_disc: np.ndarray  # (n, 1) or (n, K)
    x: np.ndarray       # (n, K)
    g1: np.ndarray      # (n, H1)
    g2: np.ndarray      # (n, H2)
    z3: np.ndarray      # (n,)
    y: np.ndarray       # (n,)


def _check_item_index(params: ModelParams, index: int) -> None:
    if not 0 <= index < params.M:
        raise DomainError(
            "IndexOutOfRange", f"item index {index} not in [0, {params.M})"
        )


def student_factor(params: ModelParams, student: int) -> np.ndarray:
    """Mastery vector sigma(A[student])."""
    if not 0 <= student < params.N:
        raise DomainError(
            "IndexOutOfRange", f"student index {student} not in [0, {params.N})"
        )
    return sigmoid(params.A[student])


def item_factors(params: ModelParams, item: int):
    """(q_e, h_diff, h_disc) for one item; q_e is the fixed Q-matrix row."""
    _check_item_index(params, item)
    q_e = params.qmatrix.entries[item].astype(np.float64)
    h_diff = sigmoid(params.B[item])
    h_disc = sigmoid(params.D[item])
    if params.hyper.discrimination_mode == SCALAR:
        return q_e, h_diff, float(h_disc[0])
    return q_e, h_diff, h_disc


def forward(params: ModelParams, h_s: np.ndarray, items: np.ndarray) -> Forward:
    """Run the interaction network for a batch of items.

    `h_s` is either one (K,) mastery vector shared by all rows or an (n, K)
    matrix aligned with `items`.
    """
    items = np.asarray(items, dtype=np.intp)
    q = params.qmatrix.entries[items].astype(np.float64)
    h_diff = sigmoid(params.B[items])
    h_disc = sigmoid(params.D[items])  # (n, 1) broadcasts in scalar mode
    hs = np.atleast_2d(np.asarray(h_s, dtype=np.float64))
    x = q * (hs - h_diff) * h_disc
    g1 = sigmoid(x @ params.W1.T + params.b1)
    g2 = sigmoid(g1 @ params.W2.T + params.b2)
    z3 = g2 @ params.W3[0] + params.b3
    return Forward(q, h_diff, h_disc, x, g1, g2, z3, sigmoid(z3))


def check_mastery(h_s: np.ndarray, what: str = "mastery") -> np.ndarray:
    h_s = np.asarray(h_s, dtype=np.float64)
    if h_s.size and not (np.all(h_s > 0.0) and np.all(h_s < 1.0)):
        raise DomainError(
            "MasteryOutOfRange", f"{what} values must lie strictly in (0, 1)"
        )
    return h_s


def predict(params: ModelParams, h_s: np.ndarray, item: int) -> ForwardTrace:
    """Predict success probability for one item given a mastery vector."""
    _check_item_index(params, item)
    h_s = check_mastery(h_s)
    if h_s.shape != (params.K,):
        raise DomainError("ShapeMismatch", f"mastery must have shape ({params.K},)")
    f = forward(params, h_s, np.array([item]))
    h_disc = f.h_disc[0]
    if params.hyper.discrimination_mode == SCALAR:
        h_disc = float(h_disc[0])
    return ForwardTrace(
        h_s=h_s.copy(),
        q_e=params.qmatrix.entries[item].astype(np.float64),
        h_diff=f.h_diff[0],
        h_disc=h_disc,
        x=f.x[0],
        y=float(f.y[0]),
    )


def predict_batch(
    params: ModelParams, h_s: np.ndarray, items: np.ndarray
) -> np.ndarray:
    """Success probabilities for many items under one mastery vector."""
    h_s = check_mastery(h_s)
    items = np.asarray(items, dtype=np.intp)
    if items.size and (items.min() < 0 or items.max() >= params.M):
        raise DomainError("IndexOutOfRange", "item index out of range")
    return forward(params, h_s, items).y


def project_nonnegative(params: ModelParams) -> ModelParams:
    """Clip W1, W2, W3 at zero; everything else is untouched."""
    return replace(
        params,
        W1=np.maximum(params.W1, 0.0),
        W2=np.maximum(params.W2, 0.0),
        W3=np.maximum(params.W3, 0.0),
    )


def min_weight(params: ModelParams) -> float:
    return float(min(params.W1.min(), params.W2.min(), params.W3.min()))


def to_json_dict(params: ModelParams) -> dict:
    """Persistence layout: versioned, row-major nested arrays."""
    return {
        "format_version": FORMAT_VERSION,
        "N": params.N,
        "M": params.M,
        "K": params.K,
        "H1": params.hyper.H1,
        "H2": params.hyper.H2,
        "discrimination_mode": params.hyper.discrimination_mode,
        "kc_ids": list(params.qmatrix.kc_ids),
        "item_ids": list(params.qmatrix.item_ids),
        "student_ids": list(params.student_ids),
        "Q": params.qmatrix.entries.astype(int).tolist(),
        "A": params.A.tolist(),
        "B": params.B.tolist(),
        "D": params.D.tolist(),
        "W1": params.W1.tolist(),
        "W2": params.W2.tolist(),
        "W3": params.W3.tolist(),
        "b1": params.b1.tolist(),
        "b2": params.b2.tolist(),
        "b3": params.b3,
    }


def from_json_dict(doc: dict) -> ModelParams:
    try:
        version = doc["format_version"]
        if version != FORMAT_VERSION:
            raise DomainError(
                "BadModelFile", f"unsupported format_version {version!r}"
            )
        hyper = HyperParams(
            K=int(doc["K"]),
            H1=int(doc["H1"]),
            H2=int(doc["H2"]),
            discrimination_mode=doc["discrimination_mode"],
        )
        qmatrix = QMatrix(
            item_ids=list(doc["item_ids"]),
            kc_ids=list(doc["kc_ids"]),
            entries=np.array(doc["Q"], dtype=np.int8),
        )
        params = ModelParams(
            A=np.array(doc["A"], dtype=np.float64),
            B=np.array(doc["B"], dtype=np.float64),
            D=np.array(doc["D"], dtype=np.float64),
            W1=np.array(doc["W1"], dtype=np.float64),
            W2=np.array(doc["W2"], dtype=np.float64),
            W3=np.array(doc["W3"], dtype=np.float64),
            b1=np.array(doc["b1"], dtype=np.float64),
            b2=np.array(doc["b2"], dtype=np.float64),
            b3=float(doc["b3"]),
            hyper=hyper,
            qmatrix=qmatrix,
            student_ids=list(doc["student_ids"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError("BadModelFile", f"malformed model file: {exc}") from exc
    params.validate_shapes()
    return params


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    """Bit-exact comparison of every tensor and the frozen metadata."""
    return (
        a.hyper == b.hyper
        and a.qmatrix == b.qmatrix
        and a.student_ids == b.student_ids
        and all(
            np.array_equal(getattr(a, name), getattr(b, name))
            for name in ("A", "B", "D", "W1", "W2", "W3", "b1", "b2")
        )
        and a.b3 == b.b3
    )


def save_model(params: ModelParams, path: str | Path) -> None:
    Path(path).write_text(dump_json(to_json_dict(params)) + "\n")


def load_model(path: str | Path) -> ModelParams:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError("BadModelFile", f"not valid JSON: {exc}") from exc
    return from_json_dict(doc)


def dump_json(doc) -> str:
    """Canonical compact JSON shared by the CLI and the HTTP service."""
    return json.dumps(doc, ensure_ascii=False, allow_nan=False, separators=(",", ":"))
