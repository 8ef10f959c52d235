"""Fit model parameters to a response dataset by gradient descent.

Training is full batch: one gradient step per epoch over every training
record, which keeps runs bit-reproducible (no shuffling). Backpropagation
is written out by hand and checked against finite differences in the test
suite. After every optimizer step the three fusion-layer weight matrices
are clipped at zero so the monotonicity guarantee survives training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ingest import EncodedDataset
from .model import SCALAR, HyperParams, ModelParams, forward, sigmoid

Pair = tuple[int, int, int]  # (student index, item index, correct)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 500
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    init_scale: float = 0.1
    holdout_fraction: float = 0.1
    hidden1: int = 64
    hidden2: int = 32
    discrimination_mode: str = SCALAR

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("BadConfig", "learning_rate must be positive")
        if self.epochs < 0:
            raise DomainError("BadConfig", "epochs must be >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise DomainError("BadConfig", "optimizer must be sgd or adam")
        if self.init_scale <= 0:
            raise DomainError("BadConfig", "init_scale must be positive")
        if not 0.0 <= self.holdout_fraction < 0.5:
            raise DomainError("BadConfig", "holdout_fraction must be in [0, 0.5)")


@dataclass
class TrainReport:
    losses: list[float]  # per-epoch mean training loss, pre-update
    holdout_accuracy: float | None
    holdout_ce: float | None
    epochs: int
    seed: int
    n_train: int
    n_holdout: int
    calibrated_threshold: float | None

    def to_dict(self) -> dict:
        return {
            "losses": self.losses,
            "holdout_accuracy": self.holdout_accuracy,
            "holdout_ce": self.holdout_ce,
            "epochs": self.epochs,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_holdout": self.n_holdout,
            "calibrated_threshold": self.calibrated_threshold,
        }


@dataclass
class Grads:
    """Gradient of the summed cross-entropy, same shapes as the params."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    W3: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: float


def _pair_arrays(params: ModelParams, pairs: list[Pair]):
    if not pairs:
        raise DomainError("EmptyBatch", "need at least one (student, item, r) pair")
    s = np.array([p[0] for p in pairs], dtype=np.intp)
    e = np.array([p[1] for p in pairs], dtype=np.intp)
    r = np.array([p[2] for p in pairs], dtype=np.float64)
    if s.min() < 0 or s.max() >= params.N or e.min() < 0 or e.max() >= params.M:
        raise DomainError("IndexOutOfRange", "pair references an unknown row")
    return s, e, r


def bce_with_logits(z: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Per-element cross-entropy computed from logits; never overflows."""
    return np.maximum(z, 0.0) - r * z + np.log1p(np.exp(-np.abs(z)))


def loss(params: ModelParams, pairs: list[Pair]) -> float:
    """Summed cross-entropy over the observed pairs."""
    s, e, r = _pair_arrays(params, pairs)
    hs = sigmoid(params.A[s])
    f = forward(params, hs, e)
    return float(bce_with_logits(f.z3, r).sum())


def backprop_to_x(params: ModelParams, f: Forward, r: np.ndarray):
    """Shared tail of the backward pass: from the logit error down to the
    interaction vector. Returns (dx, layer gradients)."""
    dz3 = f.y - r  # (n,)
    dW3 = (dz3 @ f.g2)[None, :]
    db3 = float(dz3.sum())
    dg2 = np.outer(dz3, params.W3[0])
    dz2 = dg2 * f.g2 * (1.0 - f.g2)
    dW2 = dz2.T @ f.g1
    db2 = dz2.sum(axis=0)
    dg1 = dz2 @ params.W2
    dz1 = dg1 * f.g1 * (1.0 - f.g1)
    dW1 = dz1.T @ f.x
    db1 = dz1.sum(axis=0)
    dx = dz1 @ params.W1  # (n, K)
    return dx, dW1, dW2, dW3, db1, db2, db3


def gradients(params: ModelParams, pairs: list[Pair]) -> Grads:
    """Analytic gradient of `loss` with respect to every parameter."""
    s, e, r = _pair_arrays(params, pairs)
    hs = sigmoid(params.A[s])
    f = forward(params, hs, e)
    return _gradients_from_forward(params, f, s, e, r, hs)


def init_params(
    dataset: EncodedDataset, config: TrainConfig, rng: np.random.Generator
) -> ModelParams:
    """Seeded init: A, B, D uniform in +-init_scale; W uniform in [0, scale].

    b2 and b3 are set to center their pre-activations (the previous layer's
    sigmoids sit at ~0.5, and an all-positive weight stack would otherwise
    start every prediction well above 0.5; full-batch steps then slam W3
    into the zero clip and the network dies at a base-rate plateau). b1
    stays zero because the interaction vector is already centered. Draw
    order is fixed and part of the determinism contract.
    """
    n, m, k = dataset.N, dataset.M, dataset.K
    h1, h2 = config.hidden1, config.hidden2
    s = config.init_scale
    d_cols = 1 if config.discrimination_mode == SCALAR else k
    A = rng.uniform(-s, s, size=(n, k))
    B = rng.uniform(-s, s, size=(m, k))
    D = rng.uniform(-s, s, size=(m, d_cols))
    W1 = rng.uniform(0.0, s, size=(h1, k))
    W2 = rng.uniform(0.0, s, size=(h2, h1))
    W3 = rng.uniform(0.0, s, size=(1, h2))
    return ModelParams(
        A=A,
        B=B,
        D=D,
        W1=W1,
        W2=W2,
        W3=W3,
        b1=np.zeros(h1),
        b2=-(W2 @ np.full(h1, 0.5)),
        b3=float(-(W3[0] @ np.full(h2, 0.5))),
        hyper=HyperParams(K=k, H1=h1, H2=h2, discrimination_mode=config.discrimination_mode),
        qmatrix=dataset.qmatrix,
        student_ids=dataset.student_ids,
    )


def split_records(
    dataset: EncodedDataset, fraction: float, rng: np.random.Generator
) -> tuple[list[Pair], list[Pair]]:
    """Record-level holdout split; both halves keep ascending record order."""
    pairs = [(obs.student, obs.item, obs.correct) for obs in dataset.records]
    n_hold = int(len(pairs) * fraction)
    if n_hold == 0:
        return pairs, []
    perm = rng.permutation(len(pairs))
    hold_idx = np.sort(perm[:n_hold])
    train_idx = np.sort(perm[n_hold:])
    return [pairs[i] for i in train_idx], [pairs[i] for i in hold_idx]


class _Adam:
    def __init__(self, shapes: dict, config: TrainConfig):
        self.m = {k: np.zeros(s) for k, s in shapes.items()}
        self.v = {k: np.zeros(s) for k, s in shapes.items()}
        self.t = 0
        self.cfg = config

    def step(self, name: str, grad: np.ndarray) -> np.ndarray:
        c = self.cfg
        m = self.m[name] = c.beta1 * self.m[name] + (1 - c.beta1) * grad
        v = self.v[name] = c.beta2 * self.v[name] + (1 - c.beta2) * grad * grad
        m_hat = m / (1 - c.beta1**self.t)
        v_hat = v / (1 - c.beta2**self.t)
        return c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)


_PARAM_NAMES = ("A", "B", "D", "W1", "W2", "W3", "b1", "b2")


def fit(
    dataset: EncodedDataset,
    config: TrainConfig | None = None,
    on_step=None,
) -> tuple[ModelParams, TrainReport]:
    """Train a fresh model on the dataset.

    Fully deterministic given (dataset, config). `on_step(epoch, params)` is
    called after each projected update so tests can watch invariants.
    """
    config = config or TrainConfig()
    init_ss, split_ss = np.random.SeedSequence(config.seed).spawn(2)
    params = init_params(dataset, config, np.random.default_rng(init_ss))
    train_pairs, holdout_pairs = split_records(
        dataset, config.holdout_fraction, np.random.default_rng(split_ss)
    )
    if not train_pairs:
        raise DomainError("EmptyBatch", "no training records after holdout split")

    adam = None
    if config.optimizer == "adam":
        shapes = {name: getattr(params, name).shape for name in _PARAM_NAMES}
        shapes["b3"] = ()
        adam = _Adam(shapes, config)

    losses: list[float] = []
    s, e, r = _pair_arrays(params, train_pairs)
    for epoch in range(config.epochs):
        hs = sigmoid(params.A[s])
        f = forward(params, hs, e)
        losses.append(float(bce_with_logits(f.z3, r).sum()) / len(train_pairs))
        g = _gradients_from_forward(params, f, s, e, r, hs)
        if adam is not None:
            adam.t += 1
            for name in _PARAM_NAMES:
                getattr(params, name)[...] -= adam.step(name, getattr(g, name))
            params.b3 -= float(adam.step("b3", np.float64(g.b3)))
        else:
            lr = config.learning_rate
            for name in _PARAM_NAMES:
                getattr(params, name)[...] -= lr * getattr(g, name)
            params.b3 -= lr * g.b3
        np.maximum(params.W1, 0.0, out=params.W1)
        np.maximum(params.W2, 0.0, out=params.W2)
        np.maximum(params.W3, 0.0, out=params.W3)
        if on_step is not None:
            on_step(epoch, params)

    holdout_accuracy = holdout_ce = calibrated = None
    if holdout_pairs:
        hs_, es_, rs_ = _pair_arrays(params, holdout_pairs)
        f = forward(params, sigmoid(params.A[hs_]), es_)
        holdout_ce = float(bce_with_logits(f.z3, rs_).mean())
        holdout_accuracy = float(((f.y >= 0.5) == (rs_ == 1.0)).mean())
        calibrated = _calibrate_threshold(f.y, rs_)

    report = TrainReport(
        losses=losses,
        holdout_accuracy=holdout_accuracy,
        holdout_ce=holdout_ce,
        epochs=config.epochs,
        seed=config.seed,
        n_train=len(train_pairs),
        n_holdout=len(holdout_pairs),
        calibrated_threshold=calibrated,
    )
    return params, report


def _gradients_from_forward(params, f, s, e, r, hs) -> Grads:
    # same math as gradients(), reusing the forward pass of the epoch
    dx, dW1, dW2, dW3, db1, db2, db3 = backprop_to_x(params, f, r)
    masked = dx * f.q
    d_hs = masked * f.h_disc
    if params.hyper.discrimination_mode == SCALAR:
        d_hdisc = (masked * (hs - f.h_diff)).sum(axis=1, keepdims=True)
    else:
        d_hdisc = masked * (hs - f.h_diff)
    gA = np.zeros_like(params.A)
    gB = np.zeros_like(params.B)
    gD = np.zeros_like(params.D)
    np.add.at(gA, s, d_hs * hs * (1.0 - hs))
    np.add.at(gB, e, -d_hs * f.h_diff * (1.0 - f.h_diff))
    np.add.at(gD, e, d_hdisc * f.h_disc * (1.0 - f.h_disc))
    return Grads(gA, gB, gD, dW1, dW2, dW3, db1, db2, db3)


def _calibrate_threshold(y: np.ndarray, r: np.ndarray) -> float:
    """Cutoff that maximizes holdout accuracy; ties resolve to the smallest."""
    best_t, best_acc = 0.5, -1.0
    for t in sorted(set(np.concatenate([y, [0.5]]).tolist())):
        acc = float(((y >= t) == (r == 1.0)).mean())
        if acc > best_acc:
            best_t, best_acc = t, acc
    return float(best_t)
