"""Estimate one student's mastery with every trained parameter frozen.

The student-specific cross-entropy is minimized over unconstrained logits
u, with mastery read off as sigma(u). The logit parameterization keeps
mastery strictly inside (0, 1) without any projection step. Plain gradient
descent from a shared initial point makes repeat runs bit-identical, which
the contrastive explanations rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ModelParams, forward, sigmoid
from .train import bce_with_logits

Response = tuple[int, int]  # (item index, correct)

_MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class PosteriorConfig:
    learning_rate: float = 0.2
    max_steps: int = 1000
    tolerance: float = 1e-7
    u0: np.ndarray | None = None  # default: all-zero logits, mastery 0.5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("BadConfig", "learning_rate must be positive")
        if self.max_steps < 1:
            raise DomainError("BadConfig", "max_steps must be >= 1")


@dataclass
class PosteriorState:
    u: np.ndarray        # (K,) unconstrained logits
    mastery: np.ndarray  # sigma(u), kept in sync
    responses: list[Response]
    steps_run: int
    final_loss: float


def _initial_u(params: ModelParams, config: PosteriorConfig) -> np.ndarray:
    if config.u0 is None:
        return np.zeros(params.K)
    u0 = np.asarray(config.u0, dtype=np.float64)
    if u0.shape != (params.K,):
        raise DomainError("ShapeMismatch", f"u0 must have shape ({params.K},)")
    return u0.copy()


def _check_responses(params: ModelParams, responses: list[Response]):
    items = np.array([e for e, _ in responses], dtype=np.intp)
    r = np.array([r for _, r in responses], dtype=np.float64)
    if items.size and (items.min() < 0 or items.max() >= params.M):
        bad = int(items[(items < 0) | (items >= params.M)][0])
        raise DomainError("UnknownItem", f"item index {bad} is not in the model")
    if not np.all((r == 0.0) | (r == 1.0)):
        raise DomainError("BadCorrectValue", "correctness must be 0 or 1")
    return items, r


def response_loss(params: ModelParams, u: np.ndarray, items, r) -> float:
    """Cross-entropy of the responses under mastery sigma(u)."""
    f = forward(params, sigmoid(u), items)
    return float(bce_with_logits(f.z3, r).sum())


def response_loss_grad(params: ModelParams, u: np.ndarray, items, r):
    """(loss, d loss / d u); same backward tail as full training."""
    hs = sigmoid(u)
    f = forward(params, hs, items)
    total = float(bce_with_logits(f.z3, r).sum())
    dz3 = f.y - r
    dg2 = np.outer(dz3, params.W3[0])
    dz2 = dg2 * f.g2 * (1.0 - f.g2)
    dg1 = dz2 @ params.W2
    dz1 = dg1 * f.g1 * (1.0 - f.g1)
    dx = dz1 @ params.W1
    d_hs = (dx * f.q * f.h_disc).sum(axis=0)
    return total, d_hs * hs * (1.0 - hs)


def diagnose(
    params: ModelParams,
    responses: list[Response],
    config: PosteriorConfig | None = None,
) -> PosteriorState:
    """Fit mastery logits to the responses; the model itself never changes.

    With no responses there is no evidence and the prior sigma(u0) is
    returned untouched. Otherwise gradient descent with backtracking runs
    until the loss improvement drops below the tolerance, no improving step
    exists, or max_steps is reached. The loss sequence is monotone.
    """
    config = config or PosteriorConfig()
    u = _initial_u(params, config)
    if not responses:
        return PosteriorState(u, sigmoid(u), [], 0, 0.0)

    items, r = _check_responses(params, responses)
    prev, grad = response_loss_grad(params, u, items, r)
    steps = 0
    cur = prev
    for _ in range(config.max_steps):
        # backtracking: halve the step until it does not worsen the loss,
        # so one base rate serves both flat and sharp posteriors
        step = config.learning_rate
        accepted = False
        for _retry in range(_MAX_BACKTRACKS):
            cand = u - step * grad
            cand_loss, cand_grad = response_loss_grad(params, cand, items, r)
            if cand_loss <= prev:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            cur = prev  # no descent direction left at float precision
            break
        u, cur, grad = cand, cand_loss, cand_grad
        steps += 1
        if prev - cur < config.tolerance:
            break
        prev = cur
    return PosteriorState(u, sigmoid(u), list(responses), steps, cur)
