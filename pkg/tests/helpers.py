"""Shared builders for tests: random projected models and tiny fixtures."""

from __future__ import annotations

import numpy as np

from cdworkbench.ingest import QMatrix
from cdworkbench.model import HyperParams, ModelParams, project_nonnegative


def random_qmatrix(rng: np.random.Generator, M: int, K: int) -> QMatrix:
    entries = (rng.random((M, K)) < 0.45).astype(np.int8)
    for e in range(M):  # every item must measure at least one KC
        if entries[e].sum() == 0:
            entries[e, rng.integers(K)] = 1
    return QMatrix(
        [f"i{e + 1}" for e in range(M)], [f"kc{k + 1}" for k in range(K)], entries
    )


def random_params(
    seed: int,
    N: int = 4,
    M: int = 6,
    K: int = 3,
    H1: int = 8,
    H2: int = 4,
    mode: str = "scalar",
    scale: float = 0.8,
) -> ModelParams:
    """A random model already satisfying the nonnegativity invariant."""
    rng = np.random.default_rng(seed)
    q = random_qmatrix(rng, M, K)
    d_cols = 1 if mode == "scalar" else K
    params = ModelParams(
        A=rng.normal(0.0, scale, (N, K)),
        B=rng.normal(0.0, scale, (M, K)),
        D=rng.normal(0.0, scale, (M, d_cols)),
        W1=rng.normal(0.0, scale, (H1, K)),
        W2=rng.normal(0.0, scale, (H2, H1)),
        W3=rng.normal(0.0, scale, (1, H2)),
        b1=rng.normal(0.0, 0.3, H1),
        b2=rng.normal(0.0, 0.3, H2),
        b3=float(rng.normal(0.0, 0.3)),
        hyper=HyperParams(K=K, H1=H1, H2=H2, discrimination_mode=mode),
        qmatrix=q,
        student_ids=[f"s{i + 1}" for i in range(N)],
    )
    return project_nonnegative(params)


def random_mastery(rng: np.random.Generator, K: int) -> np.ndarray:
    return rng.uniform(0.05, 0.95, K)


def random_responses(
    rng: np.random.Generator, M: int, n: int
) -> list[tuple[int, int]]:
    items = rng.choice(M, size=min(n, M), replace=False)
    return [(int(e), int(rng.integers(2))) for e in items]
