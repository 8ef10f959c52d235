import json
import math

import numpy as np
import pytest

from cdworkbench.errors import DomainError
from cdworkbench.model import (
    FORMAT_VERSION,
    from_json_dict,
    item_factors,
    load_model,
    params_equal,
    predict,
    predict_batch,
    project_nonnegative,
    save_model,
    sigmoid,
    student_factor,
    to_json_dict,
)
from helpers import random_mastery, random_params


def _scalar_sigmoid(v: float) -> float:
    """Element-wise oracle: same sign-branch, evaluated one scalar at a time
    (numpy's scalar exp is bit-identical to its vectorized exp)."""
    if v >= 0:
        return float(1.0 / (1.0 + np.exp(-v)))
    ev = float(np.exp(v))
    return ev / (1.0 + ev)


class TestSigmoid:
    def test_zero_is_half(self):
        assert sigmoid(np.array([0.0])).tolist() == [0.5]

    def test_no_overflow_at_extremes(self):
        v = sigmoid(np.array([-1000.0, 1000.0]))
        assert v[0] == 0.0 and v[1] == 1.0  # saturates cleanly, never NaN

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-30, 30, 100)
        expected = np.array([_scalar_sigmoid(v) for v in x])
        assert sigmoid(x).tolist() == expected.tolist()
        # independent libm cross-check, allowing the last ulp of exp
        for v, got in zip(x, sigmoid(x)):
            ref = 1.0 / (1.0 + math.exp(-v)) if v >= 0 else math.exp(v) / (1.0 + math.exp(v))
            assert math.isclose(got, ref, rel_tol=1e-15, abs_tol=0.0)


class TestStudentFactor:
    def test_zero_row_gives_half(self):
        params = random_params(1)
        params.A[0] = 0.0
        assert student_factor(params, 0).tolist() == [0.5] * params.K

    def test_large_preactivation_approaches_one(self):
        params = random_params(2)
        params.A[0] = [5.0, 10.0, 30.0]
        h = student_factor(params, 0)
        assert np.all(np.diff(h) > 0) and h[-1] < 1.0 or h[-1] == sigmoid(
            np.array([30.0])
        )[0]
        assert np.all(h > 0.99)

    def test_matches_per_element_oracle(self):
        params = random_params(3)
        row = params.A[1]
        expected = [_scalar_sigmoid(v) for v in row]
        assert student_factor(params, 1).tolist() == expected

    def test_index_out_of_range(self):
        params = random_params(4)
        with pytest.raises(DomainError) as err:
            student_factor(params, params.N)
        assert err.value.code == "IndexOutOfRange"


class TestItemFactors:
    def test_q_row_bit_exact(self):
        params = random_params(5)
        q_e, _, _ = item_factors(params, 2)
        assert q_e.tolist() == params.qmatrix.entries[2].tolist()

    def test_zero_rows_give_half(self):
        params = random_params(6)
        params.B[1] = 0.0
        params.D[1] = 0.0
        _, h_diff, h_disc = item_factors(params, 1)
        assert h_diff.tolist() == [0.5] * params.K
        assert h_disc == 0.5

    def test_per_kc_mode_returns_vector(self):
        params = random_params(7, mode="per_kc")
        _, _, h_disc = item_factors(params, 0)
        assert h_disc.shape == (params.K,)


class TestPredict:
    def test_zero_head_forces_half(self):
        params = random_params(8)
        params.W3 = np.zeros_like(params.W3)
        params.b3 = 0.0
        for item in range(params.M):
            assert predict(params, random_mastery(np.random.default_rng(item), params.K), item).y == 0.5

    def test_masked_coordinate_is_ignored_bit_exact(self):
        rng = np.random.default_rng(9)
        for seed in range(30):
            params = random_params(seed)
            item = int(rng.integers(params.M))
            masked = np.flatnonzero(params.qmatrix.entries[item] == 0)
            if masked.size == 0:
                continue
            h = random_mastery(rng, params.K)
            h2 = h.copy()
            h2[masked] = random_mastery(rng, params.K)[masked]
            assert predict(params, h, item).y == predict(params, h2, item).y

    def test_interaction_zero_on_unrequired_kcs(self):
        params = random_params(10)
        trace = predict(params, random_mastery(np.random.default_rng(1), params.K), 0)
        for k in range(params.K):
            if trace.q_e[k] == 0:
                assert trace.x[k] == 0.0

    def test_finite_difference_gradient_nonnegative(self):
        # dy/dh_s[k] >= 0 for required KCs, by central differences (step 1e-5)
        rng = np.random.default_rng(11)
        step = 1e-5
        for seed in range(25):
            params = random_params(seed)
            item = int(rng.integers(params.M))
            h = rng.uniform(0.2, 0.8, params.K)
            for k in np.flatnonzero(params.qmatrix.entries[item] == 1):
                hp, hm = h.copy(), h.copy()
                hp[k] += step
                hm[k] -= step
                fd = (predict(params, hp, item).y - predict(params, hm, item).y) / (
                    2 * step
                )
                assert fd >= -1e-9

    def test_mastery_out_of_range(self):
        params = random_params(12)
        with pytest.raises(DomainError) as err:
            predict(params, np.array([0.5, 1.0, 0.5]), 0)
        assert err.value.code == "MasteryOutOfRange"

    def test_deterministic_trace(self):
        params = random_params(13)
        h = random_mastery(np.random.default_rng(2), params.K)
        t1, t2 = predict(params, h, 1), predict(params, h, 1)
        assert t1.y == t2.y and t1.x.tolist() == t2.x.tolist()

    def test_scalar_gate_broadcasts_like_per_kc(self):
        # a scalar gate must act as the same value replicated across KCs
        params = random_params(14)
        trace = predict(params, np.full(params.K, 0.6), 0)
        manual = trace.q_e * (trace.h_s - trace.h_diff) * trace.h_disc
        assert np.array_equal(trace.x, manual)


class TestMonotonicityProperty:
    def test_thousand_trials_zero_violations(self):
        rng = np.random.default_rng(42)
        violations = 0
        for trial in range(1000):
            params = random_params(trial % 50, scale=float(rng.uniform(0.3, 1.5)))
            item = int(rng.integers(params.M))
            required = np.flatnonzero(params.qmatrix.entries[item] == 1)
            k = int(rng.choice(required))
            h = rng.uniform(0.05, 0.9, params.K)
            h2 = h.copy()
            h2[k] = float(rng.uniform(h[k], 0.95))
            y1 = predict(params, h, item).y
            y2 = predict(params, h2, item).y
            if y2 < y1:
                violations += 1
        assert violations == 0


class TestProjection:
    def test_negative_clipped_positive_kept(self):
        params = random_params(15)
        params.W1[0, 0] = -0.3
        params.W2[0, 0] = 0.7
        out = project_nonnegative(params)
        assert out.W1[0, 0] == 0.0
        assert out.W2[0, 0] == 0.7
        assert params.W1[0, 0] == -0.3  # input untouched

    def test_idempotent_bit_exact(self):
        params = random_params(16)
        once = project_nonnegative(params)
        twice = project_nonnegative(once)
        assert params_equal(once, twice)

    def test_leaves_factors_alone(self):
        params = random_params(17)
        params.W3[0, 0] = -1.0
        out = project_nonnegative(params)
        assert np.array_equal(out.A, params.A)
        assert np.array_equal(out.B, params.B)
        assert np.array_equal(out.D, params.D)
        assert np.array_equal(out.b1, params.b1)


class TestPersistence:
    def test_save_load_bit_identical(self, tmp_path):
        params = random_params(18)
        path = tmp_path / "model.json"
        save_model(params, path)
        loaded = load_model(path)
        assert params_equal(params, loaded)

    def test_format_version_and_fields(self, tmp_path):
        params = random_params(19, mode="per_kc")
        doc = to_json_dict(params)
        assert doc["format_version"] == FORMAT_VERSION
        for key in ("N", "M", "K", "H1", "H2", "discrimination_mode", "kc_ids",
                    "item_ids", "A", "B", "D", "W1", "W2", "W3", "b1", "b2", "b3"):
            assert key in doc
        assert params_equal(from_json_dict(json.loads(json.dumps(doc))), params)

    def test_bad_version_rejected(self, tmp_path):
        params = random_params(20)
        doc = to_json_dict(params)
        doc["format_version"] = 999
        with pytest.raises(DomainError) as err:
            from_json_dict(doc)
        assert err.value.code == "BadModelFile"


def test_predict_batch_matches_single():
    params = random_params(21)
    h = random_mastery(np.random.default_rng(3), params.K)
    batch = predict_batch(params, h, np.arange(params.M))
    singles = [predict(params, h, e).y for e in range(params.M)]
    assert batch.tolist() == singles
