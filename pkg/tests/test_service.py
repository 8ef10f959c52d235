import pytest
from fastapi.testclient import TestClient

from cdworkbench.ingest import qmatrix_csv, responses_csv
from cdworkbench.service import create_app
from cdworkbench.synth import SynthConfig, generate

TRAIN_BODY = {"epochs": 120, "seed": 7}


@pytest.fixture(scope="module")
def synth_csvs():
    _, dataset = generate(
        SynthConfig(n_students=10, n_items=9, n_kcs=3, items_per_kc=3, seed=21)
    )
    return responses_csv(dataset), qmatrix_csv(dataset), dataset


@pytest.fixture(scope="module")
def client(synth_csvs):
    return TestClient(create_app())


@pytest.fixture(scope="module")
def uploaded(client, synth_csvs):
    responses, qmatrix, _ = synth_csvs
    resp = client.post(
        "/api/datasets", json={"responses_csv": responses, "qmatrix_csv": qmatrix}
    )
    assert resp.status_code == 201
    return resp.json()["dataset_id"]


@pytest.fixture(scope="module")
def model_id(client, uploaded):
    resp = client.post("/api/models", json={"dataset_id": uploaded, **TRAIN_BODY})
    assert resp.status_code == 200
    body = resp.json()
    assert body["train_report"]["losses"][-1] < body["train_report"]["losses"][0]
    return body["model_id"]


class TestDatasets:
    def test_valid_upload_gets_201(self, uploaded):
        assert uploaded.startswith("ds-")

    def test_nonbinary_qmatrix_gets_422(self, client, synth_csvs):
        responses, _, _ = synth_csvs
        resp = client.post(
            "/api/datasets",
            json={"responses_csv": responses, "qmatrix_csv": "item_id,kc1\ni01,2\n"},
        )
        assert resp.status_code == 422
        codes = [e["code"] for e in resp.json()["errors"]]
        assert "NonBinaryEntry" in codes

    def test_reupload_gets_distinct_id(self, client, synth_csvs, uploaded):
        responses, qmatrix, _ = synth_csvs
        resp = client.post(
            "/api/datasets", json={"responses_csv": responses, "qmatrix_csv": qmatrix}
        )
        assert resp.status_code == 201
        assert resp.json()["dataset_id"] != uploaded

    def test_get_dataset_and_students(self, client, uploaded, synth_csvs):
        _, _, dataset = synth_csvs
        detail = client.get(f"/api/datasets/{uploaded}").json()
        assert detail["student_ids"] == dataset.student_ids
        sid = dataset.student_ids[0]
        student = client.get(f"/api/datasets/{uploaded}/students/{sid}").json()
        assert len(student["responses"]) == dataset.M

    def test_unknown_dataset_404(self, client):
        assert client.get("/api/datasets/ds-999").status_code == 404


class TestModels:
    def test_unknown_dataset_404(self, client):
        resp = client.post("/api/models", json={"dataset_id": "ds-999"})
        assert resp.status_code == 404

    def test_same_seed_identical_params_distinct_ids(self, client, uploaded):
        r1 = client.post("/api/models", json={"dataset_id": uploaded, **TRAIN_BODY})
        r2 = client.post("/api/models", json={"dataset_id": uploaded, **TRAIN_BODY})
        id1, id2 = r1.json()["model_id"], r2.json()["model_id"]
        assert id1 != id2
        p1 = client.get(f"/api/models/{id1}").json()["params"]
        p2 = client.get(f"/api/models/{id2}").json()["params"]
        assert p1 == p2

    def test_malformed_body_400_with_field_messages(self, client):
        resp = client.post("/api/models", json={"dataset_id": 3, "epochs": "many"})
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "BadRequest"
        fields = {d["field"] for d in body["details"]}
        assert any("epochs" in f for f in fields)


class TestDiagnose:
    def test_empty_responses_prior(self, client, model_id):
        resp = client.post(f"/api/models/{model_id}/diagnose", json={"responses": []})
        assert resp.status_code == 200
        body = resp.json()
        assert all(v == 0.5 for v in body["mastery"].values())
        assert body["steps_run"] == 0

    def test_diagnose_returns_chain(self, client, model_id, synth_csvs):
        _, _, dataset = synth_csvs
        sid = dataset.student_ids[1]
        responses = [
            {"item_id": dataset.item_ids[e], "correct": r}
            for e, r in dataset.responses_for(sid)
        ]
        body = client.post(
            f"/api/models/{model_id}/diagnose", json={"responses": responses}
        ).json()
        assert set(body["mastery"]) == set(dataset.kc_ids)
        assert len(body["reasoning_chain"]) == dataset.K
        cited = {
            ev["item_id"] for step in body["reasoning_chain"] for ev in step["evidence"]
        }
        assert cited <= set(dataset.item_ids)

    def test_unknown_item_400(self, client, model_id):
        resp = client.post(
            f"/api/models/{model_id}/diagnose",
            json={"responses": [{"item_id": "nope", "correct": 1}]},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "UnknownItem"


class TestExplain:
    def test_contrastive_no_flips_zero_delta(self, client, model_id, synth_csvs):
        _, _, dataset = synth_csvs
        responses = [
            {"item_id": dataset.item_ids[e], "correct": r}
            for e, r in dataset.responses_for(dataset.student_ids[0])
        ]
        body = client.post(
            f"/api/models/{model_id}/explain/contrastive",
            json={"responses": responses, "flip_items": []},
        ).json()
        assert all(v == 0.0 for v in body["delta"].values())

    def test_contrastive_flip_changes_something(self, client, model_id, synth_csvs):
        _, _, dataset = synth_csvs
        sid = dataset.student_ids[0]
        pairs = dataset.responses_for(sid)
        wrong = next(
            dataset.item_ids[e] for e, r in pairs if r == 0
        )
        responses = [
            {"item_id": dataset.item_ids[e], "correct": r} for e, r in pairs
        ]
        body = client.post(
            f"/api/models/{model_id}/explain/contrastive",
            json={"responses": responses, "flip_items": [wrong]},
        ).json()
        assert any(v != 0.0 for v in body["delta"].values())

    def test_counterfactual_empty_overrides_match_replay(
        self, client, model_id, synth_csvs
    ):
        _, _, dataset = synth_csvs
        sid = dataset.student_ids[2]
        responses = [
            {"item_id": dataset.item_ids[e], "correct": r}
            for e, r in dataset.responses_for(sid)
        ]
        diag = client.post(
            f"/api/models/{model_id}/diagnose", json={"responses": responses}
        ).json()
        cf = client.post(
            f"/api/models/{model_id}/explain/counterfactual",
            json={"base": {"responses": responses}, "overrides": {}},
        ).json()
        cf2 = client.post(
            f"/api/models/{model_id}/explain/counterfactual",
            json={"base": {"mastery": diag["mastery"]}, "overrides": {}},
        ).json()
        assert cf["y_prime"] == cf2["y_prime"]  # bit-exact replay equivalence

    def test_counterfactual_override_out_of_range_400(self, client, model_id):
        resp = client.post(
            f"/api/models/{model_id}/explain/counterfactual",
            json={"base": {"mastery": {"kc1": 0.5, "kc2": 0.5, "kc3": 0.5}},
                  "overrides": {"kc1": 1.2}},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "OverrideOutOfRange"

    def test_counterfactual_unknown_kc_400(self, client, model_id):
        resp = client.post(
            f"/api/models/{model_id}/explain/counterfactual",
            json={"base": {"mastery": {"kc1": 0.5, "kc2": 0.5, "kc3": 0.5}},
                  "overrides": {"kc9": 0.5}},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "UnknownKC"


class TestAnalytics:
    @pytest.mark.parametrize(
        "view", ["overview", "items", "kcs", "comparison", "suggestions"]
    )
    def test_views_all_serve(self, client, model_id, view):
        resp = client.get(f"/api/models/{model_id}/analytics/{view}")
        assert resp.status_code == 200

    def test_unknown_view_404(self, client, model_id):
        assert (
            client.get(f"/api/models/{model_id}/analytics/everything").status_code
            == 404
        )

    def test_tokens_not_indices(self, client, model_id, synth_csvs):
        _, _, dataset = synth_csvs
        body = client.get(f"/api/models/{model_id}/analytics/overview").json()
        assert set(body["kc_weights"]) == set(dataset.kc_ids)
        items = client.get(f"/api/models/{model_id}/analytics/items").json()
        assert {it["item_id"] for it in items["items"]} == set(dataset.item_ids)

    def test_concurrent_reads_identical(self, client, model_id):
        a = client.get(f"/api/models/{model_id}/analytics/items").json()
        b = client.get(f"/api/models/{model_id}/analytics/items").json()
        assert a == b
