import json

import pytest
from fastapi.testclient import TestClient

from augsearch.policy import parse_policy_text, policy_to_doc
from augsearch.service.app import create_app

from conftest import TABLE4_ORIGINAL


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_augment_with_policy_text(client):
    response = client.post(
        "/augment",
        json={"lines": ["the disk is full\tkeep it"], "policy_text": "(D_det, 2, 1.0)", "seed": 1},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["lines"] == ["disk is full\tkeep it"]
    assert body["gates_fired"]["D_det"] == 1
    assert body["changes_applied"]["D_det"] == 1


def test_augment_with_structured_policy(client):
    policy = parse_policy_text(
        "(D_det, 1, 1.0) (S, 1, 1.0)\n(R, 1, 1.0) (D_v, 1, 1.0)\n"
        "(P, 1, 1.0) (G_n, 1, 1.0)\n(D_p, 1, 1.0) (D_adp, 1, 1.0)"
    )
    response = client.post(
        "/augment",
        json={"lines": ["the disk is full"], "policy": policy_to_doc(policy), "seed": 3},
    )
    assert response.status_code == 200


def test_augment_requires_exactly_one_policy_input(client):
    assert client.post("/augment", json={"lines": ["a"], "seed": 0}).status_code == 400
    both = client.post(
        "/augment",
        json={"lines": ["a"], "seed": 0, "policy_text": "(R, 1, 0.5)", "policy": {"sub_policies": []}},
    )
    assert both.status_code == 400


def test_augment_bad_policy_is_400_with_position(client):
    response = client.post("/augment", json={"lines": ["a"], "policy_text": "(Q, 1, 0.5)", "seed": 0})
    assert response.status_code == 400
    assert "Q" in response.json()["detail"]


def test_augment_deterministic(client):
    request = {"lines": [TABLE4_ORIGINAL], "policy_text": "(D_v, 3, 0.2) (R, 1, 0.5)", "seed": 42}
    first = client.post("/augment", json=request).json()
    second = client.post("/augment", json=request).json()
    assert first == second


def test_eval_endpoint(client):
    response = client.post(
        "/eval",
        json={"responses": ["please boot from the disk"], "references": ["boot the disk now"]},
    )
    body = response.json()
    assert body["activity_f1"] == 1.0
    assert body["entity_f1"] == 1.0
    assert body["examples"] == 1


def test_eval_mismatched_lengths_is_400(client):
    response = client.post("/eval", json={"responses": ["a"], "references": ["a", "b"]})
    assert response.status_code == 400


def test_eval_empty_is_400(client):
    assert client.post("/eval", json={"responses": [], "references": []}).status_code == 400


def test_policy_validate_full_policy(client):
    policy = parse_policy_text(
        "(P, 1, 0.5) (D_adv, 4, 0.4)\n(D_v, 3, 0.2) (R, 1, 0.5)\n"
        "(R, 3, 0.9) (D_adp, 1, 0.5)\n(D_p, 2, 0.3) (D_adp, 2, 0.1)"
    )
    body = client.post("/policy/validate", json={"text": json.dumps(policy_to_doc(policy))}).json()
    assert body["valid"] and body["kind"] == "policy"
    assert body["policy"] == policy_to_doc(policy)


def test_policy_validate_subpolicy_and_operation(client):
    body = client.post("/policy/validate", json={"text": "(D_v, 3, 0.2) (R, 1, 0.5)"}).json()
    assert body["valid"] and body["kind"] == "sub_policy"
    body = client.post("/policy/validate", json={"text": "(R, 4, 1.0)"}).json()
    assert body["valid"] and body["kind"] == "operation"


def test_policy_validate_rejects_bad_text(client):
    body = client.post("/policy/validate", json={"text": "(Q, 1, 0.5)"}).json()
    assert not body["valid"]
    assert "Q" in body["error"]


def test_policy_render(client):
    policy = parse_policy_text(
        "(P, 1, 0.5) (D_adv, 4, 0.4)\n(D_v, 3, 0.2) (R, 1, 0.5)\n"
        "(R, 3, 0.9) (D_adp, 1, 0.5)\n(D_p, 2, 0.3) (D_adp, 2, 0.1)"
    )
    body = client.post("/policy/render", json={"policy": policy_to_doc(policy)}).json()
    assert body["compact"].splitlines()[0] == "(P, 1, 0.5) (D_adv, 4, 0.4)"


def test_search_endpoint_smoke(client):
    train = open("src/augsearch/data/mini/train.txt").read().splitlines()
    valid = open("src/augsearch/data/mini/valid.txt").read().splitlines()
    response = client.post(
        "/search",
        json={
            "train_lines": train,
            "valid_lines": valid,
            "test_lines": valid,
            "episodes": 2,
            "seed": 5,
            "include_all_ops": True,
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["episodes"] == 2
    assert body["best"]["compact"]
    assert len(body["top"]) <= 3
    assert body["log_jsonl"].count("\n") == 2
    assert body["final_report"]["examples"] == len(valid)
    assert body["all_ops_report"] is not None


def test_search_invalid_mode_is_400(client):
    response = client.post(
        "/search",
        json={"train_lines": ["a\tb"], "valid_lines": ["a\tb"], "mode": "psychic", "episodes": 1},
    )
    assert response.status_code == 400


def test_search_empty_corpus_is_400(client):
    response = client.post("/search", json={"train_lines": [], "valid_lines": [], "episodes": 1})
    assert response.status_code == 400
