import json

import pytest

from augsearch.harness import (
    EpisodeRecord,
    SearchConfig,
    SearchLog,
    ToyTarget,
    ToyTargetConfig,
    all_operations_baseline,
    build_task,
    evaluate_report,
    finalize,
    run_episode,
    run_search,
    unaugmented_baseline,
)
from augsearch.ops import OperationType
from augsearch.policy import Example, Operation, Policy, parse_policy_text, policy_from_operations
from augsearch.reward import weighted_reward


@pytest.fixture(scope="module")
def task(tmp_path_factory):
    config = SearchConfig(episodes=4, seed=0)
    return build_task(config, tmp_path_factory.mktemp("task"))


def make_policy(*type_counts) -> Policy:
    ops = [Operation(t, n, p) for t, n, p in type_counts]
    return policy_from_operations(ops)


# --- toy target ---


def test_toy_target_config_validation():
    with pytest.raises(ValueError):
        ToyTargetConfig(threshold=0.0)
    with pytest.raises(ValueError):
        ToyTargetConfig(hash_buckets=0)


def test_toy_target_requires_init(reward_lexicon):
    target = ToyTarget(ToyTargetConfig(), reward_lexicon)
    with pytest.raises(ValueError, match="not initialized"):
        target.train_one_epoch([Example("a", "b")])


def test_toy_target_consumes_every_example(reward_lexicon):
    target = ToyTarget(ToyTargetConfig(pretrain_epochs=0), reward_lexicon)
    corpus = [Example(f"source{i}", f"token{i}") for i in range(3)]
    target.init_from_corpus(corpus)
    target.train_one_epoch(corpus)
    assert (target.bias != 0).all()


def test_toy_target_is_deterministic(reward_lexicon, task):
    a = ToyTarget(ToyTargetConfig(pretrain_epochs=3), reward_lexicon)
    b = ToyTarget(ToyTargetConfig(pretrain_epochs=3), reward_lexicon)
    a.pretrain(task.train)
    b.pretrain(task.train)
    assert (a.weights == b.weights).all()
    assert a.evaluate(task.valid) == b.evaluate(task.valid)


def test_toy_target_checkpoint_round_trip(tmp_path, reward_lexicon, task):
    target = task.new_target()
    first = tmp_path / "a.ckpt"
    second = tmp_path / "b.ckpt"
    target.save(first)
    other = ToyTarget(ToyTargetConfig(), reward_lexicon)
    other.resume(first)
    other.save(second)
    assert first.read_bytes() == second.read_bytes()
    assert other.evaluate(task.valid) == target.evaluate(task.valid)


# --- config and log plumbing ---


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(mode="clairvoyant")
    with pytest.raises(ValueError):
        SearchConfig(episodes=0)
    with pytest.raises(ValueError):
        SearchConfig(finalize_protocol="overnight")


def test_search_config_doc_round_trip():
    config = SearchConfig(episodes=7, seed=3, mode="aware", target=ToyTargetConfig(learning_rate=0.25))
    doc = json.loads(json.dumps(config.to_doc()))
    assert SearchConfig.from_doc(doc) == config


def test_search_log_monotone_and_best_ties_earliest():
    policy_a = make_policy(*[(OperationType.RANDOM_SWAP, 1, 0.5)] * 8)
    policy_b = make_policy(*[(OperationType.STAMMER, 1, 0.5)] * 8)
    log = SearchLog()
    log.append(EpisodeRecord(0, policy_a, 0.5, 0.5, 1.0, None))
    log.append(EpisodeRecord(1, policy_b, 0.5, 0.5, 1.0, 0.9))
    with pytest.raises(ValueError):
        log.append(EpisodeRecord(1, policy_a, 0.1, 0.1, 0.1, 0.1))
    best = log.best()
    assert best.episode == 0 and best.policy == policy_a


def test_search_log_jsonl_round_trip():
    policy = make_policy(*[(OperationType.PARAPHRASE, 2, 0.3)] * 8)
    log = SearchLog()
    log.append(EpisodeRecord(0, policy, 0.25, 0.5, weighted_reward(0.25, 0.5), 0.1, wall_time_s=1.5))
    log.append(EpisodeRecord(1, None, None, None, None, 0.2, error="RuntimeError: boom"))
    text = log.to_jsonl()
    assert "wall_time" not in text
    restored = SearchLog.from_jsonl(text)
    assert restored.to_jsonl() == text
    assert restored.records[1].error == "RuntimeError: boom"
    assert "wall_time_s" in log.timings_jsonl()


# --- search loop ---


def test_run_search_rigged_reward_recovers_optimum(task, tmp_path):
    def rigged(task_, records, episode):
        first_type = records[0].policy.sub_policies[0].ops[0].op_type
        hit = first_type is OperationType.RANDOM_SWAP
        return (1.0, 0.0, 1.0) if hit else (0.0, 0.0, 0.0)

    config = SearchConfig(episodes=120, seed=1)
    result = run_search(config, tmp_path, task=task, episode_fn=rigged)
    best_first = result.best_policy.sub_policies[0].ops[0].op_type
    assert best_first is OperationType.RANDOM_SWAP
    assert result.log.best().weighted == 1.0


def test_run_search_deterministic(task, tmp_path):
    config = SearchConfig(episodes=3, seed=5)
    first = run_search(config, tmp_path / "a", task=task)
    second = run_search(config, tmp_path / "b", task=task)
    assert first.log.to_jsonl() == second.log.to_jsonl()
    assert first.best_policy == second.best_policy


def test_run_search_logs_episode_failures_and_continues(task, tmp_path):
    def flaky(task_, records, episode):
        if episode == 1:
            raise RuntimeError("target training diverged")
        return run_episode(task_, records, episode)

    config = SearchConfig(episodes=3, seed=2)
    result = run_search(config, tmp_path, task=task, episode_fn=flaky)
    assert len(result.log.records) == 3
    failed = result.log.records[1]
    assert failed.error == "RuntimeError: target training diverged"
    assert failed.weighted is None
    assert result.log.best().episode in (0, 2)
    assert (tmp_path / "controller.ckpt").exists()


def test_episode_reward_is_weighted_f1_bit_for_bit(task, tmp_path):
    config = SearchConfig(episodes=3, seed=8)
    result = run_search(config, tmp_path, task=task)
    for record in result.log.records:
        assert record.weighted == weighted_reward(record.activity_f1, record.entity_f1)


def test_run_search_does_not_mutate_corpus_files(tmp_path):
    config = SearchConfig(episodes=2, seed=3)
    before = (
        open(config.train_path, "rb").read(),
        open(config.valid_path, "rb").read(),
        open(config.test_path, "rb").read(),
    )
    run_search(config, tmp_path)
    after = (
        open(config.train_path, "rb").read(),
        open(config.valid_path, "rb").read(),
        open(config.test_path, "rb").read(),
    )
    assert before == after


def test_run_search_aware_mode_smoke(tmp_path):
    config = SearchConfig(episodes=2, seed=4, mode="aware")
    result = run_search(config, tmp_path)
    assert len(result.log.records) == 2
    assert result.best_policy is not None


# --- finalize and baselines ---


def test_identity_policy_equals_baseline(task):
    # The shipped stopword list has no NOUN-tagged entries, so noun-stopword
    # dropout is inapplicable everywhere and finalize degenerates to the
    # unaugmented baseline.
    identity = parse_policy_text(
        "(D_n, 4, 1.0) (D_n, 4, 1.0)\n(D_n, 1, 0.1) (D_n, 1, 0.1)\n"
        "(D_n, 2, 1.0) (D_n, 2, 1.0)\n(D_n, 3, 1.0) (D_n, 3, 1.0)"
    )
    report = finalize(identity, task)
    assert report == unaugmented_baseline(task)


def test_finalize_protocols_both_run(task):
    policy = parse_policy_text(
        "(D_p, 4, 1.0) (D_det, 4, 1.0)\n(D_adp, 4, 1.0) (D_v, 4, 1.0)\n"
        "(D_adv, 4, 1.0) (D_o, 4, 1.0)\n(D_p, 4, 1.0) (D_adp, 4, 1.0)"
    )
    resumed = finalize(policy, task, protocol="resume")
    scratch = finalize(policy, task, protocol="scratch")
    assert resumed.examples == scratch.examples == len(task.test)
    assert resumed == finalize(policy, task, protocol="resume")
    assert scratch == finalize(policy, task, protocol="scratch")
    with pytest.raises(ValueError):
        finalize(policy, task, protocol="mystery")


def test_all_operations_baseline_runs_five_epochs(task, monkeypatch):
    calls = []
    original = ToyTarget.train_one_epoch

    def counting(self, examples):
        calls.append(len(examples))
        return original(self, examples)

    monkeypatch.setattr(ToyTarget, "train_one_epoch", counting)
    report = all_operations_baseline(task)
    assert len(calls) == 5
    assert all(n == len(task.train) for n in calls)
    assert report.examples == len(task.test)


def test_all_operations_baseline_deterministic(task):
    assert all_operations_baseline(task) == all_operations_baseline(task)


def test_finalize_missing_checkpoint_is_an_error(task, tmp_path):
    import dataclasses

    broken = dataclasses.replace(task, base_checkpoint=tmp_path / "gone.ckpt")
    policy = parse_policy_text(
        "(D_p, 1, 1.0) (D_det, 1, 1.0)\n(D_adp, 1, 1.0) (D_v, 1, 1.0)\n"
        "(D_adv, 1, 1.0) (D_o, 1, 1.0)\n(D_p, 1, 1.0) (D_adp, 1, 1.0)"
    )
    with pytest.raises(FileNotFoundError):
        finalize(policy, broken, protocol="resume")


def test_evaluate_report_consistency(task):
    report = evaluate_report(task.new_target(), task.valid)
    assert report.weighted == weighted_reward(report.activity_f1, report.entity_f1)
    assert report.examples == len(task.valid)
