"""Search harness: target-model contract, the bundled toy target, and the
controller-in-the-loop search.

Each episode samples a policy, perturbs the training corpus, resumes the
target from one shared converged checkpoint, trains a single epoch, scores
the validation set, and feeds the weighted F1 back to the controller as the
REINFORCE reward. Episodes never accumulate target training, so they could
evaluate in parallel on independent target copies; controller updates stay
under a single writer in episode order.

The bundled target is a deliberately small bag-of-tokens response scorer
standing in for a full dialogue model; the ``TargetModel`` contract is the
stable boundary where a real seq2seq target can be plugged in later.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from .controller import ControllerConfig, init_controller
from .corpus import EOT, EOU, tokenize
from .lexicons import DEFAULT_DATA_DIR, Lexicons, load_lexicons
from .ops import apply_coarse_operation, COARSE_OPERATIONS
from .policy import (
    Example,
    Policy,
    augment_corpus,
    augment_example,
    load_corpus,
    policy_from_doc,
    policy_to_doc,
)
from .reward import ActivityEntityLexicon, RewardReport, load_activity_entity_lexicon, score_responses, weighted_reward
from .util import derive_rng, load_checkpoint, save_checkpoint, stable_hash, write_text_atomic

DEFAULT_MINI_DIR = DEFAULT_DATA_DIR / "mini"


@runtime_checkable
class TargetModel(Protocol):
    """Behavioral contract the search loop drives."""

    def resume(self, checkpoint_path) -> None: ...

    def train_one_epoch(self, examples) -> None: ...

    def evaluate(self, examples) -> tuple[float, float]: ...

    def save(self, checkpoint_path) -> None: ...


@dataclass(frozen=True)
class ToyTargetConfig:
    hash_buckets: int = 4096
    learning_rate: float = 0.5
    threshold: float = 0.5
    pretrain_epochs: int = 25

    def __post_init__(self):
        if self.hash_buckets <= 0 or self.pretrain_epochs < 0:
            raise ValueError("hash_buckets must be positive and pretrain_epochs non-negative")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")


class ToyTarget:
    """Bag-of-tokens response scorer trained by per-example logistic steps.

    Sources hash to feature buckets; each response-vocabulary token gets an
    independent sigmoid score, and evaluation emits every token scoring above
    the threshold. Fully deterministic: zero init, fixed example order.
    """

    def __init__(self, config: ToyTargetConfig, reward_lex: ActivityEntityLexicon):
        self.config = config
        self.reward_lex = reward_lex
        self.vocab: list[str] = []
        self.weights = np.zeros((0, config.hash_buckets))
        self.bias = np.zeros(0)

    # --- features ---

    def _buckets(self, source: str) -> list[int]:
        seen = sorted(
            {
                stable_hash("toy-feature", tok.lower()) % self.config.hash_buckets
                for tok in source.split()
                if tok not in (EOU, EOT)
            }
        )
        return seen

    def _target_tokens(self, target: str | None) -> set[str]:
        if not target:
            return set()
        return {tok.lower() for tok in target.split() if tok not in (EOU, EOT)}

    def init_from_corpus(self, examples) -> None:
        vocab = set()
        for ex in examples:
            vocab |= self._target_tokens(ex.target)
        self.vocab = sorted(vocab)
        self.weights = np.zeros((len(self.vocab), self.config.hash_buckets))
        self.bias = np.zeros(len(self.vocab))

    # --- training and inference ---

    def train_one_epoch(self, examples) -> None:
        if not self.vocab:
            raise ValueError("target not initialized: call init_from_corpus or resume first")
        index = {tok: i for i, tok in enumerate(self.vocab)}
        lr = self.config.learning_rate
        for ex in examples:
            buckets = self._buckets(ex.source)
            logits = self.weights[:, buckets].sum(axis=1) + self.bias if buckets else self.bias.copy()
            probs = 1.0 / (1.0 + np.exp(-logits))
            y = np.zeros(len(self.vocab))
            for tok in self._target_tokens(ex.target):
                if tok in index:
                    y[index[tok]] = 1.0
            grad = probs - y
            if buckets:
                self.weights[:, buckets] -= lr * grad[:, None]
            self.bias -= lr * grad

    def pretrain(self, examples) -> None:
        self.init_from_corpus(examples)
        for _ in range(self.config.pretrain_epochs):
            self.train_one_epoch(examples)

    def respond(self, source: str) -> str:
        buckets = self._buckets(source)
        logits = self.weights[:, buckets].sum(axis=1) + self.bias if buckets else self.bias
        chosen = [tok for tok, logit in zip(self.vocab, logits) if 1.0 / (1.0 + np.exp(-logit)) > self.config.threshold]
        return " ".join(chosen)

    def evaluate(self, examples) -> tuple[float, float]:
        responses = [self.respond(ex.source) for ex in examples]
        golds = [ex.target or "" for ex in examples]
        report = score_responses(responses, golds, self.reward_lex)
        return report.activity_f1, report.entity_f1

    # --- persistence ---

    def save(self, checkpoint_path) -> None:
        meta = {"kind": "toy_target", "config": asdict(self.config), "vocab": self.vocab}
        save_checkpoint(checkpoint_path, {"weights": self.weights, "bias": self.bias}, meta)

    def resume(self, checkpoint_path) -> None:
        arrays, meta = load_checkpoint(checkpoint_path)
        if meta.get("kind") != "toy_target":
            raise ValueError(f"{checkpoint_path}: not a toy-target checkpoint")
        self.config = ToyTargetConfig(**meta["config"])
        self.vocab = list(meta["vocab"])
        self.weights = arrays["weights"]
        self.bias = arrays["bias"]


# --- search configuration and logging ---


@dataclass(frozen=True)
class SearchConfig:
    """Everything a search run needs; JSON-serializable for the CLI/service."""

    train_path: str = str(DEFAULT_MINI_DIR / "train.txt")
    valid_path: str = str(DEFAULT_MINI_DIR / "valid.txt")
    test_path: str = str(DEFAULT_MINI_DIR / "test.txt")
    lexicon_dir: str | None = None
    mode: str = "agnostic"
    episodes: int = 200
    seed: int = 0
    step_size: float = 0.05
    ema_decay: float = 0.95
    hidden_size: int = 64
    embed_size: int = 32
    finalize_protocol: str = "resume"
    all_ops_count: int = 4
    top_k: int = 3
    target: ToyTargetConfig = field(default_factory=ToyTargetConfig)

    def __post_init__(self):
        if self.mode not in ("agnostic", "aware"):
            raise ValueError(f"mode must be 'agnostic' or 'aware', got {self.mode!r}")
        if self.episodes <= 0:
            raise ValueError(f"episode budget must be positive, got {self.episodes}")
        if self.finalize_protocol not in ("resume", "scratch"):
            raise ValueError(f"finalize_protocol must be 'resume' or 'scratch', got {self.finalize_protocol!r}")

    def controller_config(self) -> ControllerConfig:
        return ControllerConfig(
            hidden_size=self.hidden_size,
            embed_size=self.embed_size,
            input_aware=self.mode == "aware",
            step_size=self.step_size,
            ema_decay=self.ema_decay,
        )

    def to_doc(self) -> dict:
        doc = asdict(self)
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "SearchConfig":
        doc = dict(doc)
        target_doc = doc.pop("target", None)
        target = ToyTargetConfig(**target_doc) if target_doc else ToyTargetConfig()
        return cls(target=target, **doc)


@dataclass(frozen=True)
class EpisodeRecord:
    """One search episode; the serialized log keeps only deterministic fields
    (wall time lives in a timing sidecar so reruns are byte-identical)."""

    episode: int
    policy: Policy | None
    activity_f1: float | None
    entity_f1: float | None
    weighted: float | None
    baseline: float | None
    wall_time_s: float = 0.0
    error: str | None = None

    def to_log_doc(self) -> dict:
        return {
            "episode": self.episode,
            "policy": policy_to_doc(self.policy) if self.policy else None,
            "activity_f1": self.activity_f1,
            "entity_f1": self.entity_f1,
            "weighted": self.weighted,
            "baseline": self.baseline,
            "error": self.error,
        }

    @classmethod
    def from_log_doc(cls, doc: dict) -> "EpisodeRecord":
        return cls(
            episode=int(doc["episode"]),
            policy=policy_from_doc(doc["policy"]) if doc.get("policy") else None,
            activity_f1=doc.get("activity_f1"),
            entity_f1=doc.get("entity_f1"),
            weighted=doc.get("weighted"),
            baseline=doc.get("baseline"),
            error=doc.get("error"),
        )


@dataclass
class SearchLog:
    """Replayable per-episode records; best() recomputes the winning policy."""

    records: list[EpisodeRecord] = field(default_factory=list)

    def append(self, record: EpisodeRecord) -> None:
        if self.records and record.episode <= self.records[-1].episode:
            raise ValueError("episode indices must be strictly increasing")
        self.records.append(record)

    def best(self) -> EpisodeRecord:
        scored = [r for r in self.records if r.weighted is not None and r.policy is not None]
        if not scored:
            raise ValueError("no successful episodes in the search log")
        return max(scored, key=lambda r: (r.weighted, -r.episode))

    def top(self, k: int) -> list[EpisodeRecord]:
        scored = [r for r in self.records if r.weighted is not None and r.policy is not None]
        return sorted(scored, key=lambda r: (-r.weighted, r.episode))[:k]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_log_doc(), sort_keys=True) + "\n" for r in self.records)

    def timings_jsonl(self) -> str:
        return "".join(
            json.dumps({"episode": r.episode, "wall_time_s": r.wall_time_s}) + "\n" for r in self.records
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "SearchLog":
        log = cls()
        for line in text.splitlines():
            if line.strip():
                log.append(EpisodeRecord.from_log_doc(json.loads(line)))
        return log


@dataclass
class SearchTask:
    """Loaded corpora and resources shared by every episode."""

    config: SearchConfig
    lexicons: Lexicons
    reward_lex: ActivityEntityLexicon
    train: list[Example]
    valid: list[Example]
    test: list[Example]
    base_checkpoint: Path

    def new_target(self) -> ToyTarget:
        target = ToyTarget(self.config.target, self.reward_lex)
        target.resume(self.base_checkpoint)
        return target


def build_task(config: SearchConfig, workdir: str | Path, corpora=None) -> SearchTask:
    """Load corpora/lexicons and pretrain the shared converged checkpoint.

    ``corpora`` may supply (train, valid, test) example lists directly, in
    which case the config paths are ignored (service mode).
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    lexicons = load_lexicons(config.lexicon_dir)
    reward_lex = load_activity_entity_lexicon(config.lexicon_dir)
    if corpora is not None:
        train, valid, test = corpora
    else:
        train = load_corpus(config.train_path)
        valid = load_corpus(config.valid_path)
        test = load_corpus(config.test_path) if config.test_path else []
    if not train or not valid:
        raise ValueError("training and validation corpora must be non-empty")
    base_checkpoint = workdir / "target_base.ckpt"
    target = ToyTarget(config.target, reward_lex)
    target.pretrain(train)
    target.save(base_checkpoint)
    return SearchTask(config, lexicons, reward_lex, train, valid, test, base_checkpoint)


@dataclass
class SearchResult:
    best_policy: Policy
    best_episode: int
    log: SearchLog
    controller_path: Path


def _augment_with_records(task: SearchTask, records, episode: int) -> list[Example]:
    """Perturb each training example with its own sampled policy (aware mode
    samples one policy per source; agnostic mode shares a single record)."""
    seed = task.config.seed
    out = []
    for i, ex in enumerate(task.train):
        record = records[i] if len(records) > 1 else records[0]
        rng = derive_rng(seed, "episode", episode, i)
        out.append(Example(augment_example(ex.source, record.policy, rng, task.lexicons), ex.target))
    return out


def run_episode(task: SearchTask, records, episode: int) -> tuple[float, float, float]:
    """Augment, resume, train one epoch, evaluate: the Fig.-2 inner loop."""
    augmented = _augment_with_records(task, records, episode)
    target = task.new_target()
    target.train_one_epoch(augmented)
    activity, entity = target.evaluate(task.valid)
    return activity, entity, weighted_reward(activity, entity)


def run_search(config: SearchConfig, workdir: str | Path, task: SearchTask | None = None,
               episode_fn=None) -> SearchResult:
    """Full controller-in-the-loop search over ``config.episodes`` episodes.

    ``episode_fn(task, records, episode) -> (activity, entity, weighted)``
    defaults to :func:`run_episode`; tests inject rigged rewards through it.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    task = task or build_task(config, workdir)
    episode_fn = episode_fn or run_episode
    controller = init_controller(config.controller_config(), seed=stable_hash(config.seed, "controller"))
    controller_path = workdir / "controller.ckpt"
    sources = [tokenize(ex.source, task.lexicons) for ex in task.train] if config.mode == "aware" else None
    log = SearchLog()

    for episode in range(config.episodes):
        started = time.monotonic()
        sample_seed = stable_hash(config.seed, "sample", episode)
        if config.mode == "aware":
            records, _ = controller.sample_records(sources=sources, seed=sample_seed)
        else:
            records, _ = controller.sample_records(n=1, seed=sample_seed)
        baseline_before = controller.ema_baseline
        try:
            activity, entity, reward = episode_fn(task, records, episode)
        except Exception as exc:  # noqa: BLE001 - a failed episode is logged, not fatal
            log.append(
                EpisodeRecord(
                    episode=episode,
                    policy=records[0].policy,
                    activity_f1=None,
                    entity_f1=None,
                    weighted=None,
                    baseline=baseline_before,
                    wall_time_s=time.monotonic() - started,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            controller.save(controller_path)
            continue
        controller.reinforce_update(records, [reward] * len(records))
        log.append(
            EpisodeRecord(
                episode=episode,
                policy=records[0].policy,
                activity_f1=activity,
                entity_f1=entity,
                weighted=reward,
                baseline=controller.ema_baseline,
                wall_time_s=time.monotonic() - started,
            )
        )
        controller.save(controller_path)

    best = log.best()
    return SearchResult(best_policy=best.policy, best_episode=best.episode, log=log, controller_path=controller_path)


def _scratch_target(task: SearchTask) -> ToyTarget:
    target = ToyTarget(task.config.target, task.reward_lex)
    target.init_from_corpus(task.train)
    return target


def evaluate_report(target: ToyTarget, examples) -> RewardReport:
    activity, entity = target.evaluate(examples)
    return RewardReport(activity, entity, weighted_reward(activity, entity), len(examples))


def finalize(best: Policy, task: SearchTask, protocol: str | None = None, on_test: bool = True) -> RewardReport:
    """Train the target with the best policy and report held-out F1s.

    ``resume`` (default): resume the converged checkpoint and train 1 epoch
    on the perturbed corpus. ``scratch``: train from a fresh target for the
    pretraining budget, re-perturbing each epoch.
    """
    protocol = protocol or task.config.finalize_protocol
    eval_set = task.test if (on_test and task.test) else task.valid
    if protocol == "resume":
        target = task.new_target()
        augmented = augment_corpus(task.train, best, stable_hash(task.config.seed, "finalize", 0), task.lexicons)
        target.train_one_epoch(augmented)
    elif protocol == "scratch":
        target = _scratch_target(task)
        for epoch in range(task.config.target.pretrain_epochs):
            augmented = augment_corpus(task.train, best, stable_hash(task.config.seed, "finalize", epoch), task.lexicons)
            target.train_one_epoch(augmented)
    else:
        raise ValueError(f"unknown finalize protocol {protocol!r}")
    return evaluate_report(target, eval_set)


def unaugmented_baseline(task: SearchTask, on_test: bool = True) -> RewardReport:
    """Resume + 1 clean epoch: what finalize gives when no operation applies."""
    eval_set = task.test if (on_test and task.test) else task.valid
    target = task.new_target()
    target.train_one_epoch(task.train)
    return evaluate_report(target, eval_set)


def all_operations_baseline(task: SearchTask, count: int | None = None, on_test: bool = True) -> RewardReport:
    """Manual comparator: one epoch per coarse operation, in sequence, each
    applied with probability 1.0 and a fixed change count."""
    count = count if count is not None else task.config.all_ops_count
    eval_set = task.test if (on_test and task.test) else task.valid
    target = task.new_target()
    seed = task.config.seed
    for op_index, name in enumerate(COARSE_OPERATIONS):
        augmented = []
        for i, ex in enumerate(task.train):
            rng = derive_rng(seed, "all-ops", op_index, i)
            ctx = tokenize(ex.source, task.lexicons)
            ctx = apply_coarse_operation(ctx, name, count, rng, task.lexicons)
            augmented.append(Example(ctx.detokenize(), ex.target))
        target.train_one_epoch(augmented)
    return evaluate_report(target, eval_set)


def write_search_outputs(result: SearchResult, out_dir: str | Path) -> dict[str, Path]:
    """Persist the log, timing sidecar, and best-policy files atomically."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "log": out_dir / "search_log.jsonl",
        "timings": out_dir / "search_timings.jsonl",
        "best_policy": out_dir / "best_policy.json",
        "best_policy_compact": out_dir / "best_policy.txt",
    }
    write_text_atomic(paths["log"], result.log.to_jsonl())
    write_text_atomic(paths["timings"], result.log.timings_jsonl())
    write_text_atomic(paths["best_policy"], json.dumps(policy_to_doc(result.best_policy), indent=2) + "\n")
    write_text_atomic(paths["best_policy_compact"], result.best_policy.compact() + "\n")
    return paths
