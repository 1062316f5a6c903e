"""Pydantic request/response models for the augmentation service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..ops import OperationType
from ..policy import Operation, Policy, policy_from_operations


class OperationModel(BaseModel):
    type: str
    n: int
    p: float

    @classmethod
    def from_operation(cls, op: Operation) -> "OperationModel":
        return cls(type=op.op_type.mnemonic, n=op.n_changes, p=op.probability)

    def to_operation(self) -> Operation:
        return Operation(OperationType.from_mnemonic(self.type), self.n, self.p)


class PolicyModel(BaseModel):
    sub_policies: list[list[OperationModel]]

    @classmethod
    def from_policy(cls, policy: Policy) -> "PolicyModel":
        return cls(sub_policies=[[OperationModel.from_operation(op) for op in sp.ops] for sp in policy.sub_policies])

    def to_policy(self) -> Policy:
        return policy_from_operations(op.to_operation() for sp in self.sub_policies for op in sp)


class HealthResponse(BaseModel):
    status: str
    version: str


class AugmentRequest(BaseModel):
    lines: list[str]
    policy_text: str | None = None
    policy: PolicyModel | None = None
    seed: int = 0
    lexicon_dir: str | None = None


class AugmentResponse(BaseModel):
    lines: list[str]
    gates_drawn: dict[str, int]
    gates_fired: dict[str, int]
    changes_applied: dict[str, int]


class EvalRequest(BaseModel):
    responses: list[str]
    references: list[str]
    lexicon_dir: str | None = None


class ReportModel(BaseModel):
    activity_f1: float
    entity_f1: float
    weighted: float
    examples: int


class PolicyValidateRequest(BaseModel):
    text: str


class PolicyValidateResponse(BaseModel):
    valid: bool
    kind: str | None = None
    error: str | None = None
    compact: str | None = None
    policy: PolicyModel | None = None


class PolicyRenderRequest(BaseModel):
    policy: PolicyModel


class PolicyRenderResponse(BaseModel):
    compact: str


class ToyTargetModel(BaseModel):
    hash_buckets: int = 4096
    learning_rate: float = 0.5
    threshold: float = 0.5
    pretrain_epochs: int = 25


class SearchRequest(BaseModel):
    train_lines: list[str]
    valid_lines: list[str]
    test_lines: list[str] = Field(default_factory=list)
    mode: str = "agnostic"
    episodes: int = 50
    seed: int = 0
    step_size: float = 0.05
    ema_decay: float = 0.95
    hidden_size: int = 64
    embed_size: int = 32
    finalize_protocol: str = "resume"
    all_ops_count: int = 4
    top_k: int = 3
    target: ToyTargetModel = Field(default_factory=ToyTargetModel)
    lexicon_dir: str | None = None
    include_all_ops: bool = False
    workdir: str | None = None


class ScoredPolicyModel(BaseModel):
    episode: int
    weighted: float
    compact: str
    policy: PolicyModel


class SearchResponse(BaseModel):
    best: ScoredPolicyModel
    top: list[ScoredPolicyModel]
    episodes: int
    log_jsonl: str
    timings_jsonl: str
    final_report: ReportModel
    baseline_report: ReportModel
    all_ops_report: ReportModel | None = None
