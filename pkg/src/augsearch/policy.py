"""Policy grammar, token encoding, serialization, and corpus augmentation.

A policy is 4 sub-policies; a sub-policy is an ordered pair of operations;
an operation is (type, number of changes 1-4, probability on a 10-value
grid). Encoded for the controller, a policy is exactly 24 tokens cycling
through the (type, count, probability) slots.
"""

from __future__ import annotations

import json
import re
import random
from dataclasses import dataclass

from .corpus import tokenize
from .lexicons import Lexicons
from .ops import MAX_CHANGES, MIN_CHANGES, OperationType, OpStats, apply_operation
from .util import derive_rng

PROBABILITY_GRID = tuple(round(k / 10, 1) for k in range(1, 11))
SLOT_KINDS = ("type", "count", "prob")
SLOT_SIZES = (len(OperationType), MAX_CHANGES, len(PROBABILITY_GRID))
SUBPOLICIES_PER_POLICY = 4
OPS_PER_SUBPOLICY = 2
TOKENS_PER_POLICY = SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY * len(SLOT_KINDS)


class PolicyParseError(ValueError):
    """Unparseable or grid-invalid policy text."""


@dataclass(frozen=True)
class Operation:
    """One gated perturbation: (type, number of changes, probability)."""

    op_type: OperationType
    n_changes: int
    probability: float

    def __post_init__(self):
        object.__setattr__(self, "op_type", OperationType(self.op_type))
        if not isinstance(self.n_changes, int) or not MIN_CHANGES <= self.n_changes <= MAX_CHANGES:
            raise ValueError(f"number of changes must be an integer in {MIN_CHANGES}..{MAX_CHANGES}, got {self.n_changes!r}")
        if self.probability not in PROBABILITY_GRID:
            raise ValueError(f"probability must be on the grid {PROBABILITY_GRID}, got {self.probability!r}")

    @property
    def prob_index(self) -> int:
        return PROBABILITY_GRID.index(self.probability)

    def compact(self) -> str:
        return f"({self.op_type.mnemonic}, {self.n_changes}, {self.probability})"


@dataclass(frozen=True)
class SubPolicy:
    """An ordered pair of operations applied in sequence to one example."""

    ops: tuple[Operation, Operation]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if len(self.ops) != OPS_PER_SUBPOLICY:
            raise ValueError(f"a sub-policy has exactly {OPS_PER_SUBPOLICY} operations")

    def compact(self) -> str:
        return " ".join(op.compact() for op in self.ops)


@dataclass(frozen=True)
class Policy:
    """Four sub-policies; one is drawn uniformly per training example."""

    sub_policies: tuple[SubPolicy, SubPolicy, SubPolicy, SubPolicy]

    def __post_init__(self):
        object.__setattr__(self, "sub_policies", tuple(self.sub_policies))
        if len(self.sub_policies) != SUBPOLICIES_PER_POLICY:
            raise ValueError(f"a policy has exactly {SUBPOLICIES_PER_POLICY} sub-policies")

    def operations(self) -> list[Operation]:
        return [op for sp in self.sub_policies for op in sp.ops]

    def compact(self) -> str:
        return "\n".join(sp.compact() for sp in self.sub_policies)


@dataclass(frozen=True)
class PolicyToken:
    """One controller symbol: a slot kind plus an index into its vocabulary."""

    slot: str
    index: int

    def __post_init__(self):
        if self.slot not in SLOT_KINDS:
            raise ValueError(f"unknown slot kind {self.slot!r}")
        size = SLOT_SIZES[SLOT_KINDS.index(self.slot)]
        if not 0 <= self.index < size:
            raise ValueError(f"{self.slot} index {self.index} outside vocabulary of {size}")


def encode(policy: Policy) -> list[PolicyToken]:
    """Flatten to 24 tokens: sub-policy major, operation minor, slots in
    (type, count, probability) order."""
    tokens: list[PolicyToken] = []
    for op in policy.operations():
        tokens.append(PolicyToken("type", int(op.op_type)))
        tokens.append(PolicyToken("count", op.n_changes - 1))
        tokens.append(PolicyToken("prob", op.prob_index))
    return tokens


def decode(tokens) -> Policy:
    """Inverse of :func:`encode`."""
    tokens = list(tokens)
    if len(tokens) != TOKENS_PER_POLICY:
        raise ValueError(f"expected {TOKENS_PER_POLICY} tokens, got {len(tokens)}")
    ops: list[Operation] = []
    for i in range(0, TOKENS_PER_POLICY, 3):
        triple = tokens[i : i + 3]
        for tok, kind in zip(triple, SLOT_KINDS):
            if tok.slot != kind:
                raise ValueError(f"token {i + SLOT_KINDS.index(kind)} has slot {tok.slot!r}, expected {kind!r}")
        ops.append(
            Operation(
                OperationType(triple[0].index),
                triple[1].index + 1,
                PROBABILITY_GRID[triple[2].index],
            )
        )
    return policy_from_operations(ops)


def decode_indices(indices) -> Policy:
    """Decode a flat sequence of 24 raw slot indices (controller output)."""
    return decode(PolicyToken(SLOT_KINDS[i % 3], int(ix)) for i, ix in enumerate(indices))


def policy_from_operations(ops) -> Policy:
    ops = list(ops)
    if len(ops) != SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY:
        raise ValueError(f"a policy needs {SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY} operations, got {len(ops)}")
    subs = [SubPolicy((ops[i], ops[i + 1])) for i in range(0, len(ops), OPS_PER_SUBPOLICY)]
    return Policy(tuple(subs))


def search_space_size() -> int:
    """Exact number of distinct policies: one (type x count x prob) vocabulary
    per operation, raised to the 8 operation slots."""
    per_operation = len(OperationType) * MAX_CHANGES * len(PROBABILITY_GRID)
    return per_operation ** (SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY)


def pick_subpolicy(policy: Policy, rng: random.Random) -> SubPolicy:
    """Uniform draw over the 4 sub-policies; fresh draw per training example."""
    return policy.sub_policies[rng.randrange(SUBPOLICIES_PER_POLICY)]


# --- compact (table-style) and structured (JSON) text formats ---

_GROUP_RE = re.compile(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)")


def _parse_group(match: re.Match, ordinal: int) -> Operation:
    mnemonic, count_text, prob_text = match.group(1), match.group(2), match.group(3)
    where = f"operation {ordinal} at offset {match.start()}"
    try:
        op_type = OperationType.from_mnemonic(mnemonic)
    except ValueError:
        raise PolicyParseError(f"{where}: unknown operation mnemonic {mnemonic!r}") from None
    try:
        n = int(count_text)
    except ValueError:
        raise PolicyParseError(f"{where}: bad count {count_text!r}") from None
    try:
        p = float(prob_text)
    except ValueError:
        raise PolicyParseError(f"{where}: bad probability {prob_text!r}") from None
    try:
        return Operation(op_type, n, p)
    except ValueError as exc:
        raise PolicyParseError(f"{where}: {exc}") from None


def parse_operations(text: str) -> list[Operation]:
    """Parse compact ``(mnemonic, n, p)`` groups, in order."""
    ops = []
    end = 0
    for ordinal, match in enumerate(_GROUP_RE.finditer(text), start=1):
        if text[end : match.start()].strip():
            raise PolicyParseError(f"unparseable text before offset {match.start()}: {text[end:match.start()].strip()!r}")
        ops.append(_parse_group(match, ordinal))
        end = match.end()
    if text[end:].strip():
        raise PolicyParseError(f"unparseable text at offset {end}: {text[end:].strip()!r}")
    if not ops:
        raise PolicyParseError("no operations found")
    return ops


def serialize_policy(policy: Policy) -> str:
    """Compact rendering, one sub-policy per line."""
    return policy.compact()


def parse_policy(text: str) -> Policy:
    """Parse a compact policy (8 operations; whitespace/newlines free)."""
    ops = parse_operations(text)
    if len(ops) != SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY:
        raise PolicyParseError(
            f"a policy has {SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY} operations, found {len(ops)}"
        )
    return policy_from_operations(ops)


def operation_to_doc(op: Operation) -> dict:
    return {"type": op.op_type.mnemonic, "n": op.n_changes, "p": op.probability}


def operation_from_doc(doc: dict) -> Operation:
    try:
        return Operation(OperationType.from_mnemonic(doc["type"]), int(doc["n"]), float(doc["p"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyParseError(f"bad operation document {doc!r}: {exc}") from None


def policy_to_doc(policy: Policy) -> dict:
    return {"sub_policies": [[operation_to_doc(op) for op in sp.ops] for sp in policy.sub_policies]}


def policy_from_doc(doc: dict) -> Policy:
    subs = doc.get("sub_policies")
    if not isinstance(subs, list) or len(subs) != SUBPOLICIES_PER_POLICY:
        raise PolicyParseError("policy document needs a 'sub_policies' list of length 4")
    ops = []
    for sp in subs:
        if not isinstance(sp, list) or len(sp) != OPS_PER_SUBPOLICY:
            raise PolicyParseError("each sub-policy is a list of 2 operations")
        ops.extend(operation_from_doc(op) for op in sp)
    return policy_from_operations(ops)


def policy_to_json(policy: Policy) -> str:
    return json.dumps(policy_to_doc(policy), indent=2) + "\n"


def parse_policy_text(text: str):
    """Parse either format. JSON documents always give a full Policy; compact
    text gives a Policy (8 ops), a SubPolicy (2 ops), or an Operation (1 op),
    the smaller shapes being handy for replaying a single sub-policy.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise PolicyParseError(f"bad policy JSON: {exc}") from None
        return policy_from_doc(doc)
    ops = parse_operations(stripped)
    if len(ops) == 1:
        return ops[0]
    if len(ops) == OPS_PER_SUBPOLICY:
        return SubPolicy(tuple(ops))
    if len(ops) == SUBPOLICIES_PER_POLICY * OPS_PER_SUBPOLICY:
        return policy_from_operations(ops)
    raise PolicyParseError(f"expected 1, 2, or 8 operations, found {len(ops)}")


# --- corpus examples and augmentation ---


@dataclass(frozen=True)
class Example:
    """One corpus line: a source context and an optional response target."""

    source: str
    target: str | None = None

    def render(self) -> str:
        return self.source if self.target is None else f"{self.source}\t{self.target}"


def parse_example(line: str) -> Example:
    line = line.rstrip("\n")
    if "\t" in line:
        source, target = line.split("\t", 1)
        return Example(source, target)
    return Example(line, None)


def load_corpus(path) -> list[Example]:
    with open(path, encoding="utf-8") as fh:
        return [parse_example(line) for line in fh if line.strip()]


def render_corpus(examples) -> str:
    return "".join(ex.render() + "\n" for ex in examples)


def ops_for_example(plan, rng: random.Random) -> tuple[Operation, ...]:
    """Operation sequence served to one example under the given plan."""
    if isinstance(plan, Policy):
        return pick_subpolicy(plan, rng).ops
    if isinstance(plan, SubPolicy):
        return plan.ops
    if isinstance(plan, Operation):
        return (plan,)
    raise TypeError(f"plan must be a Policy, SubPolicy, or Operation, got {type(plan).__name__}")


def augment_example(source: str, plan, rng: random.Random, lexicons: Lexicons, stats: OpStats | None = None) -> str:
    ctx = tokenize(source, lexicons)
    for op in ops_for_example(plan, rng):
        ctx = apply_operation(ctx, op, rng, lexicons, stats)
    return ctx.detokenize()


def augment_corpus(examples, plan, seed: int, lexicons: Lexicons, stats: OpStats | None = None) -> list[Example]:
    """Perturb the source side of every example; targets and ordering are
    untouched. Each example gets its own stream derived from (seed, index),
    so corpus order never changes per-example results.
    """
    out = []
    for i, ex in enumerate(examples):
        rng = derive_rng(seed, "augment", i)
        out.append(Example(augment_example(ex.source, plan, rng, lexicons, stats), ex.target))
    return out
