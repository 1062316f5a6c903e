"""Policy-sampling controllers trained with REINFORCE.

Two variants share one recurrent decoder that emits 24 tokens, cycling
through per-slot output heads (operation type / number of changes /
probability), each sampled token's embedding feeding the next step:

* input-agnostic: the decoder alone; one policy per sample call.
* input-aware: an encoder consumes a source context and the decoder
  attends over its states (additive attention), so different sources can
  receive different policies.

Per-slot heads make grid-invalid tokens unrepresentable, so every sampled
sequence decodes to a structurally valid policy. Updates are plain SGD
ascent on sum_t log pi(token_t) * (R - b) with an exponential-moving-average
reward baseline b and global gradient-norm clipping.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
from torch import nn

from .corpus import Context
from .policy import SLOT_SIZES, TOKENS_PER_POLICY, Policy, decode_indices
from .util import load_checkpoint, save_checkpoint, stable_hash

WEIGHT_INIT_RANGE = 0.1


@dataclass(frozen=True)
class ControllerConfig:
    """Architecture and optimization settings for a controller."""

    hidden_size: int = 64
    embed_size: int = 32
    input_aware: bool = False
    attention_size: int = 64
    hash_buckets: int = 512
    slot_sizes: tuple[int, ...] = tuple(SLOT_SIZES)
    total_steps: int = TOKENS_PER_POLICY
    step_size: float = 0.05
    clip_norm: float = 5.0
    ema_decay: float = 0.95
    head_init: str = "zero"

    def __post_init__(self):
        object.__setattr__(self, "slot_sizes", tuple(int(v) for v in self.slot_sizes))
        for name in ("hidden_size", "embed_size", "attention_size", "hash_buckets", "total_steps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if any(v <= 1 for v in self.slot_sizes):
            raise ValueError(f"slot vocabularies need at least 2 symbols: {self.slot_sizes}")
        if self.head_init not in ("zero", "uniform"):
            raise ValueError(f"head_init must be 'zero' or 'uniform', got {self.head_init!r}")
        if not 0.0 <= self.ema_decay < 1.0:
            raise ValueError(f"ema_decay must be in [0, 1), got {self.ema_decay}")

    @property
    def schedule(self) -> tuple[int, ...]:
        """Per-step output vocabulary sizes (slot kinds cycle)."""
        return tuple(self.slot_sizes[t % len(self.slot_sizes)] for t in range(self.total_steps))

    @property
    def is_standard(self) -> bool:
        """True when samples decode to the 4x2x3 policy grammar."""
        return self.slot_sizes == tuple(SLOT_SIZES) and self.total_steps == TOKENS_PER_POLICY


@dataclass(frozen=True)
class SampledPolicyRecord:
    """One sampled token sequence plus what the update step needs to re-score it."""

    tokens: tuple[int, ...]
    token_log_probs: tuple[float, ...]
    policy: Policy | None = None
    source: Context | None = None

    def __post_init__(self):
        if len(self.tokens) != len(self.token_log_probs):
            raise ValueError("tokens and log-probs must align")
        if any(lp > 1e-12 for lp in self.token_log_probs):
            raise ValueError("log-probabilities must be <= 0")


def _source_token_ids(source: Context, buckets: int) -> list[int]:
    return [stable_hash("src-token", t.surface.lower()) % buckets for t in source.tokens]


class Controller(nn.Module):
    """Recurrent policy sampler with slot-cyclic output heads.

    Sampling and re-scoring are read-only on the parameters; updates mutate
    them and must be serialized (one writer between sampling rounds).
    """

    def __init__(self, config: ControllerConfig, seed: int = 0):
        super().__init__()
        self.config = config
        h, e = config.hidden_size, config.embed_size
        self.slot_embeddings = nn.ModuleList(nn.Embedding(v, e) for v in config.slot_sizes)
        self.heads = nn.ModuleList(nn.Linear(h, v) for v in config.slot_sizes)
        self.start_input = nn.Parameter(torch.zeros(e))
        dec_in = e + h if config.input_aware else e
        self.cell = nn.GRUCell(dec_in, h)
        if config.input_aware:
            self.source_embedding = nn.Embedding(config.hash_buckets, e)
            self.encoder_cell = nn.GRUCell(e, h)
            self.empty_source_state = nn.Parameter(torch.zeros(h))
            a = config.attention_size
            self.attn_query = nn.Linear(h, a)
            self.attn_keys = nn.Linear(h, a, bias=False)
            self.attn_v = nn.Parameter(torch.zeros(a))
        self.double()
        self.ema_baseline: float | None = None
        self.step_count: int = 0
        self._init_weights(seed)

    def _init_weights(self, seed: int) -> None:
        gen = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
        for _, param in self.named_parameters():
            param.data.uniform_(-WEIGHT_INIT_RANGE, WEIGHT_INIT_RANGE, generator=gen)
        if self.config.head_init == "zero":
            for head in self.heads:
                head.weight.data.zero_()
                head.bias.data.zero_()

    # --- encoding ---

    def encode_source(self, source: Context | None) -> torch.Tensor:
        """One hidden state per source token; empty sources get the learned
        sentinel state (shape (1, hidden))."""
        if not self.config.input_aware:
            raise ValueError("encode_source requires an input-aware controller")
        if source is None or len(source) == 0:
            return self.empty_source_state.unsqueeze(0)
        ids = torch.tensor(_source_token_ids(source, self.config.hash_buckets), dtype=torch.long)
        emb = self.source_embedding(ids)
        h = torch.zeros(1, self.config.hidden_size, dtype=torch.float64)
        states = []
        for x in emb:
            h = self.encoder_cell(x.unsqueeze(0), h)
            states.append(h.squeeze(0))
        return torch.stack(states)

    def _encode_batch(self, sources) -> tuple[torch.Tensor, torch.Tensor]:
        """Pad per-source encoder states into (B, K, H) plus a validity mask."""
        states = [self.encode_source(src) for src in sources]
        k = max(s.shape[0] for s in states)
        h = self.config.hidden_size
        enc = torch.zeros(len(states), k, h, dtype=torch.float64)
        mask = torch.zeros(len(states), k, dtype=torch.bool)
        for i, s in enumerate(states):
            enc[i, : s.shape[0]] = s
            mask[i, : s.shape[0]] = True
        return enc, mask

    def _attend(self, h: torch.Tensor, enc: torch.Tensor, mask: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        scores = (torch.tanh(self.attn_query(h).unsqueeze(1) + self.attn_keys(enc)) * self.attn_v).sum(-1)
        scores = scores.masked_fill(~mask, -torch.inf)
        weights = torch.softmax(scores, dim=-1)
        return torch.einsum("bk,bkh->bh", weights, enc), weights

    # --- forward passes ---

    def _unroll(self, batch: int, sources, forced_tokens: torch.Tensor | None, generator: torch.Generator | None,
                collect_attention: bool = False):
        """Shared decoder loop: samples when ``forced_tokens`` is None, else
        re-scores the given tokens (building the autograd graph)."""
        cfg = self.config
        enc = mask = None
        if cfg.input_aware:
            if sources is None:
                sources = [None] * batch
            enc, mask = self._encode_batch(sources)
        h = torch.zeros(batch, cfg.hidden_size, dtype=torch.float64)
        x = self.start_input.unsqueeze(0).expand(batch, -1)
        tokens = []
        log_probs = []
        attention = []
        for t in range(cfg.total_steps):
            slot = t % len(cfg.slot_sizes)
            if cfg.input_aware:
                context, weights = self._attend(h, enc, mask)
                if collect_attention:
                    attention.append(weights)
                step_in = torch.cat([x, context], dim=-1)
            else:
                step_in = x
            h = self.cell(step_in, h)
            logits = self.heads[slot](h)
            logp = torch.log_softmax(logits, dim=-1)
            if forced_tokens is None:
                tok = torch.multinomial(torch.softmax(logits.detach(), dim=-1), 1, generator=generator).squeeze(1)
            else:
                tok = forced_tokens[:, t]
            tokens.append(tok)
            log_probs.append(logp.gather(1, tok.unsqueeze(1)).squeeze(1))
            x = self.slot_embeddings[slot](tok)
        out_tokens = torch.stack(tokens, dim=1)
        out_logps = torch.stack(log_probs, dim=1)
        return out_tokens, out_logps, attention

    def step_logits(self, sources=None, steps: int | None = None) -> torch.Tensor:
        """Greedy-free inspection helper: logits at each step along the
        sampling-free path (tokens forced to 0), shape (B, T, max_vocab)."""
        batch = len(sources) if sources is not None else 1
        steps = steps or self.config.total_steps
        with torch.no_grad():
            forced = torch.zeros(batch, self.config.total_steps, dtype=torch.long)
            cfg = self.config
            enc = mask = None
            if cfg.input_aware:
                src = sources if sources is not None else [None] * batch
                enc, mask = self._encode_batch(src)
            h = torch.zeros(batch, cfg.hidden_size, dtype=torch.float64)
            x = self.start_input.unsqueeze(0).expand(batch, -1)
            per_step = []
            width = max(cfg.slot_sizes)
            for t in range(steps):
                slot = t % len(cfg.slot_sizes)
                if cfg.input_aware:
                    context, _ = self._attend(h, enc, mask)
                    step_in = torch.cat([x, context], dim=-1)
                else:
                    step_in = x
                h = self.cell(step_in, h)
                logits = self.heads[slot](h)
                padded = torch.full((batch, width), -torch.inf, dtype=torch.float64)
                padded[:, : logits.shape[1]] = logits
                per_step.append(padded)
                x = self.slot_embeddings[slot](forced[:, t])
            return torch.stack(per_step, dim=1)

    def first_step_probabilities(self) -> torch.Tensor:
        """Distribution over the first slot's vocabulary (agnostic mode)."""
        logits = self.step_logits(steps=1)[0, 0, : self.config.slot_sizes[0]]
        return torch.softmax(logits, dim=-1)

    # --- sampling ---

    def sample_records(self, n: int | None = None, sources=None, seed: int = 0,
                       collect_attention: bool = False):
        """Sample token sequences in one batched unroll.

        Input-agnostic mode: pass ``n``. Input-aware mode: pass ``sources``
        (one policy is sampled per source). Returns (records, attention).
        """
        if self.config.input_aware:
            if sources is None:
                raise ValueError("input-aware sampling requires sources")
            batch = len(sources)
        else:
            if sources is not None:
                raise ValueError("input-agnostic controllers do not take sources")
            batch = n if n is not None else 1
        if batch <= 0:
            raise ValueError("nothing to sample")
        gen = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
        with torch.no_grad():
            tokens, logps, attention = self._unroll(batch, sources, None, gen, collect_attention)
        records = []
        for i in range(batch):
            toks = tuple(int(v) for v in tokens[i])
            records.append(
                SampledPolicyRecord(
                    tokens=toks,
                    token_log_probs=tuple(float(v) for v in logps[i]),
                    policy=decode_indices(toks) if self.config.is_standard else None,
                    source=sources[i] if sources is not None else None,
                )
            )
        return records, attention

    def sample_policy(self, source: Context | None = None, seed: int = 0) -> SampledPolicyRecord:
        """Sample one policy (the 4 sub-policies come from a single unrolled
        pass of the decoder)."""
        if self.config.input_aware:
            records, _ = self.sample_records(sources=[source], seed=seed)
        else:
            records, _ = self.sample_records(n=1, seed=seed)
        return records[0]

    # --- learning ---

    def rescore(self, records) -> torch.Tensor:
        """Teacher-forced log-probs for recorded tokens, autograd-attached."""
        tokens = torch.tensor([r.tokens for r in records], dtype=torch.long)
        sources = [r.source for r in records] if self.config.input_aware else None
        _, logps, _ = self._unroll(len(records), sources, tokens, None)
        return logps

    def reinforce_update(self, records, rewards, step_size: float | None = None) -> dict:
        """One gradient-ascent step on sum_t log pi(token_t) * (R - b), then an
        EMA baseline update with the batch-mean reward."""
        records = list(records)
        rewards = [float(r) for r in rewards]
        if len(records) != len(rewards):
            raise ValueError(f"{len(records)} records but {len(rewards)} rewards")
        if not records:
            raise ValueError("no records to update on")
        if any(not math.isfinite(r) for r in rewards):
            raise ValueError(f"non-finite reward in {rewards}")
        lr = self.config.step_size if step_size is None else step_size

        baseline = self.ema_baseline if self.ema_baseline is not None else 0.0
        advantages = torch.tensor([r - baseline for r in rewards], dtype=torch.float64)
        logps = self.rescore(records)
        objective = (logps.sum(dim=1) * advantages).mean()
        loss = -objective

        self.zero_grad(set_to_none=True)
        loss.backward()
        grad_norm = float(nn.utils.clip_grad_norm_(self.parameters(), self.config.clip_norm))
        with torch.no_grad():
            for param in self.parameters():
                if param.grad is not None:
                    param.add_(param.grad, alpha=-lr)

        mean_reward = sum(rewards) / len(rewards)
        if self.ema_baseline is None:
            self.ema_baseline = mean_reward
        else:
            decay = self.config.ema_decay
            self.ema_baseline = decay * self.ema_baseline + (1.0 - decay) * mean_reward
        self.step_count += 1
        return {
            "objective": float(objective.detach()),
            "grad_norm": grad_norm,
            "baseline": self.ema_baseline,
            "mean_reward": mean_reward,
        }

    # --- persistence ---

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def save(self, path) -> None:
        arrays = {name: param.detach().numpy().copy() for name, param in self.state_dict().items()}
        meta = {
            "kind": "controller",
            "config": asdict(self.config),
            "ema_baseline": self.ema_baseline,
            "step_count": self.step_count,
        }
        save_checkpoint(path, arrays, meta)

    @classmethod
    def load(cls, path) -> "Controller":
        arrays, meta = load_checkpoint(path)
        if meta.get("kind") != "controller":
            raise ValueError(f"{path}: not a controller checkpoint")
        cfg_doc = dict(meta["config"])
        cfg_doc["slot_sizes"] = tuple(cfg_doc["slot_sizes"])
        controller = cls(ControllerConfig(**cfg_doc), seed=0)
        state = {name: torch.from_numpy(arr) for name, arr in arrays.items()}
        controller.load_state_dict(state)
        controller.ema_baseline = meta["ema_baseline"]
        controller.step_count = int(meta["step_count"])
        return controller


def init_controller(config: ControllerConfig, seed: int = 0) -> Controller:
    """Fresh controller with weights drawn uniform in [-0.1, 0.1] (output
    heads zeroed under the default ``head_init`` so the initial policy is
    exactly uniform per slot)."""
    return Controller(config, seed=seed)
