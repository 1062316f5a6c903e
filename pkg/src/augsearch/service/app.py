"""FastAPI service wrapping the core package.

Endpoints are pure transformations over request payloads (corpus lines go
in and come back out as JSON), so the service keeps no per-request state;
the CLI is a thin client of these endpoints.
"""

from __future__ import annotations

import tempfile
from threading import Lock

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import (
    SearchConfig,
    ToyTargetConfig,
    all_operations_baseline,
    build_task,
    finalize,
    run_search,
    unaugmented_baseline,
)
from ..lexicons import Lexicons, LexiconError, load_lexicons
from ..ops import OpStats
from ..policy import (
    PolicyParseError,
    augment_corpus,
    parse_example,
    parse_policy_text,
    serialize_policy,
    Policy,
    SubPolicy,
)
from ..reward import load_activity_entity_lexicon, score_responses
from .schemas import (
    AugmentRequest,
    AugmentResponse,
    EvalRequest,
    HealthResponse,
    PolicyModel,
    PolicyRenderRequest,
    PolicyRenderResponse,
    PolicyValidateRequest,
    PolicyValidateResponse,
    ReportModel,
    ScoredPolicyModel,
    SearchRequest,
    SearchResponse,
)

_lexicon_cache: dict[str | None, Lexicons] = {}
_lexicon_lock = Lock()


def _lexicons(directory: str | None) -> Lexicons:
    with _lexicon_lock:
        if directory not in _lexicon_cache:
            _lexicon_cache[directory] = load_lexicons(directory)
        return _lexicon_cache[directory]


def _report_model(report) -> ReportModel:
    return ReportModel(
        activity_f1=report.activity_f1,
        entity_f1=report.entity_f1,
        weighted=report.weighted,
        examples=report.examples,
    )


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="augsearch", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/augment", response_model=AugmentResponse)
    def augment(request: AugmentRequest) -> AugmentResponse:
        if (request.policy is None) == (request.policy_text is None):
            raise HTTPException(status_code=400, detail="provide exactly one of 'policy' or 'policy_text'")
        try:
            lexicons = _lexicons(request.lexicon_dir)
            plan = request.policy.to_policy() if request.policy else parse_policy_text(request.policy_text)
        except (PolicyParseError, LexiconError, ValueError) as exc:
            raise _bad_request(exc) from None
        stats = OpStats()
        examples = [parse_example(line) for line in request.lines]
        augmented = augment_corpus(examples, plan, request.seed, lexicons, stats)
        return AugmentResponse(
            lines=[ex.render() for ex in augmented],
            gates_drawn=stats.gates_drawn,
            gates_fired=stats.gates_fired,
            changes_applied=stats.changes_applied,
        )

    @app.post("/eval", response_model=ReportModel)
    def evaluate(request: EvalRequest) -> ReportModel:
        try:
            lex = load_activity_entity_lexicon(request.lexicon_dir)
            report = score_responses(request.responses, request.references, lex)
        except (LexiconError, ValueError) as exc:
            raise _bad_request(exc) from None
        return _report_model(report)

    @app.post("/policy/validate", response_model=PolicyValidateResponse)
    def validate_policy(request: PolicyValidateRequest) -> PolicyValidateResponse:
        try:
            parsed = parse_policy_text(request.text)
        except PolicyParseError as exc:
            return PolicyValidateResponse(valid=False, error=str(exc))
        if isinstance(parsed, Policy):
            kind, compact = "policy", serialize_policy(parsed)
            model = PolicyModel.from_policy(parsed)
        elif isinstance(parsed, SubPolicy):
            kind, compact, model = "sub_policy", parsed.compact(), None
        else:
            kind, compact, model = "operation", parsed.compact(), None
        return PolicyValidateResponse(valid=True, kind=kind, compact=compact, policy=model)

    @app.post("/policy/render", response_model=PolicyRenderResponse)
    def render_policy(request: PolicyRenderRequest) -> PolicyRenderResponse:
        try:
            policy = request.policy.to_policy()
        except (PolicyParseError, ValueError) as exc:
            raise _bad_request(exc) from None
        return PolicyRenderResponse(compact=serialize_policy(policy))

    @app.post("/search", response_model=SearchResponse)
    def search(request: SearchRequest) -> SearchResponse:
        try:
            config = SearchConfig(
                mode=request.mode,
                episodes=request.episodes,
                seed=request.seed,
                step_size=request.step_size,
                ema_decay=request.ema_decay,
                hidden_size=request.hidden_size,
                embed_size=request.embed_size,
                finalize_protocol=request.finalize_protocol,
                all_ops_count=request.all_ops_count,
                top_k=request.top_k,
                lexicon_dir=request.lexicon_dir,
                target=ToyTargetConfig(**request.target.model_dump()),
            )
            corpora = (
                [parse_example(line) for line in request.train_lines],
                [parse_example(line) for line in request.valid_lines],
                [parse_example(line) for line in request.test_lines],
            )
        except (LexiconError, ValueError) as exc:
            raise _bad_request(exc) from None

        def _run(workdir: str) -> SearchResponse:
            try:
                task = build_task(config, workdir, corpora=corpora)
            except (LexiconError, ValueError) as exc:
                raise _bad_request(exc) from None
            try:
                result = run_search(config, workdir, task=task)
            except ValueError as exc:  # e.g. every episode failed
                raise _bad_request(exc) from None
            final = finalize(result.best_policy, task)
            baseline = unaugmented_baseline(task)
            all_ops = all_operations_baseline(task) if request.include_all_ops else None
            top = [
                ScoredPolicyModel(
                    episode=r.episode,
                    weighted=r.weighted,
                    compact=serialize_policy(r.policy),
                    policy=PolicyModel.from_policy(r.policy),
                )
                for r in result.log.top(request.top_k)
            ]
            best_record = result.log.best()
            return SearchResponse(
                best=ScoredPolicyModel(
                    episode=best_record.episode,
                    weighted=best_record.weighted,
                    compact=serialize_policy(result.best_policy),
                    policy=PolicyModel.from_policy(result.best_policy),
                ),
                top=top,
                episodes=len(result.log.records),
                log_jsonl=result.log.to_jsonl(),
                timings_jsonl=result.log.timings_jsonl(),
                final_report=_report_model(final),
                baseline_report=_report_model(baseline),
                all_ops_report=_report_model(all_ops) if all_ops else None,
            )

        if request.workdir:
            return _run(request.workdir)
        with tempfile.TemporaryDirectory(prefix="augsearch-") as workdir:
            return _run(workdir)

    return app


app = create_app()
