"""Command-line surface: augment, search, eval, policy-show, policy-validate.

The CLI is a thin client of the FastAPI service: it reads and writes local
files, ships lines to the service (in-process by default, or a remote
instance via ``--server``), and persists the responses atomically. All
randomness flows from the user-visible ``--seed``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .client import ServiceClient, ServiceError
from .util import write_text_atomic

LEXICON_ENV = "AUGSEARCH_LEXICON_DIR"


def _client(ctx: click.Context) -> ServiceClient:
    return ServiceClient(server=ctx.obj.get("server"))


def _read_lines(path: str) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line.strip()]


def _format_report(report: dict) -> str:
    return (
        f"activity_f1\t{report['activity_f1']:.6f}\n"
        f"entity_f1\t{report['entity_f1']:.6f}\n"
        f"weighted_reward\t{report['weighted']:.6f}\n"
        f"examples\t{report['examples']}\n"
    )


@click.group()
@click.option("--server", default=None, metavar="URL", help="Base URL of a running service (default: in-process).")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Automatic data-augmentation policy search for dialogue text."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--policy", "policy_text", default=None, help="Inline compact policy, e.g. '(D_v, 3, 0.2) (R, 1, 0.5)'.")
@click.option("--policy-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Policy file (structured JSON or compact text).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output corpus path.")
@click.option("--lexicon-dir", envvar=LEXICON_ENV, default=None, help="Lexicon directory (default: bundled).")
@click.pass_context
def augment(ctx, corpus, policy_text, policy_file, seed, out, lexicon_dir):
    """Perturb the source side of a corpus with a policy."""
    if (policy_text is None) == (policy_file is None):
        raise click.UsageError("provide exactly one of --policy or --policy-file")
    if policy_file is not None:
        policy_text = Path(policy_file).read_text(encoding="utf-8")
    lines = _read_lines(corpus)
    try:
        response = _client(ctx).augment(lines, policy_text=policy_text, seed=seed, lexicon_dir=lexicon_dir)
    except ServiceError as exc:
        raise click.ClickException(str(exc.detail)) from None
    write_text_atomic(out, "".join(line + "\n" for line in response["lines"]))
    click.echo(f"wrote {out} ({len(response['lines'])} lines)")
    for name in sorted(response["gates_drawn"]):
        fired = response["gates_fired"].get(name, 0)
        changes = response["changes_applied"].get(name, 0)
        click.echo(f"  {name}: gate fired {fired}/{response['gates_drawn'][name]}, {changes} changes applied")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Search config JSON; flags override its fields.")
@click.option("--train", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--valid", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--test", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--mode", type=click.Choice(["agnostic", "aware"]), default=None)
@click.option("--episodes", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--top-k", type=int, default=None)
@click.option("--all-ops", is_flag=True, help="Also run the All-operations manual baseline.")
@click.option("--finalize-protocol", type=click.Choice(["resume", "scratch"]), default=None)
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--lexicon-dir", envvar=LEXICON_ENV, default=None)
@click.pass_context
def search(ctx, config_path, train, valid, test, mode, episodes, seed, top_k, all_ops,
           finalize_protocol, out, lexicon_dir):
    """Run the policy search and write the best policy, log, and report."""
    from .harness import DEFAULT_MINI_DIR

    config = json.loads(Path(config_path).read_text(encoding="utf-8")) if config_path else {}
    train = train or config.get("train_path") or str(DEFAULT_MINI_DIR / "train.txt")
    valid = valid or config.get("valid_path") or str(DEFAULT_MINI_DIR / "valid.txt")
    test = test or config.get("test_path") or str(DEFAULT_MINI_DIR / "test.txt")
    request = {
        "train_lines": _read_lines(train),
        "valid_lines": _read_lines(valid),
        "test_lines": _read_lines(test) if test else [],
        "mode": mode or config.get("mode", "agnostic"),
        "episodes": episodes if episodes is not None else config.get("episodes", 50),
        "seed": seed if seed is not None else config.get("seed", 0),
        "top_k": top_k if top_k is not None else config.get("top_k", 3),
        "include_all_ops": all_ops,
        "finalize_protocol": finalize_protocol or config.get("finalize_protocol", "resume"),
        "lexicon_dir": lexicon_dir or config.get("lexicon_dir"),
    }
    for key in ("step_size", "ema_decay", "hidden_size", "embed_size", "all_ops_count", "target"):
        if key in config:
            request[key] = config[key]
    if request["episodes"] <= 0:
        raise click.UsageError("--episodes must be positive")

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if ctx.obj.get("server") is None:
        request["workdir"] = str(out_dir / "work")
    try:
        response = _client(ctx).search(**request)
    except ServiceError as exc:
        raise click.ClickException(str(exc.detail)) from None

    write_text_atomic(out_dir / "search_log.jsonl", response["log_jsonl"])
    write_text_atomic(out_dir / "search_timings.jsonl", response["timings_jsonl"])
    write_text_atomic(out_dir / "best_policy.json", json.dumps(response["best"]["policy"], indent=2) + "\n")
    write_text_atomic(out_dir / "best_policy.txt", response["best"]["compact"] + "\n")
    top_lines = [
        f"# episode {entry['episode']}  weighted {entry['weighted']:.6f}\n{entry['compact']}\n"
        for entry in response["top"]
    ]
    write_text_atomic(out_dir / "top_policies.txt", "\n".join(top_lines))
    report = _format_report(response["final_report"])
    baseline = _format_report(response["baseline_report"])
    report_text = f"# finalize ({request['finalize_protocol']})\n{report}\n# unaugmented baseline\n{baseline}"
    if response.get("all_ops_report"):
        report_text += f"\n# all-operations baseline\n{_format_report(response['all_ops_report'])}"
    write_text_atomic(out_dir / "report.txt", report_text)

    click.echo(f"search complete: {response['episodes']} episodes, best episode {response['best']['episode']}")
    click.echo(f"top {len(response['top'])} policies by validation reward:")
    for entry in response["top"]:
        compact = " ".join(entry["compact"].splitlines())
        click.echo(f"  [{entry['weighted']:.4f}] episode {entry['episode']}: {compact}")
    click.echo(f"finalize weighted reward: {response['final_report']['weighted']:.4f} "
               f"(baseline {response['baseline_report']['weighted']:.4f})")
    click.echo(f"artifacts written to {out_dir}")


@main.command("eval")
@click.argument("responses", type=click.Path(exists=True, dir_okay=False))
@click.argument("references", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the report to a file.")
@click.option("--lexicon-dir", envvar=LEXICON_ENV, default=None)
@click.pass_context
def eval_command(ctx, responses, references, out, lexicon_dir):
    """Score responses against references (activity/entity F1, weighted)."""
    response_lines = Path(responses).read_text(encoding="utf-8").splitlines()
    reference_lines = Path(references).read_text(encoding="utf-8").splitlines()
    try:
        report = _client(ctx).evaluate(response_lines, reference_lines, lexicon_dir=lexicon_dir)
    except ServiceError as exc:
        raise click.ClickException(str(exc.detail)) from None
    text = _format_report(report)
    click.echo(text, nl=False)
    if out:
        write_text_atomic(out, text)


@main.command("policy-show")
@click.argument("policy_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def policy_show(ctx, policy_file):
    """Print the compact table-style rendering of a policy file."""
    text = Path(policy_file).read_text(encoding="utf-8")
    try:
        result = _client(ctx).validate_policy(text)
    except ServiceError as exc:
        raise click.ClickException(str(exc.detail)) from None
    if not result["valid"]:
        raise click.ClickException(result["error"])
    click.echo(result["compact"])


@main.command("policy-validate")
@click.argument("policy_file", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--text", default=None, help="Validate an inline policy instead of a file.")
@click.pass_context
def policy_validate(ctx, policy_file, text):
    """Check a policy file (or inline text) against the policy grammar."""
    if (policy_file is None) == (text is None):
        raise click.UsageError("provide a policy file or --text")
    if policy_file is not None:
        text = Path(policy_file).read_text(encoding="utf-8")
    try:
        result = _client(ctx).validate_policy(text)
    except ServiceError as exc:
        raise click.ClickException(str(exc.detail)) from None
    if not result["valid"]:
        click.echo(f"invalid: {result['error']}", err=True)
        sys.exit(1)
    click.echo(f"valid {result['kind']}: {' '.join(result['compact'].splitlines())}")


if __name__ == "__main__":
    main()
