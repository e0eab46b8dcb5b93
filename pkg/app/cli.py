"""
Command-line interface for the misperception lab.

Every subcommand prints its result on stdout (or to --output) and exits 0.
On failure it prints one JSON line {"error", "message", "details"} on stderr
and exits 1 for invalid input or 2 for runtime and I/O problems.
"""

import functools
import json
import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any, TypeVar

import typer
import uvicorn

from app import __version__
from app.core.config import Settings, configure_logging, get_settings
from app.core.exceptions import (
    EXIT_RUNTIME,
    MisperceptionError,
    ServerStartError,
    ValidationError,
)
from app.main import create_origin_app, create_proxy_app
from app.models.scenario import ScenarioConfig, ScenarioName
from app.services.detect_service import detect_corpus
from app.services.markov_service import MarkovReplacer, load_model, model_to_json, train
from app.services.perturb_service import perturb_corpus
from app.services.recommend_service import recommend as recommend_reply
from app.services.scenario_service import render_summary, run_scenario
from app.services.stats_service import kruskal_wallis
from app.utils.audit import AuditLog
from app.utils.data_loader import (
    load_candidates,
    load_corpus,
    load_keyword_lexicons,
    load_lexicon,
    load_ruleset,
    serialize_corpus,
)

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

cli = typer.Typer(
    name="misperception",
    help="Simulate, detect and analyze in-transit rewriting of social-media posts.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


@dataclass
class CliState:
    settings: Settings
    seed: int
    output: Path | None


def _state(ctx: typer.Context) -> CliState:
    state: CliState = ctx.obj
    return state


def _fail(error: str, message: str, details: dict[str, Any], exit_code: int) -> None:
    line = json.dumps(
        {"error": error, "message": message, "details": details}, ensure_ascii=False, default=str
    )
    typer.echo(line, err=True)
    raise typer.Exit(exit_code)


def handle_errors(func: F) -> F:
    """Turn domain and OS errors into a single-line JSON error and an exit code."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except MisperceptionError as e:
            logger.debug(f"{e.__class__.__name__}: {e.message}")
            _fail(e.__class__.__name__, e.message, e.details, e.exit_code)
        except OSError as e:
            _fail("OSError", str(e), {"filename": e.filename}, EXIT_RUNTIME)
        return None

    return wrapper  # type: ignore[return-value]


def _emit(state: CliState, text: str) -> None:
    """Write command output to --output when given, stdout otherwise."""
    if not text.endswith("\n"):
        text += "\n"
    if state.output is None:
        typer.echo(text, nl=False)
        return
    state.output.parent.mkdir(parents=True, exist_ok=True)
    state.output.write_text(text, encoding="utf-8")
    logger.info(f"Output written to {state.output}")


def _parse_group(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise ValidationError("group", raw, "expected comma-separated numbers") from e


def _read_groups(path: Path) -> list[list[float]]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError("groups", str(path), f"invalid JSON: {e}") from e
    if not isinstance(data, list) or not all(isinstance(g, list) for g in data):
        raise ValidationError("groups", str(path), "expected a JSON array of arrays")
    try:
        return [[float(v) for v in g] for g in data]
    except (TypeError, ValueError) as e:
        raise ValidationError("groups", str(path), "group values must be numbers") from e


@cli.callback()
def main(
    ctx: typer.Context,
    seed: Annotated[
        int | None, typer.Option("--seed", help="Seed for every random choice")
    ] = None,
    output: Annotated[
        Path | None,
        typer.Option("--output", "-o", help="Output file, or directory for run-scenario"),
    ] = None,
) -> None:
    """Misperception lab command-line tools."""
    settings = get_settings()
    configure_logging(settings)
    ctx.obj = CliState(
        settings=settings, seed=settings.seed if seed is None else seed, output=output
    )


@cli.command()
def version() -> None:
    """Print the package version."""
    typer.echo(__version__)


@cli.command()
@handle_errors
def perturb(
    ctx: typer.Context,
    corpus: Annotated[Path, typer.Argument(help="JSON Lines corpus")],
    rules: Annotated[Path, typer.Option("--rules", "-r", help="Ruleset file")],
    markov: Annotated[
        Path | None, typer.Option("--markov", help="Markov model for '&markov' replacements")
    ] = None,
    edits: Annotated[
        Path | None, typer.Option("--edits", help="Also write the edit log here as JSON")
    ] = None,
) -> None:
    """Rewrite a corpus with a ruleset; prints the perturbed corpus as JSON Lines."""
    state = _state(ctx)
    documents = load_corpus(corpus)
    ruleset = load_ruleset(rules)
    replacer = MarkovReplacer(load_model(markov)) if markov else None
    perturbed, log = perturb_corpus(documents, ruleset, replacer)
    if edits is not None:
        edits.parent.mkdir(parents=True, exist_ok=True)
        edits.write_text(log.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Applied {len(log)} edits to {len(documents)} documents")
    _emit(state, serialize_corpus(perturbed).decode("utf-8"))


@cli.command()
@handle_errors
def detect(
    ctx: typer.Context,
    original: Annotated[Path, typer.Argument(help="Authentic corpus")],
    delivered: Annotated[Path, typer.Argument(help="Corpus as the reader received it")],
    lexicon: Annotated[
        Path | None, typer.Option("--lexicon", help="Valence lexicon file")
    ] = None,
) -> None:
    """Compare two corpora document by document; prints one report per line."""
    state = _state(ctx)
    valence = load_lexicon(lexicon or state.settings.lexicon_path)
    reports = detect_corpus(load_corpus(original), load_corpus(delivered), valence)
    altered = sum(1 for r in reports if not r.clean)
    logger.info(f"{altered} of {len(reports)} documents altered")
    _emit(state, "".join(r.model_dump_json() + "\n" for r in reports))


@cli.command()
@handle_errors
def recommend(
    ctx: typer.Context,
    text: Annotated[str | None, typer.Argument(help="Tweet text to answer")] = None,
    input_text: Annotated[
        str | None, typer.Option("--input", help="Tweet text, instead of the argument")
    ] = None,
    candidates: Annotated[
        Path | None, typer.Option("--candidates", help="Reply candidates (JSON Lines)")
    ] = None,
    keywords: Annotated[
        Path | None,
        typer.Option("--lexicons", "--keywords", help="Pro/anti keyword file"),
    ] = None,
    epsilon: Annotated[
        float | None, typer.Option("--epsilon", help="Jitter amplitude, >= 0")
    ] = None,
    seed: Annotated[
        int | None, typer.Option("--seed", help="Jitter seed, overrides the global --seed")
    ] = None,
) -> None:
    """Suggest the closest ready-made reply."""
    if (text is None) == (input_text is None):
        raise ValidationError(
            "input", text or input_text, "pass the text either as an argument or with --input"
        )
    state = _state(ctx)
    settings = state.settings
    result = recommend_reply(
        text if input_text is None else input_text,
        load_candidates(candidates or settings.candidates_path),
        load_keyword_lexicons(keywords or settings.keywords_path),
        epsilon=settings.epsilon if epsilon is None else epsilon,
        seed=state.seed if seed is None else seed,
    )
    _emit(state, result.model_dump_json(indent=2))


@cli.command()
@handle_errors
def kw(
    ctx: typer.Context,
    groups: Annotated[
        list[str] | None,
        typer.Argument(help="Groups as comma-separated numbers, e.g. 1,2,3 4,5,6"),
    ] = None,
    groups_file: Annotated[
        Path | None, typer.Option("--groups", help="JSON file holding an array of arrays")
    ] = None,
) -> None:
    """Kruskal-Wallis H test over two or more groups."""
    parsed = [_parse_group(g) for g in groups or []]
    if groups_file is not None:
        parsed.extend(_read_groups(groups_file))
    result = kruskal_wallis(parsed)
    _emit(_state(ctx), result.model_dump_json(indent=2))


@cli.command("train-markov")
@handle_errors
def train_markov(
    ctx: typer.Context,
    corpus: Annotated[Path, typer.Argument(help="JSON Lines corpus")],
    smoothing: Annotated[
        str, typer.Option("--smoothing", help="Additive smoothing k, e.g. 0, 1 or 1/2")
    ] = "0",
) -> None:
    """Train an order-1 replacement model; prints it as JSON."""
    model = train(load_corpus(corpus), smoothing=smoothing)
    _emit(_state(ctx), json.dumps(model_to_json(model), indent=2, sort_keys=True))


def _run_server(app: Any, host: str, port: int) -> None:
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except SystemExit as e:
        if e.code:
            raise ServerStartError(f"{host}:{port}", "failed to bind") from e


@cli.command()
@handle_errors
def serve(
    ctx: typer.Context,
    corpus: Annotated[Path | None, typer.Option("--corpus", help="Corpus to serve")] = None,
    host: Annotated[str | None, typer.Option("--host")] = None,
    port: Annotated[int | None, typer.Option("--port")] = None,
) -> None:
    """Run the feed origin server."""
    settings = _state(ctx).settings
    documents = load_corpus(corpus or settings.corpus_file_path)
    _run_server(
        create_origin_app(documents, settings), host or settings.host, port or settings.port
    )


@cli.command()
@handle_errors
def proxy(
    ctx: typer.Context,
    rules: Annotated[Path, typer.Option("--rules", "-r", help="Ruleset file")],
    upstream: Annotated[str | None, typer.Option("--upstream", help="Origin host:port")] = None,
    audit: Annotated[Path | None, typer.Option("--audit", help="Audit log file")] = None,
    markov: Annotated[
        Path | None, typer.Option("--markov", help="Markov model for '&markov' replacements")
    ] = None,
    host: Annotated[str | None, typer.Option("--host")] = None,
    port: Annotated[int | None, typer.Option("--port")] = None,
) -> None:
    """Run the rewriting proxy in front of an origin."""
    settings = _state(ctx).settings
    app = create_proxy_app(
        upstream or settings.upstream,
        load_ruleset(rules),
        AuditLog(audit or settings.audit_path),
        replacer=MarkovReplacer(load_model(markov)) if markov else None,
        settings=settings,
    )
    _run_server(app, host or settings.host, port or settings.proxy_port)


@cli.command("run-scenario")
@handle_errors
def run_scenario_command(
    ctx: typer.Context,
    name: Annotated[ScenarioName, typer.Argument(help="Scenario to run")],
    wire: Annotated[
        bool, typer.Option("--wire", help="Deliver through a live origin and proxy")
    ] = False,
) -> None:
    """Run the pilot or study scenario and write its report files."""
    state = _state(ctx)
    config = ScenarioConfig.from_settings(
        name, state.settings, seed=state.seed, output_dir=state.output
    )
    report = run_scenario(name, config, wire=wire, settings=state.settings)
    typer.echo(render_summary(report), nl=False)
    if not report.round_trip:
        raise typer.Exit(EXIT_RUNTIME)


def run() -> None:
    cli(prog_name="misperception")
