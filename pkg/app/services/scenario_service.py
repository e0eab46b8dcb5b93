"""
Scenario service.

Runs the bundled end-to-end demonstrations: perturb a sample post with a
named ruleset (in-process, or through a live origin and proxy), detect the
change against the authentic post, suggest a reply to what the reader saw,
and write a JSON report plus a plain-text summary.
"""

import logging
from pathlib import Path

import httpx

from app.core.config import Settings, get_settings
from app.core.exceptions import AssetValidationError, ReplayError, UpstreamError
from app.main import create_origin_app, create_proxy_app
from app.models.corpus import Thread, TweetDocument
from app.models.rules import Edit
from app.models.scenario import (
    PARTICIPANT_GROUPING,
    SAMPLE_IDS,
    ScenarioAssets,
    ScenarioConfig,
    ScenarioName,
    ScenarioReport,
)
from app.services.detect_service import detect
from app.services.markov_service import MarkovReplacer, train
from app.services.perturb_service import Replacer, apply_ruleset, replay_document
from app.services.proxy_service import tweet_path
from app.services.recommend_service import recommend
from app.utils.audit import AuditLog
from app.utils.data_loader import parse_corpus
from app.utils.server import start_server

logger = logging.getLogger(__name__)


def sample_document(assets: ScenarioAssets, name: ScenarioName, path: Path) -> TweetDocument:
    """
    Raises:
        AssetValidationError: If the corpus lacks the scenario's sample
    """
    sample_id = SAMPLE_IDS[name]
    for doc in assets.corpus:
        if doc.id == sample_id:
            return doc
    raise AssetValidationError(str(path), "id", f"sample document '{sample_id}' is missing")


def _replacer(assets: ScenarioAssets) -> Replacer | None:
    if any(rule.uses_markov for rule in assets.rules.rules):
        return MarkovReplacer(train(assets.corpus))
    return None


def deliver_in_process(
    original: TweetDocument, assets: ScenarioAssets
) -> tuple[TweetDocument, tuple[Edit, ...]]:
    """Perturb the sample as the proxy would, without any network."""
    perturbed, log = apply_ruleset(Thread(root=original), assets.rules, _replacer(assets))
    return perturbed.root, log.edits


def deliver_over_wire(
    original: TweetDocument,
    assets: ScenarioAssets,
    audit_path: Path,
    settings: Settings,
) -> tuple[TweetDocument, tuple[Edit, ...]]:
    """
    Serve the corpus, rewrite it through a live proxy and fetch the sample as a reader.

    Ground truth comes from the proxy's audit file.

    Raises:
        ServerStartError: If either server cannot bind
        UpstreamError: If the fetch through the proxy fails
    """
    audit_path.unlink(missing_ok=True)
    audit = AuditLog(audit_path)
    upstream = f"{settings.host}:{settings.port}"
    origin_app = create_origin_app(assets.corpus, settings)
    proxy_app = create_proxy_app(
        upstream, assets.rules, audit, replacer=_replacer(assets), settings=settings
    )

    origin = start_server(origin_app, settings.host, settings.port)
    try:
        proxy = start_server(proxy_app, settings.host, settings.proxy_port)
        try:
            url = f"http://{settings.host}:{settings.proxy_port}{tweet_path(original.id)}"
            response = httpx.get(url, timeout=settings.upstream_timeout_seconds)
        finally:
            proxy.stop()
    finally:
        origin.stop()

    if response.status_code != 200:
        raise UpstreamError(upstream, f"proxy answered {response.status_code}")
    delivered = parse_corpus(response.content, resolve_parents=False)[0]
    edits = tuple(
        edit for entry in audit.read() if entry.tweet_id == original.id for edit in entry.edits
    )
    return delivered, edits


def run_scenario(
    name: ScenarioName,
    config: ScenarioConfig,
    wire: bool = False,
    settings: Settings | None = None,
) -> ScenarioReport:
    """
    Run one scenario end to end and write its report files.

    Args:
        name: pilot or study
        config: Asset paths, seed and output directory
        wire: Deliver through a live origin and proxy instead of in-process
        settings: Server addresses for the wire run

    Returns:
        ScenarioReport: The report that was written

    Raises:
        AssetValidationError: If any asset is missing or invalid, before any step runs
    """
    settings = settings or get_settings()
    assets = config.validate_assets()
    original = sample_document(assets, name, config.corpus_path)
    logger.info(f"Running scenario {name.value} on {original.id} (wire={wire})")

    config.output_dir.mkdir(parents=True, exist_ok=True)
    if wire:
        audit_path = config.output_dir / f"{name.value}-audit.jsonl"
        perturbed, ground_truth = deliver_over_wire(original, assets, audit_path, settings)
    else:
        perturbed, ground_truth = deliver_in_process(original, assets)

    detection = detect(original, perturbed, assets.lexicon)
    suggestion = recommend(
        perturbed.body,
        assets.candidates,
        assets.keywords,
        epsilon=config.epsilon,
        seed=config.seed,
    )
    try:
        round_trip = (
            replay_document(original, ground_truth) == perturbed
            and replay_document(original, detection.edits) == perturbed
        )
    except ReplayError as e:
        logger.warning(f"Scenario {name.value}: replay failed: {e.message}")
        round_trip = False
    report = ScenarioReport(
        scenario=name,
        seed=config.seed,
        wire=wire,
        original=original,
        perturbed=perturbed,
        ground_truth=ground_truth,
        detection=detection,
        suggestion=suggestion,
        round_trip=round_trip,
        participant_grouping=PARTICIPANT_GROUPING[name],
    )
    write_report(report, config.output_dir)
    return report


def _metrics_line(report: ScenarioReport) -> str:
    before, after = report.original.metrics, report.perturbed.metrics
    return ", ".join(
        f"{label} {getattr(before, label)} -> {getattr(after, label)}"
        for label in ("replies", "retweets", "likes")
    )


def render_summary(report: ScenarioReport) -> str:
    """Plain-text summary of a scenario report."""
    detection = report.detection
    factor = "none" if detection.metric_factor is None else str(detection.metric_factor)
    chosen = report.suggestion.chosen
    hashtags_before = " ".join(report.original.hashtags)
    hashtags_after = " ".join(report.perturbed.hashtags)
    lines = [
        f"Scenario: {report.scenario.value} ({'wire' if report.wire else 'in-process'})",
        f"Document: {report.original.id} by {report.original.author}",
        f"Original:  {report.original.body}",
        f"Delivered: {report.perturbed.body}",
        f"Hashtags:  {hashtags_before} -> {hashtags_after}",
        f"Metrics:   {_metrics_line(report)}",
        f"Edits applied: {len(report.ground_truth)}",
        (
            f"Detected: {len(detection.edits)} edits, metric factor {factor}, "
            f"valence inversion {'yes' if detection.valence_inversion else 'no'}, "
            f"severity {detection.severity:.2f}"
        ),
        f'Suggested reply: "{chosen.text}" ({chosen.stance.value}, {chosen.rhetoric.value})',
        f"Round trip: {'pass' if report.round_trip else 'FAIL'}",
    ]
    lines.extend(f"Note: {note}" for note in report.participant_grouping)
    return "\n".join(lines) + "\n"


def write_report(report: ScenarioReport, output_dir: Path) -> tuple[Path, Path]:
    """Write <name>-report.json and <name>-summary.txt."""
    json_path = output_dir / f"{report.scenario.value}-report.json"
    text_path = output_dir / f"{report.scenario.value}-summary.txt"
    json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    text_path.write_text(render_summary(report), encoding="utf-8")
    logger.info(f"Scenario report written to {json_path}")
    return json_path, text_path
