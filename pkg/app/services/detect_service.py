"""
Integrity detection service.

Compares the authentic version of a document with the rendering a reader
received, recovers an edit script that turns one into the other, and flags
misperception signatures: valence inversion, hashtag flips and uniform
metric inflation.
"""

import logging
import math
from collections.abc import Iterator, Sequence
from fractions import Fraction

from app.core.exceptions import ValidationError
from app.models.corpus import Metrics, Token, TokenKind, TweetDocument
from app.models.detection import AlignKind, AlignOp, DetectionReport, ValenceLexicon
from app.models.rules import BodyPatch, Edit, EditField, EditOp, Location
from app.services.perturb_service import scale_metrics
from app.utils.tokenizer import tokenize

logger = logging.getLogger(__name__)

MAX_FACTOR_TERM = 64
_SIGNATURE_WEIGHT = Fraction(1, 4)


def _texts(items: Sequence[Token | str]) -> list[str]:
    return [item.text if isinstance(item, Token) else item for item in items]


def _walk(a: list[str], b: list[str]) -> Iterator[tuple[AlignKind, int, int]]:
    """
    Yield (kind, i, j) steps of a minimal alignment, i and j being the positions
    in a and b before the step.

    Costs to finish are tabulated over suffixes and the path is walked forward,
    taking the first optimal move in the order substitute, delete, insert, match.
    Edits therefore land leftmost among minimal scripts.
    """
    m, n = len(a), len(b)
    cost = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m, -1, -1):
        for j in range(n, -1, -1):
            if i == m:
                cost[i][j] = n - j
            elif j == n:
                cost[i][j] = m - i
            else:
                cost[i][j] = min(
                    cost[i + 1][j + 1] + (a[i] != b[j]),
                    cost[i + 1][j] + 1,
                    cost[i][j + 1] + 1,
                )
    i = j = 0
    while i < m or j < n:
        here = cost[i][j]
        if i < m and j < n and here == cost[i + 1][j + 1] + 1:
            yield AlignKind.SUBSTITUTE, i, j
            i, j = i + 1, j + 1
        elif i < m and here == cost[i + 1][j] + 1:
            yield AlignKind.DELETE, i, j
            i += 1
        elif j < n and here == cost[i][j + 1] + 1:
            yield AlignKind.INSERT, i, j
            j += 1
        else:
            yield AlignKind.MATCH, i, j
            i, j = i + 1, j + 1


def _op(kind: AlignKind, i: int, j: int, a: list[str], b: list[str]) -> AlignOp:
    if kind is AlignKind.DELETE:
        return AlignOp(kind=kind, original_index=i, original=a[i])
    if kind is AlignKind.INSERT:
        return AlignOp(kind=kind, delivered_index=j, delivered=b[j])
    return AlignOp(kind=kind, original_index=i, delivered_index=j, original=a[i], delivered=b[j])


def alignment(original: Sequence[Token | str], delivered: Sequence[Token | str]) -> list[AlignOp]:
    """Full alignment path, matches included."""
    a, b = _texts(original), _texts(delivered)
    return [_op(kind, i, j, a, b) for kind, i, j in _walk(a, b)]


def align(original: Sequence[Token | str], delivered: Sequence[Token | str]) -> list[AlignOp]:
    """
    Minimal token edit script under unit costs.

    Among minimal scripts, substitutions are preferred over delete/insert pairs and
    edits are placed leftmost. The script length equals the token edit distance.

    Returns:
        List[AlignOp]: substitute, delete and insert steps in left-to-right order
    """
    return [op for op in alignment(original, delivered) if op.kind is not AlignKind.MATCH]


def estimate_metric_factor(original: Metrics, delivered: Metrics) -> Fraction | None:
    """
    Find a single factor p/q (p, q <= 64) explaining all three counters.

    Smaller denominators win; for a given denominator inflation (p > q) is tried
    before deflation, smallest p first.

    Returns:
        Optional[Fraction]: The factor, or None when metrics are unchanged or no
        uniform factor exists
    """
    if original == delivered:
        return None
    for q in range(1, MAX_FACTOR_TERM + 1):
        numerators = [*range(q + 1, MAX_FACTOR_TERM + 1), *range(1, q)]
        for p in numerators:
            if math.gcd(p, q) != 1:
                continue
            factor = Fraction(p, q)
            if scale_metrics(original, factor) == delivered:
                return factor
    return None


def classify(
    edits: Sequence[Edit],
    hashtag_flips: Sequence[tuple[str, str]],
    metric_factor: Fraction | None,
    lexicon: ValenceLexicon,
    document_id: str = "",
) -> DetectionReport:
    """
    Assemble a report and score it.

    severity = min(1, 1/4 * [valence inversion] + 1/4 * [metric factor]
                    + 1/4 * [hashtag flips] + 1/4 * min(1, |edits| / 4))
    """
    inversion = False
    for edit in edits:
        if not isinstance(edit.original, str) or not isinstance(edit.replacement, str):
            continue
        if edit.op in (EditOp.SUBSTITUTE, EditOp.HASHTAG_SWAP):
            inversion = inversion or lexicon.is_pair(edit.original, edit.replacement)
        elif edit.op is EditOp.DELETE:
            inversion = inversion or lexicon.is_negator(edit.original)
        elif edit.op is EditOp.INSERT:
            inversion = inversion or lexicon.is_negator(edit.replacement)

    score = (
        _SIGNATURE_WEIGHT * inversion
        + _SIGNATURE_WEIGHT * (metric_factor is not None)
        + _SIGNATURE_WEIGHT * bool(hashtag_flips)
        + _SIGNATURE_WEIGHT * min(Fraction(1), Fraction(len(edits), 4))
    )
    return DetectionReport(
        document_id=document_id,
        edits=tuple(edits),
        metric_factor=metric_factor,
        hashtag_flips=tuple((a, b) for a, b in hashtag_flips),
        valence_inversion=inversion,
        severity=float(min(Fraction(1), score)),
    )


def _location(doc: TweetDocument) -> Location:
    return Location.comment(doc.id) if doc.is_comment else Location.root(doc.id)


def _token_edit(op: AlignOp, a: list[Token], b: list[Token], location: Location) -> Edit:
    if op.kind is AlignKind.DELETE:
        return Edit(
            op=EditOp.DELETE,
            location=location,
            token_index=op.original_index,
            original=op.original,
            replacement="",
        )
    if op.kind is AlignKind.INSERT:
        return Edit(
            op=EditOp.INSERT,
            location=location,
            token_index=op.delivered_index,
            original="",
            replacement=op.delivered,
        )
    both_hashtags = (
        a[op.original_index].kind is TokenKind.HASHTAG
        and b[op.delivered_index].kind is TokenKind.HASHTAG
    )
    return Edit(
        op=EditOp.HASHTAG_SWAP if both_hashtags else EditOp.SUBSTITUTE,
        location=location,
        token_index=op.original_index,
        original=op.original,
        replacement=op.delivered,
    )


def _body_edits(original: TweetDocument, delivered: TweetDocument) -> list[Edit]:
    """
    Token edits with byte patches.

    The bytes between two consecutive matched tokens form a region; a region whose
    bytes differ gets one patch, carried by its first token edit. A region that
    differs only in whitespace yields a respace edit.
    """
    a, b = tokenize(original.body), tokenize(delivered.body)
    raw_a, raw_b = original.body.encode("utf-8"), delivered.body.encode("utf-8")
    location = _location(delivered)
    path = alignment(a, b)

    edits: list[Edit] = []
    delta = 0
    pending: list[AlignOp] = []
    start_a = start_b = 0

    def close_region(end_a: int, end_b: int) -> None:
        nonlocal delta
        before = raw_a[start_a:end_a].decode("utf-8")
        after = raw_b[start_b:end_b].decode("utf-8")
        if before == after and not pending:
            return
        span = BodyPatch(
            byte_start=start_a + delta, byte_end=end_a + delta, before=before, after=after
        )
        delta += len(raw_b[start_b:end_b]) - len(raw_a[start_a:end_a])
        if not pending:
            edits.append(
                Edit(
                    op=EditOp.RESPACE,
                    location=location,
                    original=before,
                    replacement=after,
                    span=span,
                )
            )
            return
        for k, op in enumerate(pending):
            edit = _token_edit(op, a, b, location)
            edits.append(edit.model_copy(update={"span": span}) if k == 0 else edit)

    for op in path:
        if op.kind is AlignKind.MATCH:
            close_region(a[op.original_index].byte_start, b[op.delivered_index].byte_start)
            pending = []
            start_a, start_b = a[op.original_index].byte_end, b[op.delivered_index].byte_end
        else:
            pending.append(op)
    close_region(len(raw_a), len(raw_b))
    return edits


def _hashtag_edits(
    original: TweetDocument, delivered: TweetDocument
) -> tuple[list[Edit], list[tuple[str, str]]]:
    a, b = list(original.hashtags), list(delivered.hashtags)
    location = _location(delivered)
    edits: list[Edit] = []
    flips: list[tuple[str, str]] = []
    for kind, i, j in _walk(a, b):
        if kind is AlignKind.SUBSTITUTE:
            flips.append((a[i], b[j]))
            edits.append(
                Edit(
                    op=EditOp.HASHTAG_SWAP,
                    location=location,
                    field=EditField.HASHTAGS,
                    token_index=j,
                    original=a[i],
                    replacement=b[j],
                )
            )
        elif kind is AlignKind.DELETE:
            edits.append(
                Edit(
                    op=EditOp.DELETE,
                    location=location,
                    field=EditField.HASHTAGS,
                    token_index=j,
                    original=a[i],
                    replacement="",
                )
            )
        elif kind is AlignKind.INSERT:
            edits.append(
                Edit(
                    op=EditOp.INSERT,
                    location=location,
                    field=EditField.HASHTAGS,
                    token_index=j,
                    original="",
                    replacement=b[j],
                )
            )
    return edits, flips


def detect(
    original: TweetDocument, delivered: TweetDocument, lexicon: ValenceLexicon
) -> DetectionReport:
    """
    Compare an authentic document with a delivered rendering.

    Raises:
        ValidationError: If the two documents have different ids
    """
    if original.id != delivered.id:
        raise ValidationError("delivered.id", delivered.id, f"expected '{original.id}'")
    edits = _body_edits(original, delivered)
    hashtag_edits, flips = _hashtag_edits(original, delivered)
    edits.extend(hashtag_edits)
    factor = None
    if original.metrics != delivered.metrics:
        factor = estimate_metric_factor(original.metrics, delivered.metrics)
        edits.append(
            Edit(
                op=EditOp.METRIC_SCALE,
                location=_location(delivered),
                field=EditField.METRICS,
                original=original.metrics,
                replacement=delivered.metrics,
            )
        )
    report = classify(edits, flips, factor, lexicon, document_id=original.id)
    if report.severity > 0:
        logger.info(f"Document {original.id} altered in transit (severity {report.severity})")
    return report


def detect_corpus(
    originals: Sequence[TweetDocument],
    delivered: Sequence[TweetDocument],
    lexicon: ValenceLexicon,
) -> list[DetectionReport]:
    """
    Pair documents by id and detect each pair, in the order of the originals.

    Raises:
        ValidationError: If a delivered document is missing
    """
    by_id = {doc.id: doc for doc in delivered}
    reports = []
    for doc in originals:
        if doc.id not in by_id:
            raise ValidationError("delivered", doc.id, "document missing from delivered corpus")
        reports.append(detect(doc, by_id[doc.id], lexicon))
    return reports
