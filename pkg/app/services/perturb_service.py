"""
Perturbation service for the misperception lab.

This module is the rewriting engine: it finds rule targets in a thread
(a post and its comments), rewrites words, hashtags and engagement metrics,
and records every change as an edit that can be replayed on the original.
"""

import logging
import math
from collections.abc import Sequence
from fractions import Fraction
from typing import Protocol

from app.core.exceptions import ConfigurationError, ReplayError, ValidationError
from app.models.corpus import MATCHABLE_KINDS, Metrics, Thread, Token, TokenKind, TweetDocument
from app.models.rules import (
    BodyPatch,
    Edit,
    EditField,
    EditLog,
    EditOp,
    Location,
    Match,
    PerturbationRule,
    RuleKind,
    RulePredicate,
    RuleSet,
    Scope,
    Side,
)
from app.utils.data_loader import flatten_threads, group_threads
from app.utils.tokenizer import tokenize

logger = logging.getLogger(__name__)


class Replacer(Protocol):
    """Picks a replacement token for a "&markov" swap."""

    def __call__(self, prev: str, matched: str, candidates: Sequence[str] | None) -> str: ...


def scale_metrics(m: Metrics, factor: Fraction | int) -> Metrics:
    """
    Multiply each counter by factor, rounding half away from zero.

    Raises:
        ValidationError: If factor is not positive
    """
    factor = Fraction(factor)
    if factor <= 0:
        raise ValidationError("factor", factor, "must be > 0")

    def scale(count: int) -> int:
        return math.floor(count * factor + Fraction(1, 2))

    return Metrics(replies=scale(m.replies), retweets=scale(m.retweets), likes=scale(m.likes))


def adapt_case(matched: str, replacement: str) -> str:
    """Copy upper or capitalized casing of the matched token onto the replacement."""
    core = matched.lstrip("#@")
    lead = len(replacement) - len(replacement.lstrip("#@"))
    head, tail = replacement[:lead], replacement[lead:]
    if len(core) > 1 and core.isupper():
        return head + tail.upper()
    if core[:1].isupper():
        return head + tail[:1].upper() + tail[1:]
    return replacement


def _same(token: str, target: str, case_sensitive: bool) -> bool:
    if case_sensitive:
        return token == target
    return token.casefold() == target.casefold()


def _predicate_holds(root: TweetDocument, predicate: RulePredicate | None) -> bool:
    if predicate is None:
        return True
    if predicate.hashtag_any is not None:
        wanted = {tag.casefold() for tag in predicate.hashtag_any}
        if not any(tag.casefold() in wanted for tag in root.hashtags):
            return False
    return predicate.author_is is None or root.author == predicate.author_is


def _location(thread: Thread, doc: TweetDocument) -> Location:
    if doc.id == thread.root.id:
        return Location.root(doc.id)
    return Location.comment(doc.id)


def _eligible(thread: Thread, scope: Scope) -> tuple[TweetDocument, ...]:
    if scope is Scope.COMMENTS_ONLY:
        return tuple(doc for doc in thread.comments if thread.is_comment(doc))
    return thread.documents


def find_matches(thread: Thread, rule: PerturbationRule) -> list[Match]:
    """
    Find occurrences of the rule target.

    Matches are reported in document order, root before comments. Hashtag swaps
    also match entries of the hashtags list (listed before body tokens).

    Args:
        thread: Root document plus its comments
        rule: Validated rule

    Returns:
        List[Match]: Matches, at most one when the scope is "first"; empty when the
        predicate fails or the rule has no token target
    """
    target = rule.target
    if target is None or not _predicate_holds(thread.root, rule.predicate):
        return []

    matches: list[Match] = []
    for doc in _eligible(thread, rule.scope):
        location = _location(thread, doc)
        if rule.kind is RuleKind.HASHTAG_SWAP:
            for index, tag in enumerate(doc.hashtags):
                if _same(tag, target, rule.case_sensitive):
                    matches.append(
                        Match(
                            location=location,
                            field=EditField.HASHTAGS,
                            token_index=index,
                            token_text=tag,
                        )
                    )
            kinds = frozenset({TokenKind.HASHTAG})
        else:
            kinds = MATCHABLE_KINDS
        for index, token in enumerate(tokenize(doc.body)):
            if token.kind in kinds and _same(token.text, target, rule.case_sensitive):
                matches.append(Match(location=location, token_index=index, token_text=token.text))
        if rule.scope is Scope.FIRST and matches:
            return matches[:1]
    return matches


def _patch(body: str, start: int, end: int, after: str) -> tuple[str, BodyPatch]:
    raw = body.encode("utf-8")
    before = raw[start:end].decode("utf-8")
    patched = raw[:start] + after.encode("utf-8") + raw[end:]
    return patched.decode("utf-8"), BodyPatch(
        byte_start=start, byte_end=end, before=before, after=after
    )


def _removal_span(body: str, token: Token) -> tuple[int, int, str]:
    """Byte range to cut when deleting a token, and the text that bridges the join."""
    raw = body.encode("utf-8")
    prefix = raw[: token.byte_start].decode("utf-8")
    suffix = raw[token.byte_end :].decode("utf-8")
    left = len(prefix.encode("utf-8")) - len(prefix.rstrip().encode("utf-8"))
    right = len(suffix.encode("utf-8")) - len(suffix.lstrip().encode("utf-8"))
    if not prefix.strip():
        return token.byte_start, token.byte_end + right, ""
    if not suffix.strip():
        return token.byte_start - left, token.byte_end, ""
    if left and right:
        return token.byte_start - left, token.byte_end + right, " "
    if left:
        return token.byte_start - left, token.byte_end, ""
    return token.byte_start, token.byte_end + right, ""


def _previous_token(tokens: list[Token], index: int) -> str:
    for token in reversed(tokens[:index]):
        if token.kind in MATCHABLE_KINDS:
            return token.text.casefold()
    return ""


def _rewrite_body(
    doc: TweetDocument,
    location: Location,
    indexes: list[int],
    rule: PerturbationRule,
    replacer: Replacer | None,
) -> tuple[str, list[Edit]]:
    """Apply a swap or removal to the given token indexes, right to left."""
    body = doc.body
    tokens = tokenize(body)
    edits: list[Edit] = []
    for index in sorted(indexes, reverse=True):
        token = tokens[index]
        if rule.kind is RuleKind.WORD_REMOVE:
            start, end, bridge = _removal_span(body, token)
            body, span = _patch(body, start, end, bridge)
            edits.append(
                Edit(
                    op=EditOp.DELETE,
                    location=location,
                    token_index=index,
                    original=token.text,
                    replacement="",
                    span=span,
                )
            )
            continue

        if rule.uses_markov:
            replacement = replacer(_previous_token(tokens, index), token.text, rule.candidates)
        else:
            replacement = rule.replacement
        if not rule.case_sensitive:
            replacement = adapt_case(token.text, replacement)
        if replacement == token.text:
            continue
        body, span = _patch(body, token.byte_start, token.byte_end, replacement)
        op = EditOp.HASHTAG_SWAP if rule.kind is RuleKind.HASHTAG_SWAP else EditOp.SUBSTITUTE
        edits.append(
            Edit(
                op=op,
                location=location,
                token_index=index,
                original=token.text,
                replacement=replacement,
                span=span,
            )
        )
    return body, edits


def _insert(thread: Thread, match: Match, rule: PerturbationRule) -> tuple[Thread, EditLog]:
    doc = thread.get(match.location.document_id)
    token = tokenize(doc.body)[match.token_index]
    if rule.side is Side.BEFORE:
        at, text, index = token.byte_start, f"{rule.insert_token} ", match.token_index
    else:
        at, text, index = token.byte_end, f" {rule.insert_token}", match.token_index + 1
    body, span = _patch(doc.body, at, at, text)
    edit = Edit(
        op=EditOp.INSERT,
        location=match.location,
        token_index=index,
        original="",
        replacement=rule.insert_token,
        span=span,
    )
    return thread.replace(doc.model_copy(update={"body": body})), EditLog(edits=(edit,))


def _scale(thread: Thread, rule: PerturbationRule) -> tuple[Thread, EditLog]:
    if not _predicate_holds(thread.root, rule.predicate):
        return thread, EditLog()
    targets = (thread.root,) if rule.scope is Scope.FIRST else _eligible(thread, rule.scope)
    edits: list[Edit] = []
    for doc in targets:
        scaled = scale_metrics(doc.metrics, rule.factor)
        if scaled == doc.metrics:
            continue
        edits.append(
            Edit(
                op=EditOp.METRIC_SCALE,
                location=_location(thread, doc),
                field=EditField.METRICS,
                original=doc.metrics,
                replacement=scaled,
            )
        )
        thread = thread.replace(doc.model_copy(update={"metrics": scaled}))
    return thread, EditLog(edits=tuple(edits))


def apply_rule(
    thread: Thread, rule: PerturbationRule, replacer: Replacer | None = None
) -> tuple[Thread, EditLog]:
    """
    Apply one rule to a thread.

    Args:
        thread: Root document plus its comments
        rule: Validated rule
        replacer: Hook consulted for "&markov" replacements

    Returns:
        Tuple[Thread, EditLog]: Perturbed thread and the edits made; the thread is
        returned unchanged with an empty log when nothing matches

    Raises:
        ConfigurationError: If the rule asks for "&markov" and no replacer is set
    """
    if rule.uses_markov and replacer is None:
        raise ConfigurationError("rule uses '&markov' but no Markov replacer is configured")
    if rule.kind is RuleKind.METRIC_SCALE:
        return _scale(thread, rule)

    matches = find_matches(thread, rule)
    if not matches:
        return thread, EditLog()
    if rule.kind is RuleKind.WORD_INSERT:
        return _insert(thread, matches[0], rule)

    edits: list[Edit] = []
    for doc in thread.documents:
        doc_matches = [m for m in matches if m.location.document_id == doc.id]
        if not doc_matches:
            continue
        location = doc_matches[0].location
        hashtags = list(doc.hashtags)
        for m in doc_matches:
            if m.field is not EditField.HASHTAGS:
                continue
            replacement = rule.replacement
            if not rule.case_sensitive:
                replacement = adapt_case(m.token_text, replacement)
            if replacement == m.token_text:
                continue
            hashtags[m.token_index] = replacement
            edits.append(
                Edit(
                    op=EditOp.HASHTAG_SWAP,
                    location=location,
                    field=EditField.HASHTAGS,
                    token_index=m.token_index,
                    original=m.token_text,
                    replacement=replacement,
                )
            )
        body_indexes = [m.token_index for m in doc_matches if m.field is EditField.BODY]
        body, body_edits = _rewrite_body(doc, location, body_indexes, rule, replacer)
        edits.extend(body_edits)
        updated = doc.model_copy(update={"body": body, "hashtags": tuple(hashtags)})
        thread = thread.replace(updated)

    logger.debug(f"Rule {rule.kind.value} made {len(edits)} edits in thread {thread.root.id}")
    return thread, EditLog(edits=tuple(edits))


def apply_ruleset(
    thread: Thread,
    rules: RuleSet | Sequence[PerturbationRule],
    replacer: Replacer | None = None,
) -> tuple[Thread, EditLog]:
    """
    Apply rules in list order, each to the output of the previous one.

    Returns:
        Tuple[Thread, EditLog]: Perturbed thread and the concatenated edit log
    """
    rule_list = rules.rules if isinstance(rules, RuleSet) else tuple(rules)
    log = EditLog()
    for rule in rule_list:
        thread, rule_log = apply_rule(thread, rule, replacer)
        log = log + rule_log
    return thread, log


def perturb_document(
    doc: TweetDocument,
    rules: RuleSet | Sequence[PerturbationRule],
    replacer: Replacer | None = None,
) -> tuple[TweetDocument, EditLog]:
    """Perturb a single document with no comments."""
    thread, log = apply_ruleset(Thread(root=doc), rules, replacer)
    return thread.root, log


def perturb_corpus(
    documents: Sequence[TweetDocument],
    rules: RuleSet | Sequence[PerturbationRule],
    replacer: Replacer | None = None,
) -> tuple[list[TweetDocument], EditLog]:
    """Perturb every thread of a corpus, keeping the corpus order."""
    threads: list[Thread] = []
    log = EditLog()
    for thread in group_threads(documents):
        perturbed, thread_log = apply_ruleset(thread, rules, replacer)
        threads.append(perturbed)
        log = log + thread_log
    return flatten_threads(threads, [doc.id for doc in documents]), log


def _replay_hashtags(doc_id: str, hashtags: list[str], edit: Edit) -> None:
    index = edit.token_index
    if index is None or index > len(hashtags):
        raise ReplayError(doc_id, f"hashtag position {index} is out of range")
    if edit.op is EditOp.INSERT:
        hashtags.insert(index, edit.replacement)
        return
    if index == len(hashtags) or hashtags[index] != edit.original:
        raise ReplayError(doc_id, f"expected hashtag '{edit.original}' at {index}")
    if edit.op is EditOp.DELETE:
        hashtags.pop(index)
    else:
        hashtags[index] = edit.replacement


def replay_document(doc: TweetDocument, edits: Sequence[Edit]) -> TweetDocument:
    """
    Apply recorded edits, in order, to one document.

    Raises:
        ReplayError: If an edit does not fit the document
    """
    body = doc.body
    hashtags = list(doc.hashtags)
    metrics = doc.metrics
    for edit in edits:
        if edit.field is EditField.METRICS:
            if metrics != edit.original:
                raise ReplayError(doc.id, "metrics differ from the recorded original")
            metrics = edit.replacement
        elif edit.field is EditField.HASHTAGS:
            _replay_hashtags(doc.id, hashtags, edit)
        else:
            span = edit.span
            if span is None:
                # bytes already covered by the patch of a neighbouring edit
                continue
            raw = body.encode("utf-8")
            if raw[span.byte_start : span.byte_end] != span.before.encode("utf-8"):
                raise ReplayError(doc.id, f"span {span.byte_start}:{span.byte_end} differs")
            body, _ = _patch(body, span.byte_start, span.byte_end, span.after)
    return doc.model_copy(update={"body": body, "hashtags": tuple(hashtags), "metrics": metrics})


def replay_thread(thread: Thread, log: EditLog) -> Thread:
    """Replay an edit log on every document of a thread."""
    for doc in thread.documents:
        edits = log.for_document(doc.id)
        if edits:
            thread = thread.replace(replay_document(doc, edits))
    return thread
