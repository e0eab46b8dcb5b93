"""
Data loading and serialization utilities for the misperception lab.

This module parses JSON Lines corpora into validated documents, renders them
back in canonical form, loads the bundled rule, lexicon and candidate files,
and keeps the in-memory feed the origin server answers from.
"""

import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import IO, Any

import pydantic

from app.core.exceptions import (
    AssetValidationError,
    CorpusError,
    DataLoadError,
    DocumentNotFoundError,
    RuleValidationError,
)
from app.models.corpus import Thread, TweetDocument
from app.models.detection import ValenceLexicon
from app.models.recommend import KeywordLexicons, ResponseCandidate
from app.models.rules import RuleSet
from app.utils.tokenizer import decode_body

logger = logging.getLogger(__name__)

_FIELD_ORDER = ("id", "author", "verified", "body", "hashtags", "metrics", "parent_id")


def describe_validation_error(exc: pydantic.ValidationError) -> tuple[str, str]:
    """Reduce a pydantic error to (field path, human message) for the first problem."""
    error = exc.errors()[0]
    field = ".".join(str(part) for part in error["loc"]) or "<record>"
    ctx = error.get("ctx") or {}
    if error["type"] == "greater_than_equal":
        return field, f"{field} must be ≥ {ctx['ge']}"
    if error["type"] == "missing":
        return field, f"{field} is required"
    if error["type"] == "extra_forbidden":
        return field, f"{field} is not an allowed field"
    return field, f"{field}: {error['msg']}"


def parse_document(record: Any, line: int | None = None) -> TweetDocument:
    """Validate one decoded JSON record as a TweetDocument."""
    if not isinstance(record, dict):
        raise CorpusError("expected a JSON object", line=line)
    try:
        return TweetDocument.model_validate(record)
    except pydantic.ValidationError as e:
        field, reason = describe_validation_error(e)
        raise CorpusError(reason, line=line, field=field) from e


def parse_corpus(
    stream: IO[bytes] | bytes | Iterable[bytes], resolve_parents: bool = True
) -> list[TweetDocument]:
    """
    Parse a JSON Lines corpus.

    Args:
        stream: Binary stream, raw bytes, or an iterable of byte lines
        resolve_parents: Require every parent_id to name a document in the stream

    Returns:
        List[TweetDocument]: Documents in file order

    Raises:
        CorpusError: On malformed lines, invalid UTF-8, duplicate ids or dangling parents
    """
    lines = stream.splitlines(keepends=True) if isinstance(stream, bytes) else stream
    documents: list[TweetDocument] = []
    seen: set[str] = set()
    line_of: dict[str, int] = {}
    offset = 0
    for number, raw in enumerate(lines, start=1):
        try:
            text = decode_body(raw)
        except CorpusError as e:
            bad = offset + e.details["byte_offset"]
            raise CorpusError(
                f"invalid UTF-8 at byte offset {bad}", line=number, byte_offset=bad
            ) from e
        offset += len(raw)
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON: {e.msg}", line=number) from e
        doc = parse_document(record, line=number)
        if doc.id in seen:
            raise CorpusError(f"duplicate id '{doc.id}'", line=number, field="id")
        seen.add(doc.id)
        documents.append(doc)
        line_of[doc.id] = number

    if resolve_parents:
        for doc in documents:
            if doc.parent_id is not None and doc.parent_id not in seen:
                raise CorpusError(
                    f"parent_id '{doc.parent_id}' of '{doc.id}' does not exist",
                    line=line_of[doc.id],
                    field="parent_id",
                )
    logger.debug(f"Parsed {len(documents)} documents")
    return documents


def document_record(doc: TweetDocument) -> dict[str, Any]:
    """Plain dict in canonical field order, parent_id omitted when absent."""
    data = doc.model_dump(mode="json")
    record = {name: data[name] for name in _FIELD_ORDER if name in data}
    if record.get("parent_id") is None:
        record.pop("parent_id", None)
    return record


def serialize_document(doc: TweetDocument) -> bytes:
    """Render one document as a canonical JSON line (with trailing newline)."""
    line = json.dumps(document_record(doc), ensure_ascii=False, separators=(",", ":"))
    return (line + "\n").encode("utf-8")


def serialize_corpus(documents: Iterable[TweetDocument]) -> bytes:
    return b"".join(serialize_document(doc) for doc in documents)


def group_threads(documents: Sequence[TweetDocument]) -> list[Thread]:
    """
    Group documents into threads.

    Roots keep their corpus order and comments follow in corpus order. Threading
    is one level deep: a document whose parent is absent from the collection, or
    is itself a comment, forms a thread of its own.
    """
    ids = {doc.id for doc in documents}
    top_level = {doc.id for doc in documents if doc.parent_id is None or doc.parent_id not in ids}
    comments: dict[str, list[TweetDocument]] = {}
    roots: list[TweetDocument] = []
    for doc in documents:
        parent = doc.parent_id
        if parent is not None and doc.id not in top_level and parent in top_level:
            comments.setdefault(parent, []).append(doc)
        else:
            roots.append(doc)
    return [Thread(root=root, comments=tuple(comments.get(root.id, ()))) for root in roots]


def flatten_threads(threads: Iterable[Thread], order: Sequence[str]) -> list[TweetDocument]:
    """Put thread documents back into the given id order."""
    by_id = {doc.id: doc for thread in threads for doc in thread.documents}
    return [by_id[doc_id] for doc_id in order]


def load_corpus(path: str | Path) -> list[TweetDocument]:
    """Read and validate a corpus file."""
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), {"reason": "File does not exist"})
    with open(path, "rb") as f:
        documents = parse_corpus(f)
    logger.info(f"Loaded {len(documents)} documents from {path}")
    return documents


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), {"reason": "File does not exist"})
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise AssetValidationError(str(path), "<json>", f"Invalid JSON format: {e}") from e


def _validate_asset(model: type[pydantic.BaseModel], data: Any, path: str | Path) -> Any:
    try:
        return model.model_validate(data)
    except pydantic.ValidationError as e:
        field, reason = describe_validation_error(e)
        raise AssetValidationError(str(path), field, reason) from e


def load_ruleset(path: str | Path) -> RuleSet:
    """Load a {"rules": [...]} file."""
    data = _read_json(path)
    try:
        return RuleSet.model_validate(data)
    except pydantic.ValidationError as e:
        field, reason = describe_validation_error(e)
        raise RuleValidationError(reason, {"path": str(path), "field": field}) from e


def load_lexicon(path: str | Path) -> ValenceLexicon:
    """Load a {"pairs": {...}, "negators": [...]} valence lexicon."""
    return _validate_asset(ValenceLexicon, _read_json(path), path)


def load_keyword_lexicons(path: str | Path) -> KeywordLexicons:
    """Load a {"pro": [...], "anti": [...]} keyword file."""
    return _validate_asset(KeywordLexicons, _read_json(path), path)


def load_candidates(path: str | Path) -> list[ResponseCandidate]:
    """Load reply candidates from JSON Lines."""
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), {"reason": "File does not exist"})
    candidates: list[ResponseCandidate] = []
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise AssetValidationError(str(path), f"line {number}", e.msg) from e
            try:
                candidates.append(ResponseCandidate.model_validate(record))
            except pydantic.ValidationError as e:
                field, reason = describe_validation_error(e)
                raise AssetValidationError(str(path), f"line {number}: {field}", reason) from e
    if not candidates:
        raise AssetValidationError(str(path), "<file>", "no candidates")
    return candidates


class FeedStore:
    """
    In-memory feed for the origin server.

    Lines are serialized once at construction so every response for a fixed
    corpus is byte-identical.
    """

    def __init__(self, documents: Sequence[TweetDocument]):
        self._documents = list(documents)
        self._lines = {doc.id: serialize_document(doc) for doc in self._documents}
        self._feed = b"".join(self._lines.values())
        logger.info(f"Feed ready with {len(self._documents)} documents")

    def __len__(self) -> int:
        return len(self._documents)

    @property
    def documents(self) -> list[TweetDocument]:
        return list(self._documents)

    def feed(self) -> bytes:
        return self._feed

    def tweet(self, tweet_id: str) -> bytes:
        """
        Raises:
            DocumentNotFoundError: If the id is unknown
        """
        try:
            return self._lines[tweet_id]
        except KeyError:
            raise DocumentNotFoundError(tweet_id) from None
