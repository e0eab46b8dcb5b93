"""
Pydantic models for perturbation rules and the edits they produce.

A RuleSet file is a JSON object {"rules": [...]} whose entries carry exactly
the PerturbationRule fields; enums are lowercase snake-case strings.
"""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.corpus import Metrics
from app.models.types import Rational

MARKOV_REPLACEMENT = "&markov"


class RuleKind(str, Enum):
    """Enumeration of supported manipulations."""

    WORD_SWAP = "word_swap"
    WORD_REMOVE = "word_remove"
    WORD_INSERT = "word_insert"
    HASHTAG_SWAP = "hashtag_swap"
    METRIC_SCALE = "metric_scale"


class Scope(str, Enum):
    """Which occurrences a rule may touch."""

    ALL = "all"
    FIRST = "first"
    COMMENTS_ONLY = "comments_only"


class Side(str, Enum):
    BEFORE = "before"
    AFTER = "after"


class RulePredicate(BaseModel):
    """Conditions on the thread's root post that gate a rule."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    hashtag_any: tuple[str, ...] | None = None
    author_is: str | None = None

    @model_validator(mode="after")
    def at_least_one_condition(self) -> "RulePredicate":
        if self.hashtag_any is None and self.author_is is None:
            raise ValueError("predicate needs hashtag_any or author_is")
        return self


# Fields each kind requires; every other optional field must be absent.
_REQUIRED_FIELDS: dict[RuleKind, frozenset[str]] = {
    RuleKind.WORD_SWAP: frozenset({"match", "replacement"}),
    RuleKind.WORD_REMOVE: frozenset({"match"}),
    RuleKind.WORD_INSERT: frozenset({"insert_token", "anchor", "side"}),
    RuleKind.HASHTAG_SWAP: frozenset({"match", "replacement"}),
    RuleKind.METRIC_SCALE: frozenset({"factor"}),
}
_KIND_SPECIFIC = frozenset({"match", "replacement", "insert_token", "anchor", "side", "factor"})


class PerturbationRule(BaseModel):
    """
    Declarative description of one manipulation.

    Attributes:
        kind: Manipulation type
        match: Target token (word_swap, word_remove, hashtag_swap)
        replacement: Replacement token, or "&markov" to ask the Markov replacer (word_swap)
        insert_token: Token to insert (word_insert)
        anchor: Token beside which the insertion happens (word_insert)
        side: Whether to insert before or after the anchor (word_insert)
        factor: Positive scale factor for engagement metrics (metric_scale)
        scope: all occurrences, only the first, or only occurrences in the comments section
        case_sensitive: Whether matching is exact; case-insensitive swaps copy the matched casing
        predicate: Optional gate on the root post
        candidates: Optional replacement vocabulary for "&markov" swaps
    """

    model_config = ConfigDict(frozen=True, extra="forbid", use_enum_values=False)

    kind: RuleKind
    match: str | None = None
    replacement: str | None = None
    insert_token: str | None = None
    anchor: str | None = None
    side: Side | None = None
    factor: Rational | None = None
    scope: Scope = Scope.ALL
    case_sensitive: bool = True
    predicate: RulePredicate | None = None
    candidates: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def kind_specific_fields(self) -> "PerturbationRule":
        required = _REQUIRED_FIELDS[self.kind]
        for name in sorted(_KIND_SPECIFIC):
            present = getattr(self, name) is not None
            if name in required and not present:
                raise ValueError(f"{self.kind.value} requires '{name}'")
            if name not in required and present:
                raise ValueError(f"{self.kind.value} does not accept '{name}'")
        for name in ("match", "replacement", "insert_token", "anchor"):
            value = getattr(self, name)
            if value is not None and (not value or any(ch.isspace() for ch in value)):
                raise ValueError(f"'{name}' must be a single non-empty token")
        if self.factor is not None and self.factor <= 0:
            raise ValueError("factor must be > 0")
        if self.kind is RuleKind.HASHTAG_SWAP:
            if not (self.match.startswith("#") and self.replacement.startswith("#")):
                raise ValueError("hashtag_swap match and replacement must start with '#'")
        if self.candidates is not None:
            if self.replacement != MARKOV_REPLACEMENT:
                raise ValueError("'candidates' is only valid with the &markov replacement")
            if not self.candidates:
                raise ValueError("'candidates' must not be empty")
        return self

    @property
    def target(self) -> str | None:
        """The token find_matches looks for."""
        if self.kind is RuleKind.WORD_INSERT:
            return self.anchor
        return self.match

    @property
    def uses_markov(self) -> bool:
        return self.kind is RuleKind.WORD_SWAP and self.replacement == MARKOV_REPLACEMENT


class RuleSet(BaseModel):
    """An ordered list of rules, applied sequentially."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rules: tuple[PerturbationRule, ...] = ()


class EditField(str, Enum):
    """The part of a document an edit touches."""

    BODY = "body"
    HASHTAGS = "hashtags"
    METRICS = "metrics"


class EditOp(str, Enum):
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"
    HASHTAG_SWAP = "hashtag_swap"
    METRIC_SCALE = "metric_scale"
    RESPACE = "respace"


class Location(BaseModel):
    """Where a match or edit lives: the thread's root post or one of its comments."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["root", "comment"]
    document_id: str

    @classmethod
    def root(cls, document_id: str) -> "Location":
        return cls(kind="root", document_id=document_id)

    @classmethod
    def comment(cls, document_id: str) -> "Location":
        return cls(kind="comment", document_id=document_id)


class Match(BaseModel):
    """An occurrence of a rule target found by find_matches."""

    model_config = ConfigDict(frozen=True)

    location: Location
    field: EditField = EditField.BODY
    token_index: int = Field(..., ge=0)
    token_text: str


class BodyPatch(BaseModel):
    """Exact byte patch against the body as it stands when the edit is applied."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    byte_start: int = Field(..., ge=0)
    byte_end: int = Field(..., ge=0)
    before: str
    after: str


class Edit(BaseModel):
    """
    One recorded change.

    For body edits token_index addresses the token list of the body the edit applies
    to (the inserted token's position for inserts) and span carries the byte patch.
    For hashtag-list edits token_index is the list position at the time of application.
    A body edit without a span changes no bytes itself; a sibling edit's patch covers it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    op: EditOp
    location: Location
    field: EditField = EditField.BODY
    token_index: int | None = None
    original: str | Metrics
    replacement: str | Metrics
    span: BodyPatch | None = None

    @field_validator("original", "replacement", mode="before")
    @classmethod
    def coerce_metrics(cls, v: object) -> object:
        if isinstance(v, dict):
            return Metrics.model_validate(v)
        return v


class EditLog(BaseModel):
    """Ordered list of edits; replaying it on the original reproduces the perturbed document."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    edits: tuple[Edit, ...] = ()

    def __len__(self) -> int:
        return len(self.edits)

    def __add__(self, other: "EditLog") -> "EditLog":
        return EditLog(edits=self.edits + other.edits)

    def for_document(self, document_id: str) -> tuple[Edit, ...]:
        return tuple(e for e in self.edits if e.location.document_id == document_id)
