"""
Pydantic models for the integrity detector.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.rules import Edit
from app.models.types import Rational


class ValenceLexicon(BaseModel):
    """
    Opposite-valence token pairs and negators.

    Attributes:
        pairs: Symmetric map token -> opposite token, e.g. "wrong" <-> "right"
        negators: Tokens whose insertion or deletion flips a statement, e.g. "not"
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    pairs: dict[str, str] = Field(default_factory=dict)
    negators: frozenset[str] = Field(default_factory=frozenset)

    @model_validator(mode="before")
    @classmethod
    def fold_case(cls, data: object) -> object:
        if isinstance(data, dict):
            data = dict(data)
            data["pairs"] = {
                k.casefold(): v.casefold() for k, v in (data.get("pairs") or {}).items()
            }
            data["negators"] = frozenset(n.casefold() for n in data.get("negators") or ())
        return data

    @model_validator(mode="after")
    def pairs_are_symmetric(self) -> "ValenceLexicon":
        for token, opposite in self.pairs.items():
            if self.pairs.get(opposite) != token:
                raise ValueError(f"pair '{token}' -> '{opposite}' has no symmetric entry")
        return self

    def opposite(self, token: str) -> str | None:
        folded = token.casefold()
        if folded in self.pairs:
            return self.pairs[folded]
        if folded.startswith("#") and folded[1:] in self.pairs:
            return "#" + self.pairs[folded[1:]]
        return None

    def is_pair(self, a: str, b: str) -> bool:
        return self.opposite(a) == b.casefold()

    def is_negator(self, token: str) -> bool:
        return token.casefold() in self.negators


class AlignKind(str, Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


class AlignOp(BaseModel):
    """
    One step of a token alignment.

    original_index / delivered_index point at the consumed tokens; an insert has no
    original token and a delete has no delivered token.
    """

    model_config = ConfigDict(frozen=True)

    kind: AlignKind
    original_index: int | None = None
    delivered_index: int | None = None
    original: str | None = None
    delivered: str | None = None


class DetectionReport(BaseModel):
    """
    Result of comparing an authentic document with the rendering a reader saw.

    severity is 0 exactly when nothing was edited.
    """

    model_config = ConfigDict(frozen=True)

    document_id: str
    edits: tuple[Edit, ...] = ()
    metric_factor: Rational | None = None
    hashtag_flips: tuple[tuple[str, str], ...] = ()
    valence_inversion: bool = False
    severity: float = Field(0.0, ge=0.0, le=1.0)

    @property
    def clean(self) -> bool:
        return self.severity == 0.0
