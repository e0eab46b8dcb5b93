"""
Pydantic models for the response recommender.
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class Stance(str, Enum):
    PRO = "pro"
    ANTI = "anti"


class Rhetoric(str, Enum):
    """Persuasion principle a suggested reply relies on."""

    AUTHORITY = "authority"
    SOCIAL_PROOF = "social_proof"
    LABELING = "labeling"


class ResponseCandidate(BaseModel):
    """A ready-made reply."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    text: str = Field(..., min_length=1)
    stance: Stance
    rhetoric: Rhetoric


class KeywordLexicons(BaseModel):
    """Pro and anti keywords; feature dimensions follow this order."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pro: tuple[str, ...]
    anti: tuple[str, ...]

    @property
    def keywords(self) -> tuple[str, ...]:
        return self.pro + self.anti


class FeatureVector(BaseModel):
    """Binary keyword-existence features."""

    model_config = ConfigDict(frozen=True)

    dims: tuple[int, ...]

    @field_validator("dims")
    @classmethod
    def binary(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(d not in (0, 1) for d in v):
            raise ValueError("feature entries must be 0 or 1")
        return v

    def __len__(self) -> int:
        return len(self.dims)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.dims, dtype=float)


class CandidateScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    distance: float
    jitter: float
    score: float


class Recommendation(BaseModel):
    """The chosen reply together with every candidate's score, for audit."""

    model_config = ConfigDict(frozen=True)

    chosen: ResponseCandidate
    index: int
    scores: tuple[CandidateScore, ...]
