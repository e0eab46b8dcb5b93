"""
Order-1 Markov transition model over body tokens.
"""

from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.types import Rational


class MarkovModel(BaseModel):
    """
    Bigram transition counts.

    Attributes:
        order: Always 1
        vocab: Every case-folded token seen in training
        counts: prev -> (next -> positive count)
        smoothing: Add-k constant
    """

    model_config = ConfigDict(frozen=True)

    order: int = Field(1, ge=1, le=1)
    vocab: frozenset[str] = Field(default_factory=frozenset)
    counts: dict[str, dict[str, int]] = Field(default_factory=dict)
    smoothing: Rational = Fraction(0)

    @model_validator(mode="after")
    def counts_within_vocab(self) -> "MarkovModel":
        if self.smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        for prev, row in self.counts.items():
            if prev not in self.vocab:
                raise ValueError(f"'{prev}' is not in the vocabulary")
            for nxt, count in row.items():
                if nxt not in self.vocab:
                    raise ValueError(f"'{nxt}' is not in the vocabulary")
                if count <= 0:
                    raise ValueError(f"count for '{prev}' -> '{nxt}' must be positive")
        return self

    def total(self, prev: str) -> int:
        return sum(self.counts.get(prev, {}).values())
