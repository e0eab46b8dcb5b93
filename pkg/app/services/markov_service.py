"""
Markov replacement service.

Trains an order-1 transition model over corpus bodies and uses it to pick the
replacement for a "&markov" swap: the candidate most likely to follow the
token that precedes the match.
"""

import json
import logging
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

import pydantic

from app.core.exceptions import (
    AssetValidationError,
    ConfigurationError,
    DataLoadError,
    TrainingError,
    ValidationError,
)
from app.models.corpus import MATCHABLE_KINDS, TweetDocument
from app.models.markov import MarkovModel
from app.models.types import fraction_to_json, to_fraction
from app.utils.tokenizer import tokenize

logger = logging.getLogger(__name__)


def _chain(body: str) -> list[str]:
    return [t.text.casefold() for t in tokenize(body) if t.kind in MATCHABLE_KINDS]


def train(corpus: Sequence[TweetDocument], smoothing: Fraction | int | str = 0) -> MarkovModel:
    """
    Count consecutive token bigrams of every body.

    Args:
        corpus: Documents to learn from
        smoothing: Add-k constant

    Returns:
        MarkovModel: Trained model

    Raises:
        TrainingError: If the corpus is empty or has no tokens
        ValidationError: If smoothing is not a non-negative rational
    """
    if not corpus:
        raise TrainingError("corpus is empty")
    try:
        k = to_fraction(smoothing)
    except ValueError as e:
        raise ValidationError("smoothing", smoothing, str(e)) from e
    if k < 0:
        raise ValidationError("smoothing", smoothing, "must be >= 0")
    vocab: set[str] = set()
    counts: dict[str, dict[str, int]] = {}
    for doc in corpus:
        chain = _chain(doc.body)
        vocab.update(chain)
        for prev, nxt in zip(chain, chain[1:], strict=False):
            row = counts.setdefault(prev, {})
            row[nxt] = row.get(nxt, 0) + 1
    if not vocab:
        raise TrainingError("corpus has no tokens")

    ordered = {prev: dict(sorted(row.items())) for prev, row in sorted(counts.items())}
    model = MarkovModel(vocab=frozenset(vocab), counts=ordered, smoothing=k)
    logger.info(f"Trained Markov model on {len(corpus)} documents, {len(vocab)} tokens")
    return model


def transition_prob(model: MarkovModel, prev: str, next_token: str) -> Fraction:
    """(count(prev, next) + k) / (total(prev) + k * |vocab|), 0 when the denominator is 0."""
    prev, next_token = prev.casefold(), next_token.casefold()
    k = model.smoothing
    denominator = model.total(prev) + k * len(model.vocab)
    if denominator == 0:
        return Fraction(0)
    count = model.counts.get(prev, {}).get(next_token, 0)
    return Fraction(count + k) / denominator


def choose_replacement(
    model: MarkovModel, prev: str, candidates: Sequence[str], seed: int | None = None
) -> str:
    """
    Pick the most probable follower of prev among candidates.

    Ties go to the lexicographically smallest candidate. The seed is accepted for
    interface stability; the choice is deterministic.

    Raises:
        ValidationError: If candidates is empty
    """
    if not candidates:
        raise ValidationError("candidates", list(candidates), "must not be empty")
    return min(candidates, key=lambda c: (-transition_prob(model, prev, c), c))


class MarkovReplacer:
    """Replacement hook backed by a trained model."""

    def __init__(self, model: MarkovModel):
        self.model = model

    def __call__(self, prev: str, matched: str, candidates: Sequence[str] | None) -> str:
        pool = list(candidates) if candidates else sorted(self.model.vocab - {matched.casefold()})
        if not pool:
            raise ConfigurationError("Markov model has no replacement candidates")
        choice = choose_replacement(self.model, prev, pool)
        logger.debug(f"Markov replacement for '{matched}' after '{prev}': '{choice}'")
        return choice


def model_to_json(model: MarkovModel) -> dict:
    return {
        "order": model.order,
        "smoothing": fraction_to_json(model.smoothing),
        "vocab": sorted(model.vocab),
        "counts": model.counts,
    }


def save_model(model: MarkovModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_json(model), f, indent=2, sort_keys=True)
        f.write("\n")


def load_model(path: str | Path) -> MarkovModel:
    """
    Read a persisted model; the vocabulary is derived from the counts when absent.
    """
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), {"reason": "File does not exist"})
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise AssetValidationError(str(path), "<json>", f"Invalid JSON format: {e}") from e
    if "vocab" not in data:
        counts = data.get("counts", {})
        data["vocab"] = sorted(set(counts) | {n for row in counts.values() for n in row})
    try:
        return MarkovModel.model_validate(data)
    except pydantic.ValidationError as e:
        raise AssetValidationError(str(path), "model", str(e.errors()[0]["msg"])) from e
