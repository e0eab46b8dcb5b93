"""
Response recommendation service.

Suggests a ready-made reply to a tweet: texts are described by binary
keyword-existence features, and the candidate closest to the input in
Euclidean distance wins, after a small seeded jitter that breaks ties and
lets near-equal candidates alternate.
"""

import logging
from collections.abc import Sequence

import numpy as np

from app.core.exceptions import ConfigurationError, ValidationError
from app.models.recommend import (
    CandidateScore,
    FeatureVector,
    KeywordLexicons,
    Recommendation,
    ResponseCandidate,
)
from app.utils.tokenizer import tokenize

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.001


def _folded_tokens(text: str) -> list[str]:
    return [t.text.casefold() for t in tokenize(text)]


def _contains(haystack: list[str], needle: list[str]) -> bool:
    if not needle:
        return False
    width = len(needle)
    return any(haystack[i : i + width] == needle for i in range(len(haystack) - width + 1))


def extract_features(text: str, lexicons: KeywordLexicons) -> FeatureVector:
    """
    One dimension per keyword (pro keywords first, then anti), set when the
    keyword occurs in the case-folded text as a contiguous token run.

    Raises:
        ConfigurationError: If either keyword list is empty
    """
    if not lexicons.pro or not lexicons.anti:
        raise ConfigurationError("keyword lists must not be empty")
    tokens = _folded_tokens(text)
    return FeatureVector(
        dims=tuple(int(_contains(tokens, _folded_tokens(kw))) for kw in lexicons.keywords)
    )


def distance(a: FeatureVector, b: FeatureVector) -> float:
    """
    Euclidean distance between two feature vectors.

    Raises:
        ValidationError: If the vectors differ in length
    """
    if len(a) != len(b):
        raise ValidationError("b", len(b), f"length must equal {len(a)}")
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def nearest(
    target: FeatureVector,
    vectors: Sequence[FeatureVector],
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
) -> tuple[int, list[float], list[float]]:
    """
    Jittered nearest neighbour.

    Jitter u_i is drawn uniformly from [0, epsilon) in vector order by a generator
    seeded with seed; the lowest distance + u_i wins, earliest on ties.

    Returns:
        Tuple[int, List[float], List[float]]: winning index, distances, jitters
    """
    if not vectors:
        raise ValidationError("candidates", [], "must not be empty")
    if epsilon < 0:
        raise ValidationError("epsilon", epsilon, "must be >= 0")
    distances = np.array([distance(target, v) for v in vectors])
    if epsilon > 0:
        jitter = np.random.default_rng(seed).uniform(0.0, epsilon, size=len(vectors))
    else:
        jitter = np.zeros(len(vectors))
    index = int(np.argmin(distances + jitter))
    return index, distances.tolist(), jitter.tolist()


def recommend(
    text: str,
    candidates: Sequence[ResponseCandidate],
    lexicons: KeywordLexicons,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
) -> Recommendation:
    """
    Pick the reply closest to the input text.

    Args:
        text: Tweet the user is tempted to answer
        candidates: Ready-made replies
        lexicons: Pro and anti keywords defining the feature space
        epsilon: Jitter amplitude
        seed: Jitter seed

    Returns:
        Recommendation: Chosen candidate and the full score table
    """
    target = extract_features(text, lexicons)
    vectors = [extract_features(c.text, lexicons) for c in candidates]
    index, distances, jitters = nearest(target, vectors, epsilon, seed)
    scores = tuple(
        CandidateScore(text=c.text, distance=d, jitter=u, score=d + u)
        for c, d, u in zip(candidates, distances, jitters, strict=True)
    )
    logger.debug(f"Recommended candidate {index} of {len(candidates)}")
    return Recommendation(chosen=candidates[index], index=index, scores=scores)
