"""
Pydantic models for end-to-end scenarios.
"""

from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from app.core.config import Settings
from app.core.exceptions import AssetValidationError, MisperceptionError
from app.models.corpus import TweetDocument
from app.models.detection import DetectionReport, ValenceLexicon
from app.models.recommend import KeywordLexicons, Recommendation, ResponseCandidate
from app.models.rules import Edit, RuleSet
from app.utils.data_loader import (
    load_candidates,
    load_corpus,
    load_keyword_lexicons,
    load_lexicon,
    load_ruleset,
)


class ScenarioName(str, Enum):
    PILOT = "pilot"
    STUDY = "study"


# Bundled sample document each scenario perturbs.
SAMPLE_IDS = {ScenarioName.PILOT: "pilot-1", ScenarioName.STUDY: "study-1"}

# How the survey grouped participants; carried in reports as documentation only.
PARTICIPANT_GROUPING = {
    ScenarioName.PILOT: (
        "Participants saw the authentic post ('off') or the rewritten one ('on') and were "
        "asked how they would respond.",
    ),
    ScenarioName.STUDY: (
        "Participants were grouped by attitude certainty (how sure they are of their view "
        "on vaccination) and by issue importance (how much the topic matters to them).",
        "Each group saw the authentic or the rewritten post and chose an opinion expression "
        "strategy (own tweet, suggested tweet, silence) and action (retweet, like, block, "
        "follow, ignore).",
    ),
}


class ScenarioAssets(BaseModel):
    """Every asset of a scenario, loaded and validated."""

    model_config = ConfigDict(frozen=True)

    corpus: tuple[TweetDocument, ...]
    rules: RuleSet
    lexicon: ValenceLexicon
    keywords: KeywordLexicons
    candidates: tuple[ResponseCandidate, ...]


class ScenarioConfig(BaseModel):
    """
    Files and knobs a scenario runs with.

    Attributes:
        corpus_path: JSON Lines corpus holding the sample document
        rules_path: Ruleset applied to the sample
        lexicon_path: Valence lexicon for the detector
        keywords_path: Keyword lexicons for the recommender
        candidates_path: Reply candidates for the recommender
        seed: Recommender jitter seed
        epsilon: Recommender jitter amplitude
        output_dir: Directory receiving the report files
    """

    model_config = ConfigDict(frozen=True)

    corpus_path: Path
    rules_path: Path
    lexicon_path: Path
    keywords_path: Path
    candidates_path: Path
    seed: int = 0
    epsilon: float = Field(0.001, ge=0.0)
    output_dir: Path = Path("reports")

    @classmethod
    def from_settings(
        cls,
        name: ScenarioName,
        settings: Settings,
        seed: int | None = None,
        output_dir: Path | None = None,
    ) -> "ScenarioConfig":
        rules = (
            settings.pilot_rules_path if name is ScenarioName.PILOT else settings.study_rules_path
        )
        return cls(
            corpus_path=Path(settings.corpus_file_path),
            rules_path=Path(rules),
            lexicon_path=Path(settings.lexicon_path),
            keywords_path=Path(settings.keywords_path),
            candidates_path=Path(settings.candidates_path),
            seed=settings.seed if seed is None else seed,
            epsilon=settings.epsilon,
            output_dir=output_dir or Path(settings.output_dir),
        )

    def validate_assets(self) -> ScenarioAssets:
        """
        Load every referenced file.

        Raises:
            AssetValidationError: Naming the file and field that failed
        """
        loaders: dict[str, tuple[Path, Callable[[Path], Any]]] = {
            "corpus": (self.corpus_path, load_corpus),
            "rules": (self.rules_path, load_ruleset),
            "lexicon": (self.lexicon_path, load_lexicon),
            "keywords": (self.keywords_path, load_keyword_lexicons),
            "candidates": (self.candidates_path, load_candidates),
        }
        loaded: dict[str, Any] = {}
        for name, (path, loader) in loaders.items():
            try:
                loaded[name] = loader(path)
            except AssetValidationError:
                raise
            except MisperceptionError as e:
                field = str(e.details.get("field") or e.details.get("line") or f"{name}_path")
                raise AssetValidationError(str(path), field, e.message) from e
        return ScenarioAssets(**loaded)


class ScenarioReport(BaseModel):
    """
    Everything a scenario run produced.

    round_trip is True when replaying both the ground-truth edits and the
    detector's recovered edits on the original yields the delivered document.
    """

    model_config = ConfigDict(frozen=True)

    scenario: ScenarioName
    seed: int
    wire: bool
    original: TweetDocument
    perturbed: TweetDocument
    ground_truth: tuple[Edit, ...]
    detection: DetectionReport
    suggestion: Recommendation
    round_trip: bool
    participant_grouping: tuple[str, ...] = ()
