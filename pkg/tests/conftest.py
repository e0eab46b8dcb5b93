"""
Shared fixtures for the test suite.
"""

import pytest

from app.core.config import DATA_DIR, get_settings
from app.models.corpus import Metrics, TweetDocument
from app.utils.data_loader import load_corpus, load_lexicon, load_ruleset


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep settings, reports and audit files of every test inside tmp_path."""
    monkeypatch.setenv("MISPERCEPTION_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("MISPERCEPTION_OUTPUT_DIR", str(tmp_path / "reports"))
    monkeypatch.setenv("MISPERCEPTION_AUDIT_PATH", str(tmp_path / "audit.jsonl"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def make_doc():
    """Factory for documents with sensible defaults."""

    def _make(
        body: str = "Vaccines work.",
        id: str = "t1",
        hashtags: tuple[str, ...] = (),
        metrics: tuple[int, int, int] = (1, 2, 3),
        parent_id: str | None = None,
        author: str = "@a",
        verified: bool = False,
    ) -> TweetDocument:
        replies, retweets, likes = metrics
        return TweetDocument(
            id=id,
            author=author,
            verified=verified,
            body=body,
            hashtags=hashtags,
            metrics=Metrics(replies=replies, retweets=retweets, likes=likes),
            parent_id=parent_id,
        )

    return _make


@pytest.fixture
def bundled_corpus():
    """The sample corpus shipped with the package."""
    return load_corpus(DATA_DIR / "corpus.jsonl")


@pytest.fixture
def study_rules():
    return load_ruleset(DATA_DIR / "rules" / "study.json")


@pytest.fixture
def pilot_rules():
    return load_ruleset(DATA_DIR / "rules" / "pilot.json")


@pytest.fixture
def lexicon():
    return load_lexicon(DATA_DIR / "lexicon.json")
