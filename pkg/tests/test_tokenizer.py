"""
Unit tests for the tweet body tokenizer.
"""

import random

import pytest

from app.core.exceptions import CorpusError
from app.models.corpus import TokenKind
from app.utils.tokenizer import decode_body, rebuild, tokenize
from tests.generators import random_body


def pairs(body):
    return [(t.kind, t.text) for t in tokenize(body)]


class TestTokenize:
    """Test suite for tokenize()."""

    def test_words_contraction_punctuation_and_hashtag(self):
        """Test a contraction stays one word and the hashtag keeps its sigil."""
        assert pairs("Vaccines don't work! #antivax") == [
            (TokenKind.WORD, "Vaccines"),
            (TokenKind.WORD, "don't"),
            (TokenKind.WORD, "work"),
            (TokenKind.PUNCTUATION, "!"),
            (TokenKind.HASHTAG, "#antivax"),
        ]

    def test_empty_body(self):
        """Test the empty body has no tokens."""
        assert tokenize("") == []

    def test_short_sentence_with_hashtag(self):
        """Test a short sentence ending in a hashtag."""
        assert pairs("No link. #provax") == [
            (TokenKind.WORD, "No"),
            (TokenKind.WORD, "link"),
            (TokenKind.PUNCTUATION, "."),
            (TokenKind.HASHTAG, "#provax"),
        ]

    def test_mentions_and_numbers(self):
        """Test mentions and digit runs get their own kinds."""
        assert pairs("@Vaccines-Truth said 548 likes") == [
            (TokenKind.MENTION, "@Vaccines-Truth"),
            (TokenKind.WORD, "said"),
            (TokenKind.NUMBER, "548"),
            (TokenKind.WORD, "likes"),
        ]

    def test_lone_sigil_is_punctuation(self):
        """Test a '#' not followed by letters is punctuation."""
        assert pairs("# 1") == [(TokenKind.PUNCTUATION, "#"), (TokenKind.NUMBER, "1")]

    def test_byte_offsets_for_multibyte_text(self):
        """Test offsets count UTF-8 bytes, not characters."""
        tokens = tokenize("café is naïve")
        assert [(t.byte_start, t.byte_end) for t in tokens] == [(0, 5), (6, 8), (9, 15)]

    def test_tokens_partition_non_whitespace(self):
        """Test the concatenated tokens equal the body without whitespace."""
        rng = random.Random(7)
        for _ in range(300):
            body = random_body(rng)
            joined = "".join(t.text for t in tokenize(body))
            assert joined == "".join(body.split())

    def test_rebuild_is_exact(self):
        """Test a body is rebuilt byte-for-byte from its tokens."""
        rng = random.Random(11)
        for _ in range(300):
            body = random_body(rng)
            assert rebuild(body, tokenize(body)) == body


class TestDecodeBody:
    """Test suite for decode_body()."""

    def test_valid_utf8(self):
        """Test valid UTF-8 decodes unchanged."""
        assert decode_body("naïve".encode()) == "naïve"

    def test_invalid_utf8_reports_offset(self):
        """Test invalid bytes raise CorpusError with their offset."""
        with pytest.raises(CorpusError) as exc_info:
            decode_body(b"abc\xffdef")

        assert exc_info.value.details["byte_offset"] == 3
        assert "byte offset 3" in exc_info.value.message
