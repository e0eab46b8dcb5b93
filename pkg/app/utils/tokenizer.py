"""
Tweet body tokenizer.

Tokens partition the non-whitespace content of a body. Offsets are byte
offsets into the UTF-8 encoding, so the body can be rebuilt exactly from
token spans plus the skipped gaps.
"""

import re

from app.core.exceptions import CorpusError
from app.models.corpus import Token, TokenKind

# Alternation order matters: hashtags and mentions claim their sigil before
# the single-character punctuation fallback does.
_TOKEN_RE = re.compile(
    r"(?P<hashtag>\#[^\W_]+)"
    r"|(?P<mention>@[\w-]+)"
    r"|(?P<number>\d+)"
    r"|(?P<word>[^\W\d_]+(?:['’][^\W\d_]+)*)"
    r"|(?P<punctuation>\S)"
)


def decode_body(raw: bytes) -> str:
    """
    Decode a UTF-8 body.

    Raises:
        CorpusError: With the byte offset of the first invalid sequence
    """
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CorpusError(
            f"invalid UTF-8 at byte offset {e.start}", byte_offset=e.start
        ) from e


def tokenize(body: str) -> list[Token]:
    """
    Split a body into word, hashtag, mention, number and punctuation tokens.

    Args:
        body: Tweet text

    Returns:
        List[Token]: Tokens in body order with byte offsets
    """
    tokens: list[Token] = []
    byte_pos = 0
    char_pos = 0
    for m in _TOKEN_RE.finditer(body):
        byte_pos += len(body[char_pos : m.start()].encode("utf-8"))
        text = m.group()
        width = len(text.encode("utf-8"))
        tokens.append(
            Token(
                text=text,
                byte_start=byte_pos,
                byte_end=byte_pos + width,
                kind=TokenKind(m.lastgroup),
            )
        )
        byte_pos += width
        char_pos = m.end()
    return tokens


def rebuild(body: str, tokens: list[Token]) -> str:
    """Reassemble a body from its tokens and the gaps between them."""
    raw = body.encode("utf-8")
    parts: list[bytes] = []
    cursor = 0
    for token in tokens:
        parts.append(raw[cursor : token.byte_start])
        parts.append(token.text.encode("utf-8"))
        cursor = token.byte_end
    parts.append(raw[cursor:])
    return b"".join(parts).decode("utf-8")
