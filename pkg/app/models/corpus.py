"""
Pydantic models for tweet documents.

Documents, metrics and tokens are immutable once constructed, so they can be
shared freely between the engine, the servers and concurrent requests.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, StrictBool, StrictInt, field_validator


class TokenKind(str, Enum):
    """Enumeration of token classes produced by the tokenizer."""

    WORD = "word"
    HASHTAG = "hashtag"
    MENTION = "mention"
    NUMBER = "number"
    PUNCTUATION = "punctuation"


MATCHABLE_KINDS = frozenset({TokenKind.WORD, TokenKind.HASHTAG, TokenKind.NUMBER})


class Metrics(BaseModel):
    """Engagement counters displayed with a tweet."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    replies: StrictInt = Field(..., ge=0, description="Number of comment tweets")
    retweets: StrictInt = Field(..., ge=0, description="Number of retweets")
    likes: StrictInt = Field(..., ge=0, description="Number of likes")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.replies, self.retweets, self.likes)


class TweetDocument(BaseModel):
    """
    One tweet as delivered to a reader.

    Attributes:
        id: Unique identifier within a corpus
        author: Account handle, e.g. "@Vaccines-Truth"
        verified: Whether the account shows the verification badge
        body: Tweet text
        hashtags: Hashtags shown with the tweet, in display order
        metrics: Reply, retweet and like counts
        parent_id: Id of the tweet this one replies to, if it is a comment
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., min_length=1, description="Unique document id", examples=["t1"])
    author: str = Field(..., description="Account handle", examples=["@Vaccines-Truth"])
    verified: StrictBool = Field(..., description="Verification badge shown")
    body: str = Field(..., description="Tweet text")
    hashtags: tuple[str, ...] = Field(default=(), description="Hashtags in display order")
    metrics: Metrics
    parent_id: str | None = Field(None, description="Parent document id for comments")

    @field_validator("hashtags")
    @classmethod
    def hashtags_are_well_formed(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        for tag in v:
            if not tag.startswith("#"):
                raise ValueError(f"hashtag '{tag}' must start with '#'")
            if any(ch.isspace() for ch in tag):
                raise ValueError(f"hashtag '{tag}' must not contain whitespace")
        return v

    @property
    def is_comment(self) -> bool:
        return self.parent_id is not None


class Token(BaseModel):
    """
    A token of a tweet body.

    Offsets are byte offsets into the UTF-8 encoding of the body; byte_end is exclusive.
    """

    model_config = ConfigDict(frozen=True)

    text: str
    byte_start: int = Field(..., ge=0)
    byte_end: int = Field(..., ge=0)
    kind: TokenKind


class Thread(BaseModel):
    """A root document together with its comments, in corpus order."""

    model_config = ConfigDict(frozen=True)

    root: TweetDocument
    comments: tuple[TweetDocument, ...] = ()

    @property
    def documents(self) -> tuple[TweetDocument, ...]:
        return (self.root, *self.comments)

    def is_comment(self, doc: TweetDocument) -> bool:
        """A document belongs to the comments section when it replies to the root."""
        return doc.parent_id is not None and doc.parent_id == self.root.id

    def get(self, document_id: str) -> TweetDocument | None:
        for doc in self.documents:
            if doc.id == document_id:
                return doc
        return None

    def replace(self, updated: TweetDocument) -> "Thread":
        if updated.id == self.root.id:
            return Thread(root=updated, comments=self.comments)
        comments = tuple(updated if c.id == updated.id else c for c in self.comments)
        return Thread(root=self.root, comments=comments)
