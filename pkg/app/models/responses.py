"""
Pydantic response models for the feed origin and the rewriting proxy.

This module defines the JSON bodies used for errors and health checks, and
the audit record the proxy appends for every rewritten document.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from app.models.rules import Edit


class HealthResponse(BaseModel):
    """
    Response model for health check endpoints.

    Attributes:
        status: Health status (healthy, degraded)
        role: "origin" or "proxy"
        documents: Number of documents served (origin only)
        upstream: Upstream address (proxy only)
        rules: Number of rules applied (proxy only)
    """

    status: str = Field(..., description="Health status", examples=["healthy"])
    role: str = Field(..., description="Server role", examples=["origin"])
    documents: int | None = Field(None, description="Documents in the feed")
    upstream: str | None = Field(None, description="Upstream origin address")
    rules: int | None = Field(None, description="Rules applied by the proxy")


class ErrorResponse(BaseModel):
    """
    Response model for errors.

    Attributes:
        error: Error type or code
        message: Human-readable error message
        details: Additional error details
        status_code: HTTP status code
    """

    error: str = Field(..., description="Error type or code", examples=["DocumentNotFoundError"])
    message: str = Field(
        ..., description="Human-readable error message", examples=["Tweet 'nope' not found"]
    )
    details: dict[str, Any] = Field(default_factory=dict, description="Additional error details")
    status_code: int = Field(..., description="HTTP status code", examples=[404])

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": "DocumentNotFoundError",
                "message": "Tweet 'nope' not found",
                "details": {"tweet_id": "nope"},
                "status_code": 404,
            }
        }
    )


class AuditEntry(BaseModel):
    """
    One line of the proxy audit file: the ground truth of a rewrite.

    Attributes:
        request_id: Proxy-assigned request id
        tweet_id: Rewritten document, or None for payload-level notes
        edits: Edits applied to that document
        note: Set when the upstream payload could not be processed
    """

    model_config = ConfigDict(frozen=True)

    request_id: str
    tweet_id: str | None = None
    edits: tuple[Edit, ...] = ()
    note: str | None = None
