"""
Custom exceptions for the misperception lab.

Every error carries an HTTP status code (for the feed and proxy servers)
and a process exit code (for the CLI): 1 for validation problems, 2 for
runtime and I/O failures.
"""

from typing import Any

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class MisperceptionError(Exception):
    """Base exception class for the misperception lab."""

    def __init__(
        self,
        message: str,
        status_code: int = 500,
        exit_code: int = EXIT_RUNTIME,
        details: dict[str, Any] | None = None,
    ):
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class DataLoadError(MisperceptionError):
    """Raised when an asset file cannot be read."""

    def __init__(self, file_path: str, details: dict[str, Any] | None = None):
        message = f"Failed to load data file: {file_path}"
        super().__init__(message, status_code=500, exit_code=EXIT_RUNTIME, details=details)


class CorpusError(MisperceptionError):
    """Raised when a corpus stream violates the document schema or its invariants."""

    def __init__(
        self,
        reason: str,
        line: int | None = None,
        field: str | None = None,
        byte_offset: int | None = None,
    ):
        prefix = f"line {line}: " if line is not None else ""
        details: dict[str, Any] = {"reason": reason}
        if line is not None:
            details["line"] = line
        if field is not None:
            details["field"] = field
        if byte_offset is not None:
            details["byte_offset"] = byte_offset
        super().__init__(
            f"{prefix}{reason}", status_code=422, exit_code=EXIT_VALIDATION, details=details
        )


class RuleValidationError(MisperceptionError):
    """Raised when a perturbation rule or rule file is invalid."""

    def __init__(self, reason: str, details: dict[str, Any] | None = None):
        super().__init__(
            f"Invalid rule: {reason}", status_code=422, exit_code=EXIT_VALIDATION, details=details
        )


class ConfigurationError(MisperceptionError):
    """Raised when required collaborators or settings are missing."""

    def __init__(self, reason: str, details: dict[str, Any] | None = None):
        super().__init__(reason, status_code=500, exit_code=EXIT_VALIDATION, details=details)


class ValidationError(MisperceptionError):
    """Raised when input validation fails."""

    def __init__(self, field: str, value: Any, reason: str):
        message = f"Validation error for field '{field}' with value '{value}': {reason}"
        details = {"field": field, "value": repr(value), "reason": reason}
        super().__init__(message, status_code=422, exit_code=EXIT_VALIDATION, details=details)


class TrainingError(MisperceptionError):
    """Raised when a model cannot be trained from the given corpus."""

    def __init__(self, reason: str):
        super().__init__(
            f"Training failed: {reason}", exit_code=EXIT_VALIDATION, details={"reason": reason}
        )


class AssetValidationError(MisperceptionError):
    """Raised when a scenario asset is missing or fails validation."""

    def __init__(self, path: str, field: str, reason: str):
        message = f"Asset '{path}' failed validation at '{field}': {reason}"
        details = {"path": path, "field": field, "reason": reason}
        super().__init__(message, status_code=422, exit_code=EXIT_VALIDATION, details=details)


class DocumentNotFoundError(MisperceptionError):
    """Raised when a requested tweet id is not in the corpus."""

    def __init__(self, tweet_id: str):
        super().__init__(
            f"Tweet '{tweet_id}' not found",
            status_code=404,
            exit_code=EXIT_VALIDATION,
            details={"tweet_id": tweet_id},
        )


class UpstreamError(MisperceptionError):
    """Raised when the proxy cannot obtain a usable payload from upstream."""

    def __init__(self, upstream: str, reason: str):
        super().__init__(
            f"Upstream {upstream} failed: {reason}",
            status_code=502,
            exit_code=EXIT_RUNTIME,
            details={"upstream": upstream, "reason": reason},
        )


class ReplayError(MisperceptionError):
    """Raised when an edit log does not apply to the document it is replayed on."""

    def __init__(self, document_id: str, reason: str):
        super().__init__(
            f"Cannot replay edits on '{document_id}': {reason}",
            exit_code=EXIT_RUNTIME,
            details={"document_id": document_id, "reason": reason},
        )


class ServerStartError(MisperceptionError):
    """Raised when a feed or proxy server fails to bind or start in time."""

    def __init__(self, address: str, reason: str):
        super().__init__(
            f"Server on {address} did not start: {reason}",
            exit_code=EXIT_RUNTIME,
            details={"address": address, "reason": reason},
        )
