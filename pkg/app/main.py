"""
FastAPI application setup for the feed origin and the rewriting proxy.

Both servers share the same exception handlers so every error reaches the
client as an ErrorResponse body.
"""

import logging
from collections.abc import AsyncIterator, Sequence
from contextlib import asynccontextmanager

import httpx
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from app.core.config import Settings, get_settings
from app.core.exceptions import MisperceptionError
from app.models.corpus import TweetDocument
from app.models.rules import RuleSet
from app.routes import feed, proxy
from app.services.perturb_service import Replacer
from app.services.proxy_service import RewritingProxy
from app.utils.audit import AuditLog
from app.utils.data_loader import FeedStore, load_corpus

logger = logging.getLogger(__name__)


def _error_body(error: str, message: str, details: dict, status_code: int) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={
            "error": error,
            "message": message,
            "details": details,
            "status_code": status_code,
        },
    )


def register_exception_handlers(app: FastAPI) -> None:
    """Attach the shared error handlers to an application."""

    @app.exception_handler(MisperceptionError)
    async def misperception_exception_handler(
        request: Request, exc: MisperceptionError
    ) -> JSONResponse:
        logger.error(f"{exc.__class__.__name__}: {exc.message} (status: {exc.status_code})")
        return _error_body(exc.__class__.__name__, exc.message, exc.details, exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        logger.error(f"Validation error: {exc.errors()}")
        return _error_body(
            "ValidationError",
            "Request validation failed",
            {"validation_errors": exc.errors()},
            422,
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(
        request: Request, exc: StarletteHTTPException
    ) -> JSONResponse:
        logger.error(f"HTTP exception: {exc.detail} (status: {exc.status_code})")
        return _error_body("HTTPException", str(exc.detail), {}, exc.status_code)

    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception) -> JSONResponse:
        logger.error(f"Unexpected error: {exc}", exc_info=True)
        return _error_body("InternalServerError", "An unexpected error occurred", {}, 500)


def create_origin_app(
    documents: Sequence[TweetDocument], settings: Settings | None = None
) -> FastAPI:
    """
    Create the feed origin server for a fixed corpus.

    Args:
        documents: Corpus to serve, in feed order
        settings: Application settings, defaults to the cached settings

    Returns:
        FastAPI: Configured application instance
    """
    settings = settings or get_settings()
    store = FeedStore(documents)

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        logger.info(f"Feed origin starting with {len(store)} documents")
        yield
        logger.info("Feed origin shut down")

    app = FastAPI(
        title=f"{settings.app_name} Feed Origin",
        description=settings.app_description,
        version=settings.app_version,
        lifespan=lifespan,
    )
    app.state.feed = store
    app.include_router(feed.router)
    register_exception_handlers(app)
    return app


def create_proxy_app(
    upstream: str,
    rules: RuleSet,
    audit: AuditLog,
    replacer: Replacer | None = None,
    transport: httpx.AsyncBaseTransport | None = None,
    settings: Settings | None = None,
) -> FastAPI:
    """
    Create the man-in-the-middle rewriting proxy.

    Args:
        upstream: Origin address as host:port
        rules: Ruleset applied to every document passing through
        audit: Audit log receiving one entry per rewritten document
        replacer: Markov replacer, required when a rule uses '&markov'
        transport: Optional httpx transport (tests route it to an in-process origin)
        settings: Application settings, defaults to the cached settings

    Returns:
        FastAPI: Configured application instance

    Raises:
        ConfigurationError: If a rule needs the Markov replacer and none is given
    """
    settings = settings or get_settings()
    rewriter = RewritingProxy(
        upstream,
        rules,
        audit,
        replacer=replacer,
        transport=transport,
        timeout=settings.upstream_timeout_seconds,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        logger.info(f"Proxy starting: upstream={upstream} rules={len(rules.rules)}")
        yield
        await rewriter.close()
        logger.info("Proxy shut down")

    app = FastAPI(
        title=f"{settings.app_name} Rewriting Proxy",
        description=settings.app_description,
        version=settings.app_version,
        lifespan=lifespan,
    )
    app.state.proxy = rewriter
    app.include_router(proxy.router)
    register_exception_handlers(app)
    return app


def create_default_origin_app() -> FastAPI:
    """Origin over the configured corpus; usable as `uvicorn --factory`."""
    settings = get_settings()
    return create_origin_app(load_corpus(settings.corpus_file_path), settings)


if __name__ == "__main__":
    import uvicorn

    settings = get_settings()
    uvicorn.run(
        "app.main:create_default_origin_app",
        factory=True,
        host=settings.host,
        port=settings.port,
        log_level=settings.log_level.lower(),
    )
