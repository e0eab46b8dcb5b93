"""
Rewriting proxy routes.

Mirror the origin's paths; every response is fetched upstream and rewritten
by the shared RewritingProxy.
"""

from fastapi import APIRouter, Request, Response
from fastapi import Path as PathParam

from app.models.responses import ErrorResponse, HealthResponse
from app.routes.feed import NDJSON
from app.services.proxy_service import RewritingProxy, tweet_path

router = APIRouter(
    tags=["proxy"],
    responses={
        502: {"model": ErrorResponse, "description": "Upstream unreachable or malformed"},
        500: {"model": ErrorResponse, "description": "Internal server error"},
    },
)


def get_proxy(request: Request) -> RewritingProxy:
    proxy: RewritingProxy = request.app.state.proxy
    return proxy


@router.get(
    "/feed",
    response_class=Response,
    summary="Get Rewritten Feed",
    responses={200: {"content": {NDJSON: {}}}},
)
async def proxied_feed(request: Request) -> Response:
    return await get_proxy(request).relay("/feed")


@router.get(
    "/tweet/{tweet_id}",
    response_class=Response,
    summary="Get Rewritten Tweet",
    responses={200: {"content": {NDJSON: {}}}},
)
async def proxied_tweet(
    request: Request,
    tweet_id: str = PathParam(..., description="Document id", examples=["pilot-1"]),
) -> Response:
    """Upstream 404s are relayed unchanged."""
    return await get_proxy(request).relay(tweet_path(tweet_id))


@router.get("/health", response_model=HealthResponse, summary="Health Check")
async def health(request: Request) -> HealthResponse:
    proxy = get_proxy(request)
    return HealthResponse(
        status="healthy", role="proxy", upstream=proxy.upstream, rules=len(proxy.rules.rules)
    )
