"""
Feed origin routes.

Serves a corpus read-only as JSON Lines: the whole feed, or one document by id.
"""

import logging

from fastapi import APIRouter, Request, Response
from fastapi import Path as PathParam

from app.models.responses import ErrorResponse, HealthResponse
from app.utils.data_loader import FeedStore

logger = logging.getLogger(__name__)

NDJSON = "application/x-ndjson"

router = APIRouter(
    tags=["feed"],
    responses={500: {"model": ErrorResponse, "description": "Internal server error"}},
)


def get_feed_store(request: Request) -> FeedStore:
    store: FeedStore = request.app.state.feed
    return store


@router.get(
    "/feed",
    response_class=Response,
    summary="Get Feed",
    description="Every document of the corpus, one JSON object per line, in corpus order.",
    responses={200: {"content": {NDJSON: {}}}},
)
async def get_feed(request: Request) -> Response:
    store = get_feed_store(request)
    return Response(content=store.feed(), media_type=NDJSON)


@router.get(
    "/tweet/{tweet_id}",
    response_class=Response,
    summary="Get Tweet",
    description="A single document as one JSON Lines record.",
    responses={
        200: {"content": {NDJSON: {}}},
        404: {"model": ErrorResponse, "description": "Tweet not found"},
    },
)
async def get_tweet(
    request: Request,
    tweet_id: str = PathParam(..., description="Document id", examples=["pilot-1"]),
) -> Response:
    """
    Get one document by id.

    Raises:
        DocumentNotFoundError: If no document has this id (404)
    """
    store = get_feed_store(request)
    return Response(content=store.tweet(tweet_id), media_type=NDJSON)


@router.get("/health", response_model=HealthResponse, summary="Health Check")
async def health(request: Request) -> HealthResponse:
    store = get_feed_store(request)
    return HealthResponse(status="healthy", role="origin", documents=len(store))
