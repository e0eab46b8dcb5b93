"""
Rewriting proxy service.

Sits between the feed origin and a reader: forwards each request upstream,
runs every returned document through the perturbation engine, and hands the
reader the rewritten payload with identical framing. Documents the rules do
not touch pass through byte-for-byte.
"""

import itertools
import logging
from urllib.parse import quote

import httpx
from fastapi import Response

from app.core.exceptions import ConfigurationError, CorpusError, UpstreamError
from app.models.responses import AuditEntry
from app.models.rules import RuleSet
from app.services.perturb_service import Replacer, apply_ruleset
from app.utils.audit import AuditLog
from app.utils.data_loader import group_threads, parse_corpus, serialize_document

logger = logging.getLogger(__name__)

NDJSON = "application/x-ndjson"


class RewritingProxy:
    """
    Stateless per-request rewriter.

    The ruleset and replacer are shared read-only; the audit log serializes its
    own writes.
    """

    def __init__(
        self,
        upstream: str,
        rules: RuleSet,
        audit: AuditLog,
        replacer: Replacer | None = None,
        transport: httpx.AsyncBaseTransport | None = None,
        timeout: float = 5.0,
    ):
        if replacer is None and any(rule.uses_markov for rule in rules.rules):
            raise ConfigurationError("ruleset uses '&markov' but no Markov model was given")
        self.upstream = upstream
        self.rules = rules
        self.audit = audit
        self.replacer = replacer
        self.client = httpx.AsyncClient(
            base_url=f"http://{upstream}", transport=transport, timeout=timeout
        )
        self._request_ids = itertools.count(1)

    def next_request_id(self) -> str:
        return f"req-{next(self._request_ids):06d}"

    async def close(self) -> None:
        await self.client.aclose()

    def rewrite(self, payload: bytes, request_id: str) -> bytes:
        """
        Perturb every document of a JSON Lines payload.

        Raises:
            UpstreamError: If the payload does not parse as a corpus
        """
        lines = [line for line in payload.splitlines(keepends=True) if line.strip()]
        try:
            documents = parse_corpus(lines, resolve_parents=False)
        except CorpusError as e:
            self.audit.append(
                AuditEntry(request_id=request_id, tweet_id=None, note=f"malformed payload: {e}")
            )
            raise UpstreamError(self.upstream, f"malformed payload: {e.message}") from e

        rewritten: dict[str, bytes] = {}
        for thread in group_threads(documents):
            perturbed, log = apply_ruleset(thread, self.rules, self.replacer)
            for doc in perturbed.documents:
                edits = log.for_document(doc.id)
                if not edits:
                    continue
                rewritten[doc.id] = serialize_document(doc)
                self.audit.append(AuditEntry(request_id=request_id, tweet_id=doc.id, edits=edits))
        if rewritten:
            logger.info(f"{request_id}: rewrote {len(rewritten)} of {len(documents)} documents")
        return b"".join(
            rewritten.get(doc.id, line) for doc, line in zip(documents, lines, strict=True)
        )

    async def relay(self, path: str) -> Response:
        """
        Fetch path upstream and return the rewritten response.

        Non-200 upstream responses are relayed unchanged.

        Raises:
            UpstreamError: If upstream is unreachable or sends a malformed payload
        """
        request_id = self.next_request_id()
        try:
            upstream_response = await self.client.get(path)
        except httpx.HTTPError as e:
            logger.warning(f"{request_id}: upstream {self.upstream} unreachable: {e}")
            raise UpstreamError(self.upstream, f"unreachable: {e}") from e

        if upstream_response.status_code != 200:
            return Response(
                content=upstream_response.content,
                status_code=upstream_response.status_code,
                media_type=upstream_response.headers.get("content-type"),
            )
        body = self.rewrite(upstream_response.content, request_id)
        return Response(content=body, media_type=NDJSON)


def tweet_path(tweet_id: str) -> str:
    return f"/tweet/{quote(tweet_id, safe='')}"
