"""
Append-only audit log for the rewriting proxy.
"""

import json
import logging
import threading
from pathlib import Path

from app.models.responses import AuditEntry

logger = logging.getLogger(__name__)


class AuditLog:
    """
    JSON Lines audit file.

    Writes are serialized by a lock and each entry is written and flushed as a
    single line, so concurrent requests never produce torn lines.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, entry: AuditEntry) -> None:
        line = entry.model_dump_json(exclude_none=True) + "\n"
        with self._lock, open(self.path, "a", encoding="utf-8") as f:
            f.write(line)
            f.flush()
        logger.debug(f"Audit entry for {entry.tweet_id} ({len(entry.edits)} edits)")

    def read(self) -> list[AuditEntry]:
        if not self.path.exists():
            return []
        with self._lock, open(self.path, encoding="utf-8") as f:
            return [AuditEntry.model_validate(json.loads(line)) for line in f if line.strip()]
