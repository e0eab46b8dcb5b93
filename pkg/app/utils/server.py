"""
Background uvicorn servers for the wire scenario.
"""

import logging
import threading
import time

import uvicorn
from fastapi import FastAPI

from app.core.exceptions import ServerStartError

logger = logging.getLogger(__name__)


class ServerThread(threading.Thread):
    """Runs one uvicorn server in a daemon thread until stop() is called."""

    def __init__(self, app: FastAPI, host: str, port: int, log_level: str = "warning"):
        super().__init__(daemon=True, name=f"uvicorn-{port}")
        self.address = f"{host}:{port}"
        self.server = uvicorn.Server(
            uvicorn.Config(app, host=host, port=port, log_level=log_level, lifespan="on")
        )

    def run(self) -> None:
        try:
            self.server.run()
        except SystemExit:
            # uvicorn exits the process on bind failure
            logger.error(f"Server on {self.address} exited during startup")

    def wait_started(self, timeout: float = 10.0) -> None:
        """
        Raises:
            ServerStartError: If the server stopped or did not come up in time
        """
        deadline = time.monotonic() + timeout
        while not self.server.started:
            if not self.is_alive():
                raise ServerStartError(self.address, "failed to bind")
            if time.monotonic() > deadline:
                raise ServerStartError(self.address, f"not ready after {timeout}s")
            time.sleep(0.01)
        logger.info(f"Server listening on {self.address}")

    def stop(self, timeout: float = 10.0) -> None:
        self.server.should_exit = True
        self.join(timeout)


def start_server(app: FastAPI, host: str, port: int) -> ServerThread:
    thread = ServerThread(app, host, port)
    thread.start()
    try:
        thread.wait_started()
    except ServerStartError:
        thread.stop()
        raise
    return thread
