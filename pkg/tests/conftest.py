from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from semhub.config import demo_config_path, load_config
from semhub.hub import Hub


@pytest.fixture(scope="session")
def demo_config():
    return load_config(demo_config_path())


@pytest.fixture(scope="session")
def hub(demo_config):
    return Hub.load(demo_config)


@pytest.fixture(scope="session")
def data_dir():
    return demo_config_path().parent


@pytest.fixture(scope="session")
def client(hub):
    from fastapi.testclient import TestClient

    from semhub.service import create_app

    return TestClient(create_app(hub), raise_server_exceptions=False)


@pytest.fixture(scope="session")
def live_server(hub):
    import threading
    import time

    import uvicorn

    from semhub.service import create_app

    config = uvicorn.Config(create_app(hub), host="127.0.0.1", port=0,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("test server failed to start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
