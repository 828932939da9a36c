from __future__ import annotations

import pytest

from speye.fixtures import load_corpus, serve_fixtures
from speye.registry import load_default_registry


@pytest.fixture(scope="session")
def default_registry():
    return load_default_registry()


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def fixture_server(corpus):
    server = serve_fixtures(corpus)
    yield server
    server.shutdown()


@pytest.fixture(scope="session")
def overlay_registry(fixture_server):
    return fixture_server.overlay_registry()
