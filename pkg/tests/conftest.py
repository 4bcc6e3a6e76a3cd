"""
Shared pytest fixtures
"""
import pytest

from app.core.logging import configure_logging
from app.models.trace import Trace
from app.services.fixtures import get_fixture


@pytest.fixture(scope="session", autouse=True)
def quiet_logging():
    configure_logging("WARNING", "console")


@pytest.fixture
def swappable() -> Trace:
    return get_fixture("swappable")


@pytest.fixture
def gadget_pair() -> Trace:
    return get_fixture("gadget_pair")
