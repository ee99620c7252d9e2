import pytest


@pytest.fixture
def test_mode(monkeypatch):
    """Allow dimensions below 20 in suite configs."""
    monkeypatch.setenv("BBLS_TEST_MODE", "1")
