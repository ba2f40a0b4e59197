"""
Validation Test Configuration
=============================

Full-size acceptance measurements. Every test here is marked ``slow``;
deselect them with ``-m "not slow"``.
"""

import warnings

import pytest

warnings.filterwarnings("ignore", category=FutureWarning)


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )


def pytest_collection_modifyitems(config, items):
    """Mark every validation test as slow."""
    for item in items:
        if "tests/validation" in item.nodeid.replace("\\", "/"):
            item.add_marker(pytest.mark.slow)


@pytest.fixture(scope="session")
def standard_dims() -> tuple[int, int]:
    return (100, 100)
