"""Shared fixtures and the --runslow switch for Monte-Carlo acceptance runs."""

import pytest

from changeset_scan.core.lattice import Lattice, PointSet


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run Monte-Carlo acceptance tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def fragment():
    """14x20 lattice whose change set is row 10, columns 6..12."""
    lat = Lattice(14, 20)
    return lat, PointSet.of(lat, [(10, j) for j in range(6, 13)])


@pytest.fixture
def small_rect():
    """30x30 lattice with the 9x9 block rows/cols 8..16."""
    lat = Lattice(30, 30)
    return lat, PointSet.of(lat, [(i, j) for i in range(8, 17) for j in range(8, 17)])
