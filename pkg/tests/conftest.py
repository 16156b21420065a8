"""Shared fixtures: cached solver runs and workspaces.

The Taylor-Green series are the canonical smooth test data (box length 2,
viscosity 0.1, dt 0.01, snapshots every 0.02 up to t = 0.4); they are
expensive at n = 64, so they are session scoped and shared with the check
suites through the same in-process cache.
"""

import pytest

from nsreg.spectral import get_workspace
from nsreg.suites import taylor_green_series


@pytest.fixture(scope="session")
def tg16():
    return taylor_green_series(16)


@pytest.fixture(scope="session")
def tg32():
    return taylor_green_series(32)


@pytest.fixture(scope="session")
def tg64():
    return taylor_green_series(64)


@pytest.fixture()
def ws16(tg16):
    return get_workspace(tg16.grid)


@pytest.fixture()
def ws32(tg32):
    return get_workspace(tg32.grid)


@pytest.fixture()
def ws64(tg64):
    return get_workspace(tg64.grid)
