"""Shared ladders.  Both live in the normal cache directory (ZLL_CACHE_DIR
or ~/.cache/zetaladder), so only the first session pays for the build."""

import pytest

from zetaladder.ladder import build_ladder

SMALL_T_MAX = 2.0e4
# covers the sixth-order window at T = 1e6: 1e6 + 1e6^0.895 < 1.25e6
BIG_T_MAX = 1.25e6


@pytest.fixture(scope="session")
def small_ladder():
    return build_ladder(SMALL_T_MAX)


@pytest.fixture(scope="session")
def big_ladder():
    return build_ladder(BIG_T_MAX)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
