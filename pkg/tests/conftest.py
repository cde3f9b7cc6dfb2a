import sys
import warnings
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relayplace.mdp import MdpConfig, MdpDiagnostic, solve  # noqa: E402


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@lru_cache(maxsize=None)
def cached_policy(Lambda, xi, next_state="ceil"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MdpDiagnostic)
        return solve(MdpConfig(Lambda, xi, next_state=next_state))


@pytest.fixture(scope="session")
def policy():
    return cached_policy
