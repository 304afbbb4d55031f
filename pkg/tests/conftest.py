import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    line = f"[acceptance] {name}: {status}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def preset_beta():
    return np.concatenate([np.full(10, 0.7), np.full(10, -0.7), np.zeros(80)])
