import numpy as np
import pytest

from paramdrive import FrequencyProfile, solve_jost


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="session")
def fig1_upper_jost():
    return solve_jost(FrequencyProfile.sech(6 * np.pi, 1.0, 0.5), tol=1e-10)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
