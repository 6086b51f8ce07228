import math

import pytest

from cavarray import ModelParams


@pytest.fixture
def spectrum_params():
    """J = 1, xi = 1, omega = 2, Omega = 3 used for the momentum scans."""
    return ModelParams(omega=2.0, xi=1.0, g=0.0, Omega=3.0, J=1.0, N=10)


@pytest.fixture
def transfer_params():
    return ModelParams(omega=2.0, xi=1.0, g=2.0, Omega=2.0, J=15.0, N=20)


HALF_PI = math.pi / 2


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and rep.when == "call":
                lines.append((props["criterion"], outcome, props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, detail in sorted(lines):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {detail}")
