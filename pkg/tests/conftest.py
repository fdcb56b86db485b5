import time

import pytest

from momenta import reduction as R

# lines printed by the acceptance suite, echoed again in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def rigid_body_runs():
    """Rigid-body reconstruction at dt and dt/2 (T=5), shared across modules.

    The "elapsed" key holds the wall time of both runs together.
    """
    out = {}
    t0 = time.perf_counter()
    for dt in (1e-3, 5e-4):
        setup = R.rigid_body_lift(5.0, dt)
        out[dt] = (setup, R.reconstruct(setup.mm, setup.H, setup.beta, setup.alpha))
    out["elapsed"] = time.perf_counter() - t0
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
