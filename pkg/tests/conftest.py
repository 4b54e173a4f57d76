import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st

from hestonasym.heston import HestonParams

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# calibrated parameter set used throughout the experiments
REFERENCE = dict(kappa=1.7609, theta=0.0494, sigma=0.4086, rho=-0.5195, y0=0.0464)
SPOT = 3729.79


@pytest.fixture(scope="session")
def params():
    return HestonParams(**REFERENCE)


@st.composite
def heston_params(draw):
    kappa = draw(st.floats(0.3, 5.0))
    theta = draw(st.floats(0.01, 0.2))
    sigma = draw(st.floats(0.1, 1.0))
    rho = draw(st.floats(-0.9, 0.5))
    y0 = draw(st.floats(0.01, 0.2))
    assume(kappa - rho * sigma > 0.1)
    return HestonParams(kappa, theta, sigma, rho, y0)


def pytest_terminal_summary(terminalreporter):
    # surface the acceptance lines even when output is captured
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call":
                lines += [ln for ln in rep.capstdout.splitlines() if ln.startswith("ACCEPTANCE ")]
    if lines:
        terminalreporter.section("acceptance")
        for ln in sorted(lines):
            terminalreporter.write_line(ln)
