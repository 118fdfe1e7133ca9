import numpy as np
import pytest

from thzcwt import cwt
from thzcwt.fmcw import SweepConfig
from thzcwt.phantom import PhantomSpec, build_phantom, scan_phantom


@pytest.fixture
def nominal_sweep():
    """Nominal source sweep with c = 3e8 m/s."""
    return SweepConfig(240e-6, 90e9, 0.23e12, 0.32e12, 128, 3e8)


@pytest.fixture(params=sorted(cwt.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def clean_phantom():
    """Six-hole phantom without clutter, plus its noise-free raw scan."""
    phantom, truth = build_phantom(PhantomSpec(clutter_count=0))
    raw = scan_phantom(phantom, SweepConfig(), 0.0, 0)
    return phantom, truth, raw


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Append one summary line per acceptance criterion; printed after the run."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
