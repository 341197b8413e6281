import time

import numpy as np
import pytest

from randrank.harness import sample_corner_batch
from randrank.randhaar import SeededRng

EPS = np.finfo(float).eps

# Filled by the acceptance tests: criterion number -> (passed, detail).
ACCEPTANCE = {}
# Wall time of the expensive session fixtures, so runtime limits can be checked.
FIXTURE_SECONDS = {}


def pytest_addoption(parser):
    parser.addoption(
        "--long-run",
        action="store_true",
        default=False,
        help="run the acceptance Monte Carlo at the published scale (n = 1500, 1000 trials)",
    )


@pytest.fixture
def rng():
    return SeededRng(20240611)


@pytest.fixture
def gauss():
    """Independent numpy Gaussian source for building test inputs."""
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def timed(name, fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    FIXTURE_SECONDS[name] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def corner_40_80():
    """5000 draws of s_(40,80), shared by every test that needs them."""
    return timed("corner_40_80", sample_corner_batch, 80, 40, 5000, seed=4080)


@pytest.fixture(scope="session")
def corner_3_10():
    return timed("corner_3_10", sample_corner_batch, 10, 3, 5000, seed=310)


def desk_config(request, dist):
    """Desk-scale theorem run: n = 300, 200 trials (n = 1500, 1000 trials with --long-run)."""
    from randrank.harness import ExperimentConfig

    long_run = request.config.getoption("--long-run")
    n = 1500 if long_run else 300
    return ExperimentConfig(
        dist=dist, n=[n], r=n // 2, gap=[1e7], trials=1000 if long_run else 200,
        delta=0.03, seed=20240611, percentile=0.97,
    )


@pytest.fixture(scope="session")
def desk_runs(request):
    """The theorem experiment for both spectra, run once per session."""
    from randrank.harness import run_experiment

    return timed(
        "desk_runs",
        lambda: {dist: run_experiment(desk_config(request, dist))[0] for dist in ("stair", "logspace")},
    )
