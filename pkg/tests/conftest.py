import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FS = 48000.0


@pytest.fixture
def fs():
    return FS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


RUNTIME_LIMIT_S = 60.0


def pytest_sessionstart(session):
    import time

    session.config._sq_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time

    elapsed = time.perf_counter() - config._sq_t0
    ok = elapsed < RUNTIME_LIMIT_S
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] AC10 suite runtime: {elapsed:.1f} s (< {RUNTIME_LIMIT_S:.0f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    import time

    if time.perf_counter() - session.config._sq_t0 >= RUNTIME_LIMIT_S and exitstatus == 0:
        session.exitstatus = 1
