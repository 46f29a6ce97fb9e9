import contextlib
import time

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_frame(rng, d, k):
    if k == 0:
        return np.zeros((d, 0))
    q, _ = np.linalg.qr(rng.normal(size=(d, k)))
    return q


def random_spd(rng, d, floor=1e-2):
    g = rng.normal(size=(d, d))
    return g @ g.T + floor * np.eye(d)


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_ACCEPTANCE: list = []


@pytest.fixture
def criterion():
    """Context manager recording a criterion as PASS when its block completes, FAIL otherwise.

    The yielded dict collects measured values shown next to the verdict.
    """

    @contextlib.contextmanager
    def run(label):
        info: dict = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as err:
            msg = str(err).strip().splitlines()[0] if str(err).strip() else type(err).__name__
            _ACCEPTANCE.append((label, "FAIL", _describe(info, start) + f" | {msg}"))
            raise
        _ACCEPTANCE.append((label, "PASS", _describe(info, start)))

    return run


def _describe(info, start):
    parts = [f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items()]
    parts.append(f"time={time.perf_counter() - start:.1f}s")
    return ", ".join(parts)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {label}: {detail}")
