import warnings

import numpy as np
import pytest

from qaprecoding.model import SystemInstance, complex_normal

_ACCEPTANCE = pytest.StashKey[dict]()


def random_instance(rng, M, K, snr_db=None, N0=1.0):
    """Rayleigh instance with ``gamma = 1``; SNR drawn from [-10, 30] dB if not given."""
    if snr_db is None:
        snr_db = rng.uniform(-10, 30)
    H = complex_normal(rng, (K, M))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SystemInstance.from_snr_db(H, snr_db, N0=N0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class _Criterion:
    def __init__(self, log, number, title):
        self.log, self.number, self.title = log, number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok or self.detail else f"{exc_type.__name__}: {exc}"
        if not ok and self.detail:
            first = (str(exc).splitlines() or [""])[0]
            detail = f"{self.detail} | {exc_type.__name__}: {first}"
        self.log[self.number] = (ok, self.title, detail)
        return False


@pytest.fixture
def criterion(request):
    """``with criterion(n, title) as c: ...`` records a pass/fail line for the summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})
    return lambda number, title: _Criterion(log, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log, key=str):
        ok, title, detail = log[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
