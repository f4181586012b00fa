import numpy as np
import pytest

from psdrom.decomposition import SnapshotEnsemble
from psdrom.symplectic import SymplecticBasis


def random_ensemble(rng, n, N, forces=True, scale=1.0):
    states = scale * rng.standard_normal((2 * n, N))
    F = rng.standard_normal((n, N)) if forces else None
    return SnapshotEnsemble(states, np.arange(N, dtype=float), F)


def random_cotangent(rng, n, k):
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return SymplecticBasis.cotangent(Q)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_OUTCOMES = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if name.startswith("test_criterion_") and (report.when == "call" or report.failed):
        _OUTCOMES[int(name.split("_")[2])] = report.outcome


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 12):
        if num in mod.RESULTS:
            line = mod.RESULTS[num]
        elif _OUTCOMES.get(num) == "failed":
            line = f"criterion {num:>2}: FAIL  (raised before reporting; see traceback)"
        else:
            line = f"criterion {num:>2}: not run"
        terminalreporter.write_line(line)
