import numpy as np
import pytest

from bergdecomp import IntMatrix
from bergdecomp.errors import SingularMatrixError

_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number = marker.args[0]
    _ACCEPTANCE.setdefault(number, []).append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        results = _ACCEPTANCE[number]
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        tr.write_line(line)


def random_nonsingular(rng: np.random.Generator, n: int, low: int = -5, high: int = 5,
                       max_det: int | None = None) -> IntMatrix:
    while True:
        rows = rng.integers(low, high + 1, size=(n, n)).tolist()
        try:
            A = IntMatrix(rows)
        except SingularMatrixError:
            continue
        d = abs(A.det())
        if max_det is None or d <= max_det:
            return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def off_axes_points(rng: np.random.Generator, n: int, count: int, rmin: float = 0.2, rmax: float = 1.5) -> np.ndarray:
    r = rng.uniform(rmin, rmax, size=(count, n))
    theta = rng.uniform(0, 1, size=(count, n))
    return r * np.exp(2j * np.pi * theta)
