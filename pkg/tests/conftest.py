import itertools

import numpy as np
import pytest

from gibbsgraph.model import ModelParams, PointSet

# grid shared by the exhaustive small-instance checks
BETAS = (0.5, 1.0, 2.0, 5.0)
H0S = (0.25, 0.5)
H1S = (0.6, 1.0, 2.0)


def param_grid():
    return [ModelParams(b, h0, h1) for b, h0, h1 in itertools.product(BETAS, H0S, H1S) if h0 < h1]


def unit_square_points(n: int, rng: np.random.Generator, side: float = 1.0) -> PointSet:
    return PointSet(rng.random((n, 2)) * side)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record ``(ok, detail)`` for the test's ``criterion`` marker.

    A test that raises before recording is reported as a failure.
    """
    store = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})
    number = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str) -> None:
        store[number] = (bool(ok), detail)

    yield record
    store.setdefault(number, (False, "raised before completing"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        ok, detail = store[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
