import importlib

import numpy as np
import pytest

from dimwall.hilbert import DiscreteSpace, FuncVec


def _cores():
    out = [importlib.import_module("dimwall._pycore")]
    try:
        out.append(importlib.import_module("dimwall._ccore"))
    except ImportError:
        pass
    return out


CORES = _cores()


@pytest.fixture(params=CORES, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def core(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_space(rng, m, dim=None):
    w = rng.uniform(0.2, 1.0, m)
    w /= w.sum()
    # renormalize so the weights sum to 1 within 1e-12
    w[-1] = 1.0 - w[:-1].sum()
    pts = np.arange(m) if dim is None else rng.normal(size=(m, dim))
    return DiscreteSpace(pts, w)


def random_funcs(rng, space, count, unit=False):
    out = []
    for _ in range(count):
        v = rng.normal(size=space.size)
        f = FuncVec(space, v)
        if unit:
            f = FuncVec(space, v / np.sqrt(np.dot(space.weights * v, v)))
        out.append(f)
    return out


# acceptance verdict lines, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
