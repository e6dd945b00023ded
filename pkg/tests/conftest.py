import math

import numpy as np
import pytest
from hypothesis import settings

from ecsmg.operators import AxisSpec, ModelProblem

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def small_model(kind="MP1", k=5.0, n=8, m_lo=2, m_hi=2, a=1.0, theta=math.pi / 6, **kw):
    w = a * max(m_lo, m_hi) / n if (m_lo or m_hi) else 0.0
    return ModelProblem(kind, k, AxisSpec(n, m_lo, m_hi, a, w, theta), **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
