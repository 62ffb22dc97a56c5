import math

import numpy as np
import pytest
from hypothesis import strategies as st

from ccsmeasure.circle_measure import CircleMeasure

ACCEPTANCE_LINES = []


def random_closed_atomic(rng: np.random.Generator, n_atoms: int, mass: float = 1.0) -> CircleMeasure:
    """Random atoms plus one balancing atom so that the resultant vanishes.

    Angles are kept at least 1e-6 apart so that no two atoms merge.
    """
    while True:
        angles = rng.uniform(0.0, 2 * math.pi, n_atoms - 1)
        weights = rng.uniform(0.05, 1.0, n_atoms - 1)
        res = np.sum(weights * np.exp(1j * angles))
        extra = np.angle(-res) % (2 * math.pi)
        all_a = np.append(angles, extra)
        all_w = np.append(weights, abs(res))
        a = np.sort(all_a)
        gaps = np.diff(np.append(a, a[0] + 2 * math.pi))
        if gaps.min() > 1e-6 and abs(res) > 1e-3:
            break
    all_w = all_w * (mass / all_w.sum())
    return CircleMeasure.from_atoms(all_a, all_w, tol=0.0)


def closed_strategy(max_atoms: int = 16):
    return st.builds(
        lambda seed, k: random_closed_atomic(np.random.default_rng(seed), k),
        st.integers(0, 2**32 - 1),
        st.integers(3, max_atoms),
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""
    def _report(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report
