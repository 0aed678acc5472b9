import numpy as np
import pytest

from qwalk import collapsed, hypercube
from qwalk.config import WalkConfig

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, size):
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return v / np.linalg.norm(v)


def symmetric_basis_state(m, k):
    """Full-space state for collapsed label ``k``: uniform over its (shell, side) class."""
    side, x = collapsed.labels(m)[k]
    up = ~hypercube.bit_table(m)
    sel = (up if side == "R" else ~up) & (hypercube.hamming_weights(m)[None, :] == x)
    state = np.zeros((m, 2**m), dtype=complex)
    state[sel] = 1.0 / np.sqrt(sel.sum())
    return state


def collapsed_operator_from_full(cfg: WalkConfig, marked: bool) -> np.ndarray:
    """Half-step ``S C`` built by pushing symmetric full-space states through the reference walk."""
    m = cfg.m
    cols = []
    for k in range(2 * m):
        s = symmetric_basis_state(m, k)
        s = hypercube.apply_shift(hypercube.apply_coin(s, cfg, 0 if marked else None))
        cols.append(hypercube.collapse_state(s))
    return np.column_stack(cols)
