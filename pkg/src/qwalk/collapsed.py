"""Walk on the bit-swap symmetric subspace of the hypercube.

Basis ordering is ``(R,0), (L,1), (R,1), (L,2), ..., (R,m-1), (L,m)``:
``|R,x>`` has the coin pointing at one of the ``m - x`` zero bits of a
weight-``x`` vertex (toward higher weight), ``|L,x>`` at one of the ``x``
one bits. The marked vertex is the all-zeros vertex, i.e. ``|R,0>``.
"""

from math import comb, sqrt

import numpy as np

from qwalk.config import ConfigError, WalkConfig
from qwalk.trajectory import Trajectory


def index(side: str, x: int, m: int) -> int:
    """Position of label ``(side, x)`` in the collapsed basis."""
    if side == "R" and 0 <= x <= m - 1:
        return 2 * x
    if side == "L" and 1 <= x <= m:
        return 2 * x - 1
    raise ValueError(f"no basis state ({side},{x}) for m={m}")


def labels(m: int) -> list:
    out = []
    for k in range(2 * m):
        out.append(("R", k // 2) if k % 2 == 0 else ("L", (k + 1) // 2))
    return out


def even_sector(m: int) -> np.ndarray:
    """Indices of basis states on even shells (invariant under a full iteration)."""
    return np.array([k for k, (_, x) in enumerate(labels(m)) if x % 2 == 0])


def coin_block(x: int, cfg: WalkConfig) -> np.ndarray:
    """Errored Grover coin restricted to shell ``x``, basis (R, L).

    Shells 0 and m carry a single coin state, so the block is 1x1 there.
    """
    m = cfg.m
    if not 0 <= x <= m:
        raise ValueError(f"shell index {x} outside 0..{m}")
    g = cfg.coin_factor
    if x == 0 or x == m:
        return np.array([[g - 1.0]], dtype=complex)
    off = g * sqrt(x * (m - x)) / m
    return np.array(
        [[g * (m - x) / m - 1.0, off], [off, g * x / m - 1.0]], dtype=complex
    )


def coin_matrix(cfg: WalkConfig) -> np.ndarray:
    m = cfg.m
    C = np.zeros((2 * m, 2 * m), dtype=complex)
    C[0, 0] = coin_block(0, cfg)[0, 0]
    last = index("L", m, m)
    C[last, last] = coin_block(m, cfg)[0, 0]
    for x in range(1, m):
        ix = [index("R", x, m), index("L", x, m)]
        C[np.ix_(ix, ix)] = coin_block(x, cfg)
    return C


def shift_matrix(m: int) -> np.ndarray:
    """``S|R,x> = |L,x+1>`` and ``S|L,x> = |R,x-1>``."""
    S = np.zeros((2 * m, 2 * m))
    for x in range(m):
        S[index("L", x + 1, m), index("R", x, m)] = 1.0
    for x in range(1, m + 1):
        S[index("R", x - 1, m), index("L", x, m)] = 1.0
    return S


def build_step_operators(cfg: WalkConfig):
    """Return ``(U, U_marked)`` for the collapsed walk.

    ``U = S C`` uses the errored coin everywhere; ``U_marked`` replaces the
    coin on the marked vertex by the exact ``-I``, which in this basis is a
    rank-one correction on the ``|L,1><R,0|`` entry.
    """
    U = shift_matrix(cfg.m) @ coin_matrix(cfg)
    U_marked = U.copy()
    U_marked[index("L", 1, cfg.m), 0] -= cfg.coin_factor
    return U, U_marked


def step_operator(cfg: WalkConfig) -> np.ndarray:
    """One full iteration ``U @ U_marked``."""
    U, U_marked = build_step_operators(cfg)
    return U @ U_marked


def parity_initial_state(m: int) -> np.ndarray:
    """Collapsed image of the uniform state restricted to even-weight vertices.

    Valid for any ``m``: shell ``x`` (even) carries ``C(m-1, x)`` coin states
    pointing up and ``C(m-1, x-1)`` pointing down, out of ``m 2^(m-1)``.
    """
    psi = np.zeros(2 * m, dtype=complex)
    norm = 2.0 ** (m - 1)
    for x in range(0, m, 2):
        psi[index("R", x, m)] = sqrt(comb(m - 1, x) / norm)
    for x in range(2, m + 1, 2):
        psi[index("L", x, m)] = sqrt(comb(m - 1, x - 1) / norm)
    return psi


def initial_state(cfg: WalkConfig) -> np.ndarray:
    if cfg.m % 2:
        raise ConfigError(
            f"initial_state needs even m (got {cfg.m}); use parity_initial_state "
            "or collapse the full-space state"
        )
    return parity_initial_state(cfg.m)


def success_probability(state: np.ndarray) -> float:
    return float(abs(state[0]) ** 2)


def shell_probabilities(state: np.ndarray, m: int) -> np.ndarray:
    """Total probability on each Hamming shell 0..m."""
    p = np.abs(state) ** 2
    shells = np.zeros(m + 1)
    shells[0] = p[0]
    shells[1:] += p[1::2]  # L,1..L,m
    shells[1:m] += p[2::2]  # R,1..R,m-1
    return shells


def vertex_probabilities(state: np.ndarray, m: int) -> np.ndarray:
    """Probability of a single vertex on each shell (shared equally by symmetry)."""
    return shell_probabilities(state, m) / np.array([comb(m, x) for x in range(m + 1)], float)


def probability_gap(state: np.ndarray, cfg: WalkConfig) -> float:
    """Marked-vertex probability minus the largest probability of any other vertex."""
    pv = vertex_probabilities(state, cfg.m)
    return float(pv[0] - pv[1:].max())


def iterate(cfg: WalkConfig, steps: int, state: np.ndarray = None):
    """Yield the state after each of ``steps`` iterations (``U_marked`` first)."""
    U, U_marked = build_step_operators(cfg)
    psi = parity_initial_state(cfg.m) if state is None else np.array(state, dtype=complex)
    for _ in range(steps):
        psi = U @ (U_marked @ psi)
        yield psi


def evolve(cfg: WalkConfig, t_max: int) -> Trajectory:
    """Success probability and gap after every iteration ``1..t_max``.

    Odd ``m`` starts from :func:`parity_initial_state`, which agrees with the
    collapsed full-space start for every ``m``.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    psi0 = parity_initial_state(cfg.m)
    ps = np.empty(t_max)
    gaps = np.empty(t_max)
    for k, psi in enumerate(iterate(cfg, t_max, psi0)):
        ps[k] = success_probability(psi)
        gaps[k] = probability_gap(psi, cfg)
    return Trajectory(ps, gaps, success_probability(psi0), probability_gap(psi0, cfg))
