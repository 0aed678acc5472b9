"""Matrix-free reference walk on the full coin x vertex space.

States are complex arrays of shape ``(m, 2**m)`` (optionally with trailing
batch axes): row ``d`` is coin direction ``d + 1``, column ``x`` the vertex.
Direction 1 flips the most significant of the ``m`` vertex bits, so the
written bit string ``x_1 x_2 ... x_m`` reads left to right.
"""

from itertools import combinations

import numpy as np

from qwalk import collapsed
from qwalk.config import ConfigError, WalkConfig
from qwalk.trajectory import Trajectory

MAX_FULL_M = 16


class AsymmetricStateError(ValueError):
    """State is not invariant under bit swaps, so it has no collapsed image."""


def _check_m(m: int):
    if m > MAX_FULL_M:
        raise ConfigError(f"full-space simulation limited to m <= {MAX_FULL_M}, got {m}")


def direction_mask(m: int, d: int) -> int:
    """Bit flipped by coin row ``d`` (0-based)."""
    return 1 << (m - 1 - d)


def hamming_weights(m: int) -> np.ndarray:
    return _popcount(np.arange(2**m))


def _popcount(v: np.ndarray) -> np.ndarray:
    w = np.zeros_like(v)
    while v.any():
        w += v & 1
        v = v >> 1
    return w


def bit_table(m: int) -> np.ndarray:
    """``table[d, x]`` is True when coin row ``d`` points at a set bit of ``x``."""
    v = np.arange(2**m)
    return np.stack([(v & direction_mask(m, d)) != 0 for d in range(m)])


def check_marked(m: int, marked: int) -> int:
    if not 0 <= marked < 2**m:
        raise ValueError(f"marked vertex {marked} outside 0..{2**m - 1}")
    return int(marked)


def apply_shift(state: np.ndarray) -> np.ndarray:
    """Move the amplitude at ``(d, x)`` to ``(d, x ^ e_d)``."""
    m = state.shape[0]
    v = np.arange(state.shape[1])
    out = np.empty_like(state)
    for d in range(m):
        out[d] = state[d][v ^ direction_mask(m, d)]
    return out


def apply_coin(state: np.ndarray, cfg: WalkConfig, marked: int = None) -> np.ndarray:
    """Errored Grover coin at every vertex; exact ``-I`` at ``marked`` if given."""
    out = cfg.coin_factor * state.mean(axis=0, keepdims=True) - state
    if marked is not None:
        out[:, marked] = -state[:, marked]
    return out


def step(state: np.ndarray, cfg: WalkConfig, marked: int = 0) -> np.ndarray:
    """One iteration: marked coin, shift, unmarked coin, shift."""
    state = apply_shift(apply_coin(state, cfg, marked))
    return apply_shift(apply_coin(state, cfg))


def parity_projector(m: int, marked: int = 0) -> np.ndarray:
    """Vertices at even Hamming distance from ``marked`` (even weight for vertex 0)."""
    v = np.arange(2**m)
    return _popcount(v ^ marked) % 2 == 0


def initial_state_full(cfg: WalkConfig, marked: int = 0) -> np.ndarray:
    """Uniform superposition projected on the marked vertex's parity class, renormalized."""
    m = cfg.m
    _check_m(m)
    check_marked(m, marked)
    keep = parity_projector(m, marked)
    state = np.zeros((m, 2**m), dtype=complex)
    state[:, keep] = 1.0
    return state / np.sqrt(m * keep.sum())


def vertex_probabilities(state: np.ndarray) -> np.ndarray:
    return (np.abs(state) ** 2).sum(axis=0)


def _gap(state, marked):
    pv = vertex_probabilities(state)
    p_marked = pv[marked]
    pv[marked] = -np.inf
    return float(p_marked - pv.max())


def evolve_full(cfg: WalkConfig, marked: int = 0, t_max: int = 0, state=None) -> Trajectory:
    _check_m(cfg.m)
    check_marked(cfg.m, marked)
    psi = initial_state_full(cfg, marked) if state is None else state
    ps, gaps = np.empty(t_max), np.empty(t_max)
    init = (float(vertex_probabilities(psi)[marked]), _gap(psi, marked))
    for k in range(t_max):
        psi = step(psi, cfg, marked)
        ps[k] = vertex_probabilities(psi)[marked]
        gaps[k] = _gap(psi, marked)
    return Trajectory(ps, gaps, *init)


def iterate_full(cfg: WalkConfig, steps: int, marked: int = 0):
    psi = initial_state_full(cfg, marked)
    for _ in range(steps):
        psi = step(psi, cfg, marked)
        yield psi


def permute_bits(state: np.ndarray, i: int, j: int) -> np.ndarray:
    """``P_ij``: swap vertex bits ``i, j`` and coin directions ``i, j`` (1-based)."""
    m = state.shape[0]
    if not (1 <= i <= m and 1 <= j <= m) or i == j:
        raise ValueError(f"need distinct bit indices in 1..{m}, got {i}, {j}")
    mi, mj = direction_mask(m, i - 1), direction_mask(m, j - 1)
    v = np.arange(state.shape[1])
    differ = ((v & mi) != 0) != ((v & mj) != 0)
    swapped = np.where(differ, v ^ (mi | mj), v)
    order = np.arange(m)
    order[[i - 1, j - 1]] = order[[j - 1, i - 1]]
    return state[order][:, swapped]


def permutation_conjugation_check(cfg: WalkConfig, i: int, j: int) -> float:
    """Max entry of ``P_ij^† (U U') P_ij - U U'`` over all basis probes."""
    m = cfg.m
    _check_m(m)
    if not (1 <= i <= m and 1 <= j <= m) or i == j:
        raise ValueError(f"need distinct bit indices in 1..{m}, got {i}, {j}")
    dim = m * 2**m
    basis = np.eye(dim, dtype=complex).reshape(m, 2**m, dim)
    direct = step(basis, cfg, 0)
    # P_ij is a symmetric permutation, so P^† = P
    conj = permute_bits(step(permute_bits(basis, i, j), cfg, 0), i, j)
    return float(np.abs(conj - direct).max())


def symmetry_deviation(state: np.ndarray) -> float:
    """Largest deviation of ``state`` under any single bit swap."""
    m = state.shape[0]
    return max(
        (float(np.abs(permute_bits(state, i, j) - state).max()) for i, j in combinations(range(1, m + 1), 2)),
        default=0.0,
    )


def collapse_state(state: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Inner products with the ``2m`` symmetric basis vectors ``|R,x>``, ``|L,x>``.

    Amplitudes inside each ``(shell, coin side)`` class must agree within
    ``tol``; the transpositions generate every permutation of the bits, so
    this is the same as invariance under all ``P_ij``.
    """
    m = state.shape[0]
    weights = np.broadcast_to(hamming_weights(m), (m, 2**m))
    up = ~bit_table(m)
    out = np.zeros(2 * m, dtype=complex)
    worst = 0.0
    for side, sel in (("R", up), ("L", ~up)):
        for x in range(m + 1):
            cls = sel & (weights == x)
            if not cls.any():
                continue
            amps = state[cls]
            worst = max(worst, float(np.abs(amps - amps.mean()).max()))
            out[collapsed.index(side, x, m)] = amps.sum() / np.sqrt(amps.size)
    if worst > tol:
        raise AsymmetricStateError(f"state breaks bit-swap symmetry by {worst:.3g}")
    return out
