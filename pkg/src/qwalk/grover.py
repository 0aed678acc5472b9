"""Grover search with a systematic phase error in its phase inversions.

The inversion about the mean is ``D = (1 - exp(i theta)) |s><s| - I`` with
``theta = pi + delta``. Two oracle placements are supported:

``"opposed"`` (default)
    the oracle phase is off by the same amount in the other direction,
    ``pi - delta``, so the two inversions are mismatched by ``2 delta``. The
    peak success rate then follows ``4 / (4 + delta^2 N)``.
``"diffusion"``
    exact oracle (``-1`` on the marked item), error only in ``D``. The
    mismatch is ``delta`` and the peak follows ``16 / (16 + delta^2 N)``.
"""

import math

import numpy as np

from qwalk.config import ConfigError
from qwalk.trajectory import Trajectory

MAX_N_DB = 24
MARKED = 0
PLACEMENTS = ("opposed", "diffusion")


def default_budget(n_db: int) -> int:
    return math.ceil(2 * (math.pi / 4) * math.sqrt(2.0**n_db))


def _check(n_db):
    if not 1 <= n_db <= MAX_N_DB:
        raise ConfigError(f"n_db must be in 1..{MAX_N_DB}, got {n_db}")


def diffusion(psi: np.ndarray, delta: float) -> np.ndarray:
    g = 1.0 + complex(math.cos(delta), math.sin(delta))
    return g * psi.mean() - psi


def oracle_phase(delta: float, placement: str = "opposed") -> complex:
    if placement == "opposed":
        return -complex(math.cos(delta), -math.sin(delta))
    if placement == "diffusion":
        return -1.0
    raise ValueError(f"placement must be one of {PLACEMENTS}, got {placement!r}")


def grover_states(n_db: int, delta: float, steps: int, placement: str = "opposed"):
    _check(n_db)
    flip = oracle_phase(delta, placement)
    N = 2**n_db
    psi = np.full(N, 1 / math.sqrt(N), dtype=complex)
    for _ in range(steps):
        psi[MARKED] *= flip
        psi = diffusion(psi, delta)
        yield psi


def _gap(psi):
    p = np.abs(psi) ** 2
    rest = np.delete(p, MARKED)
    return float(p[MARKED] - rest.max())


def grover_run(n_db: int, delta: float, t_max: int = None, placement: str = "opposed") -> Trajectory:
    """Marked-item probability and gap after each Grover iteration."""
    _check(n_db)
    oracle_phase(delta, placement)
    if t_max is None:
        t_max = default_budget(n_db)
    N = 2**n_db
    ps, gaps = np.empty(t_max), np.empty(t_max)
    for k, psi in enumerate(grover_states(n_db, delta, t_max, placement)):
        ps[k] = abs(psi[MARKED]) ** 2
        gaps[k] = _gap(psi)
    p_init = 1.0 / N
    return Trajectory(ps, gaps, p_init, 0.0)


def grover_peak(n_db: int, delta: float, placement: str = "opposed"):
    """``(t_opt, p_max)`` over the default window."""
    traj = grover_run(n_db, delta, placement=placement)
    t = traj.argmax()
    return t, traj.success_at(t)


def grover_gap(n_db: int, delta: float, placement: str = "opposed") -> float:
    """Simulated probability gap at the step of maximum success."""
    traj = grover_run(n_db, delta, placement=placement)
    return traj.gap_at(traj.argmax())
