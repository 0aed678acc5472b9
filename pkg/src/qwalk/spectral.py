"""Spectra of the collapsed step operators and the two-eigenvector rotation picture."""

from dataclasses import dataclass, field
from math import comb, sqrt
from typing import NamedTuple, Optional

import numpy as np

from qwalk import collapsed
from qwalk.config import WalkConfig

RESIDUAL_TOL = 1e-8

# envelope constant for |omega0 - leading| <= K m^1.5 / 2^m, set from m = 8
# (measured 0.0282) and required to hold for every larger m
OMEGA0_ENVELOPE_K = 0.03


class EigensolverError(RuntimeError):
    """Eigen-decomposition failed or left a residual above RESIDUAL_TOL."""


class SpectralPropertyError(RuntimeError):
    """The near-unit eigenvalue pair is not exactly two eigenvalues."""


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None  # columns, phase-fixed
    near_unit: list = field(default_factory=list)
    even_sector: Optional[np.ndarray] = None  # True where the eigenvector lives on even shells
    bound: Optional[float] = None

    @property
    def flagged(self) -> np.ndarray:
        return self.eigenvalues[self.near_unit]

    @property
    def has_pair(self) -> bool:
        return len(self.near_unit) == 2

    def require_pair(self):
        if not self.has_pair:
            raise SpectralPropertyError(
                f"expected exactly 2 eigenvalues above {self.bound:.6f}, found {len(self.near_unit)}"
            )
        return self


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its largest-magnitude entry is real positive."""
    k = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[k]))


def eigen_decompose(M: np.ndarray):
    """Dense complex eigen-decomposition with unit, phase-fixed eigenvectors."""
    try:
        vals, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}") from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    vecs = np.column_stack([fix_phase(vecs[:, k]) for k in range(vecs.shape[1])])
    residual = np.abs(M @ vecs - vecs * vals).max() if len(vals) else 0.0
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise EigensolverError(f"eigenpair residual {residual:.3g} exceeds {RESIDUAL_TOL}")
    return vals, vecs


def _sectored(M: np.ndarray, m: int):
    """Decompose the even- and odd-shell blocks separately and embed back.

    A full iteration moves the walker two shells, so ``M`` never couples the
    two sectors; splitting them keeps the flagged pair on the sector that
    holds the initial state.
    """
    even = collapsed.even_sector(m)
    odd = np.setdiff1d(np.arange(2 * m), even)
    vals, vecs, is_even = [], [], []
    for sel, flag in ((even, True), (odd, False)):
        w, v = eigen_decompose(M[np.ix_(sel, sel)])
        full = np.zeros((2 * m, len(w)), dtype=complex)
        full[sel] = v
        vals.append(w)
        vecs.append(full)
        is_even.append(np.full(len(w), flag))
    return np.concatenate(vals), np.hstack(vecs), np.concatenate(is_even)


def bound_L(m: int) -> float:
    """Near-unit bound at delta = 0 in hypercube dimension m."""
    return 1.0 - 8.0 * (m - 1) / (3.0 * m * m)


def bound_L_tilde(m: int, delta: float) -> float:
    """Near-unit bound with phase error, second order in delta."""
    inner = (8 / m - 8 / m**2) - (2 - 4 / m) * sqrt(m - 1) / m * delta + 3 * (1 / 3 + 2 / m**2 - 2 / m) * delta**2
    return 1.0 - inner / 3.0


def unmarked_eigenvalues_formula(cfg: WalkConfig) -> np.ndarray:
    """Closed-form spectrum of the collapsed errored U (2m values).

    Squaring gives the spectrum of ``U U``. At delta = 0 this is the
    ``cos 2w_k +- i sin 2w_k`` family.
    """
    m, g = cfg.m, cfg.coin_factor
    e = np.exp(1j * cfg.theta)
    vals = [-e, e]  # k = 0 and k = m
    for k in range(1, m):
        root = np.sqrt(g * g * (m - 2 * k) ** 2 / m**2 + 4 * e)
        vals += [0.5 * g - g * k / m - 0.5 * root, 0.5 * g - g * k / m + 0.5 * root]
    return np.array(vals)


def uu_eigenvalues_delta0(m: int) -> np.ndarray:
    """``exp(+-2i w_k)`` with ``cos 2w_k = 1 + 8k(k-m)/m^2``; the real k = 0, m values once each."""
    vals = [1.0 + 0j, 1.0 + 0j]
    for k in range(1, m):
        re = 1 + 8 * k * (k - m) / m**2
        im = 4 * (m - 2 * k) * sqrt(k * (m - k)) / m**2
        vals += [complex(re, im), complex(re, -im)]
    return np.array(vals)


def match_multisets(a, b) -> float:
    """Worst distance of a greedy one-to-one matching of two equal-size value sets."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("multisets differ in size")
    used = np.zeros(len(b), dtype=bool)
    worst = 0.0
    for v in a:
        dist = np.abs(b - v)
        dist[used] = np.inf
        k = int(dist.argmin())
        used[k] = True
        worst = max(worst, float(dist[k]))
    return worst


def uu_spectrum_unmarked(cfg: WalkConfig) -> SpectrumReport:
    U, _ = collapsed.build_step_operators(cfg)
    vals, vecs = eigen_decompose(U @ U)
    return SpectrumReport(vals, vecs)


def uuprime_spectrum(cfg: WalkConfig) -> SpectrumReport:
    """Spectrum of one iteration with the near-unit pair flagged.

    Only eigenvectors on the even-shell sector are candidates; the odd
    sector is unreachable from the initial state and carries its own
    eigenvalue near ``exp(2i delta)``.
    """
    if cfg.m < 4:
        raise ValueError("uuprime_spectrum needs m >= 4")
    vals, vecs, is_even = _sectored(collapsed.step_operator(cfg), cfg.m)
    bound = bound_L(cfg.m) if cfg.delta == 0 else bound_L_tilde(cfg.m, cfg.delta)
    near = [k for k in range(len(vals)) if is_even[k] and vals[k].real > bound]
    # order the pair by phase: index 0 has the smaller angle
    near.sort(key=lambda k: np.angle(vals[k]))
    return SpectrumReport(vals, vecs, near, is_even, bound)


def c_squared(m: int) -> float:
    return sum(1.0 / comb(m - 1, x) for x in range(m // 2))


def analytic_psi0_psi1(cfg: WalkConfig):
    """The two approximate eigen-combinations: the start state and the target state."""
    cfg.require_multiple_of_four()
    m = cfg.m
    c = sqrt(c_squared(m))
    psi1 = np.zeros(2 * m, dtype=complex)
    for x in range(m // 4):
        psi1[collapsed.index("R", 2 * x, m)] = 1.0 / (c * sqrt(comb(m - 1, 2 * x)))
        psi1[collapsed.index("L", 2 * x + 2, m)] = -1.0 / (c * sqrt(comb(m - 1, 2 * x + 1)))
    return collapsed.parity_initial_state(m), psi1


class Expectations(NamedTuple):
    psi0: complex  # <psi0|UU'|psi0>
    psi1: complex  # <psi1|UU'|psi1>
    cross_10: complex  # <psi1|UU'|psi0> - <psi1|psi0>
    cross_01: complex  # <psi0|UU'|psi1> - <psi0|psi1>


def expectation_identities(cfg: WalkConfig) -> Expectations:
    psi0, psi1 = analytic_psi0_psi1(cfg)
    W = collapsed.step_operator(cfg)
    return Expectations(
        np.vdot(psi0, W @ psi0),
        np.vdot(psi1, W @ psi1),
        np.vdot(psi1, W @ psi0) - np.vdot(psi1, psi0),
        np.vdot(psi0, W @ psi1) - np.vdot(psi0, psi1),
    )


def expectation_closed_forms(cfg: WalkConfig) -> Expectations:
    """Closed forms of :func:`expectation_identities`.

    The ``psi0`` entry is exact for any delta. The ``psi1`` entry is exact
    only at delta = 0; for delta != 0 it is a first-order estimate. The cross
    terms are given at delta = 0 only (NaN otherwise); their magnitude is
    ``2 / (c sqrt(2^(m-1)))``, i.e. scaled by the database size.
    """
    cfg.require_multiple_of_four()
    m, d = cfg.m, cfg.delta
    c2 = c_squared(m)
    ed = np.exp(1j * d)
    e00 = np.exp(2j * d) - (ed + 1) * ed / 2 ** (m - 1)
    e11 = 1 - (ed + 1) * ed / (2 * c2 * comb(m - 1, m // 2))
    if d == 0:
        cross = 2.0 / (sqrt(c2) * sqrt(2.0 ** (m - 1)))
        return Expectations(e00, e11, cross, -cross)
    return Expectations(e00, e11, complex(np.nan), complex(np.nan))


def omega0_leading_term(m: int) -> float:
    """Leading-order rotation phase per iteration, ``-2 / (c sqrt(2^(m-1)))``."""
    return -2.0 / (sqrt(c_squared(m)) * sqrt(2.0 ** (m - 1)))


class Omega0Estimate(NamedTuple):
    omega0: float
    bound_check: bool


def omega0_estimate(cfg: WalkConfig, K: float = OMEGA0_ENVELOPE_K) -> Omega0Estimate:
    """Phase of the flagged eigenvalue with negative imaginary part (delta = 0)."""
    if cfg.delta != 0:
        raise ValueError("omega0_estimate is defined for delta = 0")
    cfg.require_multiple_of_four()
    rep = uuprime_spectrum(cfg).require_pair()
    neg = [k for k in rep.near_unit if rep.eigenvalues[k].imag < 0]
    omega0 = float(np.angle(rep.eigenvalues[neg[0]]))
    m = cfg.m
    ok = abs(omega0 - omega0_leading_term(m)) <= K * m**1.5 / 2.0**m
    return Omega0Estimate(omega0, bool(ok))


@dataclass
class AmplitudeDecomposition:
    """Overlaps of the start/target states with the flagged eigenvectors.

    Eigenvectors are gauged so ``a0`` and ``a1`` are real and non-negative.
    ``a_bound`` / ``b_bound`` are the lower bounds on ``|a0|^2 + |a1|^2`` and
    ``|b0|^2 + |b1|^2`` implied by the near-unit bound.
    """

    a0: complex
    a1: complex
    b0: complex
    b1: complex
    eps0: float
    eps1: float
    omega0: float
    omega1: float
    a_bound: float = float("nan")
    b_bound: float = float("nan")

    @property
    def bounds_hold(self) -> bool:
        a = abs(self.a0) ** 2 + abs(self.a1) ** 2
        b = abs(self.b0) ** 2 + abs(self.b1) ** 2
        return bool(a > self.a_bound and b > self.b_bound)


def decompose_amplitudes(cfg: WalkConfig) -> AmplitudeDecomposition:
    cfg.require_multiple_of_four()
    m, d = cfg.m, cfg.delta
    rep = uuprime_spectrum(cfg).require_pair()
    psi0, psi1 = analytic_psi0_psi1(cfg)
    vecs = []
    for k in rep.near_unit:
        v = rep.eigenvectors[:, k]
        a = np.vdot(v, psi0)
        vecs.append(v * np.exp(1j * np.angle(a)))
    a0, a1 = (complex(np.vdot(v, psi0)) for v in vecs)
    b0, b1 = (complex(np.vdot(v, psi1)) for v in vecs)
    omega0, omega1 = (float(np.angle(rep.eigenvalues[k])) for k in rep.near_unit)

    Lt = bound_L_tilde(m, d)
    a_bound = 1 - (1 / 2 ** (m - 2) + (2 - 5 / 2**m) * d * d) / (1 - Lt)
    b_bound = 1 - ((4 - 5 * d * d) / (4 * c_squared(m) * comb(m - 1, m // 2))) / (1 - Lt)
    return AmplitudeDecomposition(
        a0, a1, b0, b1,
        max(0.0, 1 - abs(a0) ** 2 - abs(a1) ** 2),
        max(0.0, 1 - abs(b0) ** 2 - abs(b1) ** 2),
        omega0, omega1, a_bound, b_bound,
    )


def amplitude_w(dec: AmplitudeDecomposition, t):
    """Two-eigenvector prediction of the target-state amplitude after ``t`` iterations."""
    denom = dec.a0 * dec.b1 - dec.a1 * dec.b0
    if abs(denom) < 1e-14:
        raise ZeroDivisionError("degenerate decomposition: a0*b1 == a1*b0")
    t = np.asarray(t, dtype=float)
    return dec.a0 * dec.a1 * (np.exp(1j * dec.omega0 * t) - np.exp(1j * dec.omega1 * t)) / denom
