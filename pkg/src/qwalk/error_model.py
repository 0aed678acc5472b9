"""Closed-form success-rate models and least-squares refits of their constants.

The model formulas are written in terms of the database exponent ``n`` (the
``2**n`` they contain). A walk on the ``m``-cube searches ``2**(m-1)``
items, so comparisons against simulation use ``n = m - 1``; the zero-error
success rate ``p0`` is still that of the ``m``-cube.
"""

from dataclasses import asdict, dataclass, fields, replace
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import least_squares

from qwalk import collapsed
from qwalk.config import WalkConfig
from qwalk.spectral import c_squared
from qwalk.trajectory import default_budget


class DegenerateFitError(ValueError):
    """Sample set cannot determine the requested constants."""


@dataclass(frozen=True)
class ModelParams:
    pmax_const: float = 3.8
    titer_inner: float = 16.0
    titer_delta_coeff: float = 4.0
    crit_slope: float = 1.806
    crit_intercept: float = 0.4642

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")

    def to_text(self) -> str:
        return "".join(f"{k}={v!r}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            if key.strip() in known:
                values[key.strip()] = float(val)
        return cls(**values)


DEFAULT_PARAMS = ModelParams()


def database_exponent(m: int) -> int:
    return m - 1


def p0(m: int) -> float:
    """Zero-error success rate ``1/c^2`` of the m-cube walk (even m)."""
    if m % 2 or m < 4:
        raise ValueError(f"p0 needs even m >= 4, got {m}")
    return 1.0 / c_squared(m)


def p_max_model(n, delta, params: ModelParams = DEFAULT_PARAMS, p0_value: Optional[float] = None):
    """``p0 * K / (K + delta^2 2^n)``; ``p0`` defaults to ``p0(n)``."""
    base = p0(n) if p0_value is None else p0_value
    K = params.pmax_const
    return base * K / (K + np.square(delta) * 2.0**n)


def t_opt_model(n, delta, params: ModelParams = DEFAULT_PARAMS):
    return math.pi / np.sqrt(params.titer_inner / 2.0**n + params.titer_delta_coeff * np.square(delta))


def critical_scale(delta: float, params: ModelParams = DEFAULT_PARAMS) -> float:
    """Largest database exponent the error ``delta`` leaves essentially unaffected."""
    if not 0 < delta <= params.crit_intercept:
        raise ValueError(f"delta must lie in (0, {params.crit_intercept}], got {delta}")
    return params.crit_slope * math.log2(params.crit_intercept / delta)


def p_model(n, delta, t, params: ModelParams = DEFAULT_PARAMS, p0_value: Optional[float] = None):
    """Oscillating success rate: the peak model times ``sin^2`` at the model frequency.

    The frequency is ``pi / (2 t_opt)``, so ``t_opt_model`` is the first peak.
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    freq = math.pi / (2 * t_opt_model(n, delta, params))
    return p_max_model(n, delta, params, p0_value) * np.sin(freq * np.asarray(t, float)) ** 2


def grover_pmax_model(n_db, delta):
    return 4.0 / (4.0 + np.square(delta) * 2.0**n_db)


def grover_gap_model(n_db, delta, p_max=None):
    """Gap of a search whose unmarked items share ``1 - p_max`` equally."""
    if p_max is None:
        p_max = grover_pmax_model(n_db, delta)
    return p_max - (1 - p_max) / (2.0**n_db - 1)


class Observation(NamedTuple):
    p_max: float
    t_opt: int
    gap: float


def observe(m: int, delta: float, steps: Optional[int] = None) -> Observation:
    """Simulated peak of the collapsed walk.

    ``p_max`` is the maximum over ``1..steps`` (default window
    ``ceil(2.5 (pi/4) sqrt(2^m))``); ``t_opt`` is the first major peak (see
    :meth:`Trajectory.first_peak`) and ``gap`` the probability gap there.
    """
    traj = collapsed.evolve(WalkConfig(m, delta), default_budget(m) if steps is None else steps)
    t = traj.first_peak()
    return Observation(traj.p_max, t, traj.gap_at(t))


def walk_p0(m: int) -> float:
    """Closed-form ``p0`` for even m, the simulated zero-error peak for odd m."""
    return p0(m) if m % 2 == 0 and m >= 4 else observe(m, 0.0).p_max


def gap_models(m: int, delta: float, params: ModelParams = DEFAULT_PARAMS):
    """``(dp1, dp2)``: simulated walk gap and the Grover model gap on the same database."""
    dp1 = observe(m, delta).gap
    dp2 = float(grover_gap_model(database_exponent(m), delta))
    return dp1, dp2


class FitSample(NamedTuple):
    n: float  # database exponent
    delta: float
    value: float  # observed p_max, t_opt or critical exponent
    p0: Optional[float] = None


@dataclass
class FitResult:
    kind: str
    params: ModelParams
    residual: float
    n_points: int
    fitted: tuple

    def to_text(self) -> str:
        vals = asdict(self.params)
        lines = [f"{k}={vals[k]!r}" for k in self.fitted]
        lines += [f"residual_{self.kind}={self.residual!r}", f"n_points_{self.kind}={self.n_points}"]
        return "\n".join(lines) + "\n"


FIT_KINDS = ("pmax", "topt", "critical")


def fit_constants(samples, kind: str, base: ModelParams = DEFAULT_PARAMS) -> FitResult:
    """Least-squares refit of one model's constants.

    ``pmax`` fits the single peak constant on log residuals, starting at 4.0.
    ``topt`` fits ``(titer_inner, titer_delta_coeff)`` on linear residuals,
    starting from the relative-weighted linearisation ``(pi/t)^2 = A 2^-n + B delta^2``.
    ``critical`` is linear in ``(slope, slope*log2(intercept))`` and solved
    directly. Both nonlinear fits use scipy's trust-region solver with at
    most 200 evaluations, so results depend on the samples alone.
    """
    samples = [FitSample(*s) for s in samples]
    if kind not in FIT_KINDS:
        raise ValueError(f"unknown fit kind {kind!r}")
    n = np.array([s.n for s in samples], float)
    d = np.array([s.delta for s in samples], float)
    y = np.array([s.value for s in samples], float)

    if kind == "critical":
        if len(set(d)) < 2 or np.any(d <= 0):
            raise DegenerateFitError("critical fit needs >= 2 distinct positive deltas")
        A = np.column_stack([np.ones_like(d), -np.log2(d)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        slope = coef[1]
        if slope <= 0:
            raise DegenerateFitError(f"non-positive critical slope {slope}")
        params = replace(base, crit_slope=float(slope), crit_intercept=float(2 ** (coef[0] / slope)))
        res = y - A @ coef
        return FitResult(kind, params, float(np.sqrt(np.mean(res**2))), len(samples), ("crit_slope", "crit_intercept"))

    if len(samples) < 8 or len(set(n)) < 3 or len(set(d)) < 2:
        raise DegenerateFitError("need >= 8 samples spanning >= 3 sizes and >= 2 deltas")
    N = 2.0**n

    if kind == "pmax":
        p0s = np.array([p0(int(s.n)) if s.p0 is None else s.p0 for s in samples], float)
        load = d * d * N
        if load.max() == 0 or np.any(y <= 0):
            raise DegenerateFitError("p_max samples carry no error dependence")

        def resid(x):
            return np.log(y) - np.log(p0s * x[0] / (x[0] + load))

        sol = least_squares(resid, [4.0], bounds=(1e-12, np.inf), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        params = replace(base, pmax_const=float(sol.x[0]))
        return FitResult(kind, params, float(np.sqrt(np.mean(sol.fun**2))), len(samples), ("pmax_const",))

    A = np.column_stack([1 / N, d * d])
    if np.linalg.matrix_rank(A) < 2 or np.any(y <= 0):
        raise DegenerateFitError("t_opt samples cannot separate size and error terms")
    w = (y / math.pi) ** 2  # 1 / (pi/t)^2: relative weighting
    x0, *_ = np.linalg.lstsq(A * w[:, None], np.ones_like(y), rcond=None)
    x0 = np.maximum(x0, 1e-6)

    def resid(x):
        return y - math.pi / np.sqrt(x[0] / N + x[1] * d * d)

    sol = least_squares(resid, x0, bounds=(1e-12, np.inf), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    params = replace(base, titer_inner=float(sol.x[0]), titer_delta_coeff=float(sol.x[1]))
    return FitResult(kind, params, float(np.sqrt(np.mean(sol.fun**2))), len(samples), ("titer_inner", "titer_delta_coeff"))


def critical_points(rows, drop: float = 0.05):
    """Critical samples from sweep rows ``(m, delta, p_max, p0_observed)``.

    For each positive delta, the hypercube dimension where ``p_max / p0``
    first falls below ``1 - drop`` is located by linear interpolation
    between grid points and returned as a database exponent.
    """
    by_delta = {}
    for m, delta, p_max, p0_obs in rows:
        if delta > 0:
            by_delta.setdefault(delta, []).append((m, p_max / p0_obs))
    out = []
    level = 1 - drop
    for delta, pts in sorted(by_delta.items()):
        pts.sort()
        for (m_a, r_a), (m_b, r_b) in zip(pts, pts[1:]):
            if r_a >= level > r_b:
                m_c = m_a + (r_a - level) / (r_a - r_b) * (m_b - m_a)
                n_c = database_exponent(m_c)
                out.append(FitSample(n_c, delta, n_c))
                break
    return out
