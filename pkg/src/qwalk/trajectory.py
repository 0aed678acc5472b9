"""Per-iteration success probabilities and the peak conventions used on them."""

from dataclasses import dataclass
import math

import numpy as np

# a peak counts as "the" first peak only if it reaches this fraction of the
# window maximum; filters out small ripples before the main rise
FIRST_PEAK_FRACTION = 0.9


def default_budget(m: int) -> int:
    """Step window ``ceil(2.5 * (pi/4) * sqrt(2**m))`` used for observed peaks."""
    return math.ceil(2.5 * (math.pi / 4) * math.sqrt(2.0**m))


@dataclass
class Trajectory:
    """Rows ``(t, p_success, p_gap)`` for ``t = 1..t_max``.

    The ``t = 0`` values (the initial state) are kept apart in
    ``initial_success`` / ``initial_gap`` so the rows always start at 1.
    """

    p_success: np.ndarray
    p_gap: np.ndarray
    initial_success: float
    initial_gap: float

    def __post_init__(self):
        self.p_success = np.asarray(self.p_success, dtype=float)
        self.p_gap = np.asarray(self.p_gap, dtype=float)
        if self.p_success.shape != self.p_gap.shape:
            raise ValueError("p_success and p_gap lengths differ")

    def __len__(self):
        return len(self.p_success)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def success_at(self, t: int) -> float:
        if t == 0:
            return self.initial_success
        return float(self.p_success[t - 1])

    def gap_at(self, t: int) -> float:
        if t == 0:
            return self.initial_gap
        return float(self.p_gap[t - 1])

    def argmax(self) -> int:
        """Step of the largest success probability; ties go to the smaller t."""
        if not len(self):
            raise ValueError("empty trajectory")
        return int(np.argmax(self.p_success)) + 1

    @property
    def p_max(self) -> float:
        return float(self.p_success.max())

    def local_maxima(self) -> list:
        p = self.p_success
        return [i + 1 for i in range(1, len(p) - 1) if p[i] > p[i - 1] and p[i] >= p[i + 1]]

    def first_peak(self, fraction: float = FIRST_PEAK_FRACTION) -> int:
        """First local maximum reaching ``fraction`` of the window maximum.

        Near-equal revivals of the oscillation make the plain argmax jump to
        the third or fifth peak; this picks the first one.
        """
        p = self.p_success
        if not len(p):
            raise ValueError("empty trajectory")
        floor = fraction * p.max()
        for i in range(len(p)):
            left = p[i - 1] if i > 0 else -np.inf
            right = p[i + 1] if i + 1 < len(p) else -np.inf
            if p[i] >= left and p[i] >= right and p[i] >= floor:
                return i + 1
        return self.argmax()
