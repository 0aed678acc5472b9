from dataclasses import dataclass
import math


class ConfigError(ValueError):
    """Invalid walk parameters."""


@dataclass(frozen=True)
class WalkConfig:
    """Parameters shared by every walk operator.

    ``m`` is the hypercube dimension; the searched database holds the
    ``2**(m - 1)`` even-weight vertices. ``delta`` is the systematic phase
    error of the Grover coin, whose phase is ``theta = pi + delta``.
    """

    m: int
    delta: float = 0.0

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise ConfigError(f"m must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "delta", float(self.delta))
        if self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")
        if not math.isfinite(self.delta) or abs(self.delta) >= math.pi:
            raise ConfigError(f"|delta| must be < pi, got {self.delta}")

    @property
    def theta(self) -> float:
        return math.pi + self.delta

    @property
    def database_size(self) -> int:
        return 2 ** (self.m - 1)

    @property
    def coin_factor(self) -> complex:
        """``1 - exp(i*theta)``, equal to ``1 + exp(i*delta)``."""
        return 1.0 + complex(math.cos(self.delta), math.sin(self.delta))

    def require_multiple_of_four(self):
        if self.m % 4:
            raise ConfigError(f"m must be a multiple of 4, got {self.m}")
