"""Model parameters (s, eps, k) and the quantities derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError


def separation_scale(s: float, eps: float) -> float:
    """Typical spike spacing: eps^{(1-2s)/(4s)}, or sqrt(log 1/eps) at s = 1/2."""
    if s == 0.5:
        return math.sqrt(math.log(1.0 / eps))
    return eps ** ((1.0 - 2.0 * s) / (4.0 * s))


def far_coupling(s: float, eps: float) -> float:
    """Prefactor of the repulsive term: eps^{2s-1}, or 1/log(1/eps) at s = 1/2."""
    if s == 0.5:
        return 1.0 / math.log(1.0 / eps)
    return eps ** (2.0 * s - 1.0)


@dataclass(frozen=True)
class FracParams:
    s: float
    eps: float
    k: int
    mass_u2: float

    def __post_init__(self):
        if not 0.5 <= self.s < 1.0:
            raise InvalidParameterError(f"s must lie in [1/2, 1), got {self.s}")
        if not 0.0 < self.eps < 1.0:
            raise InvalidParameterError(f"eps must lie in (0, 1), got {self.eps}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError(f"k must be a positive integer, got {self.k}")
        if not self.mass_u2 > 0:
            raise InvalidParameterError("mass_u2 must be positive")
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_ground_state(cls, gs, eps: float, k: int) -> "FracParams":
        return cls(s=gs.s, eps=eps, k=k, mass_u2=gs.mass_u2)

    @property
    def inhibitor_mass(self) -> float:
        """eps^{2s}, the mass term of the inhibitor operator."""
        return self.eps ** (2.0 * self.s)

    @property
    def tau_eps(self) -> float:
        s, eps = self.s, self.eps
        if s == 0.5:
            return 1.0 / (self.k / math.pi * math.log(1.0 / eps) * self.mass_u2)
        a0 = 1.0 / (2.0 * s * math.sin(math.pi / (2.0 * s)))
        return 1.0 / (self.k * a0 * eps ** (1.0 - 2.0 * s) * self.mass_u2)

    @property
    def omega(self) -> float:
        return 1.0 / (self.k * self.mass_u2)

    @property
    def scale(self) -> float:
        return separation_scale(self.s, self.eps)

    @property
    def coupling(self) -> float:
        return far_coupling(self.s, self.eps)

    def with_eps(self, eps: float) -> "FracParams":
        return FracParams(self.s, eps, self.k, self.mass_u2)

    def as_dict(self) -> dict:
        return {"s": self.s, "eps": self.eps, "k": self.k, "mass_u2": self.mass_u2,
                "tau_eps": self.tau_eps, "omega": self.omega}
