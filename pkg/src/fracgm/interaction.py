"""Pair interaction F(r) = alpha U(r) + beta * far(r) and its derivative.

``far(r)`` is ``eps^{2s-1} r^{2s-1}`` for s > 1/2 and ``log r / log(1/eps)``
for s = 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import FracParams


@dataclass(frozen=True)
class InteractionConstants:
    alpha: float
    beta: float
    ground_state: object = field(repr=False, compare=False)
    calibration_report: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def gamma(self) -> float:
        return self.alpha / self.beta

    def scaled(self, alpha_factor: float, beta_factor: float) -> "InteractionConstants":
        return InteractionConstants(self.alpha * alpha_factor, self.beta * beta_factor,
                                    self.ground_state, dict(self.calibration_report))

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def far_term(r, params: FracParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if params.s == 0.5:
        return np.log(r) * params.coupling
    return params.coupling * r ** (2.0 * params.s - 1.0)


def far_term_derivative(r, params: FracParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if params.s == 0.5:
        return params.coupling / r
    p = 2.0 * params.s - 1.0
    return params.coupling * p * r ** (p - 1.0)


def pair_energy(r, params: FracParams, consts: InteractionConstants) -> np.ndarray:
    gs = consts.ground_state
    return consts.alpha * gs.profile(r) + consts.beta * far_term(r, params)


def pair_derivative(r, params: FracParams, consts: InteractionConstants) -> np.ndarray:
    """dF/dr for r > 0."""
    gs = consts.ground_state
    return consts.alpha * gs.profile_derivative(r) + consts.beta * far_term_derivative(r, params)
