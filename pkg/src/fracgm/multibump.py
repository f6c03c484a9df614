"""Multi-bump ansatz W, inhibitor response V = T(W^2), error S(W), and the
projections of S(W) on the translation modes Z_j."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import spectral as sp
from .errors import InhibitorPositivityError, InvalidParameterError, TruncationError
from .ground_state import GroundState
from .interaction import InteractionConstants, pair_derivative
from .params import FracParams
from .spectral import Field, Grid1D

Parity = Literal["even_k", "odd_k"]


@dataclass(frozen=True)
class SpikeConfig:
    """Mirror-symmetric spike set given by q_1 > ... > q_m > 0.

    ``even_k`` places spikes at +-q_i (k = 2m); ``odd_k`` adds one at 0.
    """

    half_positions: tuple
    parity: Parity = "even_k"

    def __post_init__(self):
        q = tuple(float(v) for v in np.atleast_1d(self.half_positions))
        if self.parity not in ("even_k", "odd_k"):
            raise InvalidParameterError(f"unknown parity {self.parity!r}")
        if not q and self.parity == "even_k":
            raise InvalidParameterError("an even configuration needs at least one position")
        if any(not np.isfinite(v) or v <= 0 for v in q):
            raise InvalidParameterError(f"half positions must be positive, got {q}")
        if any(a <= b for a, b in zip(q, q[1:])):
            raise InvalidParameterError(f"half positions must be strictly decreasing, got {q}")
        object.__setattr__(self, "half_positions", q)

    @classmethod
    def from_unsorted(cls, positions, parity: Parity = "even_k") -> "SpikeConfig":
        return cls(tuple(sorted((float(p) for p in positions), reverse=True)), parity)

    @property
    def m(self) -> int:
        return len(self.half_positions)

    @property
    def k(self) -> int:
        return 2 * self.m + (self.parity == "odd_k")

    @property
    def positions(self) -> np.ndarray:
        """All k spike centres in decreasing order (q_i = -q_{k+1-i})."""
        q = np.array(self.half_positions)
        mid = [0.0] if self.parity == "odd_k" else []
        return np.concatenate([q, mid, -q[::-1]])

    def scaled(self, factor: float) -> "SpikeConfig":
        return SpikeConfig(tuple(factor * q for q in self.half_positions), self.parity)

    def with_half_positions(self, q) -> "SpikeConfig":
        return SpikeConfig.from_unsorted(q, self.parity)

    def in_window(self, window) -> bool:
        return window.contains(self.half_positions, odd=self.parity == "odd_k")


@dataclass(frozen=True, eq=False)
class MultiBumpContext:
    params: FracParams
    gs: GroundState
    config: SpikeConfig
    W: Field
    V: Field
    mu: float
    bumps: np.ndarray = field(repr=False)
    modes: np.ndarray = field(repr=False)

    @property
    def grid(self) -> Grid1D:
        return self.W.grid

    @property
    def Z(self) -> list[Field]:
        """Translation modes Z_j = dW/dq_j = -U'(x - q_j)."""
        return [Field(self.grid, z) for z in self.modes]


def _shifted_profiles(gs: GroundState, grid: Grid1D, centres) -> tuple[np.ndarray, np.ndarray]:
    if gs.grid == grid:
        u = gs.field.values
        du = sp.derivative(u, grid)
        bumps = np.array([sp.shift(u, grid, q) for q in centres])
        slopes = np.array([sp.shift(du, grid, q) for q in centres])
    else:
        bumps = np.array([gs.profile(grid.x - q) for q in centres])
        slopes = np.array([gs.profile_derivative(grid.x - q) for q in centres])
    return bumps, -slopes


def build_context(params: FracParams, gs: GroundState, config: SpikeConfig,
                  grid: Grid1D | None = None, mu: float | None = None) -> MultiBumpContext:
    grid = gs.grid if grid is None else grid
    if config.k != params.k:
        raise InvalidParameterError(f"configuration has {config.k} spikes but params.k = {params.k}")
    if abs(gs.s - params.s) > 1e-14:
        raise InvalidParameterError("ground state and parameters disagree on s")
    L = grid.half_length
    if np.max(np.abs(config.positions)) > 0.5 * L:
        raise TruncationError(f"spikes reach {np.max(np.abs(config.positions))}, beyond L/2 = {L / 2}")
    if params.eps * L < np.pi:
        raise TruncationError(
            f"box too small for the inhibitor: eps*L = {params.eps * L:.3g} < pi "
            "(the lowest mode no longer sees the eps^{2s} mass)")
    mu = 1.0 + 2.0 * params.s if mu is None else float(mu)
    if not 0.5 < mu <= 1.0 + 2.0 * params.s:
        raise InvalidParameterError(f"weight exponent mu = {mu} outside (1/2, 1+2s]")
    bumps, modes = _shifted_profiles(gs, grid, config.positions)
    w = bumps.sum(axis=0)
    v = params.tau_eps * sp.resolve(w * w, grid, params.s, params.inhibitor_mass)
    if np.min(v) <= 0:
        raise InhibitorPositivityError(f"V reaches {np.min(v):.3e}; enlarge the box or refine the grid")
    return MultiBumpContext(params, gs, config, Field(grid, w), Field(grid, v), mu, bumps, modes)


def error_term_forms(ctx: MultiBumpContext) -> tuple[Field, Field, float]:
    """S(W) computed spectrally and from the ground-state identity, with
    their sup-norm discrepancy."""
    g, s = ctx.grid, ctx.params.s
    w, v = ctx.W.values, ctx.V.values
    spectral = -sp.flap(w, g, s) - w + w * w / v
    algebraic = w * w / v - np.sum(ctx.bumps ** 2, axis=0)
    return Field(g, spectral), Field(g, algebraic), float(np.max(np.abs(spectral - algebraic)))


def error_term(ctx: MultiBumpContext) -> Field:
    """S(W) = -(-Delta)^s W - W + W^2 / V."""
    return error_term_forms(ctx)[0]


def weight(config: SpikeConfig, grid: Grid1D, mu: float) -> np.ndarray:
    x = grid.x
    return np.sum((1.0 + np.abs(x[None, :] - config.positions[:, None])) ** (-mu), axis=0)


def weighted_norm(f: Field, config: SpikeConfig, mu: float) -> float:
    """sup |f| / rho with rho(x) = sum_j (1 + |x - q_j|)^{-mu}."""
    if not mu > 0.5:
        raise InvalidParameterError(f"mu must exceed 1/2, got {mu}")
    return float(np.max(np.abs(f.values) / weight(config, f.grid, mu)))


def project_error(ctx: MultiBumpContext, S: Field | None = None) -> np.ndarray:
    """<S(W), Z_j> for every spike, ordered like ``config.positions``."""
    S = error_term(ctx) if S is None else S
    return ctx.grid.spacing * ctx.modes @ S.values


def gram_matrix(ctx: MultiBumpContext) -> np.ndarray:
    return ctx.grid.spacing * ctx.modes @ ctx.modes.T


def reduced_force(config: SpikeConfig, params: FracParams,
                  interaction: InteractionConstants) -> np.ndarray:
    """b_j = sum_{i != j} d/dq_j F(|q_j - q_i|) over the full symmetric set,
    reported for the m free coordinates (the mirror spikes held fixed)."""
    q = config.positions
    d = q[: config.m, None] - q[None, :]
    off = np.ones_like(d, dtype=bool)
    off[np.arange(config.m), np.arange(config.m)] = False
    r = np.abs(d[off])
    if np.any(r < 1.0):
        warnings.warn(f"spike separation {r.min():.3g} < 1 is outside the asymptotic range",
                      RuntimeWarning, stacklevel=2)
    contrib = np.zeros_like(d)
    contrib[off] = np.sign(d[off]) * pair_derivative(r, params, interaction)
    return contrib.sum(axis=1)


def inhibitor_at_spikes(ctx: MultiBumpContext) -> np.ndarray:
    return np.array([_value_at(ctx.V, q) for q in ctx.config.positions])


def _value_at(f: Field, x0: float) -> float:
    """Trigonometric interpolation of f at x0."""
    return float(sp.shift(f.values, f.grid, -x0)[f.grid.n_points // 2])
