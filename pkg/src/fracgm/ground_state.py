"""Ground state of (-Delta)^s U + U - U^2 = 0 on the line.

The profile is computed by Petviashvili iteration on the periodic grid and
then polished with a matrix-free Newton-GMRES step restricted to even
functions (the translation mode U' is odd, so the linearization is
invertible there).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import BPoly
from scipy.sparse.linalg import LinearOperator, gmres

from . import spectral as sp
from .errors import ConvergenceError, DomainError, InvalidParameterError, SymmetryError
from .spectral import Field, Grid1D

CONVOLUTION_KINDS = ("u2_conv_u", "u2_conv_pow", "u2_conv_log")


@dataclass(frozen=True, eq=False)
class GroundState:
    field: Field
    s: float
    mass_u2: float
    mass_u3: float
    tail_coeff: float
    peak: float
    residual: float
    multiplier: float = 1.0
    iterations: int = 0
    history: tuple = dc_field(default=(), repr=False)

    @property
    def grid(self) -> Grid1D:
        return self.field.grid

    @property
    def decay_exponent(self) -> float:
        return 1.0 + 2.0 * self.s

    @functools.cached_property
    def _interp(self):
        g = self.grid
        n = g.n_points
        u = self.field.values
        du = sp.derivative(u, g)
        d2u = sp.derivative(du, g)
        # nodes 0 .. L/2 on the positive half; wrap effects grow beyond that
        stop = n // 2 + n // 4 + 1
        xs = g.x[n // 2:stop]
        derivs = np.stack([u[n // 2:stop], du[n // 2:stop], d2u[n // 2:stop]], axis=1)
        return BPoly.from_derivatives(xs, derivs), float(xs[-1])

    @property
    def interpolation_limit(self) -> float:
        return self._interp[1]

    def profile(self, r) -> np.ndarray:
        """U(|r|): quintic Hermite interpolation of the grid solution,
        ``tail_coeff * |r|**-(1+2s)`` beyond :attr:`interpolation_limit`."""
        poly, rmax = self._interp
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inside = r <= rmax
        out[inside] = poly(r[inside])
        out[~inside] = self.tail_coeff * r[~inside] ** (-self.decay_exponent)
        return out

    def profile_derivative(self, r) -> np.ndarray:
        """d/dr U(r) for signed r (odd function)."""
        poly, rmax = self._interp
        r = np.asarray(r, dtype=float)
        a = np.abs(r)
        out = np.empty_like(a)
        inside = a <= rmax
        out[inside] = poly.derivative()(a[inside])
        p = self.decay_exponent
        out[~inside] = -p * self.tail_coeff * a[~inside] ** (-p - 1.0)
        return np.sign(r) * out

    def summary(self) -> dict:
        return {
            "s": self.s,
            "peak": self.peak,
            "mass_u2": self.mass_u2,
            "mass_u3": self.mass_u3,
            "tail_coeff": self.tail_coeff,
            "residual": self.residual,
        }


def ground_state_residual(u: np.ndarray, grid: Grid1D, s: float) -> np.ndarray:
    return sp.flap(u, grid, s) + u - u * u


def _symmetrize(u, grid):
    return 0.5 * (u + u[grid.mirror])


def _tail_coefficient(u: np.ndarray, grid: Grid1D, s: float) -> float:
    """Prefactor of U ~ b |x|^{-(1+2s)} from the window [L/8, L/4].

    The periodic images at x + 2Lj are included in the model so the estimate
    is not biased by the wrap-around.
    """
    L = grid.half_length
    x = grid.x
    sel = (x >= L / 8) & (x <= L / 4)
    p = 1.0 + 2.0 * s
    j = np.arange(-20, 21)
    images = np.sum(np.abs(x[sel][:, None] + 2 * L * j[None, :]) ** (-p), axis=1)
    return float(np.exp(np.mean(np.log(u[sel] / images))))


def _newton_polish(u, grid, s, tol, max_newton=20):
    history = []
    for _ in range(max_newton):
        F = ground_state_residual(u, grid, s)
        res = float(np.max(np.abs(F)))
        history.append(res)
        if res <= tol:
            break
        two_u = 2.0 * u
        n = grid.n_points
        J = LinearOperator((n, n), matvec=lambda v: sp.flap(v, grid, s) + v - two_u * v, dtype=float)
        P = LinearOperator((n, n), matvec=lambda v: sp.resolve(v, grid, s, 1.0), dtype=float)
        delta, _ = gmres(J, -F, M=P, rtol=1e-13, atol=0.0, restart=80, maxiter=20)
        u = _symmetrize(u + delta, grid)
    return u, history


def solve_ground_state(s: float, grid: Grid1D, tol: float = 1e-10, *,
                       gamma: float = 2.0, max_iter: int = 3000,
                       handoff: float = 1e-6) -> GroundState:
    """Solve for the positive even ground state on ``grid``.

    Petviashvili map ``U <- M**gamma * ((-Delta)^s + 1)^{-1} U^2`` with
    ``M = <U, ((-Delta)^s + 1) U> / <U^2, U>`` until the residual drops below
    ``handoff``, then Newton-GMRES to ``tol``.
    """
    if not 0.0 < s < 1.0:
        raise InvalidParameterError(f"ground state needs s in (0, 1), got {s}")
    x = grid.x
    e = np.exp(-2.0 * np.abs(x) / 1.5)
    u = 6.0 * e / (1.0 + e) ** 2  # 1.5 sech^2(x/1.5) without overflow
    if u[0] > 1e-4:
        raise InvalidParameterError("grid too small: the initial guess does not decay below 1e-4")
    h = grid.spacing
    centre = grid.n_points // 2
    history = []
    for it in range(1, max_iter + 1):
        u2 = u * u
        lu = sp.flap(u, grid, s) + u
        M = np.dot(u, lu) / np.dot(u2, u)
        u = M ** gamma * sp.resolve(u2, grid, s, 1.0)
        u = _symmetrize(u, grid)
        if it % 50 == 0:
            peak_at = int(np.argmax(u))
            if peak_at != centre:
                u = np.roll(u, centre - peak_at)
                u = _symmetrize(u, grid)
        res = float(np.max(np.abs(ground_state_residual(u, grid, s))))
        history.append(res)
        if not np.isfinite(res) or np.max(u) < 1e-8:
            raise ConvergenceError(f"Petviashvili iteration collapsed at step {it}", history)
        if res < handoff:
            break
    else:
        raise ConvergenceError(f"Petviashvili did not reach {handoff} in {max_iter} steps", history)

    u, newton_hist = _newton_polish(u, grid, s, tol)
    history.extend(newton_hist)
    res = float(np.max(np.abs(ground_state_residual(u, grid, s))))
    if res > tol:
        raise ConvergenceError(f"ground state residual {res:.3e} above {tol:.1e}", history)
    if np.max(np.abs(u - u[grid.mirror])) > 1e-10:
        raise SymmetryError("ground state drifted away from even symmetry")
    u2 = u * u
    M = float(np.dot(u, sp.flap(u, grid, s) + u) / np.dot(u2, u))
    return GroundState(
        field=Field(grid, u),
        s=float(s),
        mass_u2=float(h * np.sum(u2)),
        mass_u3=float(h * np.sum(u2 * u)),
        tail_coeff=_tail_coefficient(u, grid, s),
        peak=float(u[centre]),
        residual=res,
        multiplier=M,
        iterations=it,
        history=tuple(history),
    )


@functools.lru_cache(maxsize=16)
def cached_ground_state(s: float, n_points: int, half_length: float) -> GroundState:
    """Memoized :func:`solve_ground_state` keyed by (s, grid)."""
    return solve_ground_state(s, Grid1D(n_points, half_length))


def kernel_direction(gs: GroundState) -> Field:
    """U', the generator of translations (spans Ker L0)."""
    return sp.spectral_derivative(gs.field)


def linearized_operator(gs: GroundState, f: Field) -> Field:
    """L0 f = (-Delta)^s f + (1 - 2U) f."""
    u = gs.field.values
    return Field(gs.grid, sp.flap(f.values, gs.grid, gs.s) + (1.0 - 2.0 * u) * f.values)


def _line_quadrature(gs: GroundState, x: float, kernel) -> float:
    g = gs.grid
    y = g.x
    d = x - y
    keep = np.abs(d) <= g.half_length
    return float(g.spacing * np.sum(gs.field.values[keep] ** 2 * kernel(d[keep])))


def convolution_asymptotics(gs: GroundState, kind: str, x: float) -> float:
    """Direct quadrature of U^2 * K at ``x`` for the kernels of the appendix.

    ``u2_conv_u``: K = U;  ``u2_conv_pow``: K = |.|^{2s-1};
    ``u2_conv_log``: K = log|.|.  The kernel is cut at |x-y| <= L so the
    periodic wrap never enters.
    """
    if kind not in CONVOLUTION_KINDS:
        raise DomainError(f"unknown convolution kind {kind!r}")
    L = gs.grid.half_length
    if not 0.0 <= x <= L / 2:
        raise DomainError(f"x = {x} outside [0, L/2] = [0, {L / 2}]")
    h = gs.grid.spacing
    if kind == "u2_conv_u":
        return _line_quadrature(gs, x, gs.profile)
    if kind == "u2_conv_pow":
        return _line_quadrature(gs, x, lambda d: np.abs(d) ** (2.0 * gs.s - 1.0))

    def log_kernel(d):
        a = np.abs(d)
        # the node at d = 0 carries the cell average of log|t|
        return np.where(a < 0.5 * h, np.log(0.5 * h) - 1.0, np.log(np.maximum(a, 0.5 * h)))

    return _line_quadrature(gs, x, log_kernel)


def interaction_kernel(gs: GroundState, z) -> np.ndarray:
    """delta_s(z) = integral of U(y) U(y - z) dy on the line (no wrap)."""
    g = gs.grid
    u = gs.field.values
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        out[i] = g.spacing * np.sum(u * gs.profile(g.x - zi))
    return out
