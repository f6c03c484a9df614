"""Projected (Lyapunov-Schmidt) problem and the full nonlinear solve of

    (-Delta)^s u + u - u^2 / T(u^2) = 0,   T = tau_eps ((-Delta)^s + eps^{2s})^{-1}.

The projected problem asks for phi orthogonal to every Z_j and multipliers
c_j with F(W + phi) = sum_j c_j Z_j, where F is the left-hand side above.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import spectral as sp
from .errors import ConvergenceError, DivergenceError
from .multibump import MultiBumpContext, error_term, gram_matrix, weighted_norm
from .spectral import Field

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LSResult:
    phi: Field
    c: np.ndarray
    iterations: int
    residual: float
    star_norm_phi: float
    method: str = "fixed_point"
    history: list = field(default_factory=list, repr=False)

    def projected_multipliers(self, ctx: MultiBumpContext) -> np.ndarray:
        """-Gram @ c, the normalization in which c matches the reduced force."""
        return -gram_matrix(ctx) @ self.c


@dataclass(frozen=True, eq=False)
class SolutionPair:
    u: Field
    v: Field
    residual_u: float
    residual_v: float
    newton_iterations: int
    history: list = field(default_factory=list, repr=False)
    converged: bool = True


# --- operators -------------------------------------------------------------

class NonlocalProblem:
    """F(u), its Jacobian and the system residuals for one (params, grid)."""

    def __init__(self, params, grid):
        self.params = params
        self.grid = grid
        self.s = params.s
        self.tau = params.tau_eps
        self.mass = params.inhibitor_mass

    def T(self, h: np.ndarray) -> np.ndarray:
        return self.tau * sp.resolve(h, self.grid, self.s, self.mass)

    def F(self, u: np.ndarray) -> np.ndarray:
        return sp.flap(u, self.grid, self.s) + u - u * u / self.T(u * u)

    def jacobian(self, u: np.ndarray):
        """v -> (-Delta)^s v + v - 2uv/T(u^2) + u^2 T(2uv)/T(u^2)^2."""
        tu2 = self.T(u * u)
        a = 2.0 * u / tu2
        b = u * u / tu2 ** 2

        def apply(v):
            return sp.flap(v, self.grid, self.s) + v - a * v + b * self.T(2.0 * u * v)

        return apply

    def residuals(self, u: np.ndarray) -> tuple[np.ndarray, float, float]:
        """v = T(u^2) and the sup residuals of both equations of the system."""
        v = self.T(u * u)
        r_u = sp.flap(u, self.grid, self.s) + u - u * u / v
        r_v = sp.flap(v, self.grid, self.s) + self.mass * v - self.tau * u * u
        return v, float(np.max(np.abs(r_u))), float(np.max(np.abs(r_v)))


def _linear_L(ctx: MultiBumpContext):
    """L phi = (-Delta)^s phi + (1 - 2W) phi + 2 omega W^2 <W, phi>."""
    g, s = ctx.grid, ctx.params.s
    w = ctx.W.values
    w2 = 2.0 * ctx.params.omega * w * w
    h = g.spacing

    def apply(phi):
        return sp.flap(phi, g, s) + (1.0 - 2.0 * w) * phi + w2 * (h * np.dot(w, phi))

    return apply


def _saddle_solve(ctx, apply_op, rhs, tol=1e-12):
    """Solve [A, -Z; Z^T h, 0][phi; c] = [rhs; 0] by preconditioned GMRES."""
    g = ctx.grid
    n, k = g.n_points, ctx.config.k
    Z = ctx.modes
    h = g.spacing
    s = ctx.params.s

    def matvec(x):
        phi, c = x[:n], x[n:]
        return np.concatenate([apply_op(phi) - Z.T @ c, h * (Z @ phi)])

    # block preconditioner: resolvent on phi, exact Schur complement on c
    PZ = np.array([sp.resolve(z, g, s, 1.0) for z in Z]).T
    schur_inv = np.linalg.inv(h * Z @ PZ)

    def precond(x):
        phi = sp.resolve(x[:n], g, s, 1.0)
        c = schur_inv @ (x[n:] - h * (Z @ phi))
        return np.concatenate([phi + PZ @ c, c])

    A = LinearOperator((n + k, n + k), matvec=matvec, dtype=float)
    M = LinearOperator((n + k, n + k), matvec=precond, dtype=float)
    b = np.concatenate([rhs, np.zeros(k)])
    x, info = gmres(A, b, M=M, rtol=tol, atol=0.0, restart=100, maxiter=50)
    res = float(np.linalg.norm(matvec(x) - b) / max(np.linalg.norm(b), 1e-300))
    return x[:n], x[n:], res, info


def _symmetrize(u, grid):
    return 0.5 * (u + u[grid.mirror])


def _antisymmetrize_c(c):
    return 0.5 * (c - c[::-1])


# --- projected problem -------------------------------------------------------

def lyapunov_schmidt_solve(ctx: MultiBumpContext, tol: float = 1e-10, max_iter: int = 60, *,
                           fallback: bool = True) -> LSResult:
    """phi = (L-saddle)^{-1}(S(W) + N(phi)) by fixed-point iteration.

    Convergence is measured in the weighted *-norm.  If the iteration stops
    contracting and ``fallback`` is set, the same projected equations are
    solved by Newton's method instead (``method='newton'`` in the result).
    """
    g = ctx.grid
    prob = NonlocalProblem(ctx.params, g)
    w = ctx.W.values
    S = error_term(ctx).values
    L = _linear_L(ctx)
    omega = ctx.params.omega
    wv2 = w * w / ctx.V.values
    h = g.spacing

    def N(phi):
        u = w + phi
        return (u * u / prob.T(u * u) - wv2 - 2.0 * w * phi
                + 2.0 * omega * w * w * (h * np.dot(w, phi)))

    config, mu = ctx.config, ctx.mu
    phi = np.zeros(g.n_points)
    history = []
    c = np.zeros(config.k)
    diverged = False
    for it in range(1, max_iter + 1):
        new_phi, c, lin_res, _ = _saddle_solve(ctx, L, S + N(phi))
        new_phi = _symmetrize(new_phi, g)
        c = _antisymmetrize_c(c)
        step = weighted_norm(Field(g, new_phi - phi), config, mu)
        history.append(step)
        phi = new_phi
        if step < tol:
            break
        if len(history) >= 4 and (history[-1] > history[-2] > history[-3]):
            diverged = True
            break
        if not np.all(np.isfinite(phi)):
            diverged = True
            break
    else:
        if history[-1] > tol:
            diverged = True
    method = "fixed_point"
    if diverged:
        if not fallback:
            raise DivergenceError("fixed point on N(phi) does not contract; try smaller eps "
                                  "or better separated spikes", history)
        log.info("fixed point stalled after %d steps; switching to Newton", len(history))
        phi, c, it, newton_hist = _ls_newton(ctx, prob, np.zeros(g.n_points), tol)
        history = history + newton_hist
        method = "newton"
    F = prob.F(w + phi)
    residual = float(np.max(np.abs(F - ctx.modes.T @ c)))
    return LSResult(Field(g, phi), c, it, residual,
                    weighted_norm(Field(g, phi), config, mu), method, history)


def _ls_newton(ctx, prob, phi, tol, max_iter=30):
    """Newton on F(W + phi) = sum c_j Z_j, <phi, Z_j> = 0."""
    g = ctx.grid
    w = ctx.W.values
    Z = ctx.modes
    history = []
    c = np.zeros(ctx.config.k)
    for it in range(1, max_iter + 1):
        u = w + phi
        R = prob.F(u) - Z.T @ c
        res = float(np.max(np.abs(R)))
        history.append(res)
        if res < tol:
            break
        dphi, dc, lin_res, _ = _saddle_solve(ctx, prob.jacobian(u), -R)
        phi = _symmetrize(phi + dphi, g)
        c = _antisymmetrize_c(c + dc)
    else:
        raise ConvergenceError("Newton on the projected problem did not converge", history)
    return phi, c, it, history


# --- full problem -----------------------------------------------------------

def newton_full(ctx: MultiBumpContext, seed: Field | None = None, tol: float = 1e-8,
                max_iter: int = 40, krylov_tol: float = 1e-11) -> SolutionPair:
    """Damped Newton-GMRES for F(u) = 0 within even functions."""
    g = ctx.grid
    prob = NonlocalProblem(ctx.params, g)
    if seed is None:
        ls = lyapunov_schmidt_solve(ctx)
        u = ctx.W.values + ls.phi.values
    else:
        if seed.grid != g:
            raise ValueError("seed lives on a different grid")
        u = np.array(seed.values)
    u = _symmetrize(u, g)
    n = g.n_points
    precond = LinearOperator((n, n), matvec=lambda r: sp.resolve(r, g, prob.s, 1.0), dtype=float)
    history = []
    Fu = prob.F(u)
    res = float(np.max(np.abs(Fu)))
    history.append(res)
    it = 0
    for it in range(1, max_iter + 1):
        if res <= tol:
            it -= 1
            break
        J = LinearOperator((n, n), matvec=prob.jacobian(u), dtype=float)
        delta, _ = gmres(J, -Fu, M=precond, rtol=krylov_tol, atol=0.0, restart=120, maxiter=20)
        delta = _symmetrize(delta, g)
        lam = 1.0
        while True:
            trial = u + lam * delta
            if np.min(trial) <= 0:
                warnings.warn("Newton step made u non-positive; clipping", RuntimeWarning, stacklevel=2)
                trial = np.maximum(trial, 1e-300)
            F_trial = prob.F(trial)
            r_trial = float(np.max(np.abs(F_trial)))
            if r_trial < (1.0 - 0.25 * lam) * res or lam < 1e-4:
                break
            lam *= 0.5
        u, Fu, res = trial, F_trial, r_trial
        history.append(res)
    v, r_u, r_v = prob.residuals(u)
    converged = max(r_u, r_v) <= tol and np.min(u) > 0
    if not converged:
        log.warning("Newton stopped at residual %.3e after %d steps", res, it)
    return SolutionPair(Field(g, u), Field(g, v), r_u, r_v, it, history, bool(converged))


# --- verification ------------------------------------------------------------

def local_maxima(values: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Indices of strict interior local maxima above ``floor`` (periodic)."""
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    return np.where((values > left) & (values >= right) & (values > floor))[0]


def parabola_peak(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex (position, height) of the parabola through nodes i-1, i, i+1."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    h = x[i + 1] - x[i]
    denom = y0 - 2.0 * y1 + y2
    delta = 0.5 * (y0 - y2) / denom
    return float(x[i] + delta * h), float(y1 - 0.25 * (y0 - y2) * delta)


def spectral_peak(f: Field, x0: float, iters: int = 30) -> tuple[float, float]:
    """Peak of the trigonometric interpolant near x0 by Newton on f'."""
    g = f.grid
    d1 = sp.derivative(f.values, g)
    d2 = sp.derivative(d1, g)
    coeffs = [np.fft.rfft(a) for a in (f.values, d1, d2)]
    k = g.rxi
    weights = np.ones_like(k) * 2.0
    weights[0] = 1.0
    weights[-1] = 1.0

    def evaluate(c, x):
        return float(np.real(np.sum(weights * c * np.exp(1j * k * (x + g.half_length)))) / g.n_points)

    x = x0
    for _ in range(iters):
        step = evaluate(coeffs[1], x) / evaluate(coeffs[2], x)
        x -= step
        if abs(step) < 1e-13:
            break
    return x, evaluate(coeffs[0], x)


def verify_solution(pair: SolutionPair, ctx: MultiBumpContext, predicted=None) -> dict:
    """Profile metrics: deviation from W, inhibitor plateau, spike heights and
    positions (parabola and spectral fits), parity and peak count."""
    g = ctx.grid
    x, u, v = g.x, pair.u.values, pair.v.values
    peaks = local_maxima(u)
    fitted, heights, fitted_spectral = [], [], []
    for i in peaks:
        p, hgt = parabola_peak(x, u, i)
        fitted.append(p)
        heights.append(hgt)
        fitted_spectral.append(spectral_peak(pair.u, x[i])[0])
    order = np.argsort(fitted)[::-1]
    fitted = [fitted[i] for i in order]
    fitted_spectral = [fitted_spectral[i] for i in order]
    heights = [heights[i] for i in order]
    plateau = []
    for q in ctx.config.positions:
        near = np.abs(x - q) <= 2.0
        plateau.append(float(np.max(np.abs(v[near] - 1.0))))
    report = {
        "sup_u_deviation": float(np.max(np.abs(u - ctx.W.values))),
        "v_plateau_deviation": float(max(plateau)),
        "spike_heights": heights,
        "fitted_positions": fitted,
        "fitted_positions_spectral": fitted_spectral,
        "n_local_maxima": int(len(peaks)),
        "even_symmetry_error": float(np.max(np.abs(u - u[g.mirror]))),
        "residual_u": pair.residual_u,
        "residual_v": pair.residual_v,
        "min_u": float(np.min(u)),
        "min_v": float(np.min(v)),
    }
    ref = ctx.config.positions if predicted is None else np.asarray(predicted, dtype=float)
    report["reference_positions"] = ref.tolist()
    if len(fitted) == len(ref):
        rel = np.abs(np.array(fitted_spectral) - ref) / np.maximum(np.abs(ref), 1e-300)
        report["position_relative_error"] = float(np.max(rel))
    else:
        report["position_relative_error"] = None
    return report


def refined_residuals(u: Field, params, factor: int = 2) -> tuple[float, float]:
    """Residuals of the system after trigonometric refinement of u."""
    g = u.grid
    fine = g.refined(factor)
    coeffs = np.fft.rfft(u.values)
    padded = np.zeros(fine.n_points // 2 + 1, dtype=complex)
    padded[: coeffs.size] = coeffs
    padded[coeffs.size - 1] *= 0.5  # split the old Nyquist mode between +-
    uf = np.fft.irfft(padded, n=fine.n_points) * factor
    prob = NonlocalProblem(params, fine)
    _, r_u, r_v = prob.residuals(uf)
    return r_u, r_v
