"""Reduced interaction energy Xi, calibration of (alpha, beta), and the
barrier-constrained minimization that predicts spike locations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    CalibrationError,
    DomainError,
    InvalidParameterError,
    NoInteriorMinimumError,
    SingularConfigurationError,
)
from .ground_state import GroundState
from .interaction import InteractionConstants, far_term_derivative, pair_derivative, pair_energy
from .multibump import SpikeConfig, build_context
from .params import FracParams, separation_scale

# relative separations (times the self-consistent zero-force spacing)
DEFAULT_LADDER = (0.8, 0.9, 1.0, 1.1, 1.2)
MAX_FIT_RESIDUAL = 0.3


@dataclass(frozen=True)
class ReducedWindow:
    """Q_{s,eta} in rescaled coordinates d = q / scale:
    eta < d_i < 1/eta and |d_i - d_j| > eta."""

    s: float
    eps: float
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise InvalidParameterError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def scale(self) -> float:
        return separation_scale(self.s, self.eps)

    @property
    def lower(self) -> float:
        return self.eta

    @property
    def upper(self) -> float:
        return 1.0 / self.eta

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def margin(self, d) -> float:
        """Smallest slack of the defining inequalities (in d units)."""
        d = np.sort(np.asarray(d, dtype=float))[::-1]
        slack = [np.min(d) - self.lower, self.upper - np.max(d)]
        if d.size > 1:
            slack.append(np.min(d[:-1] - d[1:]) - self.eta)
        return float(min(slack))

    def contains(self, q, odd: bool = False) -> bool:
        return self.margin(np.asarray(q, dtype=float) / self.scale) > 0


# --- calibration -----------------------------------------------------------

def _lattice(k: int, spacing: float) -> SpikeConfig:
    """k equally spaced spikes, symmetric about 0."""
    full = spacing * (0.5 * (k - 1) - np.arange(k))
    half = tuple(full[full > 1e-12])
    return SpikeConfig(half, "odd_k" if k % 2 else "even_k")


def _projection_pieces(gs: GroundState, params: FracParams, spacing: float):
    """(I1, I2, A, B) for the outermost spike of a k-lattice.

    I2 = int V^{-1} sum_{i != j} U_i U_j dU_1/dx,  I1 = int (1-V)/V sum U_i^2 dU_1/dx,
    A = -d/dq_1 sum_j U(q_j - q_1),  B = -d/dq_1 sum_j far(|q_j - q_1|).
    """
    cfg = _lattice(params.k, spacing)
    ctx = build_context(params, gs, cfg)
    h = ctx.grid.spacing
    v = ctx.V.values
    sq = np.sum(ctx.bumps ** 2, axis=0)
    cross = ctx.W.values ** 2 - sq
    du1 = -ctx.modes[0]
    i2 = h * np.sum(cross / v * du1)
    i1 = h * np.sum((1.0 - v) / v * sq * du1)
    r = cfg.positions[0] - cfg.positions[1:]
    a = -float(np.sum(gs.profile_derivative(r)))
    b = -float(np.sum(far_term_derivative(r, params)))
    return i1, i2, a, b


def _relative_fit(target: np.ndarray, model: np.ndarray) -> tuple[float, float]:
    """Least squares of target ~ c * model in relative terms; (c, residual)."""
    w = model / target
    c = float(np.sum(w) / np.sum(w * w))
    return c, float(np.sqrt(np.mean((1.0 - c * w) ** 2)))


def _zero_force_spacing(gs, params, alpha, beta, guess: float) -> float:
    consts = InteractionConstants(alpha, beta, gs)

    def force(r):
        cfg = _lattice(params.k, r)
        return float(_full_forces(cfg, params, consts)[0])

    lo, hi = 0.5 * guess, 2.0 * guess
    for _ in range(30):
        if force(lo) < 0 < force(hi):
            return optimize.brentq(force, lo, hi, xtol=1e-10 * guess)
        lo, hi = 0.7 * lo, 1.4 * hi
    raise CalibrationError("no zero of the lattice force; the two terms never balance")


def calibrate_constants(gs: GroundState, params: FracParams, separations=None, *,
                        ladder=DEFAULT_LADDER, max_rounds: int = 6,
                        check: bool = True) -> InteractionConstants:
    """Fit alpha and beta from directly quadratured projection integrals.

    With explicit ``separations`` the fit uses those lattice spacings. Otherwise
    the ladder is ``ladder`` times the spacing at which the fitted lattice
    force vanishes, iterated to self-consistency.
    """
    if params.k < 2:
        raise CalibrationError("a single spike has no interaction to calibrate")

    def fit(rs):
        pieces = np.array([_projection_pieces(gs, params, r) for r in rs])
        i1, i2, a, b = pieces.T
        alpha, res_a = _relative_fit(i2, a)
        beta, res_b = _relative_fit(i1, b)
        return alpha, beta, res_a, res_b, pieces

    if separations is not None:
        rs = np.asarray(separations, dtype=float)
        alpha, beta, res_a, res_b, pieces = fit(rs)
        rounds, centre = 1, None
    else:
        centre = 4.0 * separation_scale(params.s, params.eps)
        for rounds in range(1, max_rounds + 1):
            rs = centre * np.asarray(ladder)
            alpha, beta, res_a, res_b, pieces = fit(rs)
            new_centre = _zero_force_spacing(gs, params, alpha, beta, centre)
            moved = abs(new_centre - centre) / centre
            centre = new_centre
            if moved < 1e-3:
                break
    report = {
        "separations": rs.tolist(),
        "I1": pieces[:, 0].tolist(),
        "I2": pieces[:, 1].tolist(),
        "A": pieces[:, 2].tolist(),
        "B": pieces[:, 3].tolist(),
        "residual_alpha": res_a,
        "residual_beta": res_b,
        "rounds": rounds,
        "zero_force_spacing": centre,
    }
    if check and max(res_a, res_b) > MAX_FIT_RESIDUAL:
        raise CalibrationError(
            f"calibration residuals alpha {res_a:.2f}, beta {res_b:.2f} exceed {MAX_FIT_RESIDUAL}; "
            "the asymptotic regime is not reached on these separations")
    if not (alpha > 0 and beta > 0):
        raise CalibrationError(f"non-positive constants alpha={alpha}, beta={beta}")
    return InteractionConstants(alpha, beta, gs, report)


# --- energy ----------------------------------------------------------------

def _half(config: SpikeConfig) -> np.ndarray:
    q = np.asarray(config.half_positions, dtype=float)
    if np.any(q <= 0):
        raise SingularConfigurationError("a spike coincides with its mirror image")
    if np.unique(q).size != q.size:
        raise SingularConfigurationError("coincident spikes")
    return q


def xi_energy(config: SpikeConfig, params: FracParams, consts: InteractionConstants) -> float:
    """Xi = sum_i F(2 q_i) + sum_{i != j} [F(q_i - q_j) + F(q_i + q_j)],
    plus 2 sum_i F(q_i) for the odd family (centre spike)."""
    q = _half(config)
    F = lambda r: pair_energy(r, params, consts)
    total = float(np.sum(F(2.0 * q)))
    if q.size > 1:
        i, j = np.where(~np.eye(q.size, dtype=bool))
        total += float(np.sum(F(np.abs(q[i] - q[j])) + F(q[i] + q[j])))
    if config.parity == "odd_k":
        total += 2.0 * float(np.sum(F(q)))
    return total


def xi_gradient(config: SpikeConfig, params: FracParams, consts: InteractionConstants) -> np.ndarray:
    q = _half(config)
    dF = lambda r: pair_derivative(r, params, consts)
    grad = 2.0 * dF(2.0 * q)
    if q.size > 1:
        d = q[:, None] - q[None, :]
        off = ~np.eye(q.size, dtype=bool)
        minus = np.zeros_like(d)
        minus[off] = np.sign(d[off]) * dF(np.abs(d[off]))
        plus = np.zeros_like(d)
        plus[off] = dF((q[:, None] + q[None, :])[off])
        # each unordered pair appears twice in the ordered sum
        grad = grad + 2.0 * (minus.sum(axis=1) + plus.sum(axis=1))
    if config.parity == "odd_k":
        grad = grad + 2.0 * dF(q)
    return grad


def _full_forces(config: SpikeConfig, params: FracParams, consts: InteractionConstants) -> np.ndarray:
    q = config.positions
    d = q[:, None] - q[None, :]
    off = ~np.eye(q.size, dtype=bool)
    out = np.zeros_like(d)
    out[off] = np.sign(d[off]) * pair_derivative(np.abs(d[off]), params, consts)
    return out.sum(axis=1)


def force_scale(params: FracParams, consts: InteractionConstants) -> float:
    """beta * |far'(scale)|, the size of one repulsive pair force at unit d."""
    return float(consts.beta * abs(far_term_derivative(params.scale, params)))


# --- minimization ----------------------------------------------------------

def rescale_config(config: SpikeConfig, params: FracParams) -> np.ndarray:
    return np.asarray(config.half_positions) / params.scale


def unscale_config(d, params: FracParams, parity="even_k") -> SpikeConfig:
    return SpikeConfig.from_unsorted(np.asarray(d, dtype=float) * params.scale, parity)


def _seeds(window: ReducedWindow, m: int, odd: bool, count: int = 8) -> list[np.ndarray]:
    """Equally spaced lattices whose spacing runs geometrically across the window."""
    offset = 1.0 if odd else 0.5
    lo = max(window.lower / offset, window.eta) * 1.5
    hi = window.upper / (m - 1 + offset) / 1.2
    if not lo < hi:
        return []
    return [a * (np.arange(m, 0, -1) - 1 + offset) for a in np.geomspace(lo, hi, count)]


@dataclass
class MinimizationReport:
    xi: float
    grad_norm: float
    boundary_margin: float
    relative_margin: float
    force_scale: float
    starts: list
    trace: list

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "grad_norm": self.grad_norm,
            "boundary_margin": self.boundary_margin,
            "relative_margin": self.relative_margin,
            "force_scale": self.force_scale,
            "starts": self.starts,
        }


def _barrier(window: ReducedWindow, d: np.ndarray):
    """Log-barrier of Q_{s,eta} and its gradient; +inf outside."""
    lo = d - window.lower
    hi = window.upper - d
    gaps = d[:, None] - d[None, :]
    iu = np.triu_indices(d.size, 1)
    g = np.abs(gaps[iu]) - window.eta
    if np.any(lo <= 0) or np.any(hi <= 0) or np.any(g <= 0):
        return math.inf, None
    val = -np.sum(np.log(lo)) - np.sum(np.log(hi)) - np.sum(np.log(g))
    grad = -1.0 / lo + 1.0 / hi
    coef = np.sign(gaps[iu]) / g
    np.add.at(grad, iu[0], -coef)
    np.add.at(grad, iu[1], coef)
    return val, grad


def _polish(d, params, consts, parity, fs, window, tol_rel=1e-10, max_iter=30):
    """Newton on the gradient with a finite-difference Hessian; steps that
    would leave the window are halved, and the polish stops if none fits."""
    scale = params.scale

    def grad(x):
        return xi_gradient(unscale_config(x, params, parity), params, consts) * scale

    x = np.array(d, dtype=float)
    g = grad(x)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= tol_rel * fs * scale:
            break
        fd = 1e-6 * np.maximum(1.0, np.abs(x))
        H = np.empty((x.size, x.size))
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = fd[i]
            H[:, i] = (grad(x + e) - grad(x - e)) / (2 * fd[i])
        H = 0.5 * (H + H.T)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        for _ in range(20):
            trial = x - step
            if math.isfinite(_barrier(window, trial)[0]):
                break
            step = 0.5 * step
        else:
            break
        x = trial
        g = grad(x)
    return x


def minimize_xi(params: FracParams, consts: InteractionConstants, m: int, eta: float = 0.1, *,
                parity="even_k", n_starts: int = 8,
                barrier_weights=(1e-2, 1e-4, 1e-6, 1e-8, 1e-10)) -> tuple[SpikeConfig, MinimizationReport]:
    """Interior minimizer of Xi over Q_{s,eta} from a lattice multistart."""
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    window = ReducedWindow(params.s, params.eps, eta)
    odd = parity == "odd_k"
    seeds = _seeds(window, m, odd, n_starts)
    if not seeds:
        raise NoInteriorMinimumError(f"window eta={eta} cannot hold {m} separated spikes")
    scale = params.scale
    fs = force_scale(params, consts)
    escale = fs * scale

    def objective(x, weight):
        b, bg = _barrier(window, x)
        if not math.isfinite(b):
            return math.inf, np.zeros_like(x)
        cfg = unscale_config(x, params, parity)
        e = xi_energy(cfg, params, consts) / escale
        ge = xi_gradient(cfg, params, consts) * scale / escale
        return e + weight * b, ge + weight * bg

    candidates, starts, trace = [], [], []
    for n, seed in enumerate(seeds):
        x = seed
        for weight in barrier_weights:
            res = optimize.minimize(objective, x, args=(weight,), jac=True, method="BFGS",
                                    options={"gtol": 1e-12, "maxiter": 2000})
            if np.all(np.isfinite(res.x)) and math.isfinite(_barrier(window, res.x)[0]):
                x = res.x
            trace.append({"start": n, "barrier": weight, "d": sorted(x.tolist(), reverse=True),
                          "value": float(res.fun)})
        x = np.sort(x)[::-1]
        rel = window.margin(x) / window.width
        if rel > 0.01:
            x = _polish(x, params, consts, parity, fs, window)
            x = np.sort(x)[::-1]
            rel = window.margin(x) / window.width if math.isfinite(_barrier(window, x)[0]) else -1.0
        cfg = None
        if rel > 0:
            cfg = unscale_config(x, params, parity)
        xi = xi_energy(cfg, params, consts) if cfg else math.inf
        starts.append({"seed": seed.tolist(), "d": x.tolist(), "xi": xi, "relative_margin": rel})
        if cfg is not None and rel >= 0.05:
            candidates.append((xi, tuple(x), cfg, rel))
    if not candidates:
        raise NoInteriorMinimumError(
            f"all {len(seeds)} starts ended within 5% of the boundary of Q (eta={eta})")
    best_xi = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] - best_xi <= 1e-12 * max(1.0, abs(best_xi))]
    xi, x, cfg, rel = min(tied, key=lambda c: c[1])
    grad = xi_gradient(cfg, params, consts)
    report = MinimizationReport(
        xi=float(xi),
        grad_norm=float(np.max(np.abs(grad))),
        boundary_margin=float(rel * window.width),
        relative_margin=float(rel),
        force_scale=fs,
        starts=starts,
        trace=trace,
    )
    return cfg, report


def scalar_model(gamma: float) -> tuple[float, float]:
    """Minimizer and minimum of g(x) = x^{-2} + gamma log x on x > 0."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    x = math.sqrt(2.0 / gamma)
    return x, (0.5 + 0.5 * math.log(2.0)) * gamma - 0.5 * gamma * math.log(gamma)


def scalar_model_coefficient(consts: InteractionConstants) -> float:
    """Log coefficient of the m = 1, s = 1/2 energy once b*alpha/log(1/eps) is
    factored out: beta / (b * alpha)."""
    return consts.beta / (consts.ground_state.tail_coeff * consts.alpha)
