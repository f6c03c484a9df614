"""Green function of (-Delta)^s + 1 on the real line.

``G(x) = (1/pi) int_0^inf cos(x xi) / (1 + xi^{2s}) d xi``.

For s > 1/2 the non-oscillatory part integrates in closed form and what
remains is ``G = a0 - (2/pi) x^{2s-1} J(x)`` with

    J(x) = int_0^inf sin^2(t/2) / (t^{2s} + x^{2s}) dt,

an absolutely convergent integral.  For s = 1/2 the split is made at
t = pi/2 instead and the leftover ``int cos t / (x + t)`` tail is summed
over half-periods.  In both cases the oscillatory tail is a sum of
alternating block integrals, accelerated with Wynn's epsilon algorithm.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, DomainError

ACCURACY = 1e-8
_S_LOG_GAP = 0.505  # below this (and above 1/2) a1 sits too close to its pole

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


@dataclass(frozen=True)
class GreenExpansion:
    """Small-x expansion ``a0 + a1 x^{2s-1} + O(x^p)`` (s > 1/2) or
    ``-(1/pi) log x + a2 + O(x)`` (s = 1/2)."""

    s: float
    a0: float | None
    a1: float | None
    a2: float | None
    remainder_exponent: float

    def evaluate(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        if self.a2 is not None:
            return -np.log(x) / np.pi + self.a2
        return self.a0 + self.a1 * x ** (2.0 * self.s - 1.0)

    def as_dict(self) -> dict:
        out = {"s": self.s}
        if self.a2 is None:
            out.update(a0=self.a0, a1=self.a1)
        else:
            out["a2"] = self.a2
        out["remainder_exponent"] = self.remainder_exponent
        return out


def _check_s(s: float) -> bool:
    """Validate s and return True on the logarithmic branch s = 1/2."""
    if not 0.5 <= s < 1.0:
        raise DomainError(f"the Green expansion is available for s in [1/2, 1), got {s}")
    if s == 0.5:
        return True
    if s < _S_LOG_GAP:
        raise DomainError(
            f"s = {s} is too close to 1/2 (a1 has a pole there); use s = 0.5 or s >= {_S_LOG_GAP}")
    return False


def wynn_epsilon(partial_sums) -> tuple[float, float]:
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns the highest even-column estimate and the difference to the
    previous one as an error indicator.
    """
    seq = [float(v) for v in partial_sums]
    n = len(seq)
    prev = [0.0] * (n + 1)
    cur = seq[:]
    estimates = [seq[-1]]
    for k in range(1, n):
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0.0:
                # converged column; the sequence is already stationary
                return cur[i + 1], 0.0
            nxt.append(prev[i + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        if k % 2 == 0 and cur:
            estimates.append(cur[-1])
        if len(cur) < 2:
            break
    if len(estimates) < 2:
        return estimates[-1], abs(seq[-1] - seq[-2])
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def _gauss_block(func, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, func(mid + half * _GL_NODES)))


def _oscillatory_tail(denominator, start: float, n_blocks: int = 40) -> tuple[float, float]:
    """int_start^inf cos t / denominator(t) dt, start a zero of cos t."""
    edges = start + np.pi * np.arange(n_blocks + 1)
    blocks = [_gauss_block(lambda t: np.cos(t) / denominator(t), edges[i], edges[i + 1])
              for i in range(n_blocks)]
    return wynn_epsilon(np.cumsum(blocks))


def _adaptive(func, a: float, b: float, pieces: int) -> tuple[float, float]:
    edges = np.linspace(a, b, pieces + 1)
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(func, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
        total += val
        err += e
    return total, err


def _sin2_integral(s: float, c: float) -> tuple[float, float]:
    """J = int_0^inf sin^2(t/2) / (t^{2s} + c) dt and an error bound."""
    p = 2.0 * s
    # the geometric series for the tail needs T^{2s} >= 4c
    t_min = max(20.0 * np.pi, (4.0 * c) ** (1.0 / p))
    j = math.ceil(t_min / np.pi - 0.5)
    T = (j + 0.5) * np.pi
    head, err_head = _adaptive(lambda t: np.sin(0.5 * t) ** 2 / (t ** p + c), 0.0, T, j + 1)
    series = 0.0
    for n in range(200):
        term = (-c) ** n * T ** (1.0 - p * (n + 1)) / (p * (n + 1) - 1.0)
        series += term
        if abs(term) < 1e-18 * max(1.0, abs(series)):
            break
    osc, err_osc = _oscillatory_tail(lambda t: t ** p + c, T)
    return head + 0.5 * series - 0.5 * osc, err_head + 0.5 * err_osc


def _log_case(x: float) -> tuple[float, float]:
    half_pi = 0.5 * np.pi
    near, err_near = integrate.quad(lambda t: np.sin(0.5 * t) ** 2 / (x + t), 0.0, half_pi,
                                    epsabs=1e-15, epsrel=1e-13, limit=200)
    tail, err_tail = _oscillatory_tail(lambda t: x + t, half_pi)
    value = (np.log1p(half_pi / x) - 2.0 * near + tail) / np.pi
    return value, (2.0 * err_near + err_tail) / np.pi


def green_eval(s: float, x: float) -> float:
    """G(x) to about 1e-8 absolute accuracy; G is even in x."""
    log_case = _check_s(s)
    x = abs(float(x))
    if x == 0.0:
        if log_case:
            raise DomainError("G is logarithmically singular at x = 0 for s = 1/2")
        return green_constants(s).a0
    if log_case:
        value, err = _log_case(x)
    else:
        J, err_j = _sin2_integral(s, x ** (2.0 * s))
        scale = (2.0 / np.pi) * x ** (2.0 * s - 1.0)
        value, err = green_constants(s).a0 - scale * J, scale * err_j
    if not err <= ACCURACY:
        raise AccuracyError(f"Green quadrature at s={s}, x={x} reached only {err:.2e}", err)
    return float(value)


def cosine_tail_integral(a: float) -> float:
    """int_a^inf cos t / t dt (= -Ci(a)) by half-period blocks from the
    first zero of cos beyond ``a``."""
    j = math.ceil(a / np.pi - 0.5)
    start = (j + 0.5) * np.pi
    head = 0.0
    if start > a:
        head, _ = integrate.quad(lambda t: np.cos(t) / t, a, start, epsabs=1e-15, epsrel=1e-13)
    tail, _ = _oscillatory_tail(lambda t: t, start)
    return head + tail


@functools.lru_cache(maxsize=None)
def green_constants(s: float) -> GreenExpansion:
    log_case = _check_s(s)
    if log_case:
        half_pi = 0.5 * np.pi
        near, _ = integrate.quad(lambda t: np.sin(0.5 * t) ** 2 / t, 0.0, half_pi,
                                 epsabs=1e-15, epsrel=1e-13)
        a2 = (np.log(half_pi) - 2.0 * near + cosine_tail_integral(half_pi)) / np.pi
        return GreenExpansion(s=0.5, a0=None, a1=None, a2=float(a2), remainder_exponent=1.0)
    a0 = 1.0 / (2.0 * s * np.sin(np.pi / (2.0 * s)))
    a1 = -(2.0 / np.pi) * s * special.gamma(-2.0 * s) * np.sin(np.pi * s)
    return GreenExpansion(s=float(s), a0=float(a0), a1=float(a1), a2=None,
                          remainder_exponent=min(2.0, 4.0 * s - 1.0))


@functools.lru_cache(maxsize=None)
def far_field_constant(s: float) -> float:
    """gamma_G in G(x) ~ gamma_G |x|^{-(1+2s)}: fixed-exponent least squares
    of green_eval on x in [20, 100]."""
    _check_s(s)
    xs = np.linspace(20.0, 100.0, 33)
    vals = np.array([green_eval(s, x) for x in xs])
    return float(np.exp(np.mean(np.log(vals) + (1.0 + 2.0 * s) * np.log(xs))))


def green_far_field(s: float, x: float) -> float:
    x = abs(float(x))
    if x < 1.0:
        raise DomainError(f"far-field form needs |x| >= 1, got {x}")
    return far_field_constant(s) * x ** (-(1.0 + 2.0 * s))
