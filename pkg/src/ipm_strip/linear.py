"""Exact linear semigroup and numerical checks of the linear decay estimates.

Linearising around the stratified state gives ``d_t rho_bar = d_x psi = u2``,
which is diagonal in the omega basis with decay rate

    lambda(p, q) = p^2 / (p^2 + (q pi/2)^2)  =  (2/pi)^2 p^2 / ((2/pi)^2 p^2 + q^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .elliptic import u2_multiplier
from .exceptions import PreconditionError, ResolutionError
from .spectral import OMEGA, Spectrum, TransformPlan, laplace_symbol

TWO_OVER_PI = 2.0 / np.pi


@lru_cache(maxsize=64)
def decay_rates(P, Q):
    """lambda(p, q) on the omega band; zero on the p = 0 row."""
    p2 = (TWO_OVER_PI * np.arange(-P, P + 1)[:, None]) ** 2
    q2 = (np.arange(1, Q + 1)[None, :]) ** 2
    out = p2 / (p2 + q2)
    out.setflags(write=False)
    return out


def _check_time(t):
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")


def linear_factors(P, Q, t):
    _check_time(t)
    return np.exp(-t * decay_rates(P, Q))


def linear_evolve(rho_bar0: Spectrum, t: float) -> Spectrum:
    """Exact solution of the linearised problem at time ``t``.

    p = 0 rows are fixed points (factor 1).
    """
    if rho_bar0.family != OMEGA:
        raise ValueError("expected an omega spectrum")
    return Spectrum(rho_bar0.coeffs * linear_factors(rho_bar0.P, rho_bar0.Q, t), OMEGA)


def linear_velocity(rho_bar0: Spectrum, t: float) -> Spectrum:
    """Vertical velocity u2(t) of the linearised problem."""
    if rho_bar0.family != OMEGA:
        raise ValueError("expected an omega spectrum")
    P, Q = rho_bar0.P, rho_bar0.Q
    return Spectrum(rho_bar0.coeffs * u2_multiplier(P, Q) * linear_factors(P, Q, t), OMEGA)


# -- derivative-for-decay trade -----------------------------------------------


@dataclass
class CoefficientBoundReport:
    alpha: int
    l1_laplacian: float
    min_ratio: float
    worst_mode: tuple | None
    passed: bool


def coefficient_decay_bound(
    f: Spectrum, alpha: int, plan: TransformPlan | None = None
) -> CoefficientBoundReport:
    """Check |F[f](p,q)| <= (2/pi)^{2a} / ((2/pi)^2 p^2 + q^2)^a * ||lap^a f||_{L1}.

    ``lap^a f`` is formed spectrally and its L1 norm by grid quadrature on
    ``plan`` (default: 4x oversampled).  The reported ratio is RHS/LHS over
    all modes with p != 0; the bound holds when it is >= 1.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be a positive integer, got {alpha}")
    if f.family != OMEGA:
        raise ValueError("expected an omega spectrum")
    if plan is None:
        plan = TransformPlan(f.P, f.Q, n_x=max(8 * f.P + 8, 32), n_y=max(8 * f.Q, 32))
    if plan.P < f.P or plan.Q < f.Q:
        raise ResolutionError("plan does not resolve the spectrum")
    lap = laplace_symbol(f.P, f.Q, OMEGA)
    lap_a = Spectrum(f.coeffs * (-lap) ** alpha, OMEGA).resized(plan.P, plan.Q)
    l1 = plan.l1_norm(plan.synthesize(lap_a))

    p = f.p_values[:, None]
    q = f.q_values[None, :]
    rhs = TWO_OVER_PI ** (2 * alpha) / ((TWO_OVER_PI * p) ** 2 + q**2) ** alpha * l1
    lhs = np.abs(f.coeffs)
    nz = (p != 0) & (lhs > 0)
    if not np.any(nz):
        return CoefficientBoundReport(alpha, l1, math.inf, None, True)
    ratio = np.where(nz, rhs / np.where(nz, lhs, 1.0), np.inf)
    i, j = np.unravel_index(np.argmin(ratio), ratio.shape)
    r = float(ratio[i, j])
    return CoefficientBoundReport(alpha, l1, r, (int(p[i, 0]), int(q[0, j])), r >= 1.0)


# -- decay envelope of the linear series ------------------------------------


@dataclass
class DecayEnvelope:
    """Parameters of the series bound S(t) <~ (1+t)^{-(j + 2 alpha - (1/2 + eps))}."""

    j: int
    alpha: int
    t_grid: np.ndarray
    epsilon_plus: float = 0.01

    def __post_init__(self):
        if self.j not in (0, 1, 2):
            raise ValueError(f"j must be 0, 1 or 2, got {self.j}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.epsilon_plus <= 0:
            raise ValueError("epsilon_plus must be positive")
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if np.any(self.t_grid < 0):
            raise ValueError("t_grid must be non-negative")
        if self.exponent <= 0:
            raise ValueError(f"non-positive envelope exponent {self.exponent}")

    @property
    def exponent(self):
        return self.j + 2 * self.alpha - (0.5 + self.epsilon_plus)


@dataclass
class EnvelopeReport:
    t: np.ndarray
    series: np.ndarray
    scaled: np.ndarray
    constant: float
    tail_ratio: float
    passed: bool
    doubling_ratio: float = 1.0

    def rows(self):
        """(t, value, envelope, ratio) rows; the envelope is C (1+t)^-beta."""
        env = self.constant * self.series / np.where(self.scaled > 0, self.scaled, 1.0)
        return [
            (float(t), float(v), float(e), float(s / self.constant if self.constant else 0.0))
            for t, v, e, s in zip(self.t, self.series, env, self.scaled)
        ]


def _envelope_terms(p, q, j, alpha):
    lam = (TWO_OVER_PI * p) ** 2 / ((TWO_OVER_PI * p) ** 2 + q**2)
    lap = p**2 + (q * np.pi / 2) ** 2
    return lap ** (-2.0 * alpha) * lam**j, lam


def envelope_series(j, alpha, t_grid, P_sum, Q_sum):
    """S(t) = sum_{p != 0, q >= 1} m^{2 alpha} / (1+q*^2)^j exp(-2t/(1+q*^2)).

    In the original indices m = 1/(p^2 + (q pi/2)^2) and 1/(1+q*^2) = lambda(p, q).
    """
    p = np.arange(1, P_sum + 1, dtype=float)[:, None]
    q = np.arange(1, Q_sum + 1, dtype=float)[None, :]
    base, lam = _envelope_terms(p, q, j, alpha)
    return np.array([2.0 * np.sum(base * np.exp(-2.0 * t * lam)) for t in np.asarray(t_grid)])


def envelope_tail_bound(j, alpha, t, P_sum, Q_sum):
    """Upper bound on the part of S(t) outside |p| <= P_sum, q <= Q_sum."""
    beta = 2 * alpha + j
    # q > Q_sum at fixed |p| <= P_sum: terms decrease in q once e^{-2t lam} <= 1 is dropped.
    p = np.arange(1, P_sum + 1, dtype=float)
    n = 2 * beta
    q_tail = 2.0 * np.sum(p ** (2 * j)) * (2 / np.pi) * (np.pi * Q_sum / 2) ** (1 - n) / (n - 1)
    # |p| > P_sum, all q: sum_q g(q) <= int_0^inf g + max g for unimodal g.
    h_int, _ = integrate.quad(
        lambda s: (1 + s * s) ** (-beta) * math.exp(-2 * t / (1 + s * s)), 0, np.inf, limit=200
    )
    if t > 0 and beta / (2 * t) < 1:
        h_max = (beta / (2 * t)) ** beta * math.exp(-beta)
    else:
        h_max = math.exp(-2 * t)
    sum_p1 = P_sum ** (2 - 4 * alpha) / (4 * alpha - 2)  # sum_{p > P} p^{1 - 4 alpha}
    sum_p0 = P_sum ** (1 - 4 * alpha) / (4 * alpha - 1)  # sum_{p > P} p^{-4 alpha}
    p_tail = 2.0 * ((2 / np.pi) * h_int * sum_p1 + h_max * sum_p0)
    return q_tail + p_tail


def decay_envelope_check(env: DecayEnvelope, P_sum: int, Q_sum: int,
                         stability: float = 0.05) -> EnvelopeReport:
    """Evaluate S(t) (1+t)^beta on ``env.t_grid`` and report its supremum.

    The empirical constant C is the maximum over the grid.  The check passes
    when re-measuring C on the doubled range (the grid extended by ``2 t``)
    changes it by at most ``stability`` (relative).  Raises
    :class:`ResolutionError` if the truncated series misses more than 1% of
    S(t) at any sample time.
    """
    t = env.t_grid
    t_max = float(np.max(t))
    extra = 2.0 * t[2.0 * t > t_max]
    t_all = np.concatenate([t, extra])
    S_all = envelope_series(env.j, env.alpha, t_all, P_sum, Q_sum)
    tails = np.array([envelope_tail_bound(env.j, env.alpha, ti, P_sum, Q_sum) for ti in t_all])
    tail_ratio = float(np.max(tails / S_all))
    if tail_ratio > 0.01:
        raise ResolutionError(
            f"series tail is {tail_ratio:.2%} of the head; raise P_sum/Q_sum"
        )
    scaled_all = S_all * (1.0 + t_all) ** env.exponent
    n = len(t)
    C = float(np.max(scaled_all[:n]))
    C2 = float(np.max(scaled_all))
    ratio = C2 / C
    passed = bool(np.isfinite(C2) and ratio <= 1.0 + stability)
    return EnvelopeReport(t, S_all[:n], scaled_all[:n], C, tail_ratio, passed, ratio)


# -- convolution integral bound --------------------------------------------


@dataclass
class ConvolutionReport:
    delta: float
    q_exp: float
    t: np.ndarray
    integral: np.ndarray
    scaled: np.ndarray
    constant: float
    bound: float
    passed: bool
    notes: list = field(default_factory=list)


def convolution_integral(t, delta, q_exp):
    """int_0^t (1 + (t-s))^{-delta} (1+s)^{-(1+q)} ds by adaptive quadrature."""
    if t == 0:
        return 0.0

    def g(s):
        return (1.0 + t - s) ** (-delta) * (1.0 + s) ** (-(1.0 + q_exp))

    total = 0.0
    for a, b in ((0.0, 0.5 * t), (0.5 * t, t)):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(g, a, b, limit=500, epsabs=0.0, epsrel=1e-11)
            except integrate.IntegrationWarning as exc:
                raise ArithmeticError(f"quadrature did not converge at t={t}: {exc}") from None
        total += val
    return total


def convolution_constant_bound(delta, q_exp):
    """Explicit C with int_0^t ... <= C (1+t)^-delta, valid when delta <= 1 + q.

    Split at t/2: the first half is <= (1+t/2)^-delta / q, the second half
    <= (1+t/2)^{-(1+q)} int_0^{t/2} (1+r)^-delta dr.  Returns inf when
    delta > 1 + q, where no such constant exists.
    """
    if delta > 1.0 + q_exp:
        return math.inf
    if delta < 1.0:
        second = 1.0 / (1.0 - delta)
    elif delta == 1.0:
        second = 1.0 / (math.e * q_exp)
    else:
        second = 1.0 / (delta - 1.0)
    return 2.0**delta * (1.0 / q_exp + second)


def convolution_bound_check(delta: float, q_exp: float, t_grid) -> ConvolutionReport:
    if delta <= 0 or q_exp <= 0:
        raise PreconditionError(f"need delta, q > 0, got delta={delta}, q={q_exp}")
    t = np.asarray(t_grid, dtype=float)
    I = np.array([convolution_integral(ti, delta, q_exp) for ti in t])
    scaled = I * (1.0 + t) ** delta
    C = float(np.max(scaled, initial=0.0))
    bound = convolution_constant_bound(delta, q_exp)
    notes = []
    if math.isinf(bound):
        notes.append("delta > 1 + q: the integral decays like (1+t)^-(1+q), slower than (1+t)^-delta")
    passed = bool(math.isfinite(bound) and np.all(scaled <= bound))
    return ConvolutionReport(delta, q_exp, t, I, scaled, C, bound, passed, notes)


def phi_functions(z):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near z = 0."""
    z = np.asarray(z, dtype=float)
    phi1 = special.exprel(z)
    small = np.abs(z) < 0.1
    zs = np.where(small, z, 0.0)
    series = np.zeros_like(z)
    term = np.full_like(z, 0.5)
    for k in range(12):
        series = series + term
        term = term * zs / (k + 3)
    zl = np.where(small, 1.0, z)
    phi2 = np.where(small, series, (np.expm1(zl) - zl) / zl**2)
    return phi1, phi2
