"""Time integration of the m-th Galerkin truncation of the perturbation system.

The state is the omega spectrum of the full perturbation rho (mean part
included) restricted to |p| <= m, q <= m.  Its evolution is

    d_t rho = u2 - P_m[u . grad rho],   u = grad^perp psi,   lap psi = -d_x rho,

with the product formed on a zero-padded grid.  The linear part u2 is the
diagonal multiplier -lambda(p, q), so the exponential stepper treats it
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .elliptic import stream_multiplier
from .exceptions import NumericalAbort, PreconditionError, ResolutionError, StabilityError
from .linear import decay_rates, phi_functions
from .spectral import (
    OMEGA,
    VARPI,
    Spectrum,
    TransformPlan,
    decompose_mean,
    dy_factors,
    evaluate_grid,
    sobolev_norm,
    threshold_mask,
)

DEFAULT_MONITORS = (0, 3, 5, 13)
RK4_LINEAR_LIMIT = 2.785  # stability interval of classical RK4 on the negative real axis
CSV_HEADER = (
    "t", "l2_rho", "grad_psi_l2", "h3_u2", "hk_rho", "hk_rho_bar", "hk_rho_tilde",
    "bnd0", "bnd2", "bnd4", "bkm", "eres",
)


class GalerkinSystem:
    """Precomputed multipliers and the dealiased advection kernel for one (plan, m)."""

    def __init__(self, plan: TransformPlan, m: int):
        if m < 1 or m > min(plan.P, plan.Q):
            raise PreconditionError(f"truncation m={m} must lie in [1, min(P, Q)]")
        self.plan = plan
        self.m = m
        self.dealiased = plan.dealiased_for(m)
        P, Q = plan.P, plan.Q
        self.mask = threshold_mask(P, Q, OMEGA, m)
        self.rate = decay_rates(P, Q)
        self.stream = stream_multiplier(P, Q)
        self.ikx = (1j * np.arange(-P, P + 1))[:, None]
        self.dy_x = dy_factors(Q, OMEGA)[1:]  # omega -> varpi columns q >= 1
        self.dy_y = dy_factors(Q, VARPI)  # varpi -> omega
        self._shape_y = (2 * P + 1, Q + 1)

    def _dy_x(self, c):
        out = np.zeros(c.shape[:-1] + (self._shape_y[1],), dtype=complex)
        out[..., 1:] = c * self.dy_x
        return out

    def _dy_y(self, c):
        return c[..., 1:] * self.dy_y

    def velocity(self, c):
        """(u1 [varpi], u2 [omega]) coefficient arrays of the state ``c``."""
        psi = self.stream * c
        return -self._dy_x(psi), self.ikx * psi

    def advection(self, c):
        """P_m[u . grad rho] and max |u| on the grid."""
        if not self.dealiased:
            raise ResolutionError(
                f"{self.plan!r} is too coarse to dealias products at m={self.m}"
            )
        u1, u2 = self.velocity(c)
        gx = self.plan.synthesize_array(np.stack([u2, self.ikx * c]), OMEGA, real=True)
        gy = self.plan.synthesize_array(np.stack([u1, self._dy_x(c)]), VARPI, real=True)
        prod = gy[0] * gx[1] + gx[0] * gy[1]
        adv = self.plan.analyze_array(prod, OMEGA) * self.mask
        umax = float(np.sqrt(np.max(gy[0] ** 2 + gx[0] ** 2)))
        return adv, umax

    def linear(self, c):
        return -self.rate * c

    def rhs(self, c, nonlinear=True):
        if not nonlinear:
            return self.linear(c), 0.0
        adv, umax = self.advection(c)
        return self.linear(c) - adv, umax

    def nonlinear_part(self, c, nonlinear=True):
        if not nonlinear:
            return np.zeros_like(c), 0.0
        adv, umax = self.advection(c)
        return -adv, umax

    def max_speed(self, c):
        u1, u2 = self.velocity(c)
        g1 = self.plan.synthesize_array(u1, VARPI, real=True)
        g2 = self.plan.synthesize_array(u2, OMEGA, real=True)
        return float(np.sqrt(np.max(g1**2 + g2**2)))

    def gradient_maxima(self, c):
        """(||grad u||_inf, ||grad rho||_inf) on the grid."""
        u1, u2 = self.velocity(c)
        gx = self.plan.synthesize_array(
            np.stack([self.ikx * c, self._dy_y(u1), self.ikx * u2]), OMEGA, real=True
        )
        gy = self.plan.synthesize_array(
            np.stack([self._dy_x(c), self.ikx * u1, self._dy_x(u2)]), VARPI, real=True
        )
        rho_x, u1_y, u2_x = gx
        rho_y, u1_x, u2_y = gy
        grad_u = np.sqrt(u1_x**2 + u1_y**2 + u2_x**2 + u2_y**2)
        grad_rho = np.sqrt(rho_x**2 + rho_y**2)
        return float(np.max(grad_u)), float(np.max(grad_rho))


@lru_cache(maxsize=16)
def system_for(plan: TransformPlan, m: int) -> GalerkinSystem:
    return GalerkinSystem(plan, m)


@dataclass
class GalerkinState:
    rho: Spectrum
    t: float
    m: int
    plan: TransformPlan

    def __post_init__(self):
        if self.rho.family != OMEGA:
            raise ValueError("state must be an omega spectrum")
        if (self.rho.P, self.rho.Q) != (self.plan.P, self.plan.Q):
            raise ValueError("state band does not match the plan")

    @property
    def system(self) -> GalerkinSystem:
        return system_for(self.plan, self.m)

    def advanced(self, coeffs, dt):
        return replace(self, rho=Spectrum(coeffs, OMEGA), t=self.t + dt)


def nonlinear_rhs(state: GalerkinState, nonlinear: bool = True) -> Spectrum:
    """u2 - P_m[u . grad rho] for the current state."""
    out, _ = state.system.rhs(state.rho.coeffs, nonlinear)
    return Spectrum(out, OMEGA)


def stable_dt(state: GalerkinState, cfl: float = 0.5, stepper: str = "rk4", nonlinear: bool = True,
              umax: float | None = None) -> float:
    """Largest admissible step.

    Advective CFL ``cfl * min(dx, dy) / max(1, ||u||_inf)`` when the
    nonlinearity is on; otherwise the linear limit of the stepper (RK4:
    ``2.785 / max rate``; the exponential stepper has none).
    """
    plan = state.plan
    if nonlinear:
        if umax is None:
            umax = state.system.max_speed(state.rho.coeffs)
        return cfl * min(plan.dx, plan.dy) / max(1.0, umax)
    if stepper == "etd":
        return math.inf
    lam_max = float(np.max(state.system.rate * state.system.mask, initial=0.0))
    return RK4_LINEAR_LIMIT / lam_max if lam_max > 0 else math.inf


def _check_dt(state, dt, cfl, stepper, nonlinear, umax=None):
    if not dt > 0:
        raise StabilityError(f"time step must be positive, got {dt}")
    limit = stable_dt(state, cfl, stepper, nonlinear, umax)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.3e} exceeds the stability bound {limit:.3e}")


def step_rk4(state: GalerkinState, dt: float, nonlinear: bool = True, cfl: float = 0.5,
             check: bool = True) -> GalerkinState:
    """Classical four-stage Runge-Kutta step."""
    sys = state.system
    c = state.rho.coeffs
    k1, umax = sys.rhs(c, nonlinear)
    if check:
        _check_dt(state, dt, cfl, "rk4", nonlinear, umax)
    k2, _ = sys.rhs(c + 0.5 * dt * k1, nonlinear)
    k3, _ = sys.rhs(c + 0.5 * dt * k2, nonlinear)
    k4, _ = sys.rhs(c + dt * k3, nonlinear)
    new = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return state.advanced(new * sys.mask, dt)


@lru_cache(maxsize=32)
def _etd_coefficients(plan, m, dt):
    z = -system_for(plan, m).rate * dt
    phi1, phi2 = phi_functions(z)
    return np.exp(z), dt * phi1, dt * phi2


def step_etd(state: GalerkinState, dt: float, nonlinear: bool = True, cfl: float = 0.5,
             check: bool = True) -> GalerkinState:
    """Second-order exponential time differencing (Cox-Matthews ETD2RK).

    The linear multiplier is integrated exactly: with ``N == 0`` the step is
    the exact linear propagator for any ``dt``.
    """
    sys = state.system
    c = state.rho.coeffs
    E, h1, h2 = _etd_coefficients(state.plan, state.m, float(dt))
    n0, umax = sys.nonlinear_part(c, nonlinear)
    if check:
        _check_dt(state, dt, cfl, "etd", nonlinear, umax)
    a = E * c + h1 * n0
    if nonlinear:
        n1, _ = sys.nonlinear_part(a, nonlinear)
        a = a + h2 * (n1 - n0)
    return state.advanced(a * sys.mask, dt)


STEPPERS = {"rk4": step_rk4, "etd": step_etd}


# -- diagnostics ------------------------------------------------------------


@dataclass
class DiagRecord:
    t: float
    l2_rho: float
    grad_psi_l2: float
    h3_u2: float
    monitors: tuple
    hk_rho: tuple
    hk_rho_bar: tuple
    hk_rho_tilde: tuple
    boundary_residuals: tuple
    bkm_accumulator: float
    energy_identity_residual: float
    bkm_rate: float = 0.0
    dissipation_rate: float = 0.0
    divergence: float = 0.0
    norm_style: str = "full"

    def hk(self, k, part="rho"):
        """Monitored H^k norm of rho, rho_bar or rho_tilde."""
        values = {"rho": self.hk_rho, "bar": self.hk_rho_bar, "tilde": self.hk_rho_tilde}[part]
        return values[self.monitors.index(k)]

    def is_finite(self):
        scalars = [self.l2_rho, self.grad_psi_l2, self.h3_u2, self.bkm_accumulator,
                   self.energy_identity_residual, self.bkm_rate]
        scalars += list(self.hk_rho) + list(self.hk_rho_bar) + list(self.hk_rho_tilde)
        return all(math.isfinite(v) for v in scalars)

    def csv_row(self):
        """Row matching CSV_HEADER; monitored H^k lists are ';'-joined."""

        def f(v):
            return f"{v:.17g}"

        def lst(vs):
            return ";".join(f(v) for v in vs)

        b0, b2, b4 = self.boundary_residuals
        return [
            f(self.t), f(self.l2_rho), f(self.grad_psi_l2), f(self.h3_u2),
            lst(self.hk_rho), lst(self.hk_rho_bar), lst(self.hk_rho_tilde),
            f(b0), f(b2), f(b4), f(self.bkm_accumulator), f(self.energy_identity_residual),
        ]


def boundary_residuals(rho: Spectrum, x) -> tuple:
    """max |d_y^{2n} rho| over the walls y = +-1 and the x samples, n = 0, 1, 2."""
    return tuple(
        float(np.max(np.abs(evaluate_grid(rho, x, [-1.0, 1.0], dy=2 * n)))) for n in range(3)
    )


def diagnostics(state: GalerkinState, prev: DiagRecord | None = None,
                monitors=DEFAULT_MONITORS, style: str = "full",
                nonlinear: bool = True) -> DiagRecord:
    """Norms, wall traces and energy/blow-up monitors of ``state``.

    The energy residual compares the change of 1/2 ||rho||^2 since ``prev``
    with the time integral of ||grad psi||^2 over the same interval
    (end-point corrected trapezoid rule, using d/dt ||grad psi||^2 from the
    right-hand side).
    """
    sys = state.system
    rho = state.rho
    c = rho.coeffs
    lam = sys.rate
    grad_psi2 = float(np.sum(lam * np.abs(c) ** 2))
    rhs, _ = sys.rhs(c, nonlinear)
    dissipation_rate = float(2.0 * np.sum(lam * np.real(np.conj(c) * rhs)))

    u2 = Spectrum(-lam * c, OMEGA)
    bar, tilde = decompose_mean(rho)
    monitors = tuple(monitors)
    hk = tuple(sobolev_norm(rho, k, style) for k in monitors)
    hk_bar = tuple(sobolev_norm(bar, k, style) for k in monitors)
    hk_tilde = tuple(sobolev_norm(tilde, k, style) for k in monitors)

    gu, grho = sys.gradient_maxima(c)
    bkm_rate = gu + grho
    u1c, u2c = sys.velocity(c)
    div = float(np.max(np.abs(sys.ikx * u1c + sys._dy_x(u2c)), initial=0.0))

    l2 = rho.norm()
    bkm = 0.0
    eres = 0.0
    if prev is not None:
        dt = state.t - prev.t
        if dt > 0:
            bkm = prev.bkm_accumulator + 0.5 * dt * (bkm_rate + prev.bkm_rate)
            g0, g1 = prev.grad_psi_l2**2, grad_psi2
            integral = 0.5 * dt * (g0 + g1) + dt * dt * (prev.dissipation_rate - dissipation_rate) / 12.0
            eres = abs((0.5 * l2**2 - 0.5 * prev.l2_rho**2) + integral) / dt
        else:
            bkm = prev.bkm_accumulator
    return DiagRecord(
        t=state.t,
        l2_rho=l2,
        grad_psi_l2=math.sqrt(grad_psi2),
        h3_u2=sobolev_norm(u2, 3, style),
        monitors=monitors,
        hk_rho=hk,
        hk_rho_bar=hk_bar,
        hk_rho_tilde=hk_tilde,
        boundary_residuals=boundary_residuals(rho, state.plan.x),
        bkm_accumulator=bkm,
        energy_identity_residual=eres,
        bkm_rate=bkm_rate,
        dissipation_rate=dissipation_rate,
        divergence=div,
        norm_style=style,
    )


# -- driver -----------------------------------------------------------------


@dataclass
class EvolveOptions:
    m: int
    t_end: float
    dt: float | None = None
    cfl: float = 0.5
    out_every: int = 1
    stepper: str = "rk4"
    monitors: tuple = DEFAULT_MONITORS
    norm_style: str = "full"
    bkm_threshold: float = 50.0
    nonlinear: bool = True
    dt_refresh: int = 10
    snapshot_every: int | None = None

    def __post_init__(self):
        if self.stepper not in STEPPERS:
            raise ValueError(f"stepper must be one of {sorted(STEPPERS)}, got {self.stepper!r}")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.out_every < 1:
            raise ValueError("out_every must be >= 1")


@dataclass
class Snapshot:
    step: int
    state: GalerkinState
    extra: dict = field(default_factory=dict)


def evolve(initial: Spectrum, options: EvolveOptions, plan: TransformPlan | None = None,
           on_snapshot=None):
    """Advance ``initial`` to ``options.t_end``, yielding a DiagRecord per output.

    Records are emitted at t = 0, every ``out_every`` steps and at the end.
    ``on_snapshot(Snapshot)`` is called at t = 0, every ``snapshot_every``
    steps and at the end.  Raises :class:`NumericalAbort` when a norm turns
    non-finite or the blow-up monitor exceeds ``bkm_threshold``.
    """
    opts = options
    plan = plan or TransformPlan(initial.P, initial.Q)
    if initial.family != OMEGA:
        raise ValueError("initial data must be an omega spectrum")
    if (initial.P, initial.Q) != (plan.P, plan.Q):
        initial = initial.resized(plan.P, plan.Q)
    mask = threshold_mask(plan.P, plan.Q, OMEGA, opts.m)
    outside = float(np.max(np.abs(initial.coeffs[~mask]), initial=0.0))
    if outside > 0:
        raise PreconditionError(f"initial data has content {outside:.3e} outside truncation m={opts.m}")
    defect = initial.reality_defect()
    if defect > 1e-12 * max(1.0, initial.norm()):
        raise PreconditionError(f"initial data is not a real field (reality defect {defect:.3e})")
    state = GalerkinState(initial.copy(), 0.0, opts.m, plan)
    step_fn = STEPPERS[opts.stepper]

    def record(prev):
        rec = diagnostics(state, prev, opts.monitors, opts.norm_style, opts.nonlinear)
        if not rec.is_finite():
            raise NumericalAbort(f"non-finite diagnostics at t={rec.t:.6g}", rec)
        if rec.bkm_accumulator > opts.bkm_threshold:
            raise NumericalAbort(
                f"blow-up monitor {rec.bkm_accumulator:.3g} exceeded {opts.bkm_threshold:g} "
                f"at t={rec.t:.6g}", rec)
        return rec

    rec = record(None)
    yield rec
    if on_snapshot is not None:
        on_snapshot(Snapshot(0, state))

    t_end = float(opts.t_end)
    tiny = 1e-12 * max(1.0, t_end)
    step = 0
    h = opts.dt
    while state.t < t_end - tiny:
        check = step % opts.dt_refresh == 0
        if opts.dt is None and check:
            h = stable_dt(state, opts.cfl, opts.stepper, opts.nonlinear)
            h = min(h, 1.0)
        h_step = min(h, t_end - state.t)
        state = step_fn(state, h_step, opts.nonlinear, opts.cfl, check=check and opts.dt is not None)
        step += 1
        if opts.dt is not None and h_step == h:
            state.t = step * h if abs(step * h - state.t) < 1e-9 * h else state.t
        done = state.t >= t_end - tiny
        if done:
            state.t = t_end
        if step % opts.out_every == 0 or done:
            rec = record(rec)
            yield rec
        if on_snapshot is not None and (
            done or (opts.snapshot_every and step % opts.snapshot_every == 0)
        ):
            on_snapshot(Snapshot(step, state))
