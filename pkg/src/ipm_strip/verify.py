"""Verification suites: property checks reported as ``name measured bound PASS/FAIL``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from . import basis
from .config import SimConfig
from .elliptic import cross_inequality, poisson_residual, solve_stream, velocity_from_stream
from .fitting import fit_decay
from .galerkin import EvolveOptions, GalerkinState, evolve, step_etd, step_rk4, system_for
from .initial import make_initial_data
from .linear import (
    DecayEnvelope,
    coefficient_decay_bound,
    convolution_bound_check,
    decay_envelope_check,
    linear_evolve,
    linear_factors,
    linear_velocity,
)
from .spectral import (
    OMEGA,
    VARPI,
    Spectrum,
    TransformPlan,
    evaluate_grid,
    sobolev_norm,
    threshold_mask,
)

SUITES = ("basis", "transform", "elliptic", "semigroup", "energy", "decay")


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    bound: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        return f"{self.name} {self.measured:.6e} {self.bound:.6e} {'PASS' if self.passed else 'FAIL'}"


def at_most(name, measured, bound) -> Check:
    measured = float(measured)
    return Check(name, measured, float(bound), bool(measured <= bound), "<=")


def at_least(name, measured, bound) -> Check:
    measured = float(measured)
    return Check(name, measured, float(bound), bool(measured >= bound), ">=")


def random_spectrum(P, Q, family, rng, m=None, real=True, zero_mean=False) -> Spectrum:
    shape = (2 * P + 1, Q if family == OMEGA else Q + 1)
    c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    if m is not None:
        c = c * threshold_mask(P, Q, family, m)
    if zero_mean:
        c[P] = 0
    s = Spectrum(c, family)
    return s.enforce_reality() if real else s


# -- suites -------------------------------------------------------------------


def suite_basis(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    Q = cfg.Q
    y, w = special.roots_legendre(4 * Q + 40)
    checks = []
    B = np.array([basis.eval_b(q, y) for q in range(1, Q + 1)])
    C = np.array([basis.eval_c(q, y) for q in range(0, Q + 1)])
    for name, M in (("b", B), ("c", C)):
        gram = (M * w) @ M.T
        checks.append(at_most(f"orthonormal_{name}", np.max(np.abs(gram - np.eye(len(M)))), 1e-10))
    n = 4 * cfg.P + 8
    x = 2 * np.pi * np.arange(n) / n
    A = np.array([basis.eval_a(p, x) for p in range(-cfg.P, cfg.P + 1)])
    gram = (A.conj() * (2 * np.pi / n)) @ A.T
    checks.append(at_most("orthonormal_a", np.max(np.abs(gram - np.eye(len(A)))), 1e-12))
    walls = np.array([-1.0, 1.0])
    checks.append(at_most("trace_b", max(np.max(np.abs(basis.eval_b(q, walls))) for q in range(1, Q + 1)), 0.0))
    checks.append(at_most(
        "trace_dc", max(np.max(np.abs(basis.eval_vertical_derivative(basis.C, q, walls, 1)))
                        for q in range(0, Q + 1)), 1e-12))
    # derivative relations against centred differences
    h = 1e-5
    ys = np.linspace(-0.9, 0.9, 7)
    err = 0.0
    for fam, qs in ((basis.B, range(1, Q + 1)), (basis.C, range(0, Q + 1))):
        for q in qs:
            fd = (basis.eval_vertical(fam, q, ys + h) - basis.eval_vertical(fam, q, ys - h)) / (2 * h)
            ex = basis.eval_vertical_derivative(fam, q, ys, 1)
            err = max(err, np.max(np.abs(fd - ex)) / max(1.0, basis.eigenvalue(q) ** 3))
    checks.append(at_most("derivative_relations", err, 1e-6))
    return checks


def suite_transform(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    P, Q = cfg.P, cfg.Q
    plan = TransformPlan(P, Q)
    rng = np.random.default_rng(cfg.seed)
    rt = pars = trace = 0.0
    for _ in range(seeds):
        for fam in (OMEGA, VARPI):
            s = random_spectrum(P, Q, fam, rng)
            f = plan.synthesize(s)
            back = plan.analyze_omega(f) if fam == OMEGA else plan.analyze_varpi(f)
            rt = max(rt, np.max(np.abs(back.coeffs - s.coeffs)) / np.max(np.abs(s.coeffs)))
            pars = max(pars, abs(plan.l2_norm(f) ** 2 - s.norm() ** 2) / s.norm() ** 2)
            if fam == OMEGA:
                trace = max(trace, np.max(np.abs(f[:, [0, -1]])))
    return [
        at_most("round_trip", rt, 1e-12),
        at_most("parseval", pars, 1e-10),
        at_most("omega_wall_trace", trace, 1e-12),
    ]


def suite_elliptic(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    P, Q = cfg.P, cfg.Q
    plan = TransformPlan(P, Q)
    rng = np.random.default_rng(cfg.seed)
    walls = np.array([-1.0, 1.0])
    res = grid_res = trace = div = 0.0
    cross = bounded = zero_order = 0.0
    for _ in range(seeds):
        rb = random_spectrum(P, Q, OMEGA, rng, zero_mean=True)
        psi = solve_stream(rb)
        scale = rb.norm()
        res = max(res, np.max(np.abs(poisson_residual(psi, rb).coeffs)) / scale)
        psi_rt = plan.analyze_omega(plan.synthesize(psi))
        grid_res = max(grid_res, np.max(np.abs(poisson_residual(psi_rt, rb).coeffs)) / scale)
        trace = max(trace, np.max(np.abs(evaluate_grid(psi, plan.x, walls))) / scale)
        u = velocity_from_stream(psi)
        div = max(div, np.max(np.abs(u.divergence().coeffs)) / scale)
        for k in range(5):
            lhs, rhs = cross_inequality(rb, k, "endpoint")
            cross = max(cross, lhs / rhs)
            bounded = max(bounded, sobolev_norm(psi, k + 1, "full") / sobolev_norm(rb, k, "full"))
            zero_order = max(zero_order, sobolev_norm(u.u2, k, "full") / sobolev_norm(rb, k, "full"))
    return [
        at_most("poisson_residual", res, 1e-12),
        at_most("poisson_residual_grid", grid_res, 1e-10),
        at_most("dirichlet_trace", trace, 1e-12),
        at_most("divergence", div, 1e-12),
        at_most("cross_inequality_ratio", cross, 1.0 + 1e-12),
        at_most("stream_bound_ratio", bounded, math.sqrt(2.0)),
        at_most("u2_bound_ratio", zero_order, 1.0 + 1e-12),
    ]


def rk4_order(P=8, Q=8, dts=(0.1, 0.05, 0.025), t_end=1.0, seed=0) -> tuple[float, list, list]:
    """(min order, orders, errors) of linear-only RK4 against the exact propagator."""
    rng = np.random.default_rng(seed)
    s = random_spectrum(P, Q, OMEGA, rng)
    plan = TransformPlan(P, Q)
    exact = s.coeffs * linear_factors(P, Q, t_end)
    errs = []
    for dt in dts:
        st = GalerkinState(s, 0.0, min(P, Q), plan)
        n = int(round(t_end / dt))
        for _ in range(n):
            st = step_rk4(st, dt, nonlinear=False)
        errs.append(float(np.max(np.abs(st.rho.coeffs - exact))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return min(orders), orders, errs


def etd_linear_error(P=8, Q=8, times=(1.0, 10.0, 100.0), seed=0) -> float:
    rng = np.random.default_rng(seed)
    s = random_spectrum(P, Q, OMEGA, rng)
    plan = TransformPlan(P, Q)
    err = 0.0
    for t in times:
        st = step_etd(GalerkinState(s, 0.0, min(P, Q), plan), t, nonlinear=False)
        exact = s.coeffs * linear_factors(P, Q, t)
        err = max(err, np.max(np.abs(st.rho.coeffs - exact)))
    return float(err)


ENVELOPE_GRID = [(j, a) for j in (0, 1, 2) for a in (1, 2)]
CONVOLUTION_GRID = [(0.5, 0.01), (0.76, 0.01), (1.0, 0.25), (1.5, 0.5), (2.0, 1.0), (0.9, 2.0)]


def suite_semigroup(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    P, Q = min(cfg.P, 16), min(cfg.Q, 16)
    rng = np.random.default_rng(cfg.seed)
    checks = [at_most(
        "factor_11", abs(linear_factors(1, 1, 1.0)[2, 0] - math.exp(-1.0 / (1.0 + (math.pi / 2) ** 2))), 1e-15
    )]
    law = contraction = vel = 0.0
    slack = math.inf
    for _ in range(seeds):
        s = random_spectrum(P, Q, OMEGA, rng, zero_mean=True)
        t1, t2 = rng.uniform(0, 10, size=2)
        law = max(law, np.max(np.abs(linear_evolve(linear_evolve(s, t1), t2).coeffs
                                     - linear_evolve(s, t1 + t2).coeffs)))
        f = np.abs(linear_factors(P, Q, t1))[np.arange(-P, P + 1) != 0]
        contraction = max(contraction, float(np.max(f)))
        u_lin = linear_velocity(s, t1)
        u_ref = velocity_from_stream(solve_stream(linear_evolve(s, t1))).u2
        vel = max(vel, np.max(np.abs(u_lin.coeffs - u_ref.coeffs)))
        small = random_spectrum(6, 6, OMEGA, rng)
        for alpha in (1, 2):
            slack = min(slack, coefficient_decay_bound(small, alpha).min_ratio)
    checks += [
        at_most("semigroup_law", law, 1e-13),
        at_most("contraction", contraction, 1.0),
        at_most("velocity_consistency", vel, 1e-14),
        at_least("coefficient_bound_ratio", slack, 1.0),
    ]
    t_grid = np.linspace(0.0, 100.0, 101)
    for j, a in ENVELOPE_GRID:
        rep = decay_envelope_check(DecayEnvelope(j, a, t_grid), 200, 3000)
        checks.append(at_most(f"envelope_j{j}_a{a}_doubling", rep.doubling_ratio, 1.05))
    t_conv = np.linspace(0.0, 200.0, 41)
    for d, q in CONVOLUTION_GRID:
        rep = convolution_bound_check(d, q, t_conv)
        checks.append(at_most(f"convolution_d{d:g}_q{q:g}", rep.constant, rep.bound))
    checks.append(at_most("etd_linear_exact", etd_linear_error(), 1e-12))
    _, orders, _ = rk4_order()
    checks += [at_least("rk4_order.min", min(orders), 3.7), at_most("rk4_order.max", max(orders), 4.3)]
    return checks


def suite_energy(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    P, Q, m = cfg.P, cfg.Q, cfg.m
    plan = TransformPlan(P, Q, n_x=cfg.n_x, n_y=cfg.n_y)
    rng = np.random.default_rng(cfg.seed)
    skew = 0.0
    sys = system_for(plan, m)
    for _ in range(seeds):
        s = random_spectrum(P, Q, OMEGA, rng, m=m)
        adv, _ = sys.advection(s.coeffs)
        skew = max(skew, abs(np.vdot(s.coeffs, adv)) / s.norm() ** 3)
    t_end = min(cfg.t_end, 1.0)
    dt = cfg.dt or 1e-3
    rho0 = make_initial_data(cfg)
    opts = EvolveOptions(m=m, t_end=t_end, dt=dt, out_every=10, stepper=cfg.stepper,
                         monitors=(0,), norm_style=cfg.norm_style)
    recs = list(evolve(rho0, opts, plan))
    l2 = np.array([r.l2_rho for r in recs])
    tt = np.array([r.t for r in recs])
    growth = np.max(np.diff(l2) / np.diff(tt), initial=-math.inf)
    # a y-only perturbation is a stationary solution
    strat = Spectrum(np.zeros_like(rho0.coeffs), OMEGA)
    strat.coeffs[P, : min(3, m)] = 0.1
    recs_s = list(evolve(strat, EvolveOptions(m=m, t_end=0.1, dt=1e-2, monitors=(0,)), plan))
    return [
        at_most("advection_skew", skew, 1e-10),
        at_most("energy_residual", max(r.energy_identity_residual for r in recs), 1e-8),
        at_most("l2_growth_rate", growth, 1e-10),
        at_most("boundary_residual", max(max(r.boundary_residuals) for r in recs), 1e-9),
        at_most("divergence", max(r.divergence for r in recs), 1e-12),
        at_most("stationary_drift", abs(recs_s[-1].l2_rho - recs_s[0].l2_rho), 1e-15),
    ]


def decay_checks(records, epsilon, kappa, window=(5.0, 50.0), tag="") -> list[Check]:
    """Bounded H^3, decaying mean-free part and velocity, small mean part."""
    t = np.array([r.t for r in records])
    h3 = np.array([r.hk(3) for r in records])
    bar = np.array([r.hk(0, "bar") for r in records])
    u2 = np.array([r.h3_u2 for r in records])
    tilde = np.array([r.hk(kappa, "tilde") for r in records])
    sel = (t >= window[0]) & (t <= window[1])
    checks = [at_most(f"{tag}h3_ratio", np.max(h3) / h3[0], 2.0)]
    for name, series in (("rho_bar_l2", bar), ("u2_h3", u2)):
        fit = fit_decay(t, series, window)
        checks.append(at_most(f"{tag}{name}_slope", fit.slope, -0.5))
        checks.append(at_most(f"{tag}{name}_increase", np.max(np.diff(series[sel]), initial=0.0), 0.0))
    checks.append(at_most(f"{tag}rho_tilde_hk_over_eps", np.max(tilde) / epsilon, 2.0))
    return checks


def suite_decay(cfg: SimConfig, seeds: int = 10) -> list[Check]:
    monitors = tuple(sorted(set(cfg.monitors) | {0, 3, cfg.kappa}))
    cfg = replace(cfg, monitors=monitors, norm_style="endpoint")
    plan = TransformPlan(cfg.P, cfg.Q, n_x=cfg.n_x, n_y=cfg.n_y)
    opts = EvolveOptions(m=cfg.m, t_end=cfg.t_end, dt=cfg.dt, cfl=cfg.cfl, out_every=cfg.out_every,
                         stepper=cfg.stepper, monitors=monitors, norm_style="endpoint",
                         bkm_threshold=cfg.bkm_threshold)
    recs = list(evolve(make_initial_data(cfg), opts, plan))
    window = (5.0, min(50.0, cfg.t_end))
    return decay_checks(recs, cfg.epsilon, cfg.kappa, window)


_SUITES = {
    "basis": suite_basis,
    "transform": suite_transform,
    "elliptic": suite_elliptic,
    "semigroup": suite_semigroup,
    "energy": suite_energy,
    "decay": suite_decay,
}


def verify(suite: str, cfg: SimConfig | None = None, seeds: int = 10) -> list[Check]:
    """Run one suite (or ``all``) and return its checks."""
    cfg = cfg or SimConfig()
    if suite == "all":
        return [c for name in SUITES for c in _SUITES[name](cfg, seeds)]
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    return _SUITES[suite](cfg, seeds)
