import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from ipm_strip.exceptions import ResolutionError
from ipm_strip.spectral import (
    OMEGA,
    VARPI,
    Spectrum,
    TransformPlan,
    decompose_mean,
    dx_op,
    dy_op,
    evaluate_grid,
    inner,
    l1_sobolev_norm,
    partial,
    project_threshold,
    read_snapshot,
    sobolev_norm,
    write_snapshot,
)

from conftest import random_omega

SQ2PI = math.sqrt(2 * math.pi)


def random_spectrum(P, Q, family, rng):
    nq = Q if family == OMEGA else Q + 1
    c = rng.normal(size=(2 * P + 1, nq)) + 1j * rng.normal(size=(2 * P + 1, nq))
    return Spectrum(c, family).enforce_reality()


def quadrature_coefficient(f, p, vertical):
    """Independent oracle: int f conj(a_p) vertical over the strip, by Gauss-Legendre x uniform."""
    n = 256
    x = 2 * np.pi * np.arange(n) / n
    y, w = special.roots_legendre(200)
    X, Y = np.meshgrid(x, y, indexing="ij")
    integrand = f(X, Y) * np.exp(-1j * p * X) / SQ2PI * vertical(Y)
    return np.sum(integrand * w[None, :]) * (2 * np.pi / n)


def test_analyze_omega_cosine_example():
    plan = TransformPlan(4, 4)
    X, Y = plan.mesh()
    s = plan.analyze_omega(np.cos(X) * np.cos(np.pi * Y / 2))
    expected = quadrature_coefficient(lambda x, y: np.cos(x) * np.cos(np.pi * y / 2), 1,
                                      lambda y: np.cos(np.pi * y / 2))
    assert expected == pytest.approx(SQ2PI / 2, abs=1e-12)
    assert s[1, 1] == pytest.approx(SQ2PI / 2, abs=1e-12)
    assert s[-1, 1] == pytest.approx(SQ2PI / 2, abs=1e-12)
    s[1, 1] = s[-1, 1] = 0
    assert np.max(np.abs(s.coeffs)) < 1e-12


def test_analyze_varpi_sine_example():
    plan = TransformPlan(4, 4)
    X, Y = plan.mesh()
    s = plan.analyze_varpi(np.sin(X) * np.sin(np.pi * Y / 2))
    expected = quadrature_coefficient(lambda x, y: np.sin(x) * np.sin(np.pi * y / 2), 1,
                                      lambda y: np.sin(np.pi * y / 2))
    assert expected == pytest.approx(-1j * SQ2PI / 2, abs=1e-12)
    assert s[1, 1] == pytest.approx(-1j * SQ2PI / 2, abs=1e-12)
    assert s[-1, 1] == pytest.approx(1j * SQ2PI / 2, abs=1e-12)


def test_synthesize_examples():
    plan = TransformPlan(3, 3)
    f = plan.synthesize_omega(Spectrum.delta(3, 3, 0, 1))
    assert np.max(f) == pytest.approx(1 / SQ2PI, abs=1e-12)
    g = plan.synthesize_varpi(Spectrum.delta(3, 3, 0, 0, family=VARPI))
    assert np.allclose(g, 1 / (SQ2PI * math.sqrt(2)), atol=1e-14)
    assert np.all(plan.synthesize_omega(Spectrum.zeros(3, 3)) == 0)


def test_delta_round_trip():
    plan = TransformPlan(5, 5)
    s = plan.analyze_omega(plan.synthesize_omega(Spectrum.delta(5, 5, 2, 3)))
    target = Spectrum.delta(5, 5, 2, 3)
    assert np.max(np.abs(s.coeffs - target.coeffs)) < 1e-12


@given(P=st.integers(1, 12), Q=st.integers(1, 12), seed=st.integers(0, 2**31), family=st.sampled_from([OMEGA, VARPI]))
def test_round_trip_and_parseval(P, Q, seed, family):
    rng = np.random.default_rng(seed)
    s = random_spectrum(P, Q, family, rng)
    plan = TransformPlan(P, Q)
    f = plan.synthesize(s)
    back = plan.analyze_omega(f) if family == OMEGA else plan.analyze_varpi(f)
    assert np.max(np.abs(back.coeffs - s.coeffs)) < 1e-12 * max(1.0, np.max(np.abs(s.coeffs)))
    assert plan.l2_norm(f) ** 2 == pytest.approx(s.norm() ** 2, rel=1e-10)


def test_complex_round_trip(rng):
    plan = TransformPlan(4, 5)
    c = rng.normal(size=(9, 5)) + 1j * rng.normal(size=(9, 5))
    s = Spectrum(c, OMEGA)
    f = plan.synthesize(s)
    assert np.iscomplexobj(f)
    assert np.allclose(plan.analyze_omega(f).coeffs, c, atol=1e-12)


def test_shape_mismatch_rejected():
    plan = TransformPlan(3, 3)
    with pytest.raises(ValueError):
        plan.analyze_omega(np.zeros((5, 5)))


def test_evaluate_grid_matches_synthesis(rng):
    s = random_spectrum(4, 4, OMEGA, rng)
    plan = TransformPlan(4, 4)
    assert np.allclose(evaluate_grid(s, plan.x, plan.y), plan.synthesize(s), atol=1e-13)
    sv = random_spectrum(4, 4, VARPI, rng)
    assert np.allclose(evaluate_grid(sv, plan.x, plan.y), plan.synthesize(sv), atol=1e-13)


def test_dx_examples():
    assert np.all(dx_op(Spectrum.delta(3, 3, 0, 1)).coeffs == 0)
    d = dx_op(Spectrum.delta(3, 3, 2, 1))
    assert d[2, 1] == 2j
    s = Spectrum.delta(3, 3, 3, 2)
    assert dx_op(dx_op(s))[3, 2] == pytest.approx(-9)


def test_dy_examples():
    d = dy_op(Spectrum.delta(3, 3, 0, 1))
    assert d.family == VARPI
    assert d[0, 1] == pytest.approx(-math.pi / 2)
    assert np.all(dy_op(Spectrum.delta(3, 3, 3, 0, family=VARPI)).coeffs == 0)
    for p, q in ((1, 1), (2, 3), (-1, 4)):
        dd = dy_op(dy_op(Spectrum.delta(3, 4, p, q)))
        assert dd.family == OMEGA
        assert dd[p, q] == pytest.approx(-((q * math.pi / 2) ** 2))


def test_four_dy_returns_fourth_power(rng):
    s = random_spectrum(3, 6, OMEGA, rng)
    d4 = dy_op(dy_op(dy_op(dy_op(s))))
    mu4 = (np.arange(1, 7) * math.pi / 2) ** 4
    assert np.allclose(d4.coeffs, s.coeffs * mu4, rtol=1e-13)


def test_dy_matches_grid_derivative(rng):
    s = random_spectrum(3, 5, OMEGA, rng)
    x = np.array([0.1, 2.0])
    y = np.linspace(-0.9, 0.9, 5)
    assert np.allclose(evaluate_grid(dy_op(s), x, y), evaluate_grid(s, x, y, dy=1), atol=1e-12)


def test_projector_examples(rng):
    s = random_spectrum(4, 4, OMEGA, rng)
    assert np.array_equal(project_threshold(s, 4).coeffs, s.coeffs)
    assert np.all(project_threshold(s, 0).coeffs == 0)
    assert np.all(project_threshold(Spectrum.delta(4, 4, 3, 1), 2).coeffs == 0)


@given(seed=st.integers(0, 2**31), m=st.integers(0, 6))
def test_projector_algebra(seed, m):
    rng = np.random.default_rng(seed)
    f = random_spectrum(6, 6, OMEGA, rng)
    g = random_spectrum(6, 6, OMEGA, rng)
    Pf = project_threshold(f, m)
    assert np.array_equal(project_threshold(Pf, m).coeffs, Pf.coeffs)
    assert inner(Pf, g) == pytest.approx(inner(f, project_threshold(g, m)), abs=1e-12)
    assert np.allclose(dx_op(Pf).coeffs, project_threshold(dx_op(f), m).coeffs)
    assert np.allclose(dy_op(Pf).coeffs, project_threshold(dy_op(f), m).coeffs)
    h = random_spectrum(6, 6, VARPI, rng)
    assert np.allclose(dy_op(project_threshold(h, m)).coeffs, project_threshold(dy_op(h), m).coeffs)
    for k in range(4):
        assert sobolev_norm(Pf, k) <= sobolev_norm(f, k) + 1e-12


def test_sobolev_examples(rng):
    s = Spectrum.delta(3, 3, 1, 2)
    assert partial(s, 1, 1).norm() ** 2 == pytest.approx(math.pi**2)
    full2 = 3 + 2 * math.pi**2 + math.pi**4
    assert sobolev_norm(s, 2, "full") ** 2 == pytest.approx(full2)
    r = random_spectrum(4, 4, OMEGA, rng)
    assert sobolev_norm(r, 0) == pytest.approx(r.norm())
    assert sobolev_norm(r, 0, "endpoint") == pytest.approx(r.norm())
    for k in range(6):
        assert sobolev_norm(Spectrum.zeros(4, 4), k) == 0
        assert sobolev_norm(r, k, "full") >= sobolev_norm(r, k, "endpoint") - 1e-12


def test_sobolev_norm_matches_grid_derivatives(rng):
    s = random_spectrum(3, 3, OMEGA, rng)
    plan = TransformPlan(3, 3, n_x=16, n_y=16)
    total = 0.0
    for sx in range(3):
        for sy in range(3 - sx):
            total += plan.l2_norm(plan.synthesize(partial(s, sx, sy))) ** 2
    assert math.sqrt(total) == pytest.approx(sobolev_norm(s, 2, "full"), rel=1e-10)


def test_l1_norm_example():
    plan = TransformPlan(1, 1, n_x=512, n_y=512)
    s = Spectrum.zeros(1, 1)
    s[1, 1] = s[-1, 1] = SQ2PI / 2  # cos(x) cos(pi y / 2)
    assert l1_sobolev_norm(plan, s, 0) == pytest.approx(16 / math.pi, rel=1e-4)
    assert l1_sobolev_norm(plan, s, 1) >= l1_sobolev_norm(plan, s, 0)
    assert l1_sobolev_norm(plan, Spectrum.zeros(1, 1), 2) == 0


def test_l1_norm_needs_resolution():
    with pytest.raises(ResolutionError):
        l1_sobolev_norm(TransformPlan(2, 2), Spectrum.zeros(4, 4), 0)


@given(seed=st.integers(0, 2**31))
def test_trace_conditions(seed):
    rng = np.random.default_rng(seed)
    s = random_spectrum(4, 32, OMEGA, rng)
    walls = np.array([-1.0, 1.0])
    x = np.linspace(0, 2 * np.pi, 7)
    for n in range(3):
        scale = (32 * math.pi / 2) ** (2 * n) * np.abs(s.coeffs).sum()
        assert np.max(np.abs(evaluate_grid(s, x, walls, dy=2 * n))) <= 1e-10 * max(1.0, scale)
    sv = random_spectrum(4, 32, VARPI, rng)
    for n in range(2):
        assert np.max(np.abs(evaluate_grid(sv, x, walls, dy=2 * n + 1))) == 0


def test_decompose_mean(rng):
    s = random_spectrum(3, 3, OMEGA, rng)
    bar, tilde = decompose_mean(s)
    assert np.allclose((bar + tilde).coeffs, s.coeffs)
    assert np.all(bar.coeffs[3] == 0)
    assert np.all(np.delete(tilde.coeffs, 3, axis=0) == 0)
    plan = TransformPlan(3, 3)
    assert abs(plan.integrate(plan.synthesize(bar) * plan.synthesize(tilde))) < 1e-12
    only_mean = Spectrum.zeros(3, 3)
    only_mean[0, 2] = 1.0
    b, t = decompose_mean(only_mean)
    assert b.norm() == 0 and t.norm() == 1


def test_reality(rng):
    s = Spectrum(rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3)), OMEGA)
    assert s.reality_defect() > 0
    assert s.enforce_reality().reality_defect() == 0
    f = TransformPlan(2, 3).synthesize(s.enforce_reality())
    assert np.isrealobj(f)


def test_snapshot_round_trip(rng):
    s = random_spectrum(3, 4, VARPI, rng)
    buf = io.StringIO()
    write_snapshot(s, buf, {"t": 1.5})
    buf.seek(0)
    back, header = read_snapshot(buf)
    assert back.family == VARPI
    assert header["t"] == "1.5"
    assert np.array_equal(back.coeffs, s.coeffs)


def test_snapshot_rejects_garbage():
    with pytest.raises(ValueError):
        read_snapshot(io.StringIO("hello\n"))


def test_dealiasing_headroom():
    plan = TransformPlan(32, 32)
    assert plan.grid_shape[0] >= 97 and plan.dealiased_for(32)
    assert not TransformPlan(32, 32, n_x=80).dealiased_for(32)
    with pytest.raises(ResolutionError):
        TransformPlan(32, 32, n_x=64)


def test_random_omega_helper_is_real(rng):
    assert random_omega(3, 3, rng).reality_defect() == 0
