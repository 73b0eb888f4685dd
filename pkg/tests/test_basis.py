import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from ipm_strip import basis
from ipm_strip.basis import ModeIndex, deriv_coeffs, eval_a, eval_b, eval_c, eval_omega, eval_varpi


def test_eval_b_examples():
    assert eval_b(1, 0.0) == pytest.approx(1.0)
    assert eval_b(2, 1.0) == 0.0
    assert eval_b(2, -1.0) == 0.0
    assert abs(eval_b(3, 1.0 / 3.0)) < 1e-15


def test_eval_b_rejects_zero():
    with pytest.raises(ValueError):
        eval_b(0, 0.3)


def test_eval_c_examples():
    assert eval_c(0, 0.7) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert eval_c(1, 1.0) == pytest.approx(1.0)
    assert abs(eval_c(2, 0.5)) < 1e-15


def test_eval_omega_examples():
    assert eval_omega(ModeIndex(0, 1), 0.0, 0.0) == pytest.approx(0.3989422804, abs=1e-10)
    assert eval_omega(ModeIndex(1, 1), math.pi, 0.0) == pytest.approx(-1 / math.sqrt(2 * math.pi))
    for p in (-3, 0, 5):
        assert eval_omega(ModeIndex(p, 2), 1.234, 1.0) == 0.0


def test_mode_index_family_rules():
    with pytest.raises(ValueError):
        ModeIndex(1, 0).check("b")
    ModeIndex(1, 0).check("c")
    assert ModeIndex(2, 3).eigenvalue == pytest.approx((3 * math.pi / 2) ** 2)


def test_deriv_coeffs_examples():
    assert deriv_coeffs("b", 1) == ("c", pytest.approx(-math.pi / 2))
    target, scale = deriv_coeffs("c", 0)
    assert target == "b" and scale == 0
    assert deriv_coeffs("b", 2) == ("c", pytest.approx(math.pi))


@pytest.mark.parametrize("family", ["b", "c"])
def test_double_derivative_is_eigenvalue(family):
    for q in range(1, 9):
        t1, s1 = deriv_coeffs(family, q)
        t2, s2 = deriv_coeffs(t1, q)
        assert t2 == family
        assert s1 * s2 == pytest.approx(-((q * math.pi / 2) ** 2))


def test_orthonormality_by_adaptive_quadrature():
    Q = 6
    for fam, qs in (("b", range(1, Q + 1)), ("c", range(0, Q + 1))):
        for q1 in qs:
            for q2 in qs:
                val, _ = integrate.quad(
                    lambda y: basis.eval_vertical(fam, q1, y) * basis.eval_vertical(fam, q2, y),
                    -1, 1, limit=200,
                )
                assert val == pytest.approx(float(q1 == q2), abs=1e-10)


def test_horizontal_orthonormality():
    for p1 in range(-3, 4):
        for p2 in range(-3, 4):
            re, _ = integrate.quad(lambda x: (eval_a(p1, x) * np.conj(eval_a(p2, x))).real, 0, 2 * np.pi)
            assert re == pytest.approx(float(p1 == p2), abs=1e-10)


@given(q=st.integers(1, 32), y=st.floats(-0.95, 0.95))
def test_first_derivative_matches_finite_difference(q, y):
    h = 1e-5
    for fam in ("b", "c"):
        fd = (basis.eval_vertical(fam, q, y + h) - basis.eval_vertical(fam, q, y - h)) / (2 * h)
        exact = basis.eval_vertical_derivative(fam, q, y, 1)
        assert fd == pytest.approx(exact, abs=1e-7 * (q * math.pi / 2) ** 3 + 1e-9)


@given(q=st.integers(1, 32), y=st.floats(-0.95, 0.95))
def test_eigenrelation_by_finite_difference(q, y):
    h = 1e-4
    lam = (q * math.pi / 2) ** 2
    for fam in ("b", "c"):
        f = lambda t: basis.eval_vertical(fam, q, t)  # noqa: E731
        fd = (f(y + h) - 2 * f(y) + f(y - h)) / h**2
        assert -fd == pytest.approx(lam * f(y), abs=1e-6 * lam**2 + 1e-7)


def test_trace_structure_is_exact():
    walls = np.array([-1.0, 1.0])
    for q in range(1, 40):
        assert np.all(eval_b(q, walls) == 0.0)
    for q in range(0, 40):
        assert np.all(basis.eval_vertical_derivative("c", q, walls, 1) == 0.0)


def test_varpi_matches_product():
    x, y = 0.3, -0.4
    assert eval_varpi(ModeIndex(2, 3), x, y) == pytest.approx(eval_a(2, x) * eval_c(3, y))
