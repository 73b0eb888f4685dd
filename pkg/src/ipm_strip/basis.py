"""Eigenfunction families on the strip T x [-1, 1].

Horizontal factor ``a_p(x) = exp(ipx)/sqrt(2 pi)``.  Vertical families::

    b_q(y) = cos(q pi y / 2)   q odd       (q >= 1, Dirichlet type)
             sin(q pi y / 2)   q even
    c_q(y) = sin(q pi y / 2)   q odd       (q >= 0, Neumann type)
             cos(q pi y / 2)   q even >= 2
             1/sqrt(2)         q = 0

Both families are orthonormal on [-1, 1] and diagonalise -d^2/dy^2 with
eigenvalue (q pi / 2)^2.  Tensor products give ``omega_{p,q} = a_p b_q`` and
``varpi_{p,q} = a_p c_q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HALF_PI = 0.5 * np.pi
C0 = 1.0 / np.sqrt(2.0)

B = "b"
C = "c"


def sinpi(x):
    """sin(pi x) with exact argument reduction (zero at integers)."""
    x = np.asarray(x, dtype=float)
    r = np.mod(x, 2.0)
    sign = np.where(r >= 1.0, -1.0, 1.0)
    r = np.where(r >= 1.0, r - 1.0, r)
    r = np.minimum(r, 1.0 - r)
    return sign * np.sin(np.pi * r)


def cospi(x):
    """cos(pi x) with exact argument reduction (zero at half-integers)."""
    return sinpi(np.asarray(x, dtype=float) + 0.5)


@dataclass(frozen=True)
class ModeIndex:
    """A (p, q) pair addressing one eigenfunction."""

    p: int
    q: int

    def check(self, family: str) -> "ModeIndex":
        if family == B and self.q < 1:
            raise ValueError(f"b/omega family needs q >= 1, got q={self.q}")
        if self.q < 0:
            raise ValueError(f"q must be non-negative, got {self.q}")
        return self

    @property
    def eigenvalue(self) -> float:
        return (self.q * HALF_PI) ** 2


def eigenvalue(q):
    """Eigenvalue (q pi/2)^2 of -d^2/dy^2 on b_q and c_q."""
    return (np.asarray(q, dtype=float) * HALF_PI) ** 2


def eval_a(p: int, x):
    return np.exp(1j * p * np.asarray(x, dtype=float)) / np.sqrt(2.0 * np.pi)


def eval_b(q: int, y):
    if q < 1:
        raise ValueError(f"b_q is defined for q >= 1, got q={q}")
    arg = 0.5 * q * np.asarray(y, dtype=float)
    return cospi(arg) if q % 2 else sinpi(arg)


def eval_c(q: int, y):
    if q < 0:
        raise ValueError(f"c_q is defined for q >= 0, got q={q}")
    y = np.asarray(y, dtype=float)
    if q == 0:
        return np.full_like(y, C0)
    arg = 0.5 * q * y
    return sinpi(arg) if q % 2 else cospi(arg)


def eval_vertical(family: str, q: int, y):
    if family == B:
        return eval_b(q, y)
    if family == C:
        return eval_c(q, y)
    raise ValueError(f"unknown family {family!r}")


def deriv_coeffs(family: str, q: int) -> tuple[str, float]:
    """Return ``(target, scalar)`` with d/dy family_q = scalar * target_q."""
    sgn = -1.0 if q % 2 else 1.0
    if family == B:
        if q < 1:
            raise ValueError(f"b_q is defined for q >= 1, got q={q}")
        return C, sgn * q * HALF_PI
    if family == C:
        if q < 0:
            raise ValueError(f"c_q is defined for q >= 0, got q={q}")
        return B, -sgn * q * HALF_PI
    raise ValueError(f"unknown family {family!r}")


def eval_vertical_derivative(family: str, q: int, y, order: int = 0):
    """n-th y-derivative of a vertical basis function via the derivative algebra."""
    scale = 1.0
    fam = family
    for _ in range(order):
        fam, s = deriv_coeffs(fam, q)
        scale *= s
        if scale == 0.0:
            return np.zeros_like(np.asarray(y, dtype=float))
    return scale * eval_vertical(fam, q, y)


def eval_omega(mode: ModeIndex, x, y):
    mode.check(B)
    return eval_a(mode.p, x) * eval_b(mode.q, y)


def eval_varpi(mode: ModeIndex, x, y):
    mode.check(C)
    return eval_a(mode.p, x) * eval_c(mode.q, y)
