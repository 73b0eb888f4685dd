"""Stream-function Poisson solve and velocity recovery.

The stream function solves ``lap psi = -d_x rho_bar`` with ``psi = 0`` at
``y = +-1``; in the omega basis this is the diagonal map

    psi(p, q) = i p / (p^2 + (q pi/2)^2) * rho_bar(p, q)

and the velocity is ``u = (-d_y psi, d_x psi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import PreconditionError
from .spectral import OMEGA, Spectrum, dx_op, dy_op, laplace_symbol, sobolev_norm

MEAN_TOLERANCE = 1e-14


@dataclass
class VelocityField:
    u1: Spectrum  # varpi family
    u2: Spectrum  # omega family

    def divergence(self) -> Spectrum:
        """d_x u1 + d_y u2 as a varpi spectrum; zero for a stream-function velocity."""
        return dx_op(self.u1) + dy_op(self.u2)


@lru_cache(maxsize=64)
def stream_multiplier(P, Q):
    """i p / (p^2 + (q pi/2)^2); zero on the p = 0 row."""
    p = np.arange(-P, P + 1)[:, None]
    out = 1j * p / laplace_symbol(P, Q, OMEGA)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def u2_multiplier(P, Q):
    """-p^2 / (p^2 + (q pi/2)^2): rho_bar -> u2 coefficients."""
    p = np.arange(-P, P + 1)[:, None]
    out = -(p**2) / laplace_symbol(P, Q, OMEGA)
    out.setflags(write=False)
    return out


def solve_stream(rho_bar: Spectrum, tol: float = MEAN_TOLERANCE) -> Spectrum:
    """Stream function of a zero-horizontal-mean density perturbation.

    p = 0 content up to ``tol`` is treated as round-off and discarded;
    anything larger raises :class:`PreconditionError`.
    """
    if rho_bar.family != OMEGA:
        raise ValueError("rho_bar must be an omega spectrum")
    mean = float(np.max(np.abs(rho_bar.coeffs[rho_bar.P]), initial=0.0))
    if mean > tol:
        raise PreconditionError(
            f"rho_bar has horizontal-mean content {mean:.3e} > {tol:.1e}; "
            "apply decompose_mean first"
        )
    return Spectrum(rho_bar.coeffs * stream_multiplier(rho_bar.P, rho_bar.Q), OMEGA)


def velocity_from_stream(psi: Spectrum) -> VelocityField:
    if psi.family != OMEGA:
        raise ValueError("psi must be an omega spectrum")
    return VelocityField(u1=-dy_op(psi), u2=dx_op(psi))


def poisson_residual(psi: Spectrum, rho_bar: Spectrum) -> Spectrum:
    """Coefficients of lap psi + d_x rho_bar."""
    lap = Spectrum(-psi.coeffs * laplace_symbol(psi.P, psi.Q, OMEGA), OMEGA)
    return lap + dx_op(rho_bar)


def cross_inequality(rho_bar: Spectrum, k: int, style: str = "endpoint") -> tuple[float, float]:
    """(||u||_{H^k}^2, ||rho_bar||_{H^k} ||u2||_{H^k}) for the velocity of ``rho_bar``.

    The first never exceeds the second: per mode, |u|^2 = |p| |rho_bar| |u2|
    and the H^k weights are shared, so Cauchy-Schwarz closes the bound.
    """
    u = velocity_from_stream(solve_stream(rho_bar))
    lhs = sobolev_norm(u.u1, k, style) ** 2 + sobolev_norm(u.u2, k, style) ** 2
    rhs = sobolev_norm(rho_bar, k, style) * sobolev_norm(u.u2, k, style)
    return lhs, rhs
