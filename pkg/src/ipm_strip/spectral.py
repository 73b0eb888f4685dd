"""Coefficient spectra, grid transforms, derivative operators and norms.

A spectrum stores complex coefficients on ``p in [-P, P]`` (rows) and
``q in [q_min, Q]`` (columns) where ``q_min`` is 1 for the omega family (the
X-type fields: rho, psi, u2) and 0 for the varpi family (Y-type: u1 and
y-derivatives of X-type fields).

Grid fields have shape ``(n_x, n_y + 1)``: ``n_x`` equispaced points on
[0, 2 pi) and ``n_y + 1`` equispaced nodes on [-1, 1] including both walls.
Under the shift ``z = y + 1`` the vertical families become
``b_q = s_q sin(q pi z / 2)`` and ``c_q = t_q cos(q pi z / 2)`` with
``s_q = (-1)**(q // 2)`` and ``t_q = (-1)**((q + 1) // 2)``, so the
y-direction is handled by type-I DST/DCT.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .basis import C0, HALF_PI, eval_a, eval_vertical_derivative
from .exceptions import ResolutionError

OMEGA = "omega"
VARPI = "varpi"
FAMILIES = (OMEGA, VARPI)
STYLES = ("full", "endpoint")

_VERTICAL = {OMEGA: "b", VARPI: "c"}


def _check_family(family):
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    return family


def q_min(family):
    return 1 if _check_family(family) == OMEGA else 0


def q_values(Q, family):
    return np.arange(q_min(family), Q + 1)


@dataclass(eq=False)
class Spectrum:
    """Coefficients of a field in the omega (X) or varpi (Y) basis."""

    coeffs: np.ndarray
    family: str = OMEGA

    def __post_init__(self):
        _check_family(self.family)
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] % 2 != 1:
            raise ValueError(f"coeffs must be 2-D with an odd number of rows, got {c.shape}")
        if self.family == VARPI and c.shape[1] < 1:
            raise ValueError("varpi spectrum needs at least the q=0 column")
        self.coeffs = c

    @classmethod
    def zeros(cls, P, Q, family=OMEGA):
        nq = Q if family == OMEGA else Q + 1
        return cls(np.zeros((2 * P + 1, nq), dtype=complex), family)

    @classmethod
    def delta(cls, P, Q, p, q, family=OMEGA, value=1.0):
        s = cls.zeros(P, Q, family)
        s[p, q] = value
        return s

    @property
    def P(self):
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def Q(self):
        n = self.coeffs.shape[1]
        return n if self.family == OMEGA else n - 1

    @property
    def p_values(self):
        return np.arange(-self.P, self.P + 1)

    @property
    def q_values(self):
        return q_values(self.Q, self.family)

    def _index(self, p, q):
        if abs(p) > self.P or not (q_min(self.family) <= q <= self.Q):
            raise IndexError(f"mode ({p}, {q}) outside {self.family} band P={self.P}, Q={self.Q}")
        return p + self.P, q - q_min(self.family)

    def __getitem__(self, mode):
        return self.coeffs[self._index(*mode)]

    def __setitem__(self, mode, value):
        self.coeffs[self._index(*mode)] = value

    def copy(self):
        return Spectrum(self.coeffs.copy(), self.family)

    def _like(self, coeffs):
        return Spectrum(coeffs, self.family)

    def _other(self, other):
        if isinstance(other, Spectrum):
            if other.family != self.family or other.coeffs.shape != self.coeffs.shape:
                raise ValueError("spectra differ in family or shape")
            return other.coeffs
        return other

    def __add__(self, other):
        return self._like(self.coeffs + self._other(other))

    def __sub__(self, other):
        return self._like(self.coeffs - self._other(other))

    def __neg__(self):
        return self._like(-self.coeffs)

    def __mul__(self, other):
        return self._like(self.coeffs * self._other(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def norm(self):
        """l2 norm of the coefficients (= L2 norm of the field)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def resized(self, P, Q):
        """Zero-pad or truncate to band (P, Q)."""
        out = Spectrum.zeros(P, Q, self.family)
        pp = min(P, self.P)
        nq = min(out.coeffs.shape[1], self.coeffs.shape[1])
        out.coeffs[P - pp:P + pp + 1, :nq] = self.coeffs[self.P - pp:self.P + pp + 1, :nq]
        return out

    def reality_defect(self):
        """max |c(-p, q) - conj(c(p, q))|; zero for real fields."""
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1])), initial=0.0))

    def enforce_reality(self):
        return self._like(0.5 * (self.coeffs + np.conj(self.coeffs[::-1])))


def inner(s1: Spectrum, s2: Spectrum) -> complex:
    """L2 inner product (f, g) = int f conj(g), computed from coefficients."""
    return complex(np.sum(s1.coeffs * np.conj(s1._other(s2))))


class TransformPlan:
    """Grid geometry plus precomputed sign and normalisation tables.

    Parameters
    ----------
    P, Q : int
        Spectral band handled by the plan.
    n_x : int, optional
        Points in x.  Defaults to the smallest FFT-friendly size >= 3P + 1,
        which removes quadratic aliasing in x.
    n_y : int, optional
        Intervals in y (``n_y + 1`` nodes).  Defaults to ``2Q``.
    workers : int, optional
        Passed to ``scipy.fft``.
    """

    def __init__(self, P, Q, n_x=None, n_y=None, workers=None):
        if P < 0 or Q < 1:
            raise ValueError(f"need P >= 0 and Q >= 1, got P={P}, Q={Q}")
        self.P = int(P)
        self.Q = int(Q)
        self.n_x = int(n_x) if n_x is not None else sfft.next_fast_len(3 * P + 1)
        self.n_y = int(n_y) if n_y is not None else max(2 * Q, 2)
        if self.n_x < 2 * P + 1 or self.n_y < Q + 1:
            raise ResolutionError(
                f"grid ({self.n_x}, {self.n_y}) cannot resolve band P={P}, Q={Q}"
            )
        self.workers = workers

        self.x = 2.0 * np.pi * np.arange(self.n_x) / self.n_x
        self.y = -1.0 + 2.0 * np.arange(self.n_y + 1) / self.n_y
        self.p = np.arange(-P, P + 1)
        self._p_idx = self.p % self.n_x

        qb = np.arange(1, Q + 1)
        qc = np.arange(0, Q + 1)
        self.sign_b = (-1.0) ** (qb // 2)
        sign_c = (-1.0) ** ((qc + 1) // 2)
        sign_c[0] = C0
        self.sign_c = sign_c

        self.dx = 2.0 * np.pi / self.n_x
        self.dy = 2.0 / self.n_y
        wy = np.full(self.n_y + 1, self.dy)
        wy[[0, -1]] *= 0.5
        self.weights = np.outer(np.full(self.n_x, self.dx), wy)

        for arr in (self.x, self.y, self.p, self._p_idx, self.sign_b, self.sign_c, self.weights):
            arr.setflags(write=False)

    def __repr__(self):
        return f"TransformPlan(P={self.P}, Q={self.Q}, n_x={self.n_x}, n_y={self.n_y})"

    @property
    def grid_shape(self):
        return (self.n_x, self.n_y + 1)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def dealiased_for(self, m):
        """True if products of two band-m fields project exactly onto band m."""
        return self.n_x >= 3 * m + 1 and self.n_y >= (3 * m) // 2 + 1 and m <= min(self.P, self.Q)

    # -- transforms ---------------------------------------------------------

    def _check_grid(self, f):
        f = np.asarray(f)
        if f.shape[-2:] != self.grid_shape:
            raise ValueError(f"grid shape {f.shape[-2:]} does not match plan {self.grid_shape}")
        return f

    def _check_coeffs(self, c, family):
        nq = self.Q if family == OMEGA else self.Q + 1
        if c.shape[-2:] != (2 * self.P + 1, nq):
            raise ValueError(
                f"{family} coefficients of shape {c.shape[-2:]} do not match plan "
                f"(P={self.P}, Q={self.Q})"
            )
        return c

    def analyze_array(self, f, family):
        """Coefficient array(s) of grid field(s) ``f`` (leading axes are batch)."""
        f = self._check_grid(f)
        if np.isrealobj(f):
            F = sfft.rfft(f, axis=-2, workers=self.workers)
            pos = F[..., : self.P + 1, :]
            G = np.concatenate([np.conj(pos[..., :0:-1, :]), pos], axis=-2)
        else:
            F = sfft.fft(f, axis=-2, workers=self.workers)
            G = F[..., self._p_idx, :]
        G = G * (np.sqrt(2.0 * np.pi) / self.n_x)
        if family == OMEGA:
            H = sfft.dst(G[..., 1:-1], type=1, axis=-1, workers=self.workers)
            return H[..., : self.Q] * (self.sign_b / self.n_y)
        _check_family(family)
        H = sfft.dct(G, type=1, axis=-1, workers=self.workers)
        return H[..., : self.Q + 1] * (self.sign_c / self.n_y)

    def synthesize_array(self, c, family, real=False):
        """Grid values of coefficient array(s) ``c``.

        With ``real=True`` the coefficients are assumed Hermitian in p and a
        real array is returned.
        """
        c = self._check_coeffs(np.asarray(c), family)
        batch = c.shape[:-2]
        ny = self.n_y
        if family == OMEGA:
            a = np.zeros(batch + (2 * self.P + 1, ny - 1), dtype=complex)
            a[..., : self.Q] = c * self.sign_b
            V = np.zeros(batch + (2 * self.P + 1, ny + 1), dtype=complex)
            V[..., 1:-1] = 0.5 * sfft.dst(a, type=1, axis=-1, workers=self.workers)
        else:
            a = np.zeros(batch + (2 * self.P + 1, ny + 1), dtype=complex)
            a[..., : self.Q + 1] = c * self.sign_c
            V = 0.5 * (sfft.dct(a, type=1, axis=-1, workers=self.workers) + a[..., :1])
        scale = self.n_x / np.sqrt(2.0 * np.pi)
        if real:
            H = np.zeros(batch + (self.n_x // 2 + 1, ny + 1), dtype=complex)
            H[..., : self.P + 1, :] = V[..., self.P:, :]
            return sfft.irfft(H, n=self.n_x, axis=-2, workers=self.workers) * scale
        full = np.zeros(batch + (self.n_x, ny + 1), dtype=complex)
        full[..., self._p_idx, :] = V
        return sfft.ifft(full, axis=-2, workers=self.workers) * scale

    def analyze_omega(self, f) -> Spectrum:
        return Spectrum(self.analyze_array(f, OMEGA), OMEGA)

    def analyze_varpi(self, f) -> Spectrum:
        return Spectrum(self.analyze_array(f, VARPI), VARPI)

    def synthesize(self, s: Spectrum, real=None):
        """Grid values of ``s``; real output when ``s`` is a real field.

        ``real=None`` decides from the spectrum's reality defect.
        """
        if real is None:
            scale = max(float(np.max(np.abs(s.coeffs), initial=0.0)), 1e-300)
            real = s.reality_defect() <= 1e-14 * scale
        return self.synthesize_array(s.coeffs, s.family, real=real)

    def synthesize_omega(self, s: Spectrum, real=None):
        if s.family != OMEGA:
            raise ValueError("expected an omega spectrum")
        return self.synthesize(s, real)

    def synthesize_varpi(self, s: Spectrum, real=None):
        if s.family != VARPI:
            raise ValueError("expected a varpi spectrum")
        return self.synthesize(s, real)

    # -- quadrature ---------------------------------------------------------

    def integrate(self, values):
        """Rectangle rule in x, trapezoid in y."""
        return np.sum(self._check_grid(values) * self.weights, axis=(-2, -1))

    def l2_norm(self, values):
        return float(np.sqrt(self.integrate(np.abs(values) ** 2)))

    def l1_norm(self, values):
        return float(self.integrate(np.abs(values)))


# -- coefficient-space operators ------------------------------------------


@lru_cache(maxsize=64)
def dy_factors(Q, family):
    """Multipliers taking ``family`` coefficients to their d/dy in the other family.

    omega -> varpi: (-1)^q q pi/2 at q >= 1, zero at q = 0.
    varpi -> omega: -(-1)^q q pi/2 for q >= 1 (q = 0 dropped).
    """
    q = np.arange(1, Q + 1)
    sgn = np.where(q % 2 == 1, -1.0, 1.0)
    if family == OMEGA:
        out = np.zeros(Q + 1)
        out[1:] = sgn * q * HALF_PI
    else:
        _check_family(family)
        out = -sgn * q * HALF_PI
    out.setflags(write=False)
    return out


def dx_op(s: Spectrum) -> Spectrum:
    return Spectrum(s.coeffs * (1j * s.p_values)[:, None], s.family)


def dy_op(s: Spectrum) -> Spectrum:
    f = dy_factors(s.Q, s.family)
    if s.family == OMEGA:
        out = Spectrum.zeros(s.P, s.Q, VARPI)
        out.coeffs[:, 1:] = s.coeffs * f[1:]
        return out
    return Spectrum(s.coeffs[:, 1:] * f, OMEGA)


def laplacian(s: Spectrum) -> Spectrum:
    return Spectrum(-s.coeffs * laplace_symbol(s.P, s.Q, s.family), s.family)


@lru_cache(maxsize=64)
def laplace_symbol(P, Q, family):
    """p^2 + (q pi/2)^2 on the band."""
    p = np.arange(-P, P + 1)[:, None]
    q = q_values(Q, family)[None, :]
    out = p**2 + (q * HALF_PI) ** 2
    out = out.astype(float)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def threshold_mask(P, Q, family, m):
    p = np.arange(-P, P + 1)[:, None]
    q = q_values(Q, family)[None, :]
    mask = (np.abs(p) <= m) & (q <= m)
    mask.setflags(write=False)
    return mask


def project_threshold(s: Spectrum, m: int) -> Spectrum:
    """Galerkin projector: keep modes with |p| <= m and q <= m."""
    if m < 0:
        raise ValueError(f"threshold must be non-negative, got {m}")
    return Spectrum(s.coeffs * threshold_mask(s.P, s.Q, s.family, m), s.family)


def decompose_mean(s: Spectrum) -> tuple[Spectrum, Spectrum]:
    """Split into (zero-horizontal-mean part, horizontal mean)."""
    bar = s.copy()
    bar.coeffs[s.P] = 0.0
    tilde = Spectrum(np.zeros_like(s.coeffs), s.family)
    tilde.coeffs[s.P] = s.coeffs[s.P]
    return bar, tilde


def derivative_orders(k, style="full"):
    """Multi-indices (s_x, s_y) entering the H^k norm of the given style."""
    if style == "full":
        return [(s1, n - s1) for n in range(k + 1) for s1 in range(n + 1)]
    if style == "endpoint":
        if k == 0:
            return [(0, 0)]
        return [(0, 0)] + [(s1, k - s1) for s1 in range(k + 1)]
    raise ValueError(f"style must be one of {STYLES}, got {style!r}")


@lru_cache(maxsize=256)
def sobolev_weights(P, Q, family, k, style="full"):
    """Per-mode weights w(p, q) with ||f||_{H^k}^2 = sum w |c|^2."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    p2 = (np.arange(-P, P + 1, dtype=float) ** 2)[:, None]
    mu2 = ((q_values(Q, family) * HALF_PI) ** 2)[None, :]
    w = np.zeros((2 * P + 1, mu2.shape[1]))
    for s1, s2 in derivative_orders(k, style):
        w += p2**s1 * mu2**s2
    w.setflags(write=False)
    return w


def sobolev_norm(s: Spectrum, k: int, style: str = "full") -> float:
    w = sobolev_weights(s.P, s.Q, s.family, k, style)
    return float(np.sqrt(np.sum(w * np.abs(s.coeffs) ** 2)))


def partial(s: Spectrum, sx: int, sy: int) -> Spectrum:
    """d_x^sx d_y^sy of ``s`` (family alternates with each y-derivative)."""
    out = s
    for _ in range(sx):
        out = dx_op(out)
    for _ in range(sy):
        out = dy_op(out)
    return out


def l1_sobolev_norm(plan: TransformPlan, s: Spectrum, order: int, homogeneous=False) -> float:
    """Grid-quadrature W^{order,1} norm: sum over |alpha| <= order of int |d^alpha f|.

    With ``homogeneous=True`` only multi-indices of total order exactly
    ``order`` are summed.  Quadrature is approximate (|.| has kinks); use a
    plan finer than the spectral band for accuracy.
    """
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    if s.P > plan.P or s.Q > plan.Q:
        raise ResolutionError(
            f"plan (P={plan.P}, Q={plan.Q}) cannot synthesize band (P={s.P}, Q={s.Q})"
        )
    s = s.resized(plan.P, plan.Q)
    lo = order if homogeneous else 0
    total = 0.0
    for n in range(lo, order + 1):
        for s1 in range(n + 1):
            d = partial(s, s1, n - s1)
            total += plan.l1_norm(plan.synthesize(d))
    return total


# -- point evaluation ------------------------------------------------------


def evaluate_grid(s: Spectrum, x, y, dx: int = 0, dy: int = 0):
    """Evaluate d_x^dx d_y^dy of ``s`` on the tensor grid ``x`` x ``y``.

    Uses the trigonometric definitions directly (exact argument reduction),
    independent of the transform plans.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    fam = _VERTICAL[s.family]
    V = np.array([eval_vertical_derivative(fam, int(q), y, dy) for q in s.q_values])
    A = np.array([eval_a(int(p), x) * (1j * p) ** dx for p in s.p_values])
    return A.T @ s.coeffs @ V


# -- snapshot format -------------------------------------------------------

_MAGIC = "# ipm_strip spectrum"


def write_snapshot(s: Spectrum, target, meta=None):
    """Write ``s`` as a columnar text block (17 significant digits)."""
    lines = [_MAGIC, f"# P = {s.P}", f"# Q = {s.Q}", f"# family = {s.family}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append("p q re im")
    for i, p in enumerate(s.p_values):
        for j, q in enumerate(s.q_values):
            c = s.coeffs[i, j]
            lines.append(f"{p} {q} {c.real:.17g} {c.imag:.17g}")
    text = "\n".join(lines) + "\n"
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        target.write(text)


def read_snapshot(source) -> tuple[Spectrum, dict]:
    """Read a snapshot written by :func:`write_snapshot`; returns (spectrum, header)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    buf = io.StringIO(text)
    first = buf.readline().rstrip("\n")
    if first != _MAGIC:
        raise ValueError("not an ipm_strip spectrum snapshot")
    header = {}
    for line in buf:
        line = line.strip()
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
            continue
        if line == "p q re im":
            break
        raise ValueError(f"unexpected line in snapshot header: {line!r}")
    try:
        P, Q, family = int(header["P"]), int(header["Q"]), header["family"]
    except KeyError as exc:
        raise ValueError(f"snapshot header missing {exc}") from None
    s = Spectrum.zeros(P, Q, family)
    for line in buf:
        if not line.strip():
            continue
        p, q, re, im = line.split()
        s[int(p), int(q)] = complex(float(re), float(im))
    return s, header
