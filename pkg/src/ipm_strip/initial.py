"""Initial perturbations for simulation runs."""

from __future__ import annotations

import numpy as np

from .config import SimConfig
from .exceptions import ConfigError
from .spectral import OMEGA, Spectrum, read_snapshot, sobolev_norm, threshold_mask

NORMALIZATION = 0.99  # initial H^kappa norm is this fraction of epsilon


def normalize(s: Spectrum, target: float, k: int, style: str = "endpoint") -> Spectrum:
    """Rescale ``s`` so that its H^k norm equals ``target``."""
    current = sobolev_norm(s, k, style)
    if current == 0:
        raise ConfigError("cannot normalize a zero initial field")
    return s * (target / current)


def single_mode(P, Q, p, q) -> Spectrum:
    """Real field cos(p x) b_q(y) / sqrt(pi) (or b_q / sqrt(2 pi) for p = 0)."""
    s = Spectrum.zeros(P, Q, OMEGA)
    s[p, q] = 1.0
    s[-p, q] = 1.0
    return s


def random_decay(P, Q, m, exponent, rng: np.random.Generator) -> Spectrum:
    """Random phases with magnitudes (1 + p^2 + q^2)^(-exponent/2), truncated at m."""
    p = np.arange(-P, P + 1)[:, None]
    q = np.arange(1, Q + 1)[None, :]
    mag = (1.0 + p**2 + q**2) ** (-exponent / 2.0)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=mag.shape)
    c = mag * np.exp(1j * phase) * threshold_mask(P, Q, OMEGA, m)
    return Spectrum(c, OMEGA).enforce_reality()


def make_initial_data(cfg: SimConfig) -> Spectrum:
    """Initial rho(0) for ``cfg``.

    ``single_mode`` and ``random_decay`` data are scaled so that
    ||rho(0)||_{H^kappa, endpoint} = 0.99 epsilon; ``from_file`` data is
    used as stored (resized to the configured band).
    """
    if cfg.initial_kind == "single_mode":
        if cfg.mode_q < 1 or abs(cfg.mode_p) > cfg.m or cfg.mode_q > cfg.m:
            raise ConfigError(f"mode ({cfg.mode_p}, {cfg.mode_q}) is outside the truncation m={cfg.m}")
        s = single_mode(cfg.P, cfg.Q, cfg.mode_p, cfg.mode_q)
    elif cfg.initial_kind == "random_decay":
        s = random_decay(cfg.P, cfg.Q, cfg.m, cfg.decay_exponent, np.random.default_rng(cfg.seed))
    else:
        try:
            s, _ = read_snapshot(cfg.initial_path)
        except OSError as exc:
            raise ConfigError(f"cannot read initial data {cfg.initial_path}: {exc}") from exc
        if s.family != OMEGA:
            raise ConfigError("initial data file must hold an omega spectrum")
        s = s.resized(cfg.P, cfg.Q)
        outside = s.coeffs[~threshold_mask(cfg.P, cfg.Q, OMEGA, cfg.m)]
        if np.any(outside != 0):
            raise ConfigError(f"initial data file has modes outside the truncation m={cfg.m}")
        return s
    return normalize(s, NORMALIZATION * cfg.epsilon, cfg.kappa, "endpoint")
