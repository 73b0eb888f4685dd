"""Power-law decay fits in (log(1+t), log value) coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import PreconditionError

MIN_SAMPLES = 10


@dataclass(frozen=True)
class FitResult:
    window: tuple
    slope: float
    intercept: float
    r_squared: float
    n: int = 0

    def __str__(self):
        t0, t1 = self.window
        return (f"window=[{t0:g}, {t1:g}] n={self.n} slope={self.slope:.6g} "
                f"intercept={self.intercept:.6g} r_squared={self.r_squared:.6g}")


def fit_decay(t, values, window=None) -> FitResult:
    """Least-squares line through (log(1+t), log v) on ``window``.

    ``slope`` is the fitted exponent -beta of v ~ (1+t)^-beta.  Needs at
    least 10 samples in the window, all positive.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise PreconditionError("t and values must be 1-D arrays of equal length")
    if window is None:
        window = (float(t.min()), float(t.max())) if t.size else (0.0, 0.0)
    t0, t1 = map(float, window)
    if not (t1 > t0 >= 0):
        raise PreconditionError(f"window must satisfy t1 > t0 >= 0, got {window}")
    sel = (t >= t0) & (t <= t1)
    if sel.sum() < MIN_SAMPLES:
        raise PreconditionError(f"only {int(sel.sum())} samples in window; need {MIN_SAMPLES}")
    if np.any(v[sel] <= 0) or not np.all(np.isfinite(v[sel])):
        raise PreconditionError("values in the fit window must be finite and positive")
    x = np.log1p(t[sel])
    y = np.log(v[sel])
    res = stats.linregress(x, y)
    # a constant series is fitted exactly by a flat line
    r2 = 1.0 if np.ptp(y) == 0 else float(res.rvalue**2)
    return FitResult((t0, t1), float(res.slope), float(res.intercept), min(max(r2, 0.0), 1.0), int(sel.sum()))
