"""
Post-processing of parameter sweeps: finite-size critical-point estimates
and exponential gap-closure fits.
"""
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CriticalPointEstimate",
    "GapScalingFit",
    "find_critical_point",
    "find_kink",
    "fit_gap_scaling",
    "CLOSURE_THRESHOLD",
]

CLOSURE_THRESHOLD = 0.02
MIN_R2 = 0.95


@dataclass(frozen=True)
class CriticalPointEstimate:
    value: float
    max_slope: float
    window: tuple
    index: int


@dataclass(frozen=True)
class GapScalingFit:
    slope: float
    intercept: float
    r2: float
    closing: bool

    def predict(self, N):
        return np.exp(self.intercept + self.slope * np.asarray(N, dtype=float))


def _xy(sweep, column, param):
    if column is None:
        x, y = sweep
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    rows = list(sweep)
    x = [r.value if param is None else r.columns[param] for r in rows]
    return np.asarray(x, float), np.asarray([r.columns[column] for r in rows],
                                            float)


def _monotone_xy(sweep, column, param):
    x, y = _xy(sweep, column, param)
    if x.size < 5:
        raise ValueError(f"need at least 5 sweep rows, got {x.size}")
    ok = np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 5:
        raise ValueError("fewer than 5 finite sweep values")
    dx = np.diff(x)
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise ValueError("swept values must be strictly monotone")
    if dx[0] < 0:
        x, y = x[::-1], y[::-1]
    return x, y


def _peak(x, score):
    xs = x[1:-1]
    i = int(np.argmax(score))
    est = xs[i]
    if 0 < i < score.size - 1:
        c = np.polyfit(xs[i - 1:i + 2], score[i - 1:i + 2], 2)
        if c[0] < 0:
            est = float(np.clip(-c[1] / (2 * c[0]), xs[i - 1], xs[i + 1]))
    return CriticalPointEstimate(value=float(est), max_slope=float(score[i]),
                                 window=(float(x[i]), float(x[i + 2])),
                                 index=i + 1)


def find_critical_point(sweep, column=None, param=None):
    """Position of the steepest change of ``column`` along a sweep.

    Central-difference slopes are formed at interior points; the largest
    ``|slope|`` and its two neighbours are fitted by a parabola whose vertex
    is the estimate.

    Parameters
    ----------
    sweep : sequence of SweepRow, or ``(x, y)`` pair when ``column`` is None
    column : str, optional
        Observable column of the rows.
    param : str, optional
        Column holding the abscissa; defaults to the swept value.

    Returns
    -------
    CriticalPointEstimate
    """
    x, y = _monotone_xy(sweep, column, param)
    slope = np.abs((y[2:] - y[:-2]) / (x[2:] - x[:-2]))
    return _peak(x, slope)


def find_kink(sweep, column=None, param=None):
    """Position of the sharpest bend of ``column`` along a sweep.

    Suited to crossovers where an observable leaves a plateau with a kink
    rather than a steep step. Second differences on the (possibly
    nonuniform) grid are formed at interior points and the largest
    ``|y''|`` is refined by a parabola through it and its neighbours.

    Returns
    -------
    CriticalPointEstimate
        ``max_slope`` holds the peak ``|y''|``.
    """
    x, y = _monotone_xy(sweep, column, param)
    h1, h2 = np.diff(x)[:-1], np.diff(x)[1:]
    curv = np.abs(2 * (h1 * y[2:] - (h1 + h2) * y[1:-1] + h2 * y[:-2])
                  / (h1 * h2 * (h1 + h2)))
    return _peak(x, curv)


def fit_gap_scaling(Ns, gaps, closure_threshold=CLOSURE_THRESHOLD,
                    min_r2=MIN_R2):
    """Least-squares fit ``log(gap) = intercept + slope * N``.

    ``closing`` is True when the slope is below ``-closure_threshold`` and the
    fit explains at least ``min_r2`` of the variance; a flat fit is read as an
    open gap.
    """
    N = np.asarray(Ns, dtype=float)
    g = np.asarray(gaps, dtype=float)
    if N.size != g.size:
        raise ValueError("Ns and gaps differ in length")
    if N.size < 3:
        raise ValueError(f"need at least 3 points, got {N.size}")
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("gaps must be finite and positive")
    logg = np.log(g)
    slope, intercept = np.polyfit(N, logg, 1)
    resid = logg - (intercept + slope * N)
    ss_tot = float(((logg - logg.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    closing = bool(slope < -closure_threshold and r2 > min_r2)
    return GapScalingFit(float(slope), float(intercept), float(r2), closing)
