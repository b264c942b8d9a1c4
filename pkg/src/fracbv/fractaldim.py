"""Box-counting dimension of sampled graphs.

The graph is mapped affinely onto the unit square and covered by dyadic
boxes of side ``2**-j``. Within each of the ``2**j`` columns the sampled
minimum and maximum decide how many boxes the graph meets, so oscillations
faster than the sampling are under-counted; :func:`box_counts` therefore
insists on at least four samples per column.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .funcspace import SampledFunction

__all__ = ["BoxDimEstimate", "box_counts", "box_dimension", "scales_to_csv"]


@dataclass(frozen=True)
class BoxDimEstimate:
    scales: tuple[tuple[int, float, int], ...]
    slope: float
    intercept: float
    r_squared: float
    fit_levels: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "scales": [{"j": j, "delta": d, "count": c} for j, d, c in self.scales],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "fit_levels": list(self.fit_levels),
        }


def _unit_values(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def box_counts(
    f: SampledFunction, j_min: int, j_max: int
) -> list[tuple[int, float, int]]:
    """``(j, delta_j, N_j)`` for ``j = j_min..j_max``.

    ``delta_j = (b - a) 2**-j`` is reported in the units of the abscissa;
    counting happens after rescaling to the unit square.
    """
    n = f.grid.n
    if not 0 <= j_min <= j_max:
        raise ConfigError(f"need 0 <= j_min <= j_max, got ({j_min}, {j_max})")
    if n < 2 ** (j_max + 2) or n % 2**j_max:
        raise ConfigError(
            f"grid with n={n} cannot resolve j_max={j_max}: need n a multiple "
            f"of 2**j_max and n >= {2 ** (j_max + 2)}"
        )
    y = _unit_values(f.values)
    out = []
    for j in range(j_min, j_max + 1):
        cols = 2**j
        per = n // cols
        # column c covers nodes c*per .. (c+1)*per inclusive
        body = y[:-1].reshape(cols, per)
        right = y[per::per]
        cmax = np.maximum(body.max(axis=1), right)
        cmin = np.minimum(body.min(axis=1), right)
        top = np.minimum(np.floor(cmax * cols), cols - 1)
        bottom = np.minimum(np.floor(cmin * cols), cols - 1)
        count = int(np.sum(top - bottom + 1))
        out.append((j, f.grid.length / cols, count))
    return out


def box_dimension(
    f: SampledFunction, j_min: int, j_max: int, skip_coarse: int = 2
) -> BoxDimEstimate:
    """Least-squares slope of ``log N_j`` against ``log 2**j``.

    The ``skip_coarse`` coarsest levels of the table are left out of the fit
    (pre-asymptotic); at least three levels must remain.
    """
    if skip_coarse < 0:
        raise ConfigError("skip_coarse must be >= 0")
    scales = box_counts(f, j_min, j_max)
    fit = scales[skip_coarse:]
    if len(fit) < 3:
        raise ConfigError(
            f"regression needs >= 3 levels, got {len(fit)} "
            f"(j={j_min}..{j_max}, skipping {skip_coarse})"
        )
    xs = np.array([j * math.log(2.0) for j, _, _ in fit])
    ys = np.log(np.array([c for _, _, c in fit], dtype=np.float64))
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return BoxDimEstimate(
        tuple(scales),
        float(slope),
        float(intercept),
        float(min(max(r2, 0.0), 1.0)),
        tuple(j for j, _, _ in fit),
    )


def scales_to_csv(scales) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["j", "delta", "count"])
    for j, d, c in scales:
        w.writerow([j, f"{d:.17g}", c])
    return buf.getvalue()
