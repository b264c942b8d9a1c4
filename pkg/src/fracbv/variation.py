"""Discrete total variation, BV norm, Jordan decomposition and detection of
points of unbounded variation.

Discrete TV over the nodes of a grid is a lower bound of the true total
variation; it is exact for monotone pieces and for piecewise-linear
functions whose breakpoints sit on nodes. For oscillatory catalog functions
that declare their extrema (``sin_recip``) the extrema are added to the node
set, so each resolved oscillation contributes exactly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError
from .fracint import FracOrder, _as_order, gamma, rl_integral
from .funcspace import FunctionHandle, Grid, InterpolatedHandle, SampledFunction

__all__ = [
    "OperatorBoundReport",
    "Thresholds",
    "UVPResult",
    "VariationReport",
    "bound_constant",
    "bound_slack",
    "bv_norm",
    "classify",
    "detect_uvp",
    "discrete_tv",
    "handle_tv",
    "jordan_decompose",
    "operator_bound_check",
    "partition_tv",
    "variation_profile",
    "window_profile",
]

Handle = Union[FunctionHandle, InterpolatedHandle]

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
INCONCLUSIVE = "inconclusive"


# {{{ discrete variation


def discrete_tv(f: SampledFunction, i_lo: int = 0, i_hi: int | None = None) -> float:
    """Sum of ``|f_i - f_{i-1}|`` for ``i_lo < i <= i_hi``."""
    n = f.grid.n
    if i_hi is None:
        i_hi = n
    if not 0 <= i_lo <= i_hi <= n:
        raise ConfigError(f"need 0 <= i_lo <= i_hi <= {n}, got ({i_lo}, {i_hi})")
    return math.fsum(np.abs(np.diff(f.values[i_lo : i_hi + 1])))


def partition_tv(f: SampledFunction, indices) -> float:
    """Variation sum over the sub-partition given by node *indices*."""
    idx = np.asarray(indices, dtype=int)
    if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] > f.grid.n):
        raise ConfigError("partition indices must be strictly increasing grid indices")
    return math.fsum(np.abs(np.diff(f.values[idx])))


def bv_norm(f: SampledFunction) -> float:
    return abs(float(f.values[0])) + discrete_tv(f)


def _running_sum(steps: np.ndarray) -> np.ndarray:
    """Compensated partial sums ``[0, s_1, s_1 + s_2, ...]`` of ``steps >= 0``.

    Non-decreasing in floating point, with error independent of length.
    """
    out = np.empty(steps.size + 1)
    out[0] = total = comp = 0.0
    for i, step in enumerate(steps.tolist(), start=1):
        y = step - comp
        t = total + y
        comp = (t - total) - y
        total = t
        # the compensation may pull total back by an ulp; keep monotone
        out[i] = max(total, out[i - 1])
    return out


def jordan_decompose(f: SampledFunction) -> tuple[SampledFunction, SampledFunction]:
    """Split *f* into non-decreasing ``g`` and ``h`` with ``f = g - h``.

    ``g`` accumulates the rises and ``h`` the falls. The start values follow
    the sign of ``f(a)``: for ``f(a) >= 0`` we get ``g(a) = f(a)`` and
    ``h(a) = 0``; otherwise ``g(a) = 0`` and ``h(a) = -f(a) > 0``.
    """
    d = np.diff(f.values)
    rise = _running_sum(np.maximum(d, 0.0))
    fall = _running_sum(np.maximum(-d, 0.0))
    f0 = float(f.values[0])
    if f0 >= 0.0:
        g, h = f0 + rise, fall
    else:
        g, h = rise, fall - f0
    return SampledFunction(f.grid, g), SampledFunction(f.grid, h)


# }}}


# {{{ unbounded variation points


@dataclass(frozen=True)
class Thresholds:
    """Classification rule and sampling plan for variation profiles.

    A point is *unbounded* if the last ``m`` growth ratios all exceed
    ``rho`` and the finest TV exceeds ``floor_factor * sup|f|``; it is
    *bounded* if the last ``m`` ratios are all below ``bounded_ratio``.
    """

    rho: float = 1.5
    m: int = 3
    floor_factor: float = 10.0
    bounded_ratio: float = 1.05
    levels: int = 6
    n_per_level: int = 64
    stride: int = 1
    base_delta: float | None = None

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.levels < 2:
            raise ConfigError(f"levels must be >= 2, got {self.levels}")
        if self.levels - 1 < self.m:
            raise ConfigError(f"levels={self.levels} gives fewer than m={self.m} ratios")
        if self.n_per_level < 2 or self.n_per_level % 2:
            raise ConfigError("n_per_level must be an even integer >= 2")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.rho <= 0 or self.bounded_ratio <= 0 or self.floor_factor < 0:
            raise ConfigError("rho, bounded_ratio must be positive, floor_factor >= 0")
        if self.base_delta is not None and not self.base_delta > 0:
            raise ConfigError("base_delta must be positive")

    @property
    def degenerate(self) -> bool:
        # both classes would accept ratios in (rho, bounded_ratio)
        return self.rho <= self.bounded_ratio


@dataclass(frozen=True)
class VariationReport:
    center: float
    levels: tuple[tuple[float, int, float], ...]
    classification: str
    growth_ratios: tuple[float, ...]
    sup_norm: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "levels": [
                {"delta": d, "n": n, "tv": tv} for d, n, tv in self.levels
            ],
            "classification": self.classification,
            "growth_ratios": list(self.growth_ratios),
            "sup_norm": self.sup_norm,
        }


def classify(
    ratios: tuple[float, ...] | list[float],
    final_tv: float,
    sup_norm: float,
    thresholds: Thresholds,
) -> str:
    if thresholds.degenerate or len(ratios) < thresholds.m:
        return INCONCLUSIVE
    last = ratios[-thresholds.m :]
    if all(r > thresholds.rho for r in last) and final_tv > thresholds.floor_factor * sup_norm:
        return UNBOUNDED
    if all(r < thresholds.bounded_ratio for r in last):
        return BOUNDED
    return INCONCLUSIVE


def handle_tv(f: Handle, lo: float, hi: float, n: int) -> float:
    """Discrete TV of a handle over ``n`` uniform cells of ``[lo, hi]``.

    Declared extrema lying at least one cell width from the origin are added
    to the nodes, so every oscillation they bracket is counted exactly.
    """
    x = np.linspace(lo, hi, n + 1)
    if getattr(f, "name", None) == "sin_recip":
        x = np.union1d(x, f.extrema(lo, hi, cutoff=(hi - lo) / n))
    return math.fsum(np.abs(np.diff(f(x))))


def _ratio(fine: float, coarse: float) -> float:
    if coarse == 0.0:
        return 1.0 if fine == 0.0 else math.inf
    return fine / coarse


def estimate_sup_norm(f: Handle, n: int = 4096) -> float:
    return float(np.max(np.abs(f(np.linspace(f.a, f.b, n + 1)))))


def variation_profile(
    f: Handle,
    x0: float,
    base_delta: float,
    levels: int,
    n_per_level: int,
    thresholds: Thresholds | None = None,
    sup_norm: float | None = None,
) -> VariationReport:
    """Total variation on shrinking windows around *x0* under refinement.

    Level ``k`` uses the window ``[x0 - d_k, x0 + d_k]`` clipped to the
    domain, ``d_k = base_delta / 2**k``, sampled with ``n_per_level * 2**k``
    cells. Its growth ratio compares that TV with the TV of the same window
    at the previous level's spacing (4x coarser). Ratios tend to 1 where the
    function is of bounded variation and keep growing near a point of
    unbounded variation.
    """
    thresholds = thresholds or Thresholds(levels=levels, n_per_level=n_per_level)
    if not f.a <= x0 <= f.b:
        raise ConfigError(f"x0={x0} outside the domain [{f.a}, {f.b}]")
    if levels < 2 or n_per_level < 2 or n_per_level % 2:
        raise ConfigError("need levels >= 2 and an even n_per_level >= 2")
    if sup_norm is None:
        sup_norm = estimate_sup_norm(f)

    rows: list[tuple[float, int, float]] = []
    ratios: list[float] = []
    for k in range(levels):
        delta = base_delta / 2**k
        lo, hi = max(f.a, x0 - delta), min(f.b, x0 + delta)
        if not hi > lo:
            raise ConfigError(f"empty window around x0={x0} at delta={delta}")
        n = n_per_level * 2**k
        tv = handle_tv(f, lo, hi, n)
        rows.append((delta, n, tv))
        if k > 0:
            ratios.append(_ratio(tv, handle_tv(f, lo, hi, n // 4)))

    label = classify(ratios, rows[-1][2], sup_norm, thresholds)
    return VariationReport(float(x0), tuple(rows), label, tuple(ratios), sup_norm)


def window_profile(
    f: Handle,
    c: float,
    d: float,
    thresholds: Thresholds | None = None,
    sup_norm: float | None = None,
) -> VariationReport:
    """Total variation on the fixed window ``[c, d]`` under dyadic refinement."""
    thresholds = thresholds or Thresholds()
    if not (f.a <= c < d <= f.b):
        raise ConfigError(f"window [{c}, {d}] not inside [{f.a}, {f.b}]")
    if sup_norm is None:
        sup_norm = estimate_sup_norm(f)
    rows = []
    for k in range(thresholds.levels):
        n = thresholds.n_per_level * 2**k
        rows.append((0.5 * (d - c), n, handle_tv(f, c, d, n)))
    ratios = tuple(_ratio(rows[k][2], rows[k - 1][2]) for k in range(1, len(rows)))
    label = classify(ratios, rows[-1][2], sup_norm, thresholds)
    return VariationReport(0.5 * (c + d), tuple(rows), label, ratios, sup_norm)


@dataclass(frozen=True)
class UVPResult:
    points: tuple[float, ...]
    inconclusive: tuple[float, ...]
    reports: tuple[VariationReport, ...] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "points": list(self.points),
            "inconclusive": list(self.inconclusive),
            "reports": [r.to_dict() for r in self.reports],
        }


def candidate_points(f: Handle, grid: Grid, stride: int = 1) -> np.ndarray:
    nodes = grid.nodes()[::stride]
    extra = [p for p in f.singular_points if grid.a <= p <= grid.b]
    return np.unique(np.concatenate((nodes, np.asarray(extra, dtype=float))))


def detect_uvp(
    f: Handle, grid: Grid, thresholds: Thresholds | None = None
) -> UVPResult:
    """Points of unbounded variation among the candidate set.

    Candidates are every ``stride``-th node of *grid* plus the singular points
    the handle declares; the detector is only complete relative to that set.
    """
    thresholds = thresholds or Thresholds()
    base = thresholds.base_delta or thresholds.stride * grid.h
    sup_norm = estimate_sup_norm(f)
    reports = tuple(
        variation_profile(
            f, float(x0), base, thresholds.levels, thresholds.n_per_level,
            thresholds, sup_norm,
        )
        for x0 in candidate_points(f, grid, thresholds.stride)
    )
    return UVPResult(
        tuple(r.center for r in reports if r.classification == UNBOUNDED),
        tuple(r.center for r in reports if r.classification == INCONCLUSIVE),
        reports,
    )


# }}}


# {{{ operator bound


@dataclass(frozen=True)
class OperatorBoundReport:
    alpha: float
    interval: tuple[float, float]
    f_bv: float
    image_bv: float
    constant: float
    ratio: float
    slack: float
    continuous: bool = True

    @property
    def ok(self) -> bool:
        return self.ratio <= 1.0 + self.slack

    def to_dict(self) -> dict:
        out = asdict(self)
        out["interval"] = list(self.interval)
        out["ok"] = self.ok
        return out


def bound_constant(alpha: float, a: float, b: float) -> float:
    """``2 max{V(g), (b-a)^alpha} / Gamma(alpha+1)`` with ``g = (x-a)^alpha``.

    ``g`` increases from 0, so ``V(g, [a, b]) = (b - a)^alpha`` and the two
    arguments of the max coincide.
    """
    var_g = (b - a) ** alpha
    return 2.0 * max(var_g, (b - a) ** alpha) / gamma(alpha + 1.0)


def bound_slack(h: float, alpha: float, f_bv: float) -> float:
    return 1e-6 + 10.0 * h ** min(alpha, 1.0) * f_bv


def operator_bound_check(
    f: SampledFunction, order: FracOrder | float
) -> OperatorBoundReport:
    alpha = _as_order(order).alpha
    grid = f.grid
    f_bv = bv_norm(f)
    image_bv = bv_norm(rl_integral(f, alpha))
    C = bound_constant(alpha, grid.a, grid.b)
    ratio = 0.0 if f_bv == 0.0 else image_bv / (C * f_bv)
    continuous = getattr(f.source, "continuous", True)
    return OperatorBoundReport(
        alpha,
        (grid.a, grid.b),
        f_bv,
        image_bv,
        C,
        ratio,
        bound_slack(grid.h, alpha, f_bv),
        continuous,
    )


# }}}
