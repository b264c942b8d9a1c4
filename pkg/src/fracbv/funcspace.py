"""Uniform grids, the analytic function catalog and sampling.

Every other module works on a :class:`SampledFunction`, i.e. a :class:`Grid`
plus nodal values, optionally remembering the :class:`FunctionHandle` it came
from so it can be re-sampled at a finer resolution.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError

__all__ = [
    "CATALOG_NAMES",
    "FunctionHandle",
    "Grid",
    "InterpolatedHandle",
    "SampledFunction",
    "catalog_lookup",
    "make_grid",
    "parse_function_spec",
    "sample",
]


# {{{ grid


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``a = x_0 < x_1 < ... < x_n = b``."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ConfigError(f"grid endpoints must be finite: [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise ConfigError(f"grid requires a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"grid requires n >= 1, got n={self.n}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def length(self) -> float:
        return self.b - self.a

    def node(self, i: int) -> float:
        if not 0 <= i <= self.n:
            raise IndexError(f"node index {i} outside 0..{self.n}")
        return self.b if i == self.n else self.a + i * self.h

    def nodes(self) -> np.ndarray:
        # a + i*h is reproduced bit-for-bit by every dyadic refinement
        x = self.a + np.arange(self.n + 1, dtype=np.float64) * self.h
        x[-1] = self.b
        return x

    def refine(self, factor: int = 2) -> Grid:
        return Grid(self.a, self.b, self.n * factor)

    def contains(self, other: Grid) -> bool:
        return self.a <= other.a and other.b <= self.b


def make_grid(a: float, b: float, n: int) -> Grid:
    """Build a uniform grid on ``[a, b]`` with *n* subintervals."""
    return Grid(a, b, n)


# }}}


# {{{ catalog


def _dist_to_int(y: np.ndarray) -> np.ndarray:
    return np.abs(y - np.round(y))


@dataclass(frozen=True)
class _Entry:
    defaults: dict[str, float]
    integer_params: frozenset[str]
    validate: Callable[[dict[str, float]], None]
    build: Callable[[dict[str, float], float, float], Callable[[np.ndarray], np.ndarray]]
    singular: Callable[[float, float], tuple[float, ...]] = lambda a, b: ()
    continuous: bool = True
    bounded_variation: bool = True


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _build_constant(p, a, b):
    c = p["c"]
    return lambda x: np.full_like(x, c, dtype=np.float64)


def _build_linear(p, a, b):
    slope, intercept = p["slope"], p["intercept"]
    return lambda x: slope * x + intercept


def _build_power(p, a, b):
    beta = p["beta"]

    def f(x):
        with np.errstate(divide="ignore"):
            return np.power(x - a, beta)

    return f


def _build_sin_recip(p, a, b):
    def f(x):
        out = np.zeros_like(x, dtype=np.float64)
        mask = x != 0.0
        out[mask] = np.sin(1.0 / x[mask])
        return out

    return f


def _pl_random_table(p, a, b) -> tuple[np.ndarray, np.ndarray]:
    k = int(p["k"])
    rng = np.random.default_rng(int(p["seed"]))
    xs = a + (b - a) * (np.arange(k + 1) / k)
    xs[-1] = b
    ys = p["scale"] * rng.standard_normal(k + 1)
    return xs, ys


def _build_pl_random(p, a, b):
    xs, ys = _pl_random_table(p, a, b)
    return lambda x: np.interp(x, xs, ys)


def _weierstrass_terms(p) -> int:
    if p["terms"] > 0:
        return int(p["terms"])
    # oscillations well below the finest grid used anywhere (2**18 cells)
    return int(math.ceil(24 * math.log(2.0) / math.log(p["b"])))


def _build_weierstrass(p, a, b):
    H, base = p["H"], p["b"]
    K = _weierstrass_terms(p)
    amps = base ** (-H * np.arange(K))
    freqs = 2.0 * np.pi * base ** np.arange(K)

    def f(x):
        out = np.zeros_like(x, dtype=np.float64)
        for amp, freq in zip(amps, freqs):
            out += amp * np.cos(freq * x)
        return out

    return f


def _build_takagi(p, a, b):
    w = p["w"]
    K = int(p["terms"])

    def f(x):
        out = np.zeros_like(x, dtype=np.float64)
        for k in range(K):
            out += w**k * _dist_to_int(2.0**k * x)
        return out

    return f


def _validate_power(p):
    _check(p["beta"] > -1.0, f"power requires beta > -1, got {p['beta']}")


def _validate_pl(p):
    _check(p["k"] >= 1, f"piecewise_linear_random requires k >= 1, got {p['k']}")
    _check(p["seed"] >= 0, "seed must be non-negative")


def _validate_weierstrass(p):
    _check(0.0 < p["H"] < 1.0, f"weierstrass requires 0 < H < 1, got {p['H']}")
    _check(p["b"] > 1.0, f"weierstrass requires b > 1, got {p['b']}")
    _check(p["terms"] >= 0, "terms must be >= 0 (0 selects automatically)")


def _validate_takagi(p):
    _check(0.0 < p["w"] < 1.0, f"takagi requires 0 < w < 1, got {p['w']}")
    _check(p["terms"] >= 1, "terms must be >= 1")


def _nothing(p):
    return None


_CATALOG: dict[str, _Entry] = {
    "constant": _Entry({"c": 1.0}, frozenset(), _nothing, _build_constant),
    "linear": _Entry(
        {"slope": 1.0, "intercept": 0.0}, frozenset(), _nothing, _build_linear
    ),
    "power": _Entry({"beta": 1.0}, frozenset(), _validate_power, _build_power),
    "sin_recip": _Entry(
        {},
        frozenset(),
        _nothing,
        _build_sin_recip,
        singular=lambda a, b: (0.0,) if a <= 0.0 <= b else (),
        continuous=False,
        bounded_variation=False,
    ),
    "piecewise_linear_random": _Entry(
        {"k": 8, "seed": 0, "scale": 1.0},
        frozenset({"k", "seed"}),
        _validate_pl,
        _build_pl_random,
    ),
    "weierstrass": _Entry(
        {"H": 0.5, "b": 2.0, "terms": 0},
        frozenset({"terms"}),
        _validate_weierstrass,
        _build_weierstrass,
        bounded_variation=False,
    ),
    "takagi": _Entry(
        {"w": 0.5, "terms": 40},
        frozenset({"terms"}),
        _validate_takagi,
        _build_takagi,
        bounded_variation=False,
    ),
}

CATALOG_NAMES: tuple[str, ...] = tuple(_CATALOG)


@dataclass(frozen=True)
class FunctionHandle:
    """A catalog function with fixed parameters on the domain ``[a, b]``.

    Handles are immutable and hashable; evaluation is a pure function of
    ``(name, params, x)``.
    """

    name: str
    params: tuple[tuple[str, float], ...]
    a: float = 0.0
    b: float = 1.0
    _fn: Callable[[np.ndarray], np.ndarray] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        entry = _CATALOG[self.name]
        object.__setattr__(self, "_fn", entry.build(dict(self.params), self.a, self.b))

    @property
    def domain(self) -> tuple[float, float]:
        return (self.a, self.b)

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    def __call__(self, x: Any) -> Any:
        arr = np.asarray(x, dtype=np.float64)
        out = self._fn(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out

    @property
    def continuous(self) -> bool:
        return _CATALOG[self.name].continuous

    @property
    def bounded_variation(self) -> bool:
        """Whether the catalog function is of bounded variation on its domain."""
        return _CATALOG[self.name].bounded_variation

    @property
    def singular_points(self) -> tuple[float, ...]:
        return _CATALOG[self.name].singular(self.a, self.b)

    @property
    def breakpoints(self) -> np.ndarray:
        """Kinks of piecewise-linear catalog members (empty otherwise)."""
        if self.name == "piecewise_linear_random":
            return _pl_random_table(dict(self.params), self.a, self.b)[0]
        return np.empty(0)

    def extrema(self, lo: float, hi: float, cutoff: float = 0.0) -> np.ndarray:
        """Local extrema in ``[max(lo, cutoff), hi]``, ascending.

        Only ``sin_recip`` declares extrema: ``t_k = 2 / ((2k + 1) pi)``.
        Since they accumulate at 0, a positive lower limit is required.
        """
        if self.name != "sin_recip":
            return np.empty(0)
        lo = max(lo, cutoff, self.a)
        hi = min(hi, self.b)
        if lo <= 0.0:
            raise ValueError("sin_recip extrema accumulate at 0; need lo or cutoff > 0")
        if lo > hi:
            return np.empty(0)
        k_max = math.floor((2.0 / (math.pi * lo) - 1.0) / 2.0)
        k_min = max(0, math.ceil((2.0 / (math.pi * hi) - 1.0) / 2.0))
        k = np.arange(k_min, k_max + 1)
        t = 2.0 / ((2 * k + 1) * math.pi)
        return np.sort(t[(t >= lo) & (t <= hi)])

    def spec(self) -> str:
        """Round-trippable ``name:key=value,...`` form used by the CLI."""
        if not self.params:
            return self.name
        body = ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params)
        return f"{self.name}:{body}"


def _fmt_param(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def catalog_lookup(
    name: str,
    params: Mapping[str, float] | None = None,
    *,
    a: float = 0.0,
    b: float = 1.0,
) -> FunctionHandle:
    """Look up a catalog function and bind its parameters.

    Unknown names, unknown parameter keys and out-of-range values raise
    :class:`ConfigError`.
    """
    if name not in _CATALOG:
        raise ConfigError(
            f"unknown function {name!r}; choose from {', '.join(CATALOG_NAMES)}"
        )
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ConfigError(f"invalid domain [{a}, {b}]")

    entry = _CATALOG[name]
    merged = dict(entry.defaults)
    for key, value in (params or {}).items():
        if key not in merged:
            raise ConfigError(f"unknown parameter {key!r} for {name}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"parameter {key}={value} is not finite")
        if key in entry.integer_params:
            if not value.is_integer():
                raise ConfigError(f"parameter {key} must be an integer, got {value}")
            value = int(value)
        merged[key] = value
    entry.validate(merged)

    return FunctionHandle(name, tuple(sorted(merged.items())), float(a), float(b))


def parse_function_spec(text: str) -> tuple[str, dict[str, float]]:
    """Parse ``"power:beta=0.5"`` into ``("power", {"beta": 0.5})``."""
    name, _, body = text.strip().partition(":")
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"malformed parameter {item!r} in {text!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"parameter {key!r} is not a number: {value!r}") from exc
    return name, params


# }}}


# {{{ sampled functions


class InterpolatedHandle:
    """Piecewise-linear interpolant of tabulated values, used as a handle.

    This is how images under :func:`fracbv.fracint.rl_integral` are fed back
    into the variation machinery.
    """

    singular_points: tuple[float, ...] = ()
    continuous = True

    def __init__(self, x: np.ndarray, y: np.ndarray, name: str = "interpolated"):
        self._x = np.asarray(x, dtype=np.float64)
        self._y = np.asarray(y, dtype=np.float64)
        self.name = name
        self.params: tuple[tuple[str, float], ...] = ()
        self.a = float(self._x[0])
        self.b = float(self._x[-1])

    @property
    def domain(self) -> tuple[float, float]:
        return (self.a, self.b)

    def __call__(self, x: Any) -> Any:
        arr = np.asarray(x, dtype=np.float64)
        out = np.interp(np.atleast_1d(arr), self._x, self._y)
        return float(out[0]) if arr.ndim == 0 else out

    def extrema(self, lo: float, hi: float, cutoff: float = 0.0) -> np.ndarray:
        return np.empty(0)

    def spec(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nodal values of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray
    source: FunctionHandle | InterpolatedHandle | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.n + 1,):
            raise ConfigError(
                f"expected {self.grid.n + 1} values for the grid, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes()

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def resample(self, grid: Grid) -> SampledFunction:
        if self.source is None:
            raise ValueError("sample has no source handle to re-sample from")
        return sample(self.source, grid)

    def as_handle(self, name: str = "interpolated") -> InterpolatedHandle:
        return InterpolatedHandle(self.x, self.values, name=name)

    def __add__(self, other: SampledFunction) -> SampledFunction:
        _same_grid(self, other)
        return SampledFunction(self.grid, self.values + other.values)

    def __sub__(self, other: SampledFunction) -> SampledFunction:
        _same_grid(self, other)
        return SampledFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> SampledFunction:
        return SampledFunction(self.grid, scalar * self.values)

    __rmul__ = __mul__


def _same_grid(f: SampledFunction, g: SampledFunction) -> None:
    if f.grid != g.grid:
        raise ValueError("samples live on different grids")


def sample(handle: FunctionHandle | InterpolatedHandle, grid: Grid) -> SampledFunction:
    """Evaluate *handle* at the nodes of *grid*."""
    slack = 4 * np.finfo(float).eps * max(abs(handle.a), abs(handle.b), 1.0)
    if grid.a < handle.a - slack or grid.b > handle.b + slack:
        raise ConfigError(
            f"grid [{grid.a}, {grid.b}] lies outside the domain "
            f"[{handle.a}, {handle.b}] of {handle.name}"
        )
    return SampledFunction(grid, handle(grid.nodes()), source=handle)


# }}}
