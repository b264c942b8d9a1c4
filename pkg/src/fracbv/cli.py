"""Command-line front end.

Usage::

    fracbv integrate  --function constant:c=1 --a 0 --b 1 --n 1024 --alpha 0.5
    fracbv variation  --function linear:intercept=-1 --format json
    fracbv detect-uvp --function sin_recip --n 16
    fracbv boxdim     --function piecewise_linear_random:k=8,seed=7 --alpha 0.5
    fracbv verify     --seed 42 --output report.json

Every subcommand also reads a flat ``key = value`` file via ``--config``;
flags given on the command line win. Exit codes: 0 ok, 1 verification
failure, 2 usage or configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import ConfigError, NumericError
from .fracint import GAMMA_IMPLEMENTATION, FracOrder, rl_integral
from .fractaldim import box_dimension
from .funcspace import catalog_lookup, make_grid, parse_function_spec, sample
from .variation import Thresholds, bv_norm, detect_uvp, discrete_tv, jordan_decompose
from .verify import VerifyConfig, run_suite

__all__ = ["RunConfig", "build_parser", "load_config_file", "main"]

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_N = {
    "integrate": 1024,
    "variation": 1024,
    "detect-uvp": 16,
    "boxdim": 2**14,
    "verify": 1024,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    function: str | None = None
    a: float = 0.0
    b: float = 1.0
    n: int = 1024
    alpha: tuple[float, ...] = ()
    rho: float = 1.5
    m: int = 3
    floor: float = 10.0
    levels: int = 6
    n_per_level: int = 64
    stride: int = 1
    j_min: int = 4
    j_max: int = 12
    skip_coarse: int = 2
    image_n: int = 4096
    bound_samples: int = 100
    monotone_samples: int = 50
    dim_n: int = 2**14
    calib_n: int = 2**18
    output: str = "-"
    format: str = "csv"
    seed: int = 42

    def thresholds(self) -> Thresholds:
        return Thresholds(
            rho=self.rho,
            m=self.m,
            floor_factor=self.floor,
            levels=self.levels,
            n_per_level=self.n_per_level,
            stride=self.stride,
        )

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["alpha"] = list(self.alpha)
        out.pop("output")
        return out


_INT_KEYS = {
    "n", "m", "levels", "n_per_level", "stride", "j_min", "j_max", "skip_coarse",
    "image_n", "bound_samples", "monotone_samples", "dim_n", "calib_n", "seed",
}
_FLOAT_KEYS = {"a", "b", "rho", "floor"}
_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in _INT_KEYS:
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError(value)
            return int(as_float)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "alpha":
            if isinstance(value, (list, tuple)):
                return tuple(float(v) for v in value)
            return tuple(float(v) for v in str(value).split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc
    return value


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not eq:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def resolve_config(command: str, flags: dict[str, Any]) -> RunConfig:
    merged: dict[str, Any] = {}
    config_path = flags.pop("config", None)
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in flags.items() if v is not None})
    unknown = set(merged) - _KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")

    values = {k: _coerce(k, v) for k, v in merged.items()}
    values.setdefault("n", DEFAULT_N[command])
    cfg = RunConfig(command=command, **values)

    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if not (math.isfinite(cfg.a) and math.isfinite(cfg.b) and cfg.a < cfg.b):
        raise ConfigError(f"need finite a < b, got a={cfg.a}, b={cfg.b}")
    if cfg.n < 1:
        raise ConfigError(f"n must be >= 1, got {cfg.n}")
    for alpha in cfg.alpha:
        FracOrder(alpha)
    if command == "integrate" and not cfg.alpha:
        raise ConfigError("integrate requires --alpha")
    if command != "verify" and not cfg.function:
        raise ConfigError(f"{command} requires --function")
    cfg.thresholds()
    return cfg


# {{{ output


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def render_json(cfg: RunConfig, results: Any) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "meta": {"tool_version": __version__, "gamma": GAMMA_IMPLEMENTATION},
        "config": cfg.to_dict(),
        "results": results,
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def render_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_output(cfg: RunConfig, text: str) -> None:
    if cfg.output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(cfg.output, "w", newline="") as fp:
        fp.write(text)


# }}}


# {{{ commands


def _handle(cfg: RunConfig):
    name, params = parse_function_spec(cfg.function)
    return catalog_lookup(name, params, a=cfg.a, b=cfg.b)


def cmd_integrate(cfg: RunConfig) -> int:
    f = sample(_handle(cfg), make_grid(cfg.a, cfg.b, cfg.n))
    images = {alpha: rl_integral(f, alpha).values for alpha in cfg.alpha}
    x = f.x
    if cfg.format == "json":
        text = render_json(cfg, {
            "x": x, "f": f.values,
            "integrals": [{"alpha": a, "values": v} for a, v in images.items()],
        })
    else:
        header = ["x", "f"] + [f"I^{a:g}f" for a in images]
        cols = [x, f.values, *images.values()]
        text = render_csv(header, zip(*cols))
    write_output(cfg, text)
    return EXIT_OK


def cmd_variation(cfg: RunConfig) -> int:
    f = sample(_handle(cfg), make_grid(cfg.a, cfg.b, cfg.n))
    g, h = jordan_decompose(f)
    cum = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(f.values)))))
    if cfg.format == "json":
        text = render_json(cfg, {
            "tv": discrete_tv(f),
            "bv_norm": bv_norm(f),
            "f_a": float(f.values[0]),
            "x": f.x, "f": f.values, "g": g.values, "h": h.values,
        })
    else:
        text = render_csv(
            ["x", "f", "g", "h", "cumulative_tv"],
            zip(f.x, f.values, g.values, h.values, cum),
        )
    write_output(cfg, text)
    return EXIT_OK


def cmd_detect_uvp(cfg: RunConfig) -> int:
    handle = _handle(cfg)
    if cfg.alpha:
        img = rl_integral(sample(handle, make_grid(cfg.a, cfg.b, cfg.image_n)), cfg.alpha[0])
        handle = img.as_handle(name=f"I^{cfg.alpha[0]:g}[{handle.spec()}]")
    result = detect_uvp(handle, make_grid(cfg.a, cfg.b, cfg.n), cfg.thresholds())
    if cfg.format == "json":
        text = render_json(cfg, result.to_dict())
    else:
        rows = []
        for r in result.reports:
            delta, n, tv = r.levels[-1]
            rows.append((r.center, r.classification, delta, n, tv, r.growth_ratios[-1]))
        text = render_csv(
            ["x0", "classification", "delta", "n", "tv", "last_ratio"], rows
        )
    write_output(cfg, text)
    return EXIT_OK


def cmd_boxdim(cfg: RunConfig) -> int:
    f = sample(_handle(cfg), make_grid(cfg.a, cfg.b, cfg.n))
    if cfg.alpha:
        f = rl_integral(f, cfg.alpha[0])
    est = box_dimension(f, cfg.j_min, cfg.j_max, cfg.skip_coarse)
    if cfg.format == "json":
        text = render_json(cfg, est.to_dict())
    else:
        text = render_csv(["j", "delta", "count"], est.scales)
    write_output(cfg, text)
    return EXIT_OK


def verify_config(cfg: RunConfig) -> VerifyConfig:
    base = VerifyConfig()
    return replace(
        base,
        seed=cfg.seed,
        alphas=cfg.alpha or base.alphas,
        thresholds=cfg.thresholds(),
        image_n=cfg.image_n,
        bound_samples=cfg.bound_samples,
        monotone_samples=cfg.monotone_samples,
        dim_n=cfg.dim_n,
        calib_n=cfg.calib_n,
        n=cfg.n,
    )


def cmd_verify(cfg: RunConfig) -> int:
    report = run_suite(verify_config(cfg))
    if cfg.format == "json":
        text = render_json(cfg, report.to_dict())
    else:
        text = render_csv(
            ["theorem_id", "config_digest", "verdict"],
            [(r.theorem_id, r.config_digest, r.verdict) for r in report.runs],
        )
    write_output(cfg, text)
    for r in report.runs:
        print(f"{r.theorem_id:22s} {r.verdict}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


COMMANDS = {
    "integrate": cmd_integrate,
    "variation": cmd_variation,
    "detect-uvp": cmd_detect_uvp,
    "boxdim": cmd_boxdim,
    "verify": cmd_verify,
}

# }}}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--function", help="catalog function, e.g. power:beta=0.5")
    common.add_argument("--a", type=float, help="left endpoint (default 0)")
    common.add_argument("--b", type=float, help="right endpoint (default 1)")
    common.add_argument("--n", type=int, help="number of grid cells")
    common.add_argument("--alpha", help="order(s) of integration, comma separated")
    common.add_argument("--output", "-o", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--seed", type=int, help="random seed (verify)")
    common.add_argument("--rho", type=float, help="growth ratio for unbounded variation")
    common.add_argument("--m", type=int, help="number of trailing ratios inspected")
    common.add_argument("--floor", type=float, help="TV floor as a multiple of sup|f|")
    common.add_argument("--levels", type=int, help="refinement levels per profile")
    common.add_argument("--n-per-level", dest="n_per_level", type=int)
    common.add_argument("--stride", type=int, help="candidate node stride (detect-uvp)")
    common.add_argument("--j-min", dest="j_min", type=int)
    common.add_argument("--j-max", dest="j_max", type=int)
    common.add_argument("--skip-coarse", dest="skip_coarse", type=int)
    common.add_argument("--image-n", dest="image_n", type=int)
    common.add_argument("--bound-samples", dest="bound_samples", type=int)
    common.add_argument("--monotone-samples", dest="monotone_samples", type=int)
    common.add_argument("--dim-n", dest="dim_n", type=int)
    common.add_argument("--calib-n", dest="calib_n", type=int)

    parser = argparse.ArgumentParser(
        prog="fracbv",
        description="Fractional integrals, bounded variation and box dimension.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "integrate": "tabulate I^alpha f on a uniform grid",
        "variation": "total variation, BV norm and Jordan decomposition",
        "detect-uvp": "locate points of unbounded variation (optionally of I^alpha f)",
        "boxdim": "box-counting dimension of a graph (optionally of I^alpha f)",
        "verify": "run the seeded theorem suite",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve_config(command, args)
        return COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"fracbv {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"fracbv {command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
