"""JSON series definitions.

A config is a JSON object with a ``type`` tag::

    {"type": "geometric_plus_b", "a": 2, "b_re": 1, "b_im": 0}
    {"type": "zeta_beta", "beta": 0.5}
    {"type": "poly_reciprocal", "coeffs": [1, 0, 1], "n_start": 1}
    {"type": "multi_geometric", "bases": [0.5, 0.25], "weights": [1, 0.7]}
    {"type": "flat_weierstrass", "a": 2.718281828459045}
    {"type": "counterexample", "m": 1, "gap": "dyadic"}
    {"type": "custom", "base": {"kind": "geometric", "a": 2}, "sigma": 1,
     "alphas": [-1, 1], "sigmas": [1, 2, 3], "error_constants": [2, 2, 2],
     "radius": 0.5, "h_expr": "-z / (1 + z)"}

Complex numbers are written either as plain numbers or ``[re, im]`` pairs.
``h_expr`` is a numpy expression in ``z`` evaluated with no builtins; names
available are the numpy ufuncs listed in ``_EXPR_NAMES``.
"""

import json
import math
from dataclasses import replace

import numpy as np

from .bases import (
    GeometricBase,
    HurwitzBase,
    make_custom,
    make_flat_weierstrass,
    make_geometric_plus_b,
    make_multi_geometric,
    make_poly_reciprocal,
    make_zeta_beta,
)
from .boundary import CounterexampleSeries, GapSequence
from .errors import MeroContError


class ConfigError(MeroContError):
    """A series definition is malformed or violates a constructor precondition."""


_EXPR_NAMES = {
    name: getattr(np, name)
    for name in (
        "exp", "log", "log1p", "expm1", "sqrt", "sin", "cos", "tan", "arctan",
        "sinh", "cosh", "tanh", "abs", "power", "pi", "e",
    )
}

TYPES = (
    "geometric_plus_b",
    "zeta_beta",
    "poly_reciprocal",
    "multi_geometric",
    "flat_weierstrass",
    "counterexample",
    "custom",
)


def _complex(v, what):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"{what}: complex values are [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(float(v))
    raise ConfigError(f"{what}: expected a number or [re, im], got {v!r}")


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing field {key!r}")
        return float(default)
    try:
        return float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field {key!r} must be a number") from exc


def normalize_config(cfg):
    """Canonical form of a config: defaults filled, complex values as pairs.

    Defaults that depend on the series (``n_start`` of ``poly_reciprocal``)
    stay ``None`` here and are filled in by :func:`build_series`, so
    ``series_config(build_series(c)) == c`` holds for every ``c`` returned
    by :func:`series_config`.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("type")
    if kind not in TYPES:
        raise ConfigError(f"unknown series type {kind!r}; expected one of {TYPES}")
    if kind == "geometric_plus_b":
        return {
            "type": kind,
            "a": _float(cfg, "a"),
            "b_re": _float(cfg, "b_re", 0.0),
            "b_im": _float(cfg, "b_im", 0.0),
        }
    if kind == "zeta_beta":
        return {"type": kind, "beta": _float(cfg, "beta")}
    if kind == "poly_reciprocal":
        if "coeffs" not in cfg:
            raise ConfigError("missing field 'coeffs'")
        out = {
            "type": kind,
            "coeffs": [_pair(_complex(c, "coeffs")) for c in cfg["coeffs"]],
        }
        out["n_start"] = None if cfg.get("n_start") is None else int(cfg["n_start"])
        return out
    if kind == "multi_geometric":
        return {
            "type": kind,
            "bases": [float(x) for x in cfg.get("bases", [])],
            "weights": [float(x) for x in cfg.get("weights", [])],
        }
    if kind == "flat_weierstrass":
        return {"type": kind, "a": _float(cfg, "a", math.e)}
    if kind == "counterexample":
        gap = cfg.get("gap", "dyadic")
        if gap != "dyadic":
            if not isinstance(gap, list):
                raise ConfigError("gap must be 'dyadic' or a list of exponents")
            gap = [int(p) for p in gap]
        m = cfg.get("m", 1)
        if int(m) != m:
            raise ConfigError("m must be an integer")
        return {"type": kind, "m": int(m), "gap": gap}
    # custom
    base = cfg.get("base")
    if not isinstance(base, dict) or base.get("kind") not in ("geometric", "hurwitz"):
        raise ConfigError("custom.base must be {'kind': 'geometric'|'hurwitz', ...}")
    if base["kind"] == "geometric":
        nbase = {"kind": "geometric", "a": _float(base, "a")}
    else:
        nbase = {"kind": "hurwitz", "q": _float(base, "q", 1.0)}
    out = {
        "type": kind,
        "base": nbase,
        "sigma": _float(cfg, "sigma", 1.0),
        "alphas": [_pair(_complex(a, "alphas")) for a in cfg.get("alphas", [])],
        "sigmas": [float(s) for s in cfg.get("sigmas", [])],
        "error_constants": (
            None if cfg.get("error_constants") is None
            else [float(c) for c in cfg["error_constants"]]
        ),
        "radius": _float(cfg, "radius", 1.0),
        "h_expr": cfg.get("h_expr"),
        "name": str(cfg.get("name", "custom")),
    }
    return out


def _expr_function(expr):
    try:
        code = compile(expr, "<h_expr>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"h_expr does not parse: {exc}") from exc
    for name in code.co_names:
        if name not in _EXPR_NAMES and name != "z":
            raise ConfigError(f"h_expr uses unknown name {name!r}")

    def h(z):
        return eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, z=z))  # noqa: S307

    return h


def build_series(cfg):
    """Construct the series a config describes.

    Returns a :class:`PerturbedSeries`, or a :class:`CounterexampleSeries`
    for ``type == "counterexample"``.

    Raises
    ------
    ConfigError
        For malformed configs and failed constructor preconditions.
    """
    cfg = normalize_config(cfg)
    kind = cfg["type"]
    try:
        if kind == "geometric_plus_b":
            series = make_geometric_plus_b(cfg["a"], complex(cfg["b_re"], cfg["b_im"]))
        elif kind == "zeta_beta":
            series = make_zeta_beta(cfg["beta"])
        elif kind == "poly_reciprocal":
            series = make_poly_reciprocal(
                [complex(*c) for c in cfg["coeffs"]], n_start=cfg["n_start"]
            )
        elif kind == "multi_geometric":
            series = make_multi_geometric(cfg["bases"], cfg["weights"])
        elif kind == "flat_weierstrass":
            series = make_flat_weierstrass(cfg["a"])
        elif kind == "counterexample":
            gaps = (
                GapSequence.powers_of_two() if cfg["gap"] == "dyadic"
                else GapSequence.explicit(cfg["gap"])
            )
            return CounterexampleSeries(cfg["m"], gaps)
        else:
            b = cfg["base"]
            base = GeometricBase(b["a"]) if b["kind"] == "geometric" else HurwitzBase(b["q"])
            func = None if cfg["h_expr"] is None else _expr_function(cfg["h_expr"])
            series = make_custom(
                base, cfg["sigma"], [complex(*a) for a in cfg["alphas"]], cfg["sigmas"],
                func=func, error_constants=cfg["error_constants"],
                radius=cfg["radius"], name=cfg["name"],
            )
            series = replace(series, config=cfg)
    except ConfigError:
        raise
    except (MeroContError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid {kind} config: {exc}") from exc
    return series


def series_config(series):
    """Normalised config of a series built by :func:`build_series`."""
    if isinstance(series, CounterexampleSeries):
        return normalize_config(
            {"type": "counterexample", "m": series.m, "gap": series.gaps.to_config()}
        )
    if series.config is None:
        raise ConfigError("series has no config record")
    return normalize_config(series.config)


def load_config(path):
    """Read a config file and build its series."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return build_series(cfg)


def dump_config(series):
    """Config of ``series`` as a JSON string with sorted keys."""
    return json.dumps(series_config(series), sort_keys=True)
