"""Plain-text run configuration: ``key = value`` lines, ``#`` comments.

Potential keys: ``potential`` (doublewell | rect | custom | free), ``ell``,
``delta``, ``lambda``, ``breakpoints`` and ``heights`` (comma separated),
``L`` (free only). Unit keys: ``a0_m``, ``E1_MeV``, ``mass_kg``. Any other
key is treated as the default for the command-line flag of the same name
(dashes and underscores are interchangeable); flags given on the command
line win.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .potential import PiecewisePotential, make_double_well, make_rectangular_well
from .units import DEFAULT_A0, DEFAULT_E1_MEV, ALPHA_MASS, UnitScheme

POTENTIAL_KEYS = ("potential", "ell", "delta", "lambda", "breakpoints", "heights", "L")
UNIT_KEYS = ("a0_m", "E1_MeV", "mass_kg")


def normalize_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    return "lambda" if key in ("lam", "lambda_") else key


def read_config(path) -> dict:
    """Parse a key=value file into a dict of strings."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"{path}:{n}: empty key")
        out[key] = value.strip()
    return out


def _float(cfg, key, default=None):
    if key not in cfg or cfg[key] is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        value = float(cfg[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key} = {cfg[key]!r} is not a number") from None
    if not np.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return value


def _floats(cfg, key):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(f"missing required key {key!r}")
    raw = cfg[key]
    if isinstance(raw, (list, tuple)):
        items = raw
    else:
        items = [s for s in str(raw).replace(";", ",").split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"{key} = {raw!r} is not a comma-separated list of numbers") from None


def build_potential(cfg: dict) -> PiecewisePotential:
    kind = str(cfg.get("potential") or "doublewell").strip().lower()
    try:
        if kind == "doublewell":
            return make_double_well(_float(cfg, "ell", 1.0), _float(cfg, "delta", 2.0),
                                    _float(cfg, "lambda", 436.0))
        if kind == "rect":
            return make_rectangular_well(_float(cfg, "ell"), _float(cfg, "lambda"))
        if kind == "custom":
            return PiecewisePotential(tuple(_floats(cfg, "breakpoints")),
                                      tuple(_floats(cfg, "heights")))
        if kind == "free":
            return PiecewisePotential.free(_float(cfg, "L", 1.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid {kind} potential: {exc}") from None
    raise ConfigError(f"unknown potential {kind!r} (doublewell, rect, custom, free)")


def build_units(cfg: dict) -> UnitScheme:
    try:
        return UnitScheme.from_mev(_float(cfg, "a0_m", DEFAULT_A0), _float(cfg, "E1_MeV", DEFAULT_E1_MEV),
                                   _float(cfg, "mass_kg", ALPHA_MASS))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid unit scheme: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs: potential, units, precision and its own options."""

    potential: PiecewisePotential
    units: UnitScheme
    digits: int | str | None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, cfg: dict) -> "RunConfig":
        digits = cfg.get("digits")
        if digits not in (None, "auto"):
            try:
                digits = int(digits)
            except (TypeError, ValueError):
                raise ConfigError(f"digits = {digits!r} must be an integer or 'auto'") from None
            if digits < 16:
                raise ConfigError("digits must be >= 16 (omit it for double precision)")
        options = {k: v for k, v in cfg.items() if k not in POTENTIAL_KEYS + UNIT_KEYS + ("digits",)}
        return cls(build_potential(cfg), build_units(cfg), digits, options)
