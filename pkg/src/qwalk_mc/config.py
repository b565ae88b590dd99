"""Experiment configuration: YAML manifests merged with command-line overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .core import SYMMETRIC_INIT, HADAMARD_SPEC, TWO_PI, CoinSpec, PointMassInitialState
from .errors import ConfigError

__all__ = ["MODES", "FORMATS", "PRESETS", "ExperimentConfig", "load_manifest", "build_config"]

MODES = (
    "discrete_mc",
    "discrete_reference",
    "discrete_series",
    "continuous_mc",
    "continuous_reference",
    "compare",
    "convergence",
)
FORMATS = ("csv", "json", "svg", "png")
PRESETS = {"hadamard": (HADAMARD_SPEC, SYMMETRIC_INIT)}

_MC_DISCRETE = ("discrete_mc", "compare", "convergence")
_ANGLE_NAMES = ("delta", "lambda1", "lambda2", "lambda3")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    coin: CoinSpec = HADAMARD_SPEC
    coin_name: str | None = "hadamard"
    init: PointMassInitialState = SYMMETRIC_INIT
    steps: int | None = None
    time: float | None = None
    rate: float = 1.0
    samples: int = 1_000_000
    seed: int = 0
    workers: int | None = None
    grid: tuple[int, ...] = (10_000, 100_000, 1_000_000, 10_000_000)
    replicates: int = 8
    out_dir: Path = Path("results")
    formats: tuple[str, ...] = ("csv", "json", "svg")

    @property
    def continuous(self) -> bool:
        return self.mode.startswith("continuous") or (self.mode == "compare" and self.time is not None)

    def echo(self) -> dict:
        """JSON-ready description of the run (no timing, so reports stay reproducible)."""
        out = {
            "mode": self.mode,
            "seed": self.seed,
            "samples": self.samples,
            "workers": self.workers,
        }
        if self.continuous:
            out.update(time=self.time, rate=self.rate, init="point mass at 0")
        else:
            out.update(
                steps=self.steps,
                coin=dict(zip(_ANGLE_NAMES, self.coin.as_tuple())),
                coin_name=self.coin_name,
                alpha=[self.init.alpha.real, self.init.alpha.imag],
                beta=[self.init.beta.real, self.init.beta.imag],
            )
        if self.mode == "convergence":
            out.update(grid=list(self.grid), replicates=self.replicates)
        return out


def load_manifest(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping at the top level")
    return data


def _pair(value, name: str) -> complex:
    if isinstance(value, str):
        value = [v for v in value.split(",")]
    if isinstance(value, (int, float)):
        return complex(value)
    try:
        re, im = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be 'RE,IM' or a two-element list, got {value!r}") from exc
    return complex(re, im)


def _angles(value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = value.split(",")
    if isinstance(value, dict):
        try:
            value = [value.get(k, 0.0) for k in _ANGLE_NAMES]
        except AttributeError as exc:
            raise ConfigError("coin angles mapping is malformed") from exc
    try:
        angles = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"angles must be four numbers delta,lambda1,lambda2,lambda3, got {value!r}") from exc
    if len(angles) != 4:
        raise ConfigError(f"angles needs exactly four values delta,lambda1,lambda2,lambda3, got {len(angles)}")
    return angles


def _int(value, name: str, minimum: int) -> int:
    try:
        as_float = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if not as_float.is_integer() or as_float < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(as_float)


def build_config(mode: str, manifest: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """
    Merge a manifest and flag overrides (flags win) into a validated config.

    Raises
    ------
    ConfigError
        For unknown modes or formats, missing step count or time, or values out of range.
    """
    raw = dict(manifest or {})
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    mode = raw.pop("mode", None) or mode
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")

    coin_name, coin_value = "hadamard", None
    init = None
    if "angles" in raw:
        coin_value, coin_name = raw.pop("angles"), None
    coin_entry = raw.pop("coin", None)
    if coin_value is None and coin_entry is not None:
        if isinstance(coin_entry, str) and "," not in coin_entry:
            coin_name = coin_entry.lower()
        else:
            coin_value, coin_name = coin_entry, None
    if coin_name is not None:
        if coin_name not in PRESETS:
            raise ConfigError(f"unknown coin preset {coin_name!r}; known: {', '.join(PRESETS)}")
        coin, init = PRESETS[coin_name]
        angles = coin.as_tuple()
    else:
        angles = _angles(coin_value)
        sampled = mode in _MC_DISCRETE
        for name, value in zip(_ANGLE_NAMES, angles):
            if sampled and name == "lambda2" and not (math.isfinite(value) and 0.0 < value < TWO_PI):
                raise ConfigError(f"lambda2 = {value!r} is outside the valid range (0, 2π) for Poisson sampling")
            if not (math.isfinite(value) and 0.0 <= value < TWO_PI):
                raise ConfigError(f"{name} = {value!r} is outside the valid range [0, 2π)")
        coin = CoinSpec(*angles)

    init_entry = raw.pop("init", None) or {}
    alpha = raw.pop("alpha", init_entry.get("alpha") if isinstance(init_entry, dict) else None)
    beta = raw.pop("beta", init_entry.get("beta") if isinstance(init_entry, dict) else None)
    if alpha is not None or beta is not None or init is None:
        a = _pair(alpha if alpha is not None else [1.0, 0.0], "alpha")
        b = _pair(beta if beta is not None else [0.0, 0.0], "beta")
        init = PointMassInitialState(a, b)
    if abs(init.norm_sq - 1.0) > 1e-10:
        raise ConfigError(f"|alpha|^2 + |beta|^2 = {init.norm_sq!r} must equal 1 within 1e-10")

    steps = raw.pop("steps", None)
    t = raw.pop("time", None)
    if steps is not None and t is not None:
        raise ConfigError("give either steps or time, not both")
    steps = _int(steps, "steps", 0) if steps is not None else None
    if t is not None:
        try:
            t = float(t)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"time must be a number, got {t!r}") from exc
        if not (math.isfinite(t) and t >= 0):
            raise ConfigError(f"time must be a finite value >= 0, got {t!r}")

    continuous = mode.startswith("continuous") or (mode == "compare" and t is not None)
    if continuous and t is None:
        raise ConfigError(f"mode {mode} needs a time (--time)")
    if not continuous and steps is None:
        raise ConfigError(f"mode {mode} needs a step count (--steps)")
    if mode == "discrete_series" and steps > 4:
        raise ConfigError(f"steps = {steps} exceeds the series brute-force limit of 4")

    if mode in _MC_DISCRETE and not continuous and steps > 0 and not 0.0 < coin.lambda2 < TWO_PI:
        raise ConfigError(f"lambda2 = {angles[2]!r} is outside the valid range (0, 2π) for Poisson sampling")

    rate = raw.pop("rate", 1.0)
    try:
        rate = float(rate)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"rate must be a number, got {rate!r}") from exc
    if not (math.isfinite(rate) and rate > 0):
        raise ConfigError(f"rate must be > 0, got {rate!r}")

    samples = _int(raw.pop("samples", 1_000_000), "samples", 1)
    seed = _int(raw.pop("seed", 0), "seed", 0)
    workers = raw.pop("workers", None)
    workers = _int(workers, "workers", 1) if workers is not None else None

    grid = raw.pop("grid", None)
    if grid is None:
        grid = ExperimentConfig.grid
    elif isinstance(grid, str):
        grid = grid.split(",")
    grid = tuple(_int(g, "grid", 1) for g in grid)
    if mode == "convergence" and (len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:]))):
        raise ConfigError(f"grid must hold at least 3 strictly increasing sample counts, got {list(grid)}")
    replicates = _int(raw.pop("replicates", 8), "replicates", 1)

    output = raw.pop("output", None) or {}
    out_dir = Path(raw.pop("out", None) or output.get("dir", "results"))
    formats = raw.pop("format", None) or output.get("formats", ("csv", "json", "svg"))
    if isinstance(formats, str):
        formats = formats.split(",")
    formats = tuple(f.strip().lower() for f in formats)
    for f in formats:
        if f not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {f!r}")

    if raw:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(raw))}")

    return ExperimentConfig(
        mode=mode,
        coin=coin,
        coin_name=coin_name,
        init=init,
        steps=steps,
        time=t,
        rate=rate,
        samples=samples,
        seed=seed,
        workers=workers,
        grid=grid,
        replicates=replicates,
        out_dir=out_dir,
        formats=formats,
    )
