"""TOML run configuration with strict keys and aggregated validation."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .experiments import INITIAL_DATA, ExperimentSetup
from .grid import Grid
from .kernel import CompactIndicatorKernel, GaussianKernel
from .model import ModelParams
from .timestepping import Scheme, SchemeConfig

EXPERIMENTS = ("field", "accuracy", "entropy")
DEFAULT_SWEEPS = {
    "accuracy": [2e-2, 1e-2, 5e-3, 2e-3, 1e-3],
    "entropy": [1e-1, 5e-2, 2e-2, 1e-2],
}


class ConfigError(ValueError):
    """All violations found in one configuration."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    setup: ExperimentSetup
    sweep_values: tuple[float, ...] = ()
    output_dir: str = "output"
    snapshot_times: tuple[float, ...] = ()
    probes: dict = field(default_factory=dict)
    cache: bool = False
    cache_dir: str | None = None
    progress_every: int = 1000
    sample_dt: float = 1.0
    deterministic: bool = True

    @property
    def mode_cache(self) -> Path | None:
        if not self.cache:
            return None
        return Path(self.cache_dir) if self.cache_dir else Path(self.output_dir) / "modes"


# section -> key -> (expected type(s), default); None default means required-or-optional by logic
_SCHEMA = {
    "": {"experiment": (str, "field"), "deterministic": (bool, True)},
    "grid": {"d": (int, 1), "n_x": (int, 128), "lower": (float, -math.pi), "upper": (float, math.pi)},
    "model": {"theta": (float, 0.1), "tau": (float, None), "gamma": (float, 5.0), "alpha": (float, None)},
    "kernel": {"variant": (str, "gaussian"), "sigma0": (float, 0.005), "radius": (float, None)},
    "scheme": {"scheme": (str, "RK1"), "dt": (float, 0.01), "eps": (float, 1.0), "t_end": (float, 0.0),
               "M": (int, 1), "dealias": (bool, False)},
    "initial": {"variant": (str, None), "width": (float, None), "half_width": (float, None),
                "radius": (float, None), "delta": (float, None), "v_width": (float, None),
                "w_width": (float, None)},
    "sweep": {"values": (list, None)},
    "output": {"directory": (str, "output"), "snapshot_times": (list, []), "probes": (dict, {}),
               "cache": (bool, False), "cache_dir": (str, None), "progress_every": (int, 1000),
               "sample_dt": (float, 1.0)},
}

_INITIAL_PARAMS = {
    "linear_bump": ("width",),
    "box1d": ("half_width",),
    "hetero2d": ("radius", "delta", "v_width", "w_width"),
    "spiral2d": ("radius", "delta", "v_width", "w_width"),
}


def _type_ok(value, expected) -> bool:
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, expected)


def _read_sections(raw: dict, problems: list[str]) -> dict:
    out = {sec: {} for sec in _SCHEMA}
    for key, value in raw.items():
        if key in _SCHEMA and key and isinstance(value, dict):
            section = key
            items = value.items()
        elif key in _SCHEMA and key:
            problems.append(f"'{key}' must be a table")
            continue
        elif key in _SCHEMA[""]:
            section, items = "", [(key, value)]
        else:
            problems.append(f"unknown key '{key}'")
            continue
        for sub, v in items:
            path = f"{section}.{sub}" if section else sub
            if sub not in _SCHEMA[section]:
                problems.append(f"unknown key '{path}'")
                continue
            expected, _ = _SCHEMA[section][sub]
            if not _type_ok(v, expected):
                problems.append(f"'{path}' must be of type {expected.__name__}")
                continue
            out[section][sub] = float(v) if expected is float else v
    for section, keys in _SCHEMA.items():
        for sub, (_, default) in keys.items():
            out[section].setdefault(sub, default)
    return out


def parse_config(source: str | Path, *, text: bool = False) -> RunConfig:
    """Parse a TOML file (or TOML text when ``text=True``) into a validated ``RunConfig``."""
    if text:
        content = str(source)
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        content = path.read_text()
    try:
        raw = tomllib.loads(content)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"not valid TOML: {exc}"]) from exc

    problems: list[str] = []
    c = _read_sections(raw, problems)
    top, g, m, k, s, ini, sw, out = (c[n] for n in ("", "grid", "model", "kernel", "scheme", "initial", "sweep", "output"))

    experiment = top["experiment"]
    if experiment not in EXPERIMENTS:
        problems.append(f"experiment must be one of {', '.join(EXPERIMENTS)}, got '{experiment}'")

    d, n = g["d"], g["n_x"]
    if d not in (1, 2):
        problems.append("grid.d must be 1 or 2 for simulations")
    if n <= 0:
        problems.append("n_x must be positive")
    elif n % 2:
        problems.append("n_x must be even")
    if not g["upper"] > g["lower"]:
        problems.append("grid.upper must exceed grid.lower")

    if m["tau"] is None:
        # the linear test switches adaptation off unless asked otherwise
        m["tau"] = 0.0 if m["alpha"] is not None else 0.005
    if not 0.0 < m["theta"] < 1.0:
        problems.append("model.theta must lie in (0, 1)")
    if m["tau"] < 0:
        problems.append("model.tau must be >= 0")
    if m["gamma"] <= 0:
        problems.append("model.gamma must be > 0")

    if k["variant"] == "gaussian":
        if k["sigma0"] <= 0:
            problems.append("kernel.sigma0 must be > 0")
    elif k["variant"] == "indicator":
        if k["radius"] is None or k["radius"] <= 0:
            problems.append("kernel.radius must be given and > 0 for the indicator kernel")
    else:
        problems.append(f"kernel.variant must be 'gaussian' or 'indicator', got '{k['variant']}'")

    try:
        scheme = Scheme(s["scheme"])
    except ValueError:
        problems.append(f"scheme.scheme must be one of {', '.join(x.value for x in Scheme)}, got '{s['scheme']}'")
        scheme = None
    if s["dt"] <= 0:
        problems.append("scheme.dt must be > 0")
    if s["eps"] <= 0:
        problems.append("scheme.eps must be > 0")
    if s["t_end"] < 0:
        problems.append("scheme.t_end must be >= 0")
    if s["M"] < 1:
        problems.append("scheme.M must be >= 1")

    variant = ini["variant"] or ("linear_bump" if m["alpha"] is not None else "box1d")
    if variant not in INITIAL_DATA:
        problems.append(f"initial.variant must be one of {', '.join(INITIAL_DATA)}, got '{variant}'")
    else:
        for key in ("width", "half_width", "radius", "delta", "v_width", "w_width"):
            if ini[key] is not None and key not in _INITIAL_PARAMS[variant]:
                problems.append(f"initial.{key} does not apply to '{variant}'")
        if variant in ("hetero2d", "spiral2d") and d != 2:
            problems.append(f"initial.variant '{variant}' needs grid.d = 2")

    if experiment == "accuracy":
        if m["alpha"] is None:
            problems.append("the accuracy experiment needs model.alpha (linear reaction)")
        if scheme is not None and scheme.is_limit:
            problems.append("the accuracy experiment needs a kinetic scheme")
    if experiment == "entropy" and scheme is not None and scheme.is_limit:
        problems.append("the entropy experiment needs a kinetic scheme")

    sweep_values = sw["values"]
    if sweep_values is None:
        sweep_values = DEFAULT_SWEEPS.get(experiment, [])
    elif not all(_type_ok(v, float) and v > 0 for v in sweep_values):
        problems.append("sweep.values must be positive numbers")
        sweep_values = []

    snaps = out["snapshot_times"]
    if not all(_type_ok(v, float) for v in snaps):
        problems.append("output.snapshot_times must be numbers")
        snaps = []
    elif any(v < 0 or v > s["t_end"] + 1e-12 for v in snaps):
        problems.append("output.snapshot_times must lie in [0, scheme.t_end]")
    probes = {}
    for name, pt in out["probes"].items():
        if not (isinstance(pt, list) and len(pt) == d and all(_type_ok(v, float) for v in pt)):
            problems.append(f"output.probes.{name} must be a list of {d} numbers")
        else:
            probes[name] = tuple(float(v) for v in pt)
    if out["progress_every"] < 0:
        problems.append("output.progress_every must be >= 0")
    if out["sample_dt"] <= 0:
        problems.append("output.sample_dt must be > 0")

    if problems:
        raise ConfigError(problems)

    grid = Grid(d, n, g["lower"], g["upper"])
    if m["alpha"] is not None:
        model = ModelParams(theta=m["theta"], tau=m["tau"], gamma=m["gamma"], linear_alpha=m["alpha"])
    else:
        model = ModelParams(theta=m["theta"], tau=m["tau"], gamma=m["gamma"])
    if k["variant"] == "gaussian":
        kernel = GaussianKernel(k["sigma0"], d)
    else:
        kernel = CompactIndicatorKernel(k["radius"], d)
    params = {key: ini[key] for key in _INITIAL_PARAMS[variant] if ini[key] is not None}
    data = INITIAL_DATA[variant](**params)
    cfg = SchemeConfig(dt=s["dt"], eps=s["eps"], scheme=scheme, model=model, t_end=s["t_end"],
                       dealias=s["dealias"])
    setup = ExperimentSetup(grid, cfg, data, s["M"], kernel)
    return RunConfig(
        experiment=experiment,
        setup=setup,
        sweep_values=tuple(float(v) for v in sweep_values),
        output_dir=out["directory"],
        snapshot_times=tuple(float(v) for v in snaps),
        probes=probes,
        cache=out["cache"],
        cache_dir=out["cache_dir"],
        progress_every=out["progress_every"],
        sample_dt=out["sample_dt"],
        deterministic=top["deterministic"],
    )
