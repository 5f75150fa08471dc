"""Experiment definitions: accuracy and entropy sweeps, 2D field runs."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import fft

from .diagnostics import fitted_slope, l2_error, observed_order, relative_entropy
from .grid import Grid
from .kernel import ConnectivityKernel, GaussianKernel, KernelModes, compute_modes
from .model import ModelParams
from .particles import init_ensemble
from .spectral import Field
from .timestepping import Scheme, SchemeConfig, initial_state, integrate

FRONT_LEVEL = 0.5


# ---------------------------------------------------------------------------
# initial data


def _smooth_disk(r: np.ndarray, radius: float, delta: float) -> np.ndarray:
    """Smoothed indicator of the ball of given radius (value 1/2 on its boundary)."""
    return 0.5 * (1.0 - np.tanh((r - radius) / delta))


@dataclass(frozen=True)
class LinearGaussianBump:
    """``V0 = exp(-width |x|^2)``, ``W0 = 0``, uniform density."""

    width: float = 100.0
    distribution: str = "dirac"

    def fields(self, grid: Grid):
        V0 = np.exp(-self.width * grid.radius() ** 2)
        return V0, np.zeros(grid.shape), np.ones(grid.shape)


@dataclass(frozen=True)
class Box1D:
    """``V0`` is the indicator of ``[-half_width, half_width]``, ``W0 = 0``, uniform density."""

    half_width: float = 1.0
    distribution: str = "dirac"

    def fields(self, grid: Grid):
        V0 = (np.abs(grid.radius()) <= self.half_width).astype(float)
        return V0, np.zeros(grid.shape), np.ones(grid.shape)


@dataclass(frozen=True)
class Hetero2D:
    """Wave started on the left edge, crossing a region with a density hole."""

    radius: float = 6.0
    delta: float = 1.0
    distribution: str = "box"
    v_width: float = 10.0
    w_width: float = 100.0

    def fields(self, grid: Grid):
        x1, x2 = grid.mesh
        V0 = ((x1 > -14.0) & (x1 < -13.0)).astype(float)
        W0 = np.where(x2 <= -14.0, 0.1, 0.0)
        rho0 = 1.0 - _smooth_disk(grid.radius(), self.radius, self.delta)
        return V0, W0, rho0


@dataclass(frozen=True)
class Spiral2D:
    """Broken wave on a disk of neurons; curls into a rotating spiral for small eps."""

    radius: float = 12.0
    delta: float = 1.0
    distribution: str = "box"
    v_width: float = 10.0
    w_width: float = 100.0

    def fields(self, grid: Grid):
        x1, x2 = grid.mesh
        V0 = ((x1 <= -6.0) & (x2 > 0.0) & (x2 < 3.0)).astype(float)
        W0 = np.where(x2 >= 3.0, 0.1, 0.0)
        rho0 = _smooth_disk(grid.radius(), self.radius, self.delta)
        return V0, W0, rho0


@dataclass(frozen=True)
class CustomData:
    """Closed-form ``V0``, ``W0``, ``rho0`` given as functions of the mesh coordinates."""

    V0: Callable[..., np.ndarray]
    W0: Callable[..., np.ndarray]
    rho0: Callable[..., np.ndarray]
    distribution: str = "dirac"

    def fields(self, grid: Grid):
        def ev(fn):
            return np.broadcast_to(np.asarray(fn(*grid.mesh), dtype=float), grid.shape).copy()

        return ev(self.V0), ev(self.W0), ev(self.rho0)


InitialDataSpec = LinearGaussianBump | Box1D | Hetero2D | Spiral2D | CustomData

INITIAL_DATA = {
    "linear_bump": LinearGaussianBump,
    "box1d": Box1D,
    "hetero2d": Hetero2D,
    "spiral2d": Spiral2D,
}


# ---------------------------------------------------------------------------
# setups


@dataclass(frozen=True)
class ExperimentSetup:
    grid: Grid
    scheme: SchemeConfig
    data: InitialDataSpec
    M: int = 1
    kernel: ConnectivityKernel | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.kernel is None:
            object.__setattr__(self, "kernel", GaussianKernel(0.005, self.grid.d))
        if self.kernel.d != self.grid.d:
            raise ValueError("kernel and grid dimensions differ")

    def with_scheme(self, **changes) -> "ExperimentSetup":
        return replace(self, scheme=replace(self.scheme, **changes))


def linear_test(scheme=Scheme.RK1, dt: float = 1e-2, n: int = 128) -> ExperimentSetup:
    """Linear reaction ``-0.001 v``, eps = 1 on (-1, 1), up to T = 10."""
    cfg = SchemeConfig(dt=dt, eps=1.0, scheme=scheme, model=ModelParams.linear(0.001), t_end=10.0)
    return ExperimentSetup(Grid(1, n, -1.0, 1.0), cfg, LinearGaussianBump())


def pulse_test(scheme=Scheme.RK1, eps: float = 1.0, dt: float = 0.01, n: int = 512, t_end: float = 250.0,
               half_length: float = 15.0) -> ExperimentSetup:
    """Box data in 1D with the cubic reaction on (-half_length, half_length)."""
    cfg = SchemeConfig(dt=dt, eps=eps, scheme=scheme, t_end=t_end)
    return ExperimentSetup(Grid(1, n, -half_length, half_length), cfg, Box1D())


def hetero_test(eps: float = 2.0, n: int = 128, M: int = 10, dt: float = 0.02, t_end: float = 700.0,
                scheme=Scheme.RK1) -> ExperimentSetup:
    cfg = SchemeConfig(dt=dt, eps=eps, scheme=scheme, t_end=t_end)
    return ExperimentSetup(Grid(2, n, -15.0, 15.0), cfg, Hetero2D(), M)


def spiral_test(eps: float = 0.5, n: int = 128, M: int = 10, dt: float = 0.02, t_end: float = 800.0,
                scheme=Scheme.HSDIRK2) -> ExperimentSetup:
    cfg = SchemeConfig(dt=dt, eps=eps, scheme=scheme, t_end=t_end)
    return ExperimentSetup(Grid(2, n, -15.0, 15.0), cfg, Spiral2D(), M)


# ---------------------------------------------------------------------------
# running


def modes_for(setup: ExperimentSetup, cache_dir=None) -> KernelModes | None:
    if setup.scheme.scheme.is_limit:
        return None
    return compute_modes(setup.kernel, setup.grid, setup.scheme.eps, cache_dir=cache_dir)


def simulate(setup: ExperimentSetup, *, modes: KernelModes | None = None, cache_dir=None,
             observe_steps=None, observer=None):
    """Run ``setup`` to ``t_end`` and return the final state."""
    ensemble = init_ensemble(setup.data, setup.grid, setup.M)
    state = initial_state(setup.scheme, ensemble)
    if modes is None:
        modes = modes_for(setup, cache_dir)
    return integrate(state, setup.scheme, modes=modes, moments=setup.kernel.moments(),
                     observe_steps=observe_steps, observer=observer)


def macro_fields(state) -> tuple[Field, Field]:
    g = state.grid
    return Field(g, state.V_M), Field(g, state.W_M)


def _map_ordered(fn, items, threads: int | None):
    # results come back in input order whatever the completion order
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class ExperimentReport:
    """Rows of ``(parameter, error, order)``; the first order is ``nan``."""

    name: str
    parameter: str
    rows: list[tuple[float, float, float]]
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, name: str, parameter: str, pairs, metadata=None) -> "ExperimentReport":
        orders = observed_order(pairs)
        rows = [(p, e, o) for (p, e), o in zip(pairs, orders)]
        return cls(name, parameter, rows, dict(metadata or {}))

    @property
    def parameters(self) -> list[float]:
        return [r[0] for r in self.rows]

    @property
    def errors(self) -> list[float]:
        return [r[1] for r in self.rows]

    @property
    def orders(self) -> list[float]:
        return [r[2] for r in self.rows]

    def slope(self) -> float:
        return fitted_slope(self.parameters, self.errors)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["parameter", "error", "order"])
            for p, e, o in self.rows:
                writer.writerow([repr(float(p)), repr(float(e)), "" if math.isnan(o) else repr(float(o))])

    def format_table(self) -> str:
        lines = [f"{self.parameter:>10}  {'error':>10}  {'order':>6}"]
        for p, e, o in self.rows:
            order = "" if math.isnan(o) else f"{o:6.2f}"
            lines.append(f"{p:10.3g}  {e:10.3e}  {order:>6}")
        return "\n".join(lines)


def exact_linear_solution(grid: Grid, modes: KernelModes, alpha: float, V0: Field, t: float,
                          psi_bar: float = 1.0) -> Field:
    """Mode-by-mode solution of ``v' = -alpha v + (L[v] - psi_bar v) / eps^2`` with uniform density."""
    if V0.grid != grid or modes.grid != grid:
        raise ValueError("fields and modes must share the grid")
    rate = -alpha + (modes.rmultiplier - psi_bar) / modes.eps**2
    coeffs = fft.rfftn(V0.values, axes=grid.axes) * np.exp(rate * t)
    return Field(grid, fft.irfftn(coeffs, s=grid.shape, axes=grid.axes))


def run_accuracy_sweep(setup: ExperimentSetup, dts: Sequence[float], *, threads: int | None = None,
                       cache_dir=None) -> ExperimentReport:
    """Error of ``V_M`` at ``t_end`` against the exact linear solution, one row per time step."""
    model = setup.scheme.model
    if not model.is_linear:
        raise ValueError("the accuracy sweep needs the linear reaction")
    if setup.scheme.scheme.is_limit:
        raise ValueError("the accuracy sweep runs a kinetic scheme")
    started = time.perf_counter()
    modes = modes_for(setup, cache_dir)
    V0, _, _ = setup.data.fields(setup.grid)
    t_end = setup.scheme.t_end
    exact = exact_linear_solution(setup.grid, modes, model.linear_alpha, Field(setup.grid, V0), t_end,
                                  setup.kernel.moments().psi_bar)

    def point(dt):
        final = simulate(setup.with_scheme(dt=dt), modes=modes)
        return l2_error(Field(setup.grid, final.V_M), exact)

    errors = _map_ordered(point, list(dts), threads)
    meta = {"scheme": setup.scheme.scheme.value, "n_x": setup.grid.n, "t_end": t_end,
            "wall_time": time.perf_counter() - started}
    return ExperimentReport.from_pairs(f"accuracy-{setup.scheme.scheme.value}", "dt", list(zip(dts, errors)), meta)


def run_entropy_sweep(setup: ExperimentSetup, eps_values: Sequence[float], *, threads: int | None = None,
                      cache_dir=None) -> ExperimentReport:
    """Distance at ``t_end`` between each eps-run and the matching limit scheme."""
    kinetic = setup.scheme.scheme
    if kinetic.is_limit:
        raise ValueError("the entropy sweep needs a kinetic scheme")
    started = time.perf_counter()
    limit_final = simulate(setup.with_scheme(scheme=kinetic.limit))
    V_lim, W_lim = macro_fields(limit_final)
    rho = limit_final.density.field()

    def point(eps):
        final = simulate(setup.with_scheme(eps=eps), cache_dir=cache_dir)
        V, W = macro_fields(final)
        return relative_entropy(V, W, V_lim, W_lim, rho)

    values = _map_ordered(point, list(eps_values), threads)
    meta = {"scheme": kinetic.value, "n_x": setup.grid.n, "dt": setup.scheme.dt, "t_end": setup.scheme.t_end,
            "wall_time": time.perf_counter() - started}
    return ExperimentReport.from_pairs(f"entropy-{kinetic.value}", "eps", list(zip(eps_values, values)), meta)


def front_position(u: Field, level: float = FRONT_LEVEL) -> float:
    """Largest distance from the origin where ``u`` reaches ``level`` (nan if nowhere).

    In 1D the crossing is located between the outermost node above the level
    and its outward neighbour by linear interpolation; in 2D the node radius
    is returned.
    """
    above = u.values >= level
    if not above.any():
        return math.nan
    grid = u.grid
    r = grid.radius()
    if grid.d != 1:
        return float(r[above].max())
    i = int(np.argmax(np.where(above, r, -np.inf)))
    step = 1 if grid.nodes[i] >= 0 else -1
    ui, uj = u.values[i], u.values[(i + step) % grid.n]
    if uj >= level:
        return float(r[i])
    return float(r[i] + (ui - level) / (ui - uj) * grid.dx)


@dataclass
class FieldRun:
    snapshots: list[tuple[float, Field]]
    probes: dict[str, list[tuple[float, float]]]
    fronts: list[tuple[float, float]]
    peaks: list[tuple[float, float]]
    final: object

    def front_speed(self) -> float:
        """Least-squares slope of the tracked front position over time."""
        pts = [(t, r) for t, r in self.fronts if not math.isnan(r)]
        if len(pts) < 2:
            return math.nan
        t, r = np.array(pts).T
        return float(np.polyfit(t, r, 1)[0])


def run_field_experiment(setup: ExperimentSetup, snapshot_times: Sequence[float] = (),
                         probes: dict[str, Sequence[float]] | None = None, *, sample_dt: float = 1.0,
                         cache_dir=None, progress: Callable | None = None, progress_every: int = 0) -> FieldRun:
    """Run ``setup`` and collect snapshots, probe series, front positions and peaks.

    Probes read ``V_M`` at the grid node nearest to each physical point, every
    ``sample_dt`` time units; fronts and ``max |V_M|`` are sampled alongside.
    """
    grid, cfg = setup.grid, setup.scheme
    stride = max(1, int(round(sample_dt / cfg.dt)))
    snap_steps = {int(round(t / cfg.dt)): t for t in snapshot_times}
    for step in snap_steps:
        if not 0 <= step <= cfg.n_steps:
            raise ValueError(f"snapshot time {snap_steps[step]} lies outside [0, t_end]")
    nodes = {name: grid.nearest_node(pt) for name, pt in (probes or {}).items()}
    run = FieldRun([], {name: [] for name in nodes}, [], [], None)

    def observe(state):
        V = Field(grid, state.V_M)
        if state.step in snap_steps:
            run.snapshots.append((snap_steps[state.step], V))
        if state.step % stride == 0:
            for name, node in nodes.items():
                run.probes[name].append((state.t, float(V.values[node])))
            run.fronts.append((state.t, front_position(V)))
            run.peaks.append((state.t, float(np.abs(V.values).max())))
        if progress is not None and progress_every and state.step % progress_every == 0:
            progress(state)

    run.final = simulate(setup, cache_dir=cache_dir, observe_steps=None, observer=observe)
    return run


def write_probe_csv(path, series: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value"])
        for t, v in series:
            writer.writerow([repr(float(t)), repr(float(v))])


def snapshot_name(prefix: str, t: float) -> str:
    return f"{prefix}_t{t:010.3f}.bin"


def output_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
