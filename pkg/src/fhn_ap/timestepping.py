"""Asymptotic-preserving time integrators and their eps -> 0 limits.

The kinetic schemes advance the particles ``(V_p, W_p)`` together with the
macroscopic potential ``V_M``, which is carried as an extra unknown. The stiff
interaction is implicit in ``V_p`` and, since ``L[rho0]`` is a nodal
multiplier, each implicit solve is a pointwise division.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .grid import Grid
from .kernel import KernelModes, KernelMoments
from .model import ModelParams, adaptation, nonlinearity
from .particles import Density, ParticleEnsemble, particle_mean
from .spectral import dealias_filter, laplacian_values

BLOWUP_LIMIT = 1e6


class Scheme(str, enum.Enum):
    RK1 = "RK1"
    HSDIRK2 = "HSDIRK2"
    LIMIT_RK1 = "LIMIT_RK1"
    LIMIT_RK2 = "LIMIT_RK2"

    @property
    def is_limit(self) -> bool:
        return self in (Scheme.LIMIT_RK1, Scheme.LIMIT_RK2)

    @property
    def limit(self) -> "Scheme":
        """The eps -> 0 counterpart of a kinetic scheme."""
        return {Scheme.RK1: Scheme.LIMIT_RK1, Scheme.HSDIRK2: Scheme.LIMIT_RK2}.get(self, self)


class BlowUpError(RuntimeError):
    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"solution blew up at step {step} (t={t:g})")


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    eps: float = 1.0
    scheme: Scheme = Scheme.RK1
    model: ModelParams = ModelParams()
    t_end: float = 0.0
    dealias: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True, eq=False)
class KineticState:
    ensemble: ParticleEnsemble
    V_M: np.ndarray
    t: float = 0.0
    step: int = 0

    @property
    def W_M(self) -> np.ndarray:
        return particle_mean(self.ensemble.W)

    @property
    def density(self) -> Density:
        return self.ensemble.density

    @property
    def grid(self) -> Grid:
        return self.ensemble.grid

    @classmethod
    def start(cls, ensemble: ParticleEnsemble, t: float = 0.0) -> "KineticState":
        """``V_M`` starts from the particle mean and is evolved on its own afterwards."""
        return cls(ensemble, particle_mean(ensemble.V), t, 0)


@dataclass(frozen=True, eq=False)
class LimitState:
    V: np.ndarray
    W: np.ndarray
    density: Density
    t: float = 0.0
    step: int = 0

    @property
    def V_M(self) -> np.ndarray:
        return self.V

    @property
    def W_M(self) -> np.ndarray:
        return self.W

    @property
    def grid(self) -> Grid:
        return self.density.grid

    @classmethod
    def start(cls, ensemble: ParticleEnsemble, t: float = 0.0) -> "LimitState":
        return cls(particle_mean(ensemble.V), particle_mean(ensemble.W), ensemble.density, t, 0)


def _reaction(grid: Grid, v: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    out = nonlinearity(v, cfg.model)
    return dealias_filter(grid, out) if cfg.dealias else out


def _guard(step: int, t: float, *arrays: np.ndarray) -> None:
    for a in arrays:
        peak = np.abs(a).max(initial=0.0)
        if not np.isfinite(peak) or peak > BLOWUP_LIMIT:
            raise BlowUpError(step, t)


def _stiff_solve(Vp, rhs, h, L_rho, e2):
    # (V - Vp)/h = rhs - V L_rho / e2, solved nodewise
    return (Vp + h * rhs) / (1.0 + h * L_rho / e2)


def step_rk1(state: KineticState, modes: KernelModes, cfg: SchemeConfig) -> KineticState:
    """First-order semi-implicit step.

    Particles: stiff term implicit, reaction and ``W`` explicit. ``V_M``: the
    reaction uses the updated particles, the interaction is explicit.
    """
    grid = state.grid
    rho = state.density.values
    dt, e2, model = cfg.dt, cfg.eps**2, cfg.model
    Vp, Wp, VM = state.ensemble.V, state.ensemble.W, state.V_M

    L_rho = modes.apply(rho)
    L_rhoVM = modes.apply(rho * VM)
    WM = particle_mean(Wp)

    V_new = _stiff_solve(Vp, _reaction(grid, Vp, cfg) + L_rhoVM / e2 - Wp, dt, L_rho, e2)
    W_new = Wp + dt * adaptation(V_new, Wp, model)
    N_mean = particle_mean(_reaction(grid, V_new, cfg))
    VM_new = VM + dt * (N_mean + (L_rhoVM - VM * L_rho) / e2 - WM)

    t, step = state.t + dt, state.step + 1
    _guard(step, t, V_new, VM_new)
    return KineticState(state.ensemble.with_values(V_new, W_new), VM_new, t, step)


def step_hsdirk2(state: KineticState, modes: KernelModes, cfg: SchemeConfig) -> KineticState:
    """Second-order IMEX step: Heun explicit part, SDIRK implicit part, two half-step stages."""
    grid = state.grid
    rho = state.density.values
    h, e2, model = 0.5 * cfg.dt, cfg.eps**2, cfg.model
    Vp, Wp, VM = state.ensemble.V, state.ensemble.W, state.V_M

    L_rho = modes.apply(rho)
    L_rhoVM = modes.apply(rho * VM)
    WM = particle_mean(Wp)

    V1 = _stiff_solve(Vp, _reaction(grid, Vp, cfg) + L_rhoVM / e2 - Wp, h, L_rho, e2)
    W1 = Wp + h * adaptation(V1, Wp, model)
    VM1 = VM + h * (particle_mean(_reaction(grid, V1, cfg)) + (L_rhoVM - VM * L_rho) / e2 - WM)

    V_hat = 2.0 * V1 - Vp
    W_hat = 2.0 * W1 - Wp
    VM_hat = 2.0 * VM1 - VM
    WM_hat = 2.0 * particle_mean(W1) - WM
    L_rhoVM_hat = modes.apply(rho * VM_hat)

    V2 = _stiff_solve(Vp, _reaction(grid, V_hat, cfg) + L_rhoVM_hat / e2 - W_hat, h, L_rho, e2)
    W2 = Wp + h * adaptation(V2, W_hat, model)
    VM2 = VM + h * (
        particle_mean(_reaction(grid, V2, cfg)) + (L_rhoVM_hat - VM_hat * L_rho) / e2 - WM_hat
    )

    V_new = V1 + V2 - Vp
    W_new = W1 + W2 - Wp
    VM_new = VM1 + VM2 - VM

    t, step = state.t + cfg.dt, state.step + 1
    _guard(step, t, V_new, VM_new)
    return KineticState(state.ensemble.with_values(V_new, W_new), VM_new, t, step)


def _limit_rhs(grid, V, W, rho, lap_rho, sigma_bar, cfg):
    diffusion = sigma_bar * (laplacian_values(grid, rho * V) - V * lap_rho)
    return _reaction(grid, V, cfg) - W + diffusion


def step_limit_rk1(state: LimitState, cfg: SchemeConfig, moments: KernelMoments) -> LimitState:
    """Explicit Euler on the reaction-diffusion limit."""
    grid = state.grid
    rho = state.density.values
    lap_rho = laplacian_values(grid, rho)
    V, W, dt = state.V, state.W, cfg.dt
    V_new = V + dt * _limit_rhs(grid, V, W, rho, lap_rho, moments.sigma_bar, cfg)
    W_new = W + dt * adaptation(V, W, cfg.model)
    t, step = state.t + dt, state.step + 1
    _guard(step, t, V_new)
    return LimitState(V_new, W_new, state.density, t, step)


def step_limit_rk2(state: LimitState, cfg: SchemeConfig, moments: KernelMoments) -> LimitState:
    """Heun-type two-stage explicit step, the eps -> 0 limit of ``step_hsdirk2``."""
    grid = state.grid
    rho = state.density.values
    lap_rho = laplacian_values(grid, rho)
    V, W, h = state.V, state.W, 0.5 * cfg.dt
    sb = moments.sigma_bar

    V1 = V + h * _limit_rhs(grid, V, W, rho, lap_rho, sb, cfg)
    W1 = W + h * adaptation(V, W, cfg.model)
    V_hat = 2.0 * V1 - V
    W_hat = 2.0 * W1 - W
    V2 = V + h * _limit_rhs(grid, V_hat, W_hat, rho, lap_rho, sb, cfg)
    W2 = W + h * adaptation(V_hat, W_hat, cfg.model)

    V_new = V1 + V2 - V
    W_new = W1 + W2 - W
    t, step = state.t + cfg.dt, state.step + 1
    _guard(step, t, V_new)
    return LimitState(V_new, W_new, state.density, t, step)


def make_stepper(cfg: SchemeConfig, modes: KernelModes | None = None, moments: KernelMoments | None = None):
    """Bind the scheme selected in ``cfg`` to its operators."""
    if cfg.scheme.is_limit:
        if moments is None:
            raise ValueError("limit schemes need the kernel moments")
        fn = step_limit_rk1 if cfg.scheme is Scheme.LIMIT_RK1 else step_limit_rk2
        return lambda s: fn(s, cfg, moments)
    if modes is None:
        raise ValueError("kinetic schemes need kernel modes")
    fn = step_rk1 if cfg.scheme is Scheme.RK1 else step_hsdirk2
    return lambda s: fn(s, modes, cfg)


def initial_state(cfg: SchemeConfig, ensemble: ParticleEnsemble):
    return LimitState.start(ensemble) if cfg.scheme.is_limit else KineticState.start(ensemble)


def integrate(
    state,
    cfg: SchemeConfig,
    *,
    modes: KernelModes | None = None,
    moments: KernelMoments | None = None,
    n_steps: int | None = None,
    observe_steps: Iterable[int] | None = None,
    observer: Callable | None = None,
):
    """Advance ``state`` by ``n_steps`` (default ``cfg.n_steps``).

    ``observer(state)`` is called for every state whose step index is in
    ``observe_steps``, or for every state when ``observe_steps`` is None. The
    initial state counts.
    """
    stepper = make_stepper(cfg, modes, moments)
    n_steps = cfg.n_steps if n_steps is None else n_steps
    wanted = None if observe_steps is None else set(observe_steps)
    target = state.step + n_steps
    if observer is not None and (wanted is None or state.step in wanted):
        observer(state)
    while state.step < target:
        state = stepper(state)
        if observer is not None and (wanted is None or state.step in wanted):
            observer(state)
    return state
