"""Particle ensemble in (v, w) attached to every grid node.

Each particle ``p`` is a pair of nodal fields ``(V_p, W_p)``; particles never
move in space. The density ``rho0`` is fixed for the whole run.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .grid import Grid
from .kernel import KernelModes
from .spectral import Field

BOX_V_WIDTH = 10.0
BOX_W_WIDTH = 100.0


@dataclass(frozen=True, eq=False)
class Density:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError("density does not fit the grid")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("density must be finite and nonnegative at every node")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, grid: Grid, value: float = 1.0) -> "Density":
        return cls(grid, np.full(grid.shape, float(value)))

    def field(self) -> Field:
        return Field(self.grid, self.values)


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """``V`` and ``W`` have shape ``(M, *grid.shape)``."""

    V: np.ndarray
    W: np.ndarray
    density: Density

    def __post_init__(self):
        shape = self.density.grid.shape
        if self.V.ndim != len(shape) + 1 or self.V.shape[1:] != shape:
            raise ValueError(f"particle array of shape {self.V.shape} does not fit grid {shape}")
        if self.W.shape != self.V.shape:
            raise ValueError("V and W particle arrays differ in shape")
        if self.V.shape[0] < 1:
            raise ValueError("at least one particle is required")

    @property
    def M(self) -> int:
        return self.V.shape[0]

    @property
    def grid(self) -> Grid:
        return self.density.grid

    def particle(self, p: int) -> tuple[Field, Field]:
        return Field(self.grid, self.V[p]), Field(self.grid, self.W[p])

    def with_values(self, V: np.ndarray, W: np.ndarray) -> "ParticleEnsemble":
        return replace(self, V=V, W=W)


@dataclass(frozen=True, eq=False)
class MacroState:
    """``V_M`` is an independent unknown; ``W_M`` is always the particle mean."""

    V_M: np.ndarray
    W_M: np.ndarray


def particle_mean(a: np.ndarray) -> np.ndarray:
    # fixed summation order over particles, so results are reproducible bit for bit
    return np.add.reduce(a, axis=0) / a.shape[0]


def moments(ensemble: ParticleEnsemble) -> tuple[Field, Field]:
    """Nodewise particle means of ``V`` and ``W`` (no ``rho0`` weighting)."""
    g = ensemble.grid
    return Field(g, particle_mean(ensemble.V)), Field(g, particle_mean(ensemble.W))


def coupling_field(modes: KernelModes, density: Density, V_M: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    """Discrete interaction ``(L[rho0 V_M] - v L[rho0]) / eps^2`` at every node."""
    L_rhoV = modes.apply(density.values * V_M)
    L_rho = modes.apply(density.values)
    return (L_rhoV - v * L_rho) / eps**2


def coupling(modes: KernelModes, density: Density, V_M: Field, v: float, node, eps: float) -> float:
    """Interaction felt at ``node`` by a particle of potential ``v``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    L_rhoV = modes.apply(density.values * V_M.values)
    L_rho = modes.apply(density.values)
    return float((L_rhoV[node] - v * L_rho[node]) / eps**2)


def _van_der_corput(i: int, base: int = 2) -> float:
    q, denom = 0.0, 1.0
    while i:
        denom *= base
        i, r = divmod(i, base)
        q += r / denom
    return q


def stratified_offsets(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``(u_p, s_p)`` in ``(-1/2, 1/2)`` for box-distributed particles.

    ``u_p`` are the stratum midpoints in order; ``s_p`` are the same midpoints
    permuted by the rank of the van der Corput sequence, so both marginals are
    exact midpoint rules and the pairing carries no trend.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    mid = (np.arange(1, M + 1) - 0.5) / M - 0.5
    order = np.argsort([_van_der_corput(p) for p in range(M)], kind="stable")
    rank = np.empty(M, dtype=int)
    rank[order] = np.arange(M)
    return mid, mid[rank]


def init_ensemble(spec, grid: Grid, M: int) -> ParticleEnsemble:
    """Particles for an initial-data description.

    ``spec`` provides ``fields(grid) -> (V0, W0, rho0)`` and a ``distribution``
    of ``"dirac"`` (every particle at ``(V0, W0)``) or ``"box"`` (uniform box
    around ``(V0, W0)``, of widths ``spec.v_width`` and ``spec.w_width`` when
    present, 10 and 100 otherwise).
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    V0, W0, rho0 = spec.fields(grid)
    density = Density(grid, rho0)
    kind = getattr(spec, "distribution", None)
    if kind == "dirac":
        u = s = np.zeros(M)
    elif kind == "box":
        u, s = stratified_offsets(M)
    else:
        raise ValueError(f"unknown particle distribution {kind!r}")
    expand = (slice(None),) + (None,) * grid.d
    if kind == "box":
        V = V0[None] + getattr(spec, "v_width", BOX_V_WIDTH) * u[expand]
        W = W0[None] + getattr(spec, "w_width", BOX_W_WIDTH) * s[expand]
    else:
        V = np.repeat(V0[None], M, axis=0)
        W = np.repeat(W0[None], M, axis=0)
    return ParticleEnsemble(np.array(V, dtype=float), np.array(W, dtype=float), density)


# ---------------------------------------------------------------------------
# checkpoints

ENSEMBLE_MAGIC = b"FHNPARTS"
ENSEMBLE_VERSION = 1
_ENSEMBLE_HEADER = struct.Struct("<8sIIIId")


def write_checkpoint(path, ensemble: ParticleEnsemble, time: float) -> None:
    """Header ``{M, d, n_x, time}`` followed by ``V_p`` then ``W_p`` for each particle."""
    g = ensemble.grid
    parts = [_ENSEMBLE_HEADER.pack(ENSEMBLE_MAGIC, ENSEMBLE_VERSION, ensemble.M, g.d, g.n, float(time))]
    for p in range(ensemble.M):
        parts.append(np.ascontiguousarray(ensemble.V[p], dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(ensemble.W[p], dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_checkpoint(path, density: Density) -> tuple[ParticleEnsemble, float]:
    raw = Path(path).read_bytes()
    magic, version, M, d, n, time = _ENSEMBLE_HEADER.unpack_from(raw)
    if magic != ENSEMBLE_MAGIC or version != ENSEMBLE_VERSION:
        raise ValueError(f"{path}: not an ensemble checkpoint")
    g = density.grid
    if (d, n) != (g.d, g.n):
        raise ValueError(f"{path}: checkpoint is d={d}, n_x={n}")
    data = np.frombuffer(raw, dtype="<f8", offset=_ENSEMBLE_HEADER.size)
    if data.size != 2 * M * n**d:
        raise ValueError(f"{path}: truncated payload")
    pairs = data.reshape((M, 2) + g.shape)
    return ParticleEnsemble(pairs[:, 0].copy(), pairs[:, 1].copy(), density), time
