"""Fourier collocation on the periodic grid.

Coefficients follow the ``(1/n^d) sum_j u(x_j) exp(-i k.x_j)`` convention with
computational nodes starting at ``-pi``. Operators that are diagonal in ``k``
(the nonlocal operator, the Laplacian) go through real-to-complex FFTs and
never need the phase factor.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import fft

from .grid import Grid
from .kernel import KernelModes

IMAG_TOL = 1e-10


class SpectralConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Field:
    """Real nodal values on a grid. Spectral coefficients are computed on demand."""

    grid: Grid
    values: np.ndarray
    _coeffs: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values of shape {values.shape} do not fit grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    @property
    def coefficients(self) -> np.ndarray:
        if "c" not in self._coeffs:
            self._coeffs["c"] = forward(self)
        return self._coeffs["c"]

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, a: float) -> "Field":
        return Field(self.grid, a * self.values)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> "Field":
        return cls(grid, np.broadcast_to(fn(*grid.mesh), grid.shape).astype(float))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(c)))


def _check_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def forward(u: Field) -> np.ndarray:
    """Discrete Fourier coefficients over ``J_nx`` in FFT layout."""
    g = u.grid
    return fft.fftn(u.values) * g.phase / g.n**g.d


def inverse(coeffs: np.ndarray, grid: Grid) -> Field:
    values = fft.ifftn(coeffs * grid.phase) * grid.n**grid.d
    imag = np.abs(values.imag).max(initial=0.0)
    if imag > IMAG_TOL * max(1.0, np.abs(values.real).max(initial=0.0)):
        raise SpectralConsistencyError(f"inverse transform left imaginary residue {imag:.3e}")
    return Field(grid, values.real)


def interpolate_nonlinear(f: Callable[[np.ndarray], np.ndarray], u: Field, *, dealias: bool = False) -> Field:
    """Collocation: the interpolant of ``f(u)`` takes the values ``f(u(x_j))`` at the nodes."""
    values = np.asarray(f(u.values), dtype=float)
    if dealias:
        values = dealias_filter(u.grid, values)
    return Field(u.grid, values)


def dealias_filter(grid: Grid, values: np.ndarray) -> np.ndarray:
    axes = grid.axes
    vh = fft.rfftn(values, axes=axes)
    return fft.irfftn(vh * grid.dealias_mask(), s=grid.shape, axes=axes)


def apply_L(modes: KernelModes, u: Field, *, verify: bool = False) -> Field:
    """Discrete nonlocal operator ``sum_k (2 pi)^d Psi_hat(k) u_hat(k) e^{ik.x}`` at the nodes.

    With ``verify=True`` the full complex transform is used and the imaginary
    residue is checked before it is dropped.
    """
    if modes.grid != u.grid:
        raise ValueError("kernel modes and field live on different grids")
    if not verify:
        return Field(u.grid, modes.apply(u.values))
    values = fft.ifftn(fft.fftn(u.values) * modes.multiplier)
    residue = np.abs(values.imag).max(initial=0.0)
    if residue > IMAG_TOL * max(1.0, np.abs(values.real).max(initial=0.0)):
        raise SpectralConsistencyError(f"nonlocal operator left imaginary residue {residue:.3e}")
    return Field(u.grid, values.real)


def laplacian_values(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Spectral Laplacian in physical units; leading batch axes are allowed."""
    axes = grid.axes
    symbol = -grid.rk_norm2 * grid.scale**2
    return fft.irfftn(fft.rfftn(u, axes=axes) * symbol, s=grid.shape, axes=axes)


def laplacian(u: Field) -> Field:
    return Field(u.grid, laplacian_values(u.grid, u.values))


def shift(u: Field, steps: int, axis: int = 0) -> Field:
    return Field(u.grid, np.roll(u.values, steps, axis=axis))


# ---------------------------------------------------------------------------
# snapshot I/O

FIELD_MAGIC = b"FHNFIELD"
FIELD_VERSION = 1
_FIELD_HEADER = struct.Struct("<8sIIId")


def write_snapshot(path, u: Field, time: float) -> None:
    """Flat binary snapshot: header then ``n^d`` little-endian doubles, row-major."""
    path = Path(path)
    header = _FIELD_HEADER.pack(FIELD_MAGIC, FIELD_VERSION, u.grid.d, u.grid.n, float(time))
    path.write_bytes(header + np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_snapshot(path, grid: Grid | None = None) -> tuple[Field, float]:
    raw = Path(path).read_bytes()
    magic, version, d, n, time = _FIELD_HEADER.unpack_from(raw)
    if magic != FIELD_MAGIC or version != FIELD_VERSION:
        raise ValueError(f"{path}: not a field snapshot")
    if grid is None:
        grid = Grid(d, n)
    elif (grid.d, grid.n) != (d, n):
        raise ValueError(f"{path}: snapshot is d={d}, n_x={n}")
    values = np.frombuffer(raw, dtype="<f8", offset=_FIELD_HEADER.size)
    if values.size != n**d:
        raise ValueError(f"{path}: truncated payload")
    return Field(grid, values.reshape(grid.shape).copy()), time


def write_csv_1d(path, u: Field) -> None:
    if u.grid.d != 1:
        raise ValueError("CSV export is for one-dimensional fields")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(u.grid.nodes, u.values):
            writer.writerow([repr(float(x)), repr(float(v))])
