"""Periodic tensor grid with an affine map onto the torus [-pi, pi)^d."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Equispaced periodic grid of ``n`` points per axis on ``[lower, upper)^d``.

    The physical box is mapped affinely onto the computational torus
    ``[-pi, pi)^d``; ``scale = 2 pi / (upper - lower)`` converts physical
    lengths to computational ones. With the default bounds both coincide.
    """

    d: int
    n: int
    lower: float = -np.pi
    upper: float = np.pi

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n <= 0 or self.n % 2:
            raise ValueError(f"n_x must be even and positive, got {self.n}")
        if not self.upper > self.lower:
            raise ValueError("upper bound must exceed lower bound")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def scale(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @cached_property
    def nodes(self) -> np.ndarray:
        """1D physical node coordinates along each axis."""
        return self.lower + self.dx * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.nodes] * self.d), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.mesh))

    @cached_property
    def k_index(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers of J_nx, arranged in FFT layout."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(np.int64)
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij"))

    @cached_property
    def k_norm2(self) -> np.ndarray:
        """Squared integer wavenumber ``|k|^2`` in full FFT layout (exact integers)."""
        return sum(k**2 for k in self.k_index)

    @cached_property
    def rk_norm2(self) -> np.ndarray:
        """``|k|^2`` restricted to the real-FFT half spectrum."""
        return self.k_norm2[..., : self.n // 2 + 1]

    @cached_property
    def phase(self) -> np.ndarray:
        """``(-1)^(k_1 + ... + k_d)``: shifts FFT coefficients to nodes starting at -pi."""
        return (-1.0) ** (sum(self.k_index) % 2)

    def nearest_node(self, point) -> tuple[int, ...]:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.d,):
            raise ValueError(f"point must have {self.d} coordinates")
        idx = np.rint((point - self.lower) / self.dx).astype(int) % self.n
        return tuple(int(i) for i in idx)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask in real-FFT layout."""
        cutoff = self.n / 3.0
        k = self.k_index
        mask = np.ones(self.shape, dtype=bool)
        for ki in k:
            mask &= np.abs(ki) <= cutoff
        return mask[..., : self.n // 2 + 1]
