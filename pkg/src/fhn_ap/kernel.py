"""Radial connectivity kernels and their spectral modes on the torus.

A kernel mode is the Fourier coefficient of the scaled kernel
``eps^-d Psi(|y| / eps)`` over the computational torus. For a radial profile it
reduces to a one-dimensional integral

    Psi_hat(k) = (2 pi)^-d  int_0^{pi/eps} Psi(s) s^(d-1) I(|k| eps s) ds,

with the angular weight ``I`` equal to ``2 cos``, ``2 pi J0`` or
``4 pi sinc`` in dimension 1, 2 and 3.
"""

from __future__ import annotations

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .grid import Grid

SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}
BALL_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}

QUADRATURE_TOL = 1e-12
_GL_ORDER = 16
_SINC_TAYLOR_CUTOFF = 1e-4


class KernelIntegrationError(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    """Mode quadrature failed to converge under panel refinement."""

    def __init__(self, worst_k: float, residual: float):
        self.worst_k = worst_k
        self.residual = residual
        super().__init__(
            f"kernel-mode quadrature did not converge: |k|={worst_k:g}, "
            f"refinement residual {residual:.3e} > {QUADRATURE_TOL:.0e}"
        )


@dataclass(frozen=True)
class KernelMoments:
    """Mass and diffusion coefficient of a kernel.

    ``sigma_bar`` is the coefficient of ``-eps^2 |k|^2`` in the expansion of the
    kernel modes, ``(1 / 2d) int Psi |y|^2 dy``; in one dimension it equals the
    half second moment. ``half_second_moment`` keeps ``(1/2) int Psi |y|^2 dy``.
    """

    psi_bar: float
    sigma_bar: float
    half_second_moment: float | None = None

    def __post_init__(self):
        if self.half_second_moment is None:
            object.__setattr__(self, "half_second_moment", self.sigma_bar)


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class GaussianKernel:
    """Unit-mass Gaussian ``(2 pi sigma0)^(-d/2) exp(-r^2 / (2 sigma0))``."""

    sigma0: float = 0.005
    d: int = 1

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        _check_dim(self.d)

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return np.exp(-(s**2) / (2.0 * self.sigma0)) / (2.0 * np.pi * self.sigma0) ** (self.d / 2)

    @property
    def support(self) -> float:
        # exp(-s^2 / (2 sigma0)) < 1e-20 beyond this radius
        return math.sqrt(2.0 * self.sigma0 * 46.0)

    def moments(self) -> KernelMoments:
        return KernelMoments(1.0, 0.5 * self.sigma0, 0.5 * self.d * self.sigma0)

    def key(self) -> str:
        return f"gaussian(sigma0={self.sigma0!r},d={self.d})"


@dataclass(frozen=True)
class CompactIndicatorKernel:
    """Indicator of the ball of given radius, normalized to unit mass."""

    radius: float
    d: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        _check_dim(self.d)

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        height = 1.0 / (BALL_VOLUME[self.d] * self.radius**self.d)
        return np.where(s <= self.radius, height, 0.0)

    @property
    def support(self) -> float:
        return self.radius

    def moments(self) -> KernelMoments:
        half_second = 0.5 * self.d * self.radius**2 / (self.d + 2)
        return KernelMoments(1.0, half_second / self.d, half_second)

    def key(self) -> str:
        return f"indicator(radius={self.radius!r},d={self.d})"


@dataclass(frozen=True)
class CustomKernel:
    """User-supplied radial profile.

    The caller must attest that the fourth radial moment is finite; that cannot
    be verified numerically in general. ``support`` bounds the radius beyond
    which the profile vanishes (``inf`` if unknown).
    """

    profile_fn: Callable[[np.ndarray], np.ndarray]
    d: int = 1
    support: float = math.inf
    fourth_moment_finite: bool = False
    name: str = "custom"
    _probe: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 10.0, 201), repr=False)

    def __post_init__(self):
        _check_dim(self.d)
        if not self.fourth_moment_finite:
            raise ValueError("custom kernels must attest a finite fourth radial moment")
        probe = self._probe if math.isinf(self.support) else np.linspace(0, self.support, 201)
        if np.any(np.asarray(self.profile_fn(probe)) < 0):
            raise ValueError("kernel profile must be nonnegative")

    def profile(self, s):
        return np.asarray(self.profile_fn(np.asarray(s, dtype=float)), dtype=float)

    def moments(self) -> KernelMoments:
        area = SPHERE_AREA[self.d]
        psi_bar = _radial_integral(lambda s: self.profile(s) * s ** (self.d - 1), self.support)
        second = _radial_integral(lambda s: self.profile(s) * s ** (self.d + 1), self.support)
        psi_bar *= area
        half_second = 0.5 * area * second
        if not (psi_bar > 0 and half_second > 0):
            raise KernelIntegrationError("kernel moments must be positive")
        return KernelMoments(psi_bar, half_second / self.d, half_second)

    def key(self) -> str:
        return f"custom({self.name},d={self.d},support={self.support!r})"


ConnectivityKernel = GaussianKernel | CompactIndicatorKernel | CustomKernel


def _check_dim(d: int) -> None:
    if d not in (1, 2, 3):
        raise ValueError(f"kernel dimension must be 1, 2 or 3, got {d}")


def _radial_integral(fn, upper: float) -> float:
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"), warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            value, err = integrate.quad(fn, 0.0, upper, limit=500)
    except (FloatingPointError, ZeroDivisionError, integrate.IntegrationWarning) as exc:
        raise KernelIntegrationError(f"radial integral failed: {exc}") from exc
    if not math.isfinite(value) or err > 1e-8 * max(1.0, abs(value)):
        raise KernelIntegrationError(f"radial integral did not converge (estimate {value}, error {err})")
    return value


def moments(kernel: ConnectivityKernel) -> KernelMoments:
    """Mass ``psi_bar`` and diffusion coefficient ``sigma_bar`` of the kernel."""
    return kernel.moments()


# ---------------------------------------------------------------------------
# special functions

# Hankel asymptotic coefficients for J0, exact rationals
_HANKEL_TERMS = 16


def _hankel_coeffs() -> np.ndarray:
    a = [1.0]
    for k in range(1, 2 * _HANKEL_TERMS):
        a.append(a[-1] * -((2 * k - 1) ** 2) / (k * 8.0))
    return np.array(a)


_HANKEL_A = _hankel_coeffs()


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    for l in range(1, 60):
        term = term * q / (l * l)
        total = total + term
    return total


def _j0_miller(x: np.ndarray, start: int = 80) -> np.ndarray:
    # downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by J0 + 2 sum J_2k = 1
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    j0 = None
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm = norm + 2.0 * j_cur
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            j_cur = np.where(big, j_cur * 1e-250, j_cur)
            j_next = np.where(big, j_next * 1e-250, j_next)
            norm = np.where(big, norm * 1e-250, norm)
        j0 = j_cur
    return j0 / (norm + j0)


def _j0_hankel(x: np.ndarray) -> np.ndarray:
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    inv = 1.0 / x
    for k in range(_HANKEL_TERMS):
        p = p + (-1.0) ** k * _HANKEL_A[2 * k] * inv ** (2 * k)
        q = q + (-1.0) ** k * _HANKEL_A[2 * k + 1] * inv ** (2 * k + 1)
    chi = x - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Power series for ``|x| <= 8``, Miller's backward recurrence up to 25 and the
    Hankel asymptotic expansion beyond.
    """
    x = np.abs(np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= 8.0
    mid = (x > 8.0) & (x <= 25.0)
    large = x > 25.0
    if small.any():
        out[small] = _j0_series(x[small])
    if mid.any():
        out[mid] = _j0_miller(x[mid])
    if large.any():
        out[large] = _j0_hankel(x[large])
    return out[0] if scalar else out


def sinc(z):
    """``sin(z) / z`` with a Taylor branch near zero."""
    z = np.asarray(z, dtype=float)
    z2 = z * z
    taylor = 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sin(z) / z
    return np.where(np.abs(z) < _SINC_TAYLOR_CUTOFF, taylor, direct)


def angular_weight(d: int, z):
    """Integral of ``exp(-i z k.w / |k|)`` over the unit sphere of dimension ``d - 1``."""
    if d == 1:
        return 2.0 * np.cos(z)
    if d == 2:
        return 2.0 * np.pi * bessel_j0(z)
    if d == 3:
        return 4.0 * np.pi * sinc(z)
    raise ValueError(f"dimension must be 1, 2 or 3, got {d}")


# ---------------------------------------------------------------------------
# modes


def _gauss_legendre_nodes(upper: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _integrate_modes(kernel, k_norms: np.ndarray, eps: float, upper: float, panels: int) -> np.ndarray:
    d = kernel.d
    s, w = _gauss_legendre_nodes(upper, panels)
    radial = w * kernel.profile(s) * s ** (d - 1)
    out = np.empty(k_norms.shape)
    chunk = max(1, int(4_000_000 // s.size))
    for start in range(0, k_norms.size, chunk):
        kk = k_norms[start : start + chunk]
        out[start : start + chunk] = angular_weight(d, eps * kk[:, None] * s[None, :]) @ radial
    return out / (2.0 * np.pi) ** d


def mode_values(kernel: ConnectivityKernel, k_norms, eps: float, *, tol: float = QUADRATURE_TOL) -> np.ndarray:
    """``Psi_hat_eps(k)`` at computational wavenumber norms ``k_norms``.

    ``eps`` is expressed in computational units, so the radial integral runs
    over ``[0, pi / eps]``, clipped to the kernel support. Each value is checked
    against a run with twice as many panels.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    k_norms = np.atleast_1d(np.asarray(k_norms, dtype=float))
    upper = min(np.pi / eps, kernel.support)
    if math.isinf(upper):
        raise KernelIntegrationError("kernel support is unbounded and pi/eps is infinite")
    phase_span = eps * upper * float(k_norms.max(initial=0.0))
    # ~8 panels per oscillation period; the indicator jump sits on the last edge
    panels = max(64, math.ceil(4.0 * phase_span / np.pi))
    coarse = _integrate_modes(kernel, k_norms, eps, upper, panels)
    fine = _integrate_modes(kernel, k_norms, eps, upper, 2 * panels)
    residual = np.abs(fine - coarse) * (2.0 * np.pi) ** kernel.d
    worst = int(np.argmax(residual))
    if residual[worst] > tol:
        raise QuadratureError(float(k_norms[worst]), float(residual[worst]))
    return fine


@dataclass(frozen=True)
class KernelModes:
    """Kernel modes for one ``(kernel, grid, eps)`` triple.

    ``values`` holds ``Psi_hat_eps(k)`` in full FFT layout; ``eps`` is the
    physical scaling parameter.
    """

    eps: float
    grid: Grid
    values: np.ndarray
    kernel_key: str = ""

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def multiplier(self) -> np.ndarray:
        """``(2 pi)^d Psi_hat_eps(k)``, the Fourier symbol of the nonlocal operator."""
        return (2.0 * np.pi) ** self.d * self.values

    @property
    def rmultiplier(self) -> np.ndarray:
        return self.multiplier[..., : self.grid.n // 2 + 1]

    def apply(self, u: np.ndarray, workers: int | None = None) -> np.ndarray:
        """Nonlocal operator on nodal values; leading batch axes are allowed."""
        from scipy import fft

        axes = self.grid.axes
        uh = fft.rfftn(u, axes=axes, workers=workers)
        return fft.irfftn(uh * self.rmultiplier, s=self.grid.shape, axes=axes, workers=workers)


def compute_modes(
    kernel: ConnectivityKernel,
    grid: Grid,
    eps: float,
    *,
    cache_dir: str | Path | None = None,
) -> KernelModes:
    """Kernel modes over ``J_nx`` for physical scaling ``eps``.

    The physical box is mapped onto the torus, so the radial integral uses
    ``eps * grid.scale``. Modes depend on ``k`` only through ``|k|^2``, which
    is an exact integer; each distinct value is integrated once.
    """
    if kernel.d != grid.d:
        raise ValueError(f"kernel dimension {kernel.d} does not match grid dimension {grid.d}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if cache_dir is not None:
        path = cache_path(cache_dir, kernel, grid, eps)
        if path.exists():
            return load_modes(path, grid, kernel)
    k2, inverse = np.unique(grid.k_norm2.ravel(), return_inverse=True)
    vals = mode_values(kernel, np.sqrt(k2.astype(float)), eps * grid.scale)
    modes = KernelModes(eps, grid, vals[inverse].reshape(grid.shape), kernel.key())
    if cache_dir is not None:
        save_modes(path, modes)
    return modes


# ---------------------------------------------------------------------------
# binary cache

MODES_MAGIC = b"FHNMODES"
MODES_VERSION = 1
_MODES_HEADER = struct.Struct("<8sIIId")


def cache_key(kernel: ConnectivityKernel, grid: Grid) -> str:
    text = f"{kernel.key()}|{grid.lower!r}|{grid.upper!r}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def cache_path(cache_dir, kernel, grid: Grid, eps: float) -> Path:
    return Path(cache_dir) / f"modes_{cache_key(kernel, grid)}_d{grid.d}_n{grid.n}_eps{eps!r}.bin"


def save_modes(path, modes: KernelModes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _MODES_HEADER.pack(MODES_MAGIC, MODES_VERSION, modes.d, modes.grid.n, float(modes.eps))
    payload = np.ascontiguousarray(modes.values, dtype="<f8").tobytes()
    path.write_bytes(header + payload)


def load_modes(path, grid: Grid, kernel: ConnectivityKernel | None = None) -> KernelModes:
    raw = Path(path).read_bytes()
    magic, version, d, n, eps = _MODES_HEADER.unpack_from(raw)
    if magic != MODES_MAGIC or version != MODES_VERSION:
        raise ValueError(f"{path}: not a kernel-mode cache file")
    if (d, n) != (grid.d, grid.n):
        raise ValueError(f"{path}: cached for d={d}, n_x={n}, grid has d={grid.d}, n_x={grid.n}")
    values = np.frombuffer(raw, dtype="<f8", offset=_MODES_HEADER.size)
    if values.size != n**d:
        raise ValueError(f"{path}: truncated payload")
    key = kernel.key() if kernel is not None else ""
    return KernelModes(eps, grid, values.reshape(grid.shape).astype(float), key)
