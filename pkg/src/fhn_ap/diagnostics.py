"""Grid norms, the density-weighted entropy distance and convergence orders."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .grid import Grid
from .spectral import Field


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u, dtype=float)


def _shared_grid(*fields) -> Grid | None:
    grids = {f.grid for f in fields if isinstance(f, Field)}
    if len(grids) > 1:
        raise ValueError("fields live on different grids")
    return grids.pop() if grids else None


def l2_norm(u: Field) -> float:
    """Discrete L2 norm with physical cell weights."""
    v = u.values.ravel()
    return math.sqrt(u.grid.cell_volume * float(np.dot(v, v)))


def l2_error(a: Field, b: Field) -> float:
    _shared_grid(a, b)
    diff = (a.values - b.values).ravel()
    return math.sqrt(a.grid.cell_volume * float(np.dot(diff, diff)))


def linf_error(a: Field, b: Field) -> float:
    _shared_grid(a, b)
    return float(np.abs(a.values - b.values).max(initial=0.0))


def relative_entropy(Veps: Field, Weps: Field, Vlim: Field, Wlim: Field, rho0: Field) -> float:
    """Rectangle rule for ``sqrt(int rho0 (|V - Vlim|^2 + |W - Wlim|^2) dx)``."""
    grid = _shared_grid(Veps, Weps, Vlim, Wlim, rho0)
    rho = rho0.values
    if np.any(rho < 0):
        raise ValueError("density has negative nodes")
    integrand = rho * ((Veps.values - Vlim.values) ** 2 + (Weps.values - Wlim.values) ** 2)
    return math.sqrt(grid.cell_volume * float(np.add.reduce(integrand.ravel())))


def observed_order(pairs: Sequence[tuple[float, float]]) -> list[float]:
    """Orders ``ln(e_{i-1}/e_i) / ln(p_{i-1}/p_i)`` for consecutive ``(param, error)`` rows.

    The first row has no predecessor and gets ``nan``.
    """
    for p, e in pairs:
        if not (p > 0 and e > 0):
            raise ValueError(f"parameters and errors must be positive, got ({p}, {e})")
    out = [math.nan] if pairs else []
    for (p0, e0), (p1, e1) in zip(pairs, pairs[1:]):
        if p0 == p1:
            raise ValueError("consecutive parameters must differ")
        out.append(math.log(e0 / e1) / math.log(p0 / p1))
    return out


def fitted_slope(params: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(param)``."""
    x = np.log(np.asarray(params, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
