from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhn_ap.grid import Grid
from fhn_ap.kernel import GaussianKernel, compute_modes
from fhn_ap.particles import (
    Density,
    ParticleEnsemble,
    coupling,
    coupling_field,
    init_ensemble,
    moments,
    particle_mean,
    read_checkpoint,
    stratified_offsets,
    write_checkpoint,
)
from fhn_ap.spectral import Field

G = Grid(1, 16)


@dataclass(frozen=True)
class Spec:
    distribution: str = "dirac"

    def fields(self, grid):
        x = grid.mesh[0]
        return np.cos(x), 0.1 * np.sin(x), 1.0 + 0.5 * np.cos(x)


def direct_kernel_coupling(grid, modes, rho, VM, v, j, eps):
    """Nonlocal coupling at node j as an explicit double sum over modes and nodes."""
    n = grid.n
    k = np.arange(-n // 2, n // 2)
    mult = 2 * np.pi * modes.values[k % n]
    x = grid.nodes

    def L(u):
        coeff = np.array([np.sum(u * np.exp(-1j * kk * x)) / n for kk in k])
        return np.sum(mult * coeff * np.exp(1j * k * x[j])).real

    return (L(rho * VM) - v * L(rho)) / eps**2


def test_density_validation():
    with pytest.raises(ValueError):
        Density(G, -np.ones(16))
    with pytest.raises(ValueError):
        Density(G, np.full(16, np.nan))
    with pytest.raises(ValueError):
        Density(G, np.ones(8))
    d = Density.uniform(G)
    with pytest.raises(ValueError):
        d.values[0] = 2.0


def test_moments_simple_cases():
    rho = Density.uniform(G)
    V = np.stack([np.zeros(16), np.ones(16)])
    ens = ParticleEnsemble(V, np.zeros_like(V), rho)
    vm, wm = moments(ens)
    np.testing.assert_array_equal(vm.values, 0.5)
    single = ParticleEnsemble(V[1:], V[:1], rho)
    vm, wm = moments(single)
    np.testing.assert_array_equal(vm.values, 1.0)
    np.testing.assert_array_equal(wm.values, 0.0)


@given(st.integers(1, 12), st.randoms(use_true_random=False))
@settings(deadline=None)
def test_moments_are_exchangeable(M, rnd):
    rng = np.random.default_rng(rnd.randint(0, 2**32 - 1))
    V = rng.integers(-1000, 1000, size=(M, 16)) / 64.0
    perm = rng.permutation(M)
    # dyadic values make every partial sum exact, so any order gives the same bits
    np.testing.assert_array_equal(particle_mean(V), particle_mean(V[perm]))


def test_ensemble_shape_checks():
    rho = Density.uniform(G)
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((2, 8)), np.zeros((2, 8)), rho)
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((2, 16)), np.zeros((3, 16)), rho)


def test_coupling_trivial_cases():
    modes = compute_modes(GaussianKernel(0.005, 1), G, 0.3)
    VM = Field(G, np.linspace(-1, 1, 16))
    assert coupling(modes, Density(G, np.zeros(16)), VM, 0.7, (3,), 0.3) == 0.0
    c = 0.42
    val = coupling(modes, Density.uniform(G), Field.constant(G, c), c, (5,), 0.3)
    assert abs(val) < 1e-13
    with pytest.raises(ValueError):
        coupling(modes, Density.uniform(G), VM, 0.0, (0,), 0.0)


@pytest.mark.parametrize("j", [0, 5, 11])
def test_coupling_matches_direct_sum(j):
    eps = 0.3
    modes = compute_modes(GaussianKernel(0.005, 1), G, eps)
    x = G.nodes
    rho = 1.0 + 0.5 * np.cos(x)
    VM = np.exp(np.sin(x))
    v = 0.3
    got = coupling(modes, Density(G, rho), Field(G, VM), v, (j,), eps)
    want = direct_kernel_coupling(G, modes, rho, VM, v, j, eps)
    assert got == pytest.approx(want, rel=1e-8)
    field = coupling_field(modes, Density(G, rho), VM, np.full(16, v), eps)
    assert field[j] == pytest.approx(want, rel=1e-8)


def test_stratified_offsets():
    u, s = stratified_offsets(1)
    assert u.tolist() == [0.0] and s.tolist() == [0.0]
    u, s = stratified_offsets(8)
    np.testing.assert_allclose(np.sort(s), u)
    assert not np.array_equal(s, u)
    u, s = stratified_offsets(4096)
    assert abs(u.mean()) < 1e-15 and abs(s.mean()) < 1e-15
    assert u.var() == pytest.approx(1 / 12, rel=1e-5)
    # the pairing carries no linear trend
    assert abs(np.corrcoef(u, s)[0, 1]) < 0.05


def test_init_dirac_and_box():
    ens = init_ensemble(Spec("dirac"), G, 5)
    assert ens.M == 5
    for p in range(5):
        np.testing.assert_array_equal(ens.V[p], np.cos(G.nodes))
    box = init_ensemble(Spec("box"), G, 1)
    np.testing.assert_array_equal(box.V[0], np.cos(G.nodes))
    box = init_ensemble(Spec("box"), G, 4)
    u, s = stratified_offsets(4)
    np.testing.assert_allclose(box.V[:, 0] - np.cos(G.nodes[0]), 10 * u, atol=1e-14)
    np.testing.assert_allclose(box.W[:, 0], 100 * s, atol=1e-14)
    with pytest.raises(ValueError):
        init_ensemble(Spec("gaussian"), G, 3)
    with pytest.raises(ValueError):
        init_ensemble(Spec(), G, 0)


def test_checkpoint_roundtrip(tmp_path):
    ens = init_ensemble(Spec("box"), Grid(2, 4), 3)
    path = tmp_path / "ens.bin"
    write_checkpoint(path, ens, 7.25)
    raw = path.read_bytes()
    assert raw[:8] == b"FHNPARTS" and len(raw) == 8 + 16 + 8 + 2 * 3 * 16 * 8
    back, t = read_checkpoint(path, ens.density)
    assert t == 7.25
    np.testing.assert_array_equal(back.V, ens.V)
    np.testing.assert_array_equal(back.W, ens.W)
    with pytest.raises(ValueError):
        read_checkpoint(path, Density.uniform(Grid(2, 8)))
