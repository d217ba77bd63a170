import itertools

import numpy as np
import pytest

from builders import random_antisym
from sfield.errors import NonRealDensity
from sfield.gamma import (
    DIRAC,
    adjoint,
    anticommutator,
    bilinear,
    clifford_residual,
    sigma,
    spin_density,
    spin_generator,
    spinor_transform,
    standard_gammas,
    weyl_gammas,
)
from sfield.oracles import dirac_adjoint_loops, gamma_product_expand
from sfield.tensor import lorentz_matrix, minkowski_eta

REPS = [standard_gammas(), weyl_gammas()]
ETA = minkowski_eta()


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@pytest.mark.parametrize("g", REPS, ids=lambda g: g.name)
def test_clifford_exact(g):
    for k in range(4):
        for l in range(4):
            assert np.array_equal(anticommutator(g.upper[k], g.upper[l]), 2.0 * ETA[k, l] * np.eye(4))
    assert clifford_residual(g) == 0.0


@pytest.mark.parametrize("g", REPS, ids=lambda g: g.name)
def test_traces(g):
    for k in range(4):
        assert np.trace(g.upper[k]) == 0
        for l in range(4):
            assert np.trace(g.upper[k] @ g.upper[l]) == 4 * ETA[k, l]
            for m in range(4):
                assert np.trace(g.upper[k] @ g.upper[l] @ g.upper[m]) == 0


@pytest.mark.parametrize("g", REPS, ids=lambda g: g.name)
def test_four_distinct_gammas_totally_antisymmetric(g):
    base = g.lower[0] @ g.lower[1] @ g.lower[2] @ g.lower[3]
    for perm in itertools.permutations(range(4)):
        prod = g.lower[perm[0]] @ g.lower[perm[1]] @ g.lower[perm[2]] @ g.lower[perm[3]]
        assert np.array_equal(prod, _perm_sign(perm) * base)
    # so symmetric sums over the pair cancel
    for k, l, m, n in itertools.permutations(range(4)):
        s = g.lower[k] @ g.lower[l] @ g.lower[m] @ g.lower[n] + g.lower[l] @ g.lower[k] @ g.lower[m] @ g.lower[n]
        assert not s.any()


def test_dirac_gamma0_hermitian_and_spatial_antihermitian():
    g = DIRAC
    assert np.array_equal(g.g0, g.g0.conj().T)
    for k in (1, 2, 3):
        assert np.array_equal(g.upper[k], -g.upper[k].conj().T)


def test_sigma_and_generator():
    A = np.zeros((4, 4))
    A[0, 1], A[1, 0] = 0.7, -0.7
    # A^{01} and A^{10} each contribute; gamma_1 gamma_0 = -gamma_0 gamma_1
    assert np.allclose(spin_generator(A), 0.7 * sigma(0, 1))
    assert np.allclose(spin_generator(A), 0.35 * DIRAC.lower[0] @ DIRAC.lower[1])


def test_generator_is_lie_homomorphism():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A, B = random_antisym(rng), random_antisym(rng)
        lhs = spin_generator(A) @ spin_generator(B) - spin_generator(B) @ spin_generator(A)
        C = A @ ETA @ B - B @ ETA @ A
        assert np.allclose(lhs, spin_generator(C), atol=1e-13)


@pytest.mark.parametrize("g", REPS, ids=lambda g: g.name)
def test_spinor_transform_covariance(g):
    rng = np.random.default_rng(2)
    for _ in range(10):
        w = random_antisym(rng)
        lam = lorentz_matrix(w)
        S = spinor_transform(w, g)
        Sinv = np.linalg.inv(S)
        for k in range(4):
            rhs = np.einsum("l,lab->ab", lam[k], g.upper)
            assert np.allclose(Sinv @ g.upper[k] @ S, rhs, atol=1e-12)


def test_adjoint_and_bilinear_against_loops():
    rng = np.random.default_rng(3)
    for _ in range(20):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        bar = adjoint(psi)
        assert np.allclose(bar, dirac_adjoint_loops(psi, DIRAC.g0))
        M = [DIRAC.upper[rng.integers(4)] for _ in range(3)]
        prod = M[0] @ M[1] @ M[2]
        assert bilinear(psi, prod) == pytest.approx(gamma_product_expand(M, psi, bar))


def test_psibar_psi_real():
    rng = np.random.default_rng(4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert abs(bilinear(psi, np.eye(4)).imag) < 1e-14


def test_spin_density_properties():
    rng = np.random.default_rng(5)
    for _ in range(20):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        h = np.eye(4) + 0.2 * rng.normal(size=(4, 4))
        S = spin_density(psi, h)
        assert S.shape == (4, 4, 4)
        assert np.abs(S + np.swapaxes(S, 1, 2)).max() < 1e-12


def test_spin_density_against_expansion():
    rng = np.random.default_rng(6)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    h = np.eye(4) + 0.1 * rng.normal(size=(4, 4))
    S = spin_density(psi, h)
    gmu = DIRAC.global_gammas(h)
    bar = dirac_adjoint_loops(psi, DIRAC.g0)
    for mu in range(4):
        for k in range(4):
            for l in range(4):
                a = gamma_product_expand([gmu[mu], DIRAC.lower[k], DIRAC.lower[l]], psi, bar)
                b = gamma_product_expand([DIRAC.lower[l], DIRAC.lower[k], gmu[mu]], psi, bar)
                assert S[mu, k, l] == pytest.approx((0.125j * (a - b)).real, abs=1e-13)


def test_spin_density_zero_spinor():
    assert not spin_density(np.zeros(4), np.eye(4)).any()


def test_spin_density_nonreal_raises_with_foreign_gammas():
    # gamma^0 replaced by a non-hermitian matrix breaks reality of the bilinear
    from sfield.gamma import GammaSet

    up = np.array(DIRAC.upper)
    up[0] = up[0] + 0.5j * up[1]
    with pytest.raises(NonRealDensity):
        spin_density(np.array([1, 0.3j, 0.2, 1]), np.eye(4), GammaSet(up))
