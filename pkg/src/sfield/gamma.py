"""Dirac matrices, spinor adjoints and the spin-density bilinear.

Local-frame gammas ``gamma^k`` satisfy {gamma^k, gamma^l} = 2 eta^{kl} I with
eta = diag(+1, -1, -1, -1).  Global gammas are formed with the vierbein,
gamma^mu = h_k^mu gamma^k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonRealDensity
from .tensor import minkowski_eta

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# imaginary residue allowed in a bilinear that must be real, relative to its scale
REALITY_RTOL = 1e-10


@dataclass(frozen=True)
class GammaSet:
    """Four 4x4 complex matrices gamma^k and their lowered partners gamma_k."""

    upper: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        up = np.array(self.upper, dtype=complex)
        if up.shape != (4, 4, 4):
            raise ValueError("a gamma set is four 4x4 matrices")
        up.setflags(write=False)
        low = np.einsum("kl,lab->kab", minkowski_eta(), up)
        low.setflags(write=False)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "_lower", low)

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    @property
    def g0(self) -> np.ndarray:
        return self.upper[0]

    def global_gammas(self, hvier) -> np.ndarray:
        """gamma^mu = h_k^mu gamma^k for a vierbein value ``hvier[k, mu]``."""
        return np.einsum("km,kab->mab", np.asarray(hvier, dtype=float), self.upper)


def standard_gammas() -> GammaSet:
    """Dirac representation: gamma^0 = diag(1, 1, -1, -1), off-diagonal Pauli blocks."""
    g0 = np.block([[_I2, _Z2], [_Z2, -_I2]])
    gs = [np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI]
    return GammaSet(np.array([g0, *gs]), name="dirac")


def weyl_gammas() -> GammaSet:
    """Chiral (Weyl) representation, used to check representation independence."""
    g0 = np.block([[_Z2, _I2], [_I2, _Z2]])
    gs = [np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI]
    return GammaSet(np.array([g0, *gs]), name="weyl")


DIRAC = standard_gammas()


def anticommutator(a, b):
    return a @ b + b @ a


def clifford_residual(gammas: GammaSet) -> float:
    """max |{gamma^k, gamma^l} - 2 eta^{kl} I| over all 16 pairs."""
    eta = minkowski_eta()
    eye = np.eye(4)
    worst = 0.0
    for k in range(4):
        for l in range(4):
            diff = anticommutator(gammas.upper[k], gammas.upper[l]) - 2.0 * eta[k, l] * eye
            worst = max(worst, float(np.abs(diff).max()))
    return worst


def sigma(k: int, l: int, gammas: GammaSet = DIRAC) -> np.ndarray:
    """S_kl = 1/2 gamma_k gamma_l (the plain product, not antisymmetrised)."""
    return 0.5 * gammas.lower[k] @ gammas.lower[l]


def spin_generator(A, gammas: GammaSet = DIRAC) -> np.ndarray:
    """1/4 A^{kl} gamma_k gamma_l for a single antisymmetric 4x4 ``A``."""
    return 0.25 * np.einsum("kl,kab,lbc->ac", A, gammas.lower, gammas.lower)


def adjoint(psi, gammas: GammaSet = DIRAC) -> np.ndarray:
    """Dirac adjoint psi^dagger gamma^0 as a row vector."""
    return np.conj(np.asarray(psi, dtype=complex)) @ gammas.g0


def bilinear(psi, matrix, gammas: GammaSet = DIRAC) -> complex:
    """psibar M psi."""
    psi = np.asarray(psi, dtype=complex)
    return complex(adjoint(psi, gammas) @ matrix @ psi)


def spin_density(psi, hvier, gammas: GammaSet = DIRAC, point=None) -> np.ndarray:
    """S^mu_{kl} = (i/8) psibar (gamma^mu gamma_k gamma_l - gamma_l gamma_k gamma^mu) psi.

    Returned as a real array indexed ``[mu, k, l]``; antisymmetric in (k, l).
    Raises :class:`NonRealDensity` if the discarded imaginary part is larger
    than 1e-10 of the natural scale |psi|^2 |h|.
    """
    psi = np.asarray(psi, dtype=complex)
    psibar = adjoint(psi, gammas)
    gmu = gammas.global_gammas(hvier)
    gl = gammas.lower
    row_mu = np.einsum("a,mab->mb", psibar, gmu)  # psibar gamma^mu
    col_mu = np.einsum("mab,b->ma", gmu, psi)  # gamma^mu psi
    gl_psi = np.einsum("lab,b->la", gl, psi)  # gamma_l psi
    row_l = np.einsum("a,lab->lb", psibar, gl)  # psibar gamma_l
    # psibar gamma^mu gamma_k gamma_l psi
    first = np.einsum("mb,kbc,lc->mkl", row_mu, gl, gl_psi)
    # psibar gamma_l gamma_k gamma^mu psi
    second = np.einsum("lb,kbc,mc->mkl", row_l, gl, col_mu)
    dens = 0.125j * (first - second)
    scale = float(np.vdot(psi, psi).real) * max(1.0, float(np.abs(hvier).max()))
    residue = float(np.abs(dens.imag).max()) if dens.size else 0.0
    if residue > REALITY_RTOL * max(scale, 1e-300):
        raise NonRealDensity("spin density is not real", residue, point)
    return dens.real


def spinor_transform(omega, gammas: GammaSet = DIRAC) -> np.ndarray:
    """Spinor matrix S = exp(1/4 omega^{kl} gamma_k gamma_l).

    Paired with the vector transform ``lorentz_matrix(omega)`` it satisfies
    S^{-1} gamma^k S = Lambda^k_l gamma^l.
    """
    return scipy.linalg.expm(spin_generator(omega, gammas))
