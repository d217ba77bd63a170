"""Classical Dirac field on the bimetric background.

Everything here is a pointwise residual or diagnostic: fields are supplied as
expressions and the field equations are evaluated, never solved.  Spinors are
c-number fields; psibar = psi^dagger gamma^0.

Gamma conventions: ``gammas.upper[k]`` is gamma^k, ``gammas.lower[k]`` is
gamma_k, global gamma^mu = h_k^mu gamma^k.  Omega_mu = 1/4 A^{kl}_mu gamma_k gamma_l
is the spinor connection, so Psi_{;mu} = Psi_{,mu} + Omega_mu Psi.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NonRealCurrent, NonRealLagrangian, NonRealTensor
from .expr import ComplexExpression, parse_complex
from .gamma import DIRAC, REALITY_RTOL, GammaSet, adjoint
from .geometry import (
    ETA,
    _check_nondegenerate,
    curvature_from,
    density,
    density_gradient,
    einstein_from,
    global_connection_from,
    ricci_from,
)

NESTED_FD_STEP = 1e-4
DIVERGENCE_FD_STEP = 1e-5


class AdjointSign(enum.Enum):
    """Sign of the connection term in the adjoint covariant derivative.

    AS_PRINTED keeps psibar_{;mu} = psibar_{,mu} + psibar Omega_mu; STANDARD uses
    the minus sign that makes psibar_{;mu} the Dirac adjoint of psi_{;mu}.
    """

    AS_PRINTED = "as-printed"
    STANDARD = "standard"

    @property
    def sign(self) -> float:
        return 1.0 if self is AdjointSign.AS_PRINTED else -1.0


@dataclass(frozen=True)
class DiracField:
    psi: Sequence[ComplexExpression]
    mass: float

    def __post_init__(self):
        if len(self.psi) != 4:
            raise ValueError("a Dirac field has four complex components")
        if not self.mass >= 0.0:
            raise ValueError("mass must be non-negative")
        object.__setattr__(self, "psi", tuple(self.psi))

    def value(self, p) -> np.ndarray:
        return np.array([c.evaluate(p) for c in self.psi])

    def jet(self, p):
        """(psi[a], dpsi[mu, a]) as complex arrays."""
        psi = np.empty(4, dtype=complex)
        dpsi = np.empty((4, 4), dtype=complex)
        for a, comp in enumerate(self.psi):
            v, g, _ = comp.jet(p)
            psi[a] = v
            dpsi[:, a] = g
        return psi, dpsi


class TransformedDirac:
    """psi -> S psi for a constant spinor matrix S."""

    def __init__(self, base, S):
        self.base = base
        self.S = np.asarray(S, dtype=complex)
        self.mass = base.mass

    def value(self, p):
        return self.S @ self.base.value(p)

    def jet(self, p):
        psi, dpsi = self.base.jet(p)
        return self.S @ psi, dpsi @ self.S.T


def zero_dirac(mass: float = 0.0) -> DiracField:
    z = parse_complex(("0", "0"))
    return DiracField((z, z, z, z), mass)


def plane_wave_spinor(p_lower, mass: float, gammas: GammaSet = DIRAC, which: int = 0) -> np.ndarray:
    """A unit spinor u with gamma^mu p_mu u = m u (flat, identity vierbein).

    That is the condition for u exp(i p_mu x^mu) to solve the flat limit of
    m psi + i gamma^mu psi_{,mu} = 0.  ``which`` picks one of the two
    independent solutions.
    """
    p_lower = np.asarray(p_lower, dtype=float)
    shell = p_lower @ ETA @ p_lower
    if not np.isclose(shell, mass**2, rtol=1e-12, atol=1e-12):
        raise ValueError(f"momentum is off shell: p^2 = {shell!r}, m^2 = {mass**2!r}")
    slash = np.einsum("mab,m->ab", gammas.upper, p_lower)
    w, v = np.linalg.eig(slash)
    idx = [i for i in np.argsort(-w.real) if abs(w[i] - mass) < 1e-8 * max(1.0, mass)]
    if len(idx) < 2:
        raise ValueError("no two-dimensional eigenspace at eigenvalue m")
    u = v[:, idx[which]]
    return u / np.linalg.norm(u)


def plane_wave(p_lower, mass: float, gammas: GammaSet = DIRAC, which: int = 0) -> DiracField:
    """psi(x) = u exp(i p_mu x^mu) as expressions."""
    u = plane_wave_spinor(p_lower, mass, gammas, which)
    phase = " + ".join(f"({float(c)!r})*x{i}" for i, c in enumerate(p_lower))
    comps = []
    for z in u:
        a, b = float(z.real), float(z.imag)
        re = f"({a!r})*cos({phase}) - ({b!r})*sin({phase})"
        im = f"({a!r})*sin({phase}) + ({b!r})*cos({phase})"
        comps.append(parse_complex((re, im)))
    return DiracField(tuple(comps), mass)


# ---------------------------------------------------------------------------
# pointwise state


@dataclass
class FieldPoint:
    """All pointwise ingredients the residuals need, evaluated once."""

    p: tuple
    E: np.ndarray
    dE: np.ndarray
    Einv: np.ndarray
    h: float
    dh: np.ndarray
    A: np.ndarray
    dA: Optional[np.ndarray]
    psi: np.ndarray
    dpsi: np.ndarray
    gammas: GammaSet
    mass: float = 0.0

    @property
    def psibar(self):
        return adjoint(self.psi, self.gammas)

    @property
    def dpsibar(self):
        # d_mu psibar = (d_mu psi)^dagger gamma^0, rows indexed by mu
        return np.conj(self.dpsi) @ self.gammas.g0

    @property
    def gmu(self):
        return self.gammas.global_gammas(self.E)

    @property
    def omega(self):
        """Omega_mu = 1/4 A^{kl}_mu gamma_k gamma_l, indexed [mu, a, b]."""
        gl = self.gammas.lower
        return 0.25 * np.einsum("klm,kab,lbc->mac", self.A, gl, gl)

    @property
    def dgmu_div(self):
        """d_mu gamma^mu = (d_mu h_k^mu) gamma^k."""
        return np.einsum("k,kab->ab", np.einsum("kmm->k", self.dE), self.gammas.upper)


def field_point(d, h, c, p, gammas: GammaSet = DIRAC, with_curvature=False) -> FieldPoint:
    j = h.jet(p)
    _check_nondegenerate(j.value, p)
    Einv = np.linalg.inv(j.value)
    if with_curvature:
        A, dA = c.jet(p)
    else:
        A, dA = c.value(p), None
    if d is None:
        psi, dpsi = np.zeros(4, complex), np.zeros((4, 4), complex)
    else:
        psi, dpsi = d.jet(p)
    mass = 0.0 if d is None else float(d.mass)
    return FieldPoint(
        tuple(float(x) for x in p),
        j.value,
        j.d1,
        Einv,
        density(j.value),
        density_gradient(j.value, j.d1, Einv),
        A,
        dA,
        psi,
        dpsi,
        gammas,
        mass,
    )


def _scale(fp: FieldPoint) -> float:
    size = float(np.vdot(fp.psi, fp.psi).real + np.abs(fp.dpsi).max() * np.abs(fp.psi).max())
    return max(size, 1e-300) * max(1.0, float(np.abs(fp.E).max())) * max(1.0, abs(fp.h)) * max(
        1.0, float(np.abs(fp.A).max())
    )


# ---------------------------------------------------------------------------
# covariant derivatives


def covariant_derivatives_at(fp: FieldPoint, conv: AdjointSign = AdjointSign.AS_PRINTED):
    om = fp.omega
    dpsi_cov = fp.dpsi + np.einsum("mab,b->ma", om, fp.psi)
    dpsibar_cov = fp.dpsibar + conv.sign * np.einsum("a,mab->mb", fp.psibar, om)
    return dpsi_cov, dpsibar_cov


def covariant_spinor_derivative(d, c, conv: AdjointSign, p, gammas: GammaSet = DIRAC):
    """(Psi_{;mu}[mu, a], Psibar_{;mu}[mu, a]) with the chosen adjoint sign."""
    A = c.value(p)
    psi, dpsi = d.jet(p)
    gl = gammas.lower
    om = 0.25 * np.einsum("klm,kab,lbc->mac", A, gl, gl)
    psibar = adjoint(psi, gammas)
    dpsibar = np.conj(dpsi) @ gammas.g0
    return (
        dpsi + np.einsum("mab,b->ma", om, psi),
        dpsibar + conv.sign * np.einsum("a,mab->mb", psibar, om),
    )


def adjoint_consistency(d, c, p, gammas: GammaSet = DIRAC):
    """max |(Psi_{;mu})^dagger gamma^0 - Psibar_{;mu}| for each sign convention."""
    out = {}
    for conv in AdjointSign:
        dpsi_cov, dpsibar_cov = covariant_spinor_derivative(d, c, conv, p, gammas)
        adj = np.conj(dpsi_cov) @ gammas.g0
        out[conv.value] = float(np.abs(adj - dpsibar_cov).max())
    return out


# ---------------------------------------------------------------------------
# Lagrangian and field equations


def _check_real(value, scale, exc, what, p):
    residue = float(np.abs(np.imag(value)).max()) if np.size(value) else 0.0
    if residue > REALITY_RTOL * scale:
        raise exc(what, residue, p)
    return np.real(value)


def lagrangian_at(fp: FieldPoint) -> float:
    """L_D = m psibar psi + i/2 [psibar gamma^mu psi_{,mu} - psibar_{,mu} gamma^mu psi]
    + i/8 A^{kl}_mu psibar (gamma^mu gamma_k gamma_l + gamma_k gamma_l gamma^mu) psi."""
    psi, psibar = fp.psi, fp.psibar
    gmu, om = fp.gmu, fp.omega
    mass_term = fp.mass * (psibar @ psi)
    kin = np.einsum("a,mab,mb->", psibar, gmu, fp.dpsi) - np.einsum("ma,mab,b->", fp.dpsibar, gmu, psi)
    # A^{kl}_mu gamma_k gamma_l = 4 Omega_mu
    sym = np.einsum("mab,mbc->ac", gmu, om) + np.einsum("mab,mbc->ac", om, gmu)
    val = mass_term + 0.5j * kin + 0.5j * (psibar @ sym @ psi)
    return float(_check_real(val, _scale(fp), NonRealLagrangian, "Dirac Lagrangian is not real", fp.p))


def dirac_lagrangian(d, h, c, p, gammas: GammaSet = DIRAC) -> float:
    return lagrangian_at(field_point(d, h, c, p, gammas))


@dataclass(frozen=True)
class DiracResidual:
    psibar: np.ndarray  # row equation (variation with respect to psi)
    psi: np.ndarray  # column equation (variation with respect to psibar)

    def max_abs(self) -> float:
        return float(max(np.abs(self.psibar).max(), np.abs(self.psi).max()))


def residual_eq23_at(fp: FieldPoint) -> DiracResidual:
    """Both lines of the density-form Dirac equations.

    [m psibar - i psibar_{,mu} gamma^mu] + i/4 A_{kl mu} psibar gamma^mu gamma^k gamma^l
        - i/(2h) psibar (h h_k^mu)_{,mu} gamma^k
    [m psi + i gamma^mu psi_{,mu}] + i/4 A_{kl mu} gamma^mu gamma^k gamma^l psi
        + i/(2h) (h h_k^mu)_{,mu} gamma^k psi
    """
    m = fp.mass
    psi, psibar = fp.psi, fp.psibar
    gmu, om = fp.gmu, fp.omega
    coupling = np.einsum("mab,mbc->ac", gmu, om)  # 1/4 A_{kl mu} gamma^mu gamma^k gamma^l
    # (h h_k^mu)_{,mu} gamma^k
    div_vec = fp.dh @ fp.E.T + fp.h * np.einsum("kmm->k", fp.dE)
    dens = np.einsum("k,kab->ab", div_vec, fp.gammas.upper) / (2.0 * fp.h)
    row = (
        m * psibar
        - 1j * np.einsum("ma,mab->b", fp.dpsibar, gmu)
        + 1j * psibar @ coupling
        - 1j * psibar @ dens
    )
    col = m * psi + 1j * np.einsum("mab,mb->a", gmu, fp.dpsi) + 1j * coupling @ psi + 1j * dens @ psi
    return DiracResidual(row, col)


def residual_eq22_at(fp: FieldPoint) -> DiracResidual:
    """The undivided Euler-Lagrange form, total derivatives by the product rule.

    h[m psibar - i/2 psibar_{,mu} gamma^mu + i/4 A psibar gamma^mu gamma gamma] - i/2 (h psibar gamma^mu)_{,mu}
    h[m psi + i/2 gamma^mu psi_{,mu} + i/4 A gamma^mu gamma gamma psi] + i/2 (h gamma^mu psi)_{,mu}
    """
    m = fp.mass
    h, dh = fp.h, fp.dh
    psi, psibar = fp.psi, fp.psibar
    gmu, om = fp.gmu, fp.omega
    dg = fp.dgmu_div
    coupling = np.einsum("mab,mbc->ac", gmu, om)
    # d_mu (h psibar gamma^mu) = dh_mu psibar gamma^mu + h psibar_{,mu} gamma^mu + h psibar d_mu gamma^mu
    d_row = (
        np.einsum("m,a,mab->b", dh, psibar, gmu)
        + h * np.einsum("ma,mab->b", fp.dpsibar, gmu)
        + h * psibar @ dg
    )
    d_col = (
        np.einsum("m,mab,b->a", dh, gmu, psi)
        + h * np.einsum("mab,mb->a", gmu, fp.dpsi)
        + h * dg @ psi
    )
    row = h * (m * psibar - 0.5j * np.einsum("ma,mab->b", fp.dpsibar, gmu) + 1j * psibar @ coupling) - 0.5j * d_row
    col = h * (m * psi + 0.5j * np.einsum("mab,mb->a", gmu, fp.dpsi) + 1j * coupling @ psi) + 0.5j * d_col
    return DiracResidual(row, col)


def dirac_residual(d, h, c, p, gammas: GammaSet = DIRAC) -> DiracResidual:
    return residual_eq23_at(field_point(d, h, c, p, gammas))


def eq22_residual(d, h, c, p, gammas: GammaSet = DIRAC) -> DiracResidual:
    return residual_eq22_at(field_point(d, h, c, p, gammas))


@dataclass(frozen=True)
class OnShellCheck:
    two_lagrangian: float  # 2 L_D
    bound: float  # |res_psibar| |psi| + |psibar| |res_psi|
    combination: complex  # res_psibar psi + psibar res_psi
    gap: float  # |2 L_D - Re(combination)|

    @property
    def holds(self) -> bool:
        return abs(self.two_lagrangian) <= self.bound * (1.0 + 1e-8) + 1e-300


def onshell_check_at(fp: FieldPoint) -> OnShellCheck:
    """Multiply the row equation by psi, the column one by psibar, and add.

    The sum reproduces 2 L_D in its real part; the imaginary remainder is
    (i/4) psibar [gamma^mu, A gamma gamma] psi, which is not part of L_D.
    """
    res = residual_eq23_at(fp)
    two_l = 2.0 * lagrangian_at(fp)
    comb = complex(res.psibar @ fp.psi + fp.psibar @ res.psi)
    npsi = float(np.linalg.norm(fp.psi))
    nbar = float(np.linalg.norm(fp.psibar))
    bound = float(np.linalg.norm(res.psibar)) * npsi + nbar * float(np.linalg.norm(res.psi))
    return OnShellCheck(two_l, bound, comb, abs(two_l - comb.real))


def onshell_lagrangian_check(d, h, c, p, gammas: GammaSet = DIRAC) -> OnShellCheck:
    return onshell_check_at(field_point(d, h, c, p, gammas))


@dataclass(frozen=True)
class StressEnergyValue:
    T: np.ndarray  # T^l_mu, [l, mu]
    imag_residue: float


def stress_energy_at(fp: FieldPoint, strict: bool = True) -> StressEnergyValue:
    """T^l_mu = i/2 [psibar gamma^l psi_{,mu} - psibar_{,mu} gamma^l psi]
    + i/4 A_{kj mu} psibar gamma^l gamma^k gamma^j psi, with the local gamma^l."""
    g = fp.gammas.upper
    psi, psibar = fp.psi, fp.psibar
    kin = np.einsum("a,lab,mb->lm", psibar, g, fp.dpsi) - np.einsum("ma,lab,b->lm", fp.dpsibar, g, psi)
    # A_{kj mu} gamma^k gamma^j = 4 Omega_mu
    coup = np.einsum("a,lab,mbc,c->lm", psibar, g, fp.omega, psi)
    T = 0.5j * kin + 1j * coup
    residue = float(np.abs(T.imag).max())
    if strict:
        _check_real(T, _scale(fp), NonRealTensor, "stress-energy tensor is not real", fp.p)
    return StressEnergyValue(T.real, residue)


def stress_energy(d, h, c, p, gammas: GammaSet = DIRAC, strict: bool = True) -> StressEnergyValue:
    return stress_energy_at(field_point(d, h, c, p, gammas), strict)


def spin_density_at(fp: FieldPoint) -> np.ndarray:
    from .gamma import spin_density

    return spin_density(fp.psi, fp.E, fp.gammas, fp.p)


def field_eq_A_at(fp: FieldPoint) -> np.ndarray:
    """Connection field equation, LHS - h S^mu_{kl}, indexed [mu, k, l].

    LHS = (h h_k^a h_l^mu - h h_k^mu h_l^a)_{,a}
          - (h h_m^a h_l^mu - h h_m^mu h_l^a) A^m_{k a}
          - (h h_k^mu h_m^a - h h_k^a h_m^mu) A_l^m_a
    """
    E, dE, h, dh, A = fp.E, fp.dE, fp.h, fp.dh, fp.A
    # W[k, l, a, mu] = h (E[k, a] E[l, mu] - E[k, mu] E[l, a])
    P = np.einsum("ka,lm->klam", E, E)
    W = h * (P - np.transpose(P, (0, 1, 3, 2)))
    # d_s W[k, l, a, mu]
    dP = np.einsum("kas,lm->klams", dE, E) + np.einsum("ka,lms->klams", E, dE)
    dW = np.einsum("s,klam->klams", dh, P - np.transpose(P, (0, 1, 3, 2))) + h * (
        dP - np.transpose(dP, (0, 1, 3, 2, 4))
    )
    div = np.einsum("klaam->klm", np.transpose(dW, (0, 1, 2, 4, 3)))  # sum over a = s
    A_mixed_k = np.einsum("mna,nk->mka", A, ETA)  # A^m_{k a}
    A_l_up = np.einsum("ln,nma->lma", ETA, A)  # A_l^m_a
    term2 = np.einsum("mlau,mka->klu", W, A_mixed_k)
    term3 = np.einsum("mkau,lma->klu", W, A_l_up)
    lhs = div - term2 - term3  # [k, l, mu]
    source = h * spin_density_at(fp)  # [mu, k, l]
    return np.transpose(lhs, (2, 0, 1)) - source


def field_eq_A_residual(d, h, c, p, gammas: GammaSet = DIRAC) -> np.ndarray:
    return field_eq_A_at(field_point(d, h, c, p, gammas))


def field_eq_h_at(fp: FieldPoint, strict: bool = False) -> np.ndarray:
    """h (h^l_mu R - 2 R^l_mu) + T^l_mu, indexed [l, mu]."""
    ric = ricci_from(fp.E, curvature_from(fp.A, fp.dA))
    T = stress_energy_at(fp, strict=strict).T
    return fp.h * (fp.Einv.T * ric.scalar - 2.0 * ric.ricci) + T


def field_eq_h_residual(d, h, c, p, gammas: GammaSet = DIRAC, strict: bool = False) -> np.ndarray:
    return field_eq_h_at(field_point(d, h, c, p, gammas, with_curvature=True), strict)


# ---------------------------------------------------------------------------
# commutator of covariant derivatives


@dataclass(frozen=True)
class CommutatorCheck:
    lhs: np.ndarray  # [mu, nu, a]
    rhs: np.ndarray
    diff: float


def _cov_at(d, c, q, gammas):
    psi, dpsi = d.jet(q)
    A = c.value(q)
    gl = gammas.lower
    om = 0.25 * np.einsum("klm,kab,lbc->mac", A, gl, gl)
    return dpsi + np.einsum("mab,b->ma", om, psi)


def commutator_check(d, h, c, p, gammas: GammaSet = DIRAC, step: float = NESTED_FD_STEP) -> CommutatorCheck:
    """Psi_{;mu;nu} - Psi_{;nu;mu} by central differences against the curvature form.

    Psi_{;mu;nu} = d_nu(Psi_{;mu}) - Gamma^r_{mu nu} Psi_{;r} + Omega_nu Psi_{;mu}
    rhs = 1/4 R^{kl}_{mu nu} gamma_k gamma_l Psi - (Gamma^r_{mu nu} - Gamma^r_{nu mu}) Psi_{;r}
    """
    q = np.asarray(p, dtype=float)
    fp = field_point(d, h, c, q, gammas, with_curvature=True)
    G = global_connection_from(fp.E, fp.dE, fp.A, fp.p).gamma  # [r, mu, nu]
    om = fp.omega
    cov = fp.dpsi + np.einsum("mab,b->ma", om, fp.psi)  # [mu, a]
    dcov = np.empty((4, 4, 4), dtype=complex)  # [mu, nu, a] = d_nu Psi_{;mu}
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = step
        dcov[:, nu, :] = (_cov_at(d, c, q + e, gammas) - _cov_at(d, c, q - e, gammas)) / (2.0 * step)
    second = (
        dcov
        - np.einsum("rmn,ra->mna", G, cov)
        + np.einsum("nab,mb->mna", om, cov)
    )
    lhs = second - np.transpose(second, (1, 0, 2))
    R = curvature_from(fp.A, fp.dA)
    gl = gammas.lower
    curv = 0.25 * np.einsum("klmn,kab,lbc,c->mna", R, gl, gl, fp.psi)
    tors = G - np.transpose(G, (0, 2, 1))
    rhs = curv - np.einsum("rmn,ra->mna", tors, cov)
    return CommutatorCheck(lhs, rhs, float(np.abs(lhs - rhs).max()))


# ---------------------------------------------------------------------------
# divergences and conserved quantities


def _covariant_divergence(mixed_fn, G, p, step):
    """X^mu_{nu;mu} = d_mu X^mu_nu + Gamma^mu_{r mu} X^r_nu - Gamma^r_{nu mu} X^mu_r."""
    q = np.asarray(p, dtype=float)
    X = mixed_fn(q)
    div = np.zeros(4)
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = step
        div += (mixed_fn(q + e)[mu] - mixed_fn(q - e)[mu]) / (2.0 * step)
    div += np.einsum("mrm,rn->n", G, X) - np.einsum("rnm,mr->n", G, X)
    return div


def naive_T_divergence(d, h, c, p, gammas: GammaSet = DIRAC, step: float = DIVERGENCE_FD_STEP) -> np.ndarray:
    """T^mu_{nu;mu} with T^mu_nu = h_l^mu T^l_nu; reported, not expected to vanish."""

    def mixed(q):
        fp = field_point(d, h, c, q, gammas)
        return fp.E.T @ stress_energy_at(fp, strict=False).T

    fp = field_point(d, h, c, p, gammas)
    G = global_connection_from(fp.E, fp.dE, fp.A, fp.p).gamma
    return _covariant_divergence(mixed, G, p, step)


def einstein_mixed_at(h, c, q, gammas: GammaSet = DIRAC) -> np.ndarray:
    fp = field_point(None, h, c, q, gammas, with_curvature=True)
    return einstein_from(ricci_from(fp.E, curvature_from(fp.A, fp.dA)))


def B_divergence(h, c, p, gammas: GammaSet = DIRAC, step: float = DIVERGENCE_FD_STEP) -> np.ndarray:
    """B^mu_{nu;mu}; the contracted Bianchi identity makes it vanish without torsion."""
    fp = field_point(None, h, c, p, gammas)
    G = global_connection_from(fp.E, fp.dE, fp.A, fp.p).gamma
    return _covariant_divergence(lambda q: einstein_mixed_at(h, c, q, gammas), G, p, step)


def current_at(fp: FieldPoint) -> np.ndarray:
    """J^mu = h psibar gamma^mu psi."""
    J = fp.h * np.einsum("a,mab,b->m", fp.psibar, fp.gmu, fp.psi)
    scale = max(float(np.vdot(fp.psi, fp.psi).real) * abs(fp.h) * max(1.0, float(np.abs(fp.E).max())), 1e-300)
    return _check_real(J, scale, NonRealCurrent, "current is not real", fp.p)


def current_and_divergence(d, h, p, gammas: GammaSet = DIRAC, step: float = DIVERGENCE_FD_STEP):
    """(J^mu, d_mu J^mu) with the divergence by central differences."""
    from .geometry import ZeroConnection

    zero = ZeroConnection()
    q = np.asarray(p, dtype=float)

    def J(x):
        return current_at(field_point(d, h, zero, x, gammas))

    div = 0.0
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = step
        div += (J(q + e)[mu] - J(q - e)[mu]) / (2.0 * step)
    return J(q), float(div)


def four_momentum(h, c, x0: float, bounds, n: int, gammas: GammaSet = DIRAC) -> np.ndarray:
    """P_mu = sum h h_j^nu B_mu^j dsigma_nu over the slice x^0 = x0, midpoint rule.

    ``bounds`` are the (lo, hi) ranges of x1, x2, x3; dsigma_nu = (d^3x, 0, 0, 0)
    and B^j_mu = h^j_nu B^nu_mu.
    """
    if n < 1:
        raise ValueError("grid size must be at least 1")
    axes = [lo + (np.arange(n) + 0.5) * (hi - lo) / n for lo, hi in bounds]
    cell = float(np.prod([(hi - lo) / n for lo, hi in bounds]))
    total = np.zeros(4)
    for x1, x2, x3 in itertools.product(*axes):
        q = np.array([x0, x1, x2, x3])
        fp = field_point(None, h, c, q, gammas, with_curvature=True)
        B = einstein_from(ricci_from(fp.E, curvature_from(fp.A, fp.dA)))
        B_local = fp.Einv.T @ B  # B^j_mu
        total += fp.h * fp.E[:, 0] @ B_local * cell
    return total


def eq43_experimental(d, h, c, p, gammas: GammaSet = DIRAC, step: float = DIVERGENCE_FD_STEP) -> np.ndarray:
    """One reading of the printed torsion-corrected conservation law.

    Q_nu = T^mu_{nu;mu} + (K^a_{nu mu} - 1/2 delta^a_nu K^l_{l mu} - 1/2 delta^a_mu K^l_{nu l}) T^mu_a
           + R^{kl}_{mu nu} S^mu_{kl}
    with K^a_{nu mu} = Gamma^a_{nu mu} - Gamma^a_{mu nu} the torsion and S the spin
    density.  The printed index structure does not admit a unique reading, so
    this is only ever reported.
    """
    fp = field_point(d, h, c, p, gammas, with_curvature=True)
    G = global_connection_from(fp.E, fp.dE, fp.A, fp.p).gamma
    K = G - np.transpose(G, (0, 2, 1))
    Tmix = fp.E.T @ stress_energy_at(fp, strict=False).T  # T^mu_a
    eye = np.eye(4)
    trace_first = np.einsum("llm->m", K)  # K^l_{l mu}
    trace_last = np.einsum("lnl->n", K)  # K^l_{nu l}
    coef = (
        np.transpose(K, (1, 2, 0))  # [nu, mu, a]
        - 0.5 * np.einsum("an,m->nma", eye, trace_first)
        - 0.5 * np.einsum("am,n->nma", eye, trace_last)
    )
    R = curvature_from(fp.A, fp.dA)
    S = spin_density_at(fp)
    return (
        naive_T_divergence(d, h, c, p, gammas, step)
        + np.einsum("nma,ma->n", coef, Tmix)
        + np.einsum("klmn,mkl->n", R, S)
    )
