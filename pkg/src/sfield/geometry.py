"""Bimetric geometry: vierbeins, metrics, connections, torsion and curvature.

Index conventions (storage order of every array):

=====================  ==========================  =================================
quantity               array                       meaning
=====================  ==========================  =================================
vierbein               ``E[k, mu]``                h_k^mu   (local lower, global upper)
inverse vierbein       ``Einv[mu, k]``             h^k_mu   (``E @ Einv = I``)
vierbein derivative    ``dE[k, mu, nu]``           d_nu h_k^mu
second derivative      ``ddE[k, mu, nu, s]``       d_nu d_s h_k^mu
inverse metric         ``g_up[mu, nu]``            g^{mu nu} = h_i^mu h_j^nu eta^{ij}
local connection       ``A[k, l, mu]``             A^{kl}_mu, antisymmetric in k, l
connection derivative  ``dA[k, l, mu, nu]``        d_nu A^{kl}_mu
global connection      ``G[nu, rho, mu]``          Gamma^nu_{rho mu}, mu = derivative slot
curvature              ``R[k, l, mu, nu]``         R^{kl}_{mu nu}
Ricci                  ``Ric[l, mu]``              R^l_mu = h_k^nu R^{kl}_{mu nu}
mixed Ricci            ``Rmix[mu, nu]``            R^mu_nu = h_l^mu R^l_nu
density                ``h``                       det(h^k_mu) = 1 / det(h_k^mu)
=====================  ==========================  =================================

Local indices are raised and lowered with eta only; h^{k nu} = eta^{kj} h_j^nu.
Products of connections contract through eta: (A_a A_b)^{kl} = A_a^{km} eta_{mn} A_b^{nl}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import Degenerate, FrameNotOrthonormal, SingularSystem, WrongSignature
from .expr import Expression, eval_jet2, evaluate
from .tensor import (
    GLOBAL_LOWER,
    GLOBAL_UPPER,
    LOCAL_LOWER,
    LOCAL_UPPER,
    IndexedTensor,
    det4,
    invert4,
    is_degenerate,
    minkowski_eta,
)

ETA = minkowski_eta()

# step for complex-step differentiation; the result is exact to rounding
_CSTEP = 1e-30
# step for the one finite-difference derivative (second derivative of the composite vierbein)
COMPOSITE_FD_STEP = 1e-4
FRAME_TOL = 1e-6
POSTULATE_RTOL = 1e-10


class VierbeinJet(NamedTuple):
    value: np.ndarray  # E[k, mu]
    d1: np.ndarray  # dE[k, mu, nu]
    d2: np.ndarray  # ddE[k, mu, nu, s]


def _complex_step(fn, values, tangents):
    """fn(values) and its directional derivative along ``tangents``.

    ``fn`` must be analytic in its array arguments (no abs/conj on the path).
    """
    z = fn(*[v + 1j * _CSTEP * t for v, t in zip(values, tangents)])
    return np.real(z), np.imag(z) / _CSTEP


def _check_nondegenerate(E, p):
    if is_degenerate(E):
        raise Degenerate("vierbein is degenerate", p)


# ---------------------------------------------------------------------------
# vierbein bundles


class VierbeinBundle:
    """16 expressions for h_k^mu(x), ``entries[k][mu]``."""

    def __init__(self, entries: Sequence[Sequence[Expression]]):
        rows = [tuple(r) for r in entries]
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise ValueError("a vierbein bundle needs 4x4 expressions")
        self.entries = tuple(rows)

    def value(self, p) -> np.ndarray:
        return np.array([[evaluate(e, p) for e in row] for row in self.entries])

    def jet(self, p) -> VierbeinJet:
        E = np.empty((4, 4))
        dE = np.empty((4, 4, 4))
        ddE = np.empty((4, 4, 4, 4))
        for k in range(4):
            for mu in range(4):
                j = eval_jet2(self.entries[k][mu], p)
                E[k, mu] = j.value
                dE[k, mu] = j.grad
                ddE[k, mu] = j.hess
        return VierbeinJet(E, dE, ddE)

    def transformed(self, lam) -> "ConstantFrameBundle":
        return ConstantFrameBundle(self, lam)


class ConstantFrameBundle:
    """A bundle with its local index rotated by a constant Lorentz matrix.

    ``lam`` acts on upper local indices; lower-index vierbeins transform with
    its inverse transpose, h_k^mu -> (Lambda^{-T})_k^j h_j^mu, so that
    vectors V^mu = h_k^mu V^k are unchanged.
    """

    def __init__(self, base, lam):
        self.base = base
        self.lam = np.asarray(lam, dtype=float)
        self._m = np.linalg.inv(self.lam).T

    def value(self, p):
        return self._m @ self.base.value(p)

    def jet(self, p):
        j = self.base.jet(p)
        m = self._m
        return VierbeinJet(
            m @ j.value,
            np.einsum("kj,jab->kab", m, j.d1),
            np.einsum("kj,jabc->kabc", m, j.d2),
        )


@dataclass(frozen=True)
class SFieldConfig:
    phi: Expression
    lam: float

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise ValueError("coupling lambda must be non-negative")


def _aligned_composite(E_hat, dphi, lam2):
    """Composite vierbein in the gauge aligned with the gravitational one.

    With w_i = (E_hat dphi)_i and w^j = eta^{jk} w_k, the matrix
    L = I + alpha w^j w_i satisfies L eta L^T = eta + lam^2 w w^T when
    2 alpha + alpha^2 (w.w) = lam^2, so h_i^mu = L^j_i hhat_j^mu reproduces
    g = ghat + lam^2 dphi^mu dphi^nu.
    """
    w_low = E_hat @ dphi
    w_up = ETA @ w_low
    s = w_low @ w_up
    alpha = lam2 / (1.0 + np.sqrt(1.0 + lam2 * s))
    L = np.eye(4) + alpha * np.outer(w_up, w_low)
    return L.T @ E_hat


class CompositeVierbein:
    """The composite bundle h_i^mu of ghat + g_S, built from the gravitational bundle.

    Value and first derivatives are exact.  Second derivatives would need
    third derivatives of phi, so they are taken by central differences of the
    exact first derivative (step ``fd_step``).  With lambda = 0 this is the
    gravitational bundle itself.
    """

    def __init__(self, gravity: VierbeinBundle, sfield: SFieldConfig, fd_step: float = COMPOSITE_FD_STEP):
        self.gravity = gravity
        self.sfield = sfield
        self.fd_step = fd_step

    def _check(self, E_hat, dphi, p):
        s = (E_hat @ dphi) @ ETA @ (E_hat @ dphi)
        if 1.0 + self.sfield.lam**2 * s <= 0.0:
            raise WrongSignature("composite metric loses Lorentz signature", p)

    def value(self, p):
        if self.sfield.lam == 0.0:
            return self.gravity.value(p)
        j = self.gravity.jet(p)
        dphi = eval_jet2(self.sfield.phi, p).grad
        self._check(j.value, dphi, p)
        return _aligned_composite(j.value, dphi, self.sfield.lam**2)

    def _first(self, p):
        j = self.gravity.jet(p)
        phi = eval_jet2(self.sfield.phi, p)
        self._check(j.value, phi.grad, p)
        lam2 = self.sfield.lam**2
        E = None
        dE = np.empty((4, 4, 4))
        for nu in range(4):
            E, dE[:, :, nu] = _complex_step(
                lambda a, b: _aligned_composite(a, b, lam2),
                (j.value, phi.grad),
                (j.d1[:, :, nu], phi.hess[:, nu]),
            )
        return E, dE

    def jet(self, p):
        if self.sfield.lam == 0.0:
            return self.gravity.jet(p)
        E, dE = self._first(p)
        ddE = np.empty((4, 4, 4, 4))
        q = np.asarray(p, dtype=float)
        for s in range(4):
            step = np.zeros(4)
            step[s] = self.fd_step
            _, plus = self._first(q + step)
            _, minus = self._first(q - step)
            ddE[:, :, :, s] = (plus - minus) / (2.0 * self.fd_step)
        ddE = 0.5 * (ddE + ddE.transpose(0, 1, 3, 2))
        return VierbeinJet(E, dE, ddE)


def density(E) -> float:
    """The volume density h = det(h^k_mu) = 1 / det(h_k^mu)."""
    return 1.0 / det4(E)


def density_gradient(E, dE, Einv=None) -> np.ndarray:
    """d_mu h for h = 1/det(E), via Jacobi's formula."""
    if Einv is None:
        Einv = np.linalg.inv(E)
    return -density(E) * np.einsum("mk,kmn->n", Einv, dE)


# ---------------------------------------------------------------------------
# metrics


def metric_from_vierbein(E) -> np.ndarray:
    """g^{mu nu} = h_i^mu h_j^nu eta^{ij}."""
    E = np.asarray(E, dtype=float)
    return E.T @ ETA @ E


def gravity_metric(hg, p) -> np.ndarray:
    """ghat^{mu nu} of the gravitational bundle at ``p``."""
    E = hg.value(p)
    _check_nondegenerate(E, p)
    g = metric_from_vierbein(E)
    return 0.5 * (g + g.T)


def sfield_metric(s: SFieldConfig, hg, p) -> np.ndarray:
    """g_S^{mu nu} = lam^2 d^mu phi d^nu phi, indices raised with ghat."""
    if s.lam == 0.0:
        return np.zeros((4, 4))
    grad = eval_jet2(s.phi, p).grad
    up = gravity_metric(hg, p) @ grad
    return s.lam**2 * np.outer(up, up)


def signature(g) -> Tuple[int, int]:
    """(number of positive, number of negative) eigenvalues of a symmetric matrix."""
    w = np.linalg.eigvalsh(0.5 * (g + np.transpose(g)))
    tol = 1e-12 * max(1.0, float(np.abs(w).max()))
    return int(np.sum(w > tol)), int(np.sum(w < -tol))


def composite_metric(hg, s: SFieldConfig, p) -> Tuple[np.ndarray, np.ndarray]:
    """(g^{mu nu}, g_{mu nu}) for g = ghat + g_S."""
    g_up = gravity_metric(hg, p) + sfield_metric(s, hg, p)
    if signature(g_up) != (1, 3):
        if is_degenerate(g_up):
            raise Degenerate("composite metric is degenerate", p)
        raise WrongSignature(f"composite metric has signature {signature(g_up)}", p)
    g_down = invert4(g_up, p)
    return g_up, 0.5 * (g_down + g_down.T)


def composite_vierbein(g) -> np.ndarray:
    """A vierbein ``E[i, mu]`` with E^T eta E = g, from the eigendecomposition of g.

    Gauge: eigenvectors ordered positive eigenvalue first, negatives ordered by
    the coordinate axis they lean on most, each sign-fixed so its largest
    component is positive.  g = eta gives the identity.
    """
    g = np.asarray(g, dtype=float)
    g = 0.5 * (g + g.T)
    if signature(g) != (1, 3):
        raise WrongSignature(f"metric signature {signature(g)} is not Lorentzian")
    w, Q = np.linalg.eigh(g)
    cols = []
    for i in range(4):
        v = Q[:, i]
        big = int(np.argmax(np.abs(v)))
        if v[big] < 0:
            v = -v
        cols.append((w[i], big, v))
    pos = [c for c in cols if c[0] > 0]
    neg = sorted((c for c in cols if c[0] < 0), key=lambda c: c[1])
    ordered = pos + neg
    M = np.column_stack([np.sqrt(abs(c[0])) * c[2] for c in ordered])
    return M.T


def bundle_relation(hg, hs, p) -> np.ndarray:
    """A_i^j with hhat_i^mu = A_i^j h_j^mu, i.e. A = Ehat hs^{-1}."""
    return hg.value(p) @ invert4(hs, p)


def local_global_convert(t: IndexedTensor, h, p, to: str = "global") -> IndexedTensor:
    """Swap every local slot for a global one (``to="global"``) or the reverse.

    A^mu = h_k^mu A^k and A^k = h^k_nu A^nu; lower slots use the transposed rule.
    """
    E = h.value(p)
    Einv = invert4(E, p)
    comps = t.components
    variance = list(t.variance)
    for slot, tag in enumerate(t.variance):
        if to == "global" and tag == LOCAL_UPPER:
            mat, new = E.T, GLOBAL_UPPER  # [mu, k]
        elif to == "global" and tag == LOCAL_LOWER:
            mat, new = Einv, GLOBAL_LOWER  # h^k_mu as [mu, k]
        elif to == "local" and tag == GLOBAL_UPPER:
            mat, new = Einv.T, LOCAL_UPPER  # [k, mu]
        elif to == "local" and tag == GLOBAL_LOWER:
            mat, new = E, LOCAL_LOWER  # h_k^mu as [k, mu]
        else:
            continue
        comps = np.moveaxis(np.tensordot(mat, comps, axes=([1], [slot])), 0, slot)
        variance[slot] = new
    return IndexedTensor(comps, tuple(variance))


# ---------------------------------------------------------------------------
# local connections


def _antisym_from_pairs(pairs: Dict[Tuple[int, int], np.ndarray], shape_tail):
    A = np.zeros((4, 4) + shape_tail)
    for (k, l), comp in pairs.items():
        A[k, l] = comp
        A[l, k] = -comp
    return A


class FrameConnection:
    """A^{kl}_mu = -a^k_j d_mu a^{lj} from a local Lorentz frame a^k_j(x)."""

    def __init__(self, frame: Sequence[Sequence[Expression]], tol: float = FRAME_TOL):
        self.frame = tuple(tuple(r) for r in frame)
        self.tol = tol

    def frame_jet(self, p):
        a = np.empty((4, 4))
        da = np.empty((4, 4, 4))
        dda = np.empty((4, 4, 4, 4))
        for k in range(4):
            for j in range(4):
                jet = eval_jet2(self.frame[k][j], p)
                a[k, j] = jet.value
                da[k, j] = jet.grad
                dda[k, j] = jet.hess
        err = float(np.abs(a @ ETA @ a.T - ETA).max())
        if err > self.tol:
            raise FrameNotOrthonormal(f"frame violates a eta a^T = eta by {err:.3e}", p)
        return a, da, dda

    def value(self, p):
        return self.jet(p)[0]

    def jet(self, p):
        a, da, dda = self.frame_jet(p)
        # A[:, :, mu] = -a eta da_mu^T
        A = -np.einsum("kj,jm,lmu->klu", a, ETA, da)
        # d_nu A_mu = -(da_nu eta da_mu^T + a eta dda_{mu nu}^T)
        dA = -(
            np.einsum("kjn,jm,lmu->klun", da, ETA, da)
            + np.einsum("kj,jm,lmun->klun", a, ETA, dda)
        )
        return A, dA


class DirectConnection:
    """A^{kl}_mu given as expressions for k < l; the rest follows by antisymmetry."""

    def __init__(self, components: Dict[Tuple[int, int], Sequence[Expression]]):
        comps = {}
        for (k, l), exprs in components.items():
            if not 0 <= k < l <= 3:
                raise ValueError(f"direct connection pair {(k, l)} must satisfy k < l")
            if len(exprs) != 4:
                raise ValueError("each connection pair needs four expressions (mu = 0..3)")
            comps[(k, l)] = tuple(exprs)
        self.components = comps

    def value(self, p):
        return _antisym_from_pairs(
            {kl: np.array([evaluate(e, p) for e in ex]) for kl, ex in self.components.items()}, (4,)
        )

    def jet(self, p):
        vals = {}
        grads = {}
        for kl, ex in self.components.items():
            jets = [eval_jet2(e, p) for e in ex]
            vals[kl] = np.array([j.value for j in jets])
            grads[kl] = np.array([j.grad for j in jets])  # [mu, nu]
        return _antisym_from_pairs(vals, (4,)), _antisym_from_pairs(grads, (4, 4))


class ZeroConnection:
    def value(self, p):
        return np.zeros((4, 4, 4))

    def jet(self, p):
        return np.zeros((4, 4, 4)), np.zeros((4, 4, 4, 4))


class ConstantFrameConnection:
    """A connection rotated by a constant Lorentz matrix, A^{kl} -> Lambda^k_m Lambda^l_n A^{mn}."""

    def __init__(self, base, lam):
        self.base = base
        self.lam = np.asarray(lam, dtype=float)

    def value(self, p):
        return np.einsum("km,mnu,ln->klu", self.lam, self.base.value(p), self.lam)

    def jet(self, p):
        A, dA = self.base.jet(p)
        L = self.lam
        return np.einsum("km,mnu,ln->klu", L, A, L), np.einsum("km,mnuv,ln->kluv", L, dA, L)


def _basis_pairs():
    return [(k, l) for k in range(4) for l in range(k + 1, 4)]


_PAIRS = _basis_pairs()
_LOWER_PAIRS = [(r, m) for r in range(4) for m in range(r + 1, 4)]


def _connection_basis():
    """24 basis connections, one per (k<l pair, mu)."""
    B = np.zeros((24, 4, 4, 4))
    n = 0
    for k, l in _PAIRS:
        for mu in range(4):
            B[n, k, l, mu] = 1.0
            B[n, l, k, mu] = -1.0
            n += 1
    return B


_BASIS = _connection_basis()


def _gamma_from(E, dE, A, Einv):
    """Gamma^nu_{rho mu} = -h^j_rho (d_mu h_j^nu + A_j^l_mu h_l^nu)."""
    A_low = np.einsum("jk,klm->jlm", ETA, A)  # A_j^l_mu
    inner = np.transpose(dE, (0, 2, 1)) + np.einsum("jlm,ln->jmn", A_low, E)  # [j, mu, nu]
    return -np.einsum("rj,jmn->nrm", Einv, inner)


def _torsion_vector(G):
    return np.array([G[n, r, m] - G[n, m, r] for n in range(4) for r, m in _LOWER_PAIRS])


def _levi_civita(E, dE):
    """Solve {vierbein postulate, zero torsion} for the 24 independent A^{kl}_mu."""
    Einv = np.linalg.inv(E)
    A_low_basis = np.einsum("jk,bklm->bjlm", ETA, _BASIS)
    lin = -np.einsum("rj,bjlm,ln->bnrm", Einv, A_low_basis, E)  # Gamma per basis element
    M = np.stack([_torsion_vector(lin[b]) for b in range(24)], axis=1)
    G0 = _gamma_from(E, dE, np.zeros((4, 4, 4), dtype=E.dtype), Einv)
    rhs = -_torsion_vector(G0)
    coeffs = np.linalg.solve(M, rhs)
    return np.einsum("b,bklm->klm", coeffs, _BASIS), M


def levi_civita_connection(h, p) -> np.ndarray:
    """The torsion-free A^{kl}_mu of the bundle ``h`` at ``p``."""
    j = h.jet(p) if not isinstance(h, VierbeinJet) else h
    _check_nondegenerate(j.value, p)
    A, M = _levi_civita(j.value, j.d1)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise SingularSystem("Levi-Civita system is rank deficient", p)
    return A


class LeviCivitaConnection:
    """The torsion-free connection of a bundle; derivatives by complex step."""

    def __init__(self, bundle):
        self.bundle = bundle

    def value(self, p):
        return levi_civita_connection(self.bundle, p)

    def jet(self, p):
        j = self.bundle.jet(p)
        A = levi_civita_connection(j, p)
        dA = np.empty((4, 4, 4, 4))
        for nu in range(4):
            _, dA[..., nu] = _complex_step(
                lambda e, de: _levi_civita(e, de)[0],
                (j.value, j.d1),
                (j.d1[:, :, nu], j.d2[:, :, :, nu]),
            )
        return A, dA


def local_connection(c, p) -> np.ndarray:
    """A^{kl}_mu of any connection field at ``p``."""
    return c.value(p)


def antisymmetry_residual(A) -> float:
    return float(np.abs(A + np.swapaxes(A, 0, 1)).max())


# ---------------------------------------------------------------------------
# global connection, torsion, curvature


@dataclass(frozen=True)
class GlobalConnectionValue:
    gamma: np.ndarray  # [nu, rho, mu]
    residual: float  # max |vierbein postulate| after substitution


def postulate_residual(E, dE, A, G) -> float:
    """max | d_mu h^{k nu} + A^{kl}_mu h_l^nu + Gamma^nu_{rho mu} h^{k rho} |."""
    h_up = ETA @ E  # h^{k nu}
    d_up = np.einsum("kj,jnm->knm", ETA, dE)  # d_mu h^{k nu} as [k, nu, mu]
    res = d_up + np.einsum("klm,ln->knm", A, E) + np.einsum("nrm,kr->knm", G, h_up)
    return float(np.abs(res).max())


def global_connection_from(E, dE, A, p=None) -> GlobalConnectionValue:
    _check_nondegenerate(E, p)
    Einv = np.linalg.inv(E)
    G = _gamma_from(E, dE, A, Einv)
    return GlobalConnectionValue(G, postulate_residual(E, dE, A, G))


def global_connection(h, c, p) -> GlobalConnectionValue:
    """Gamma^nu_{rho mu} from the vanishing covariant derivative of the vierbein."""
    j = h.jet(p)
    return global_connection_from(j.value, j.d1, c.value(p), p)


def torsion(G) -> np.ndarray:
    """T^nu_{rho mu} = Gamma^nu_{rho mu} - Gamma^nu_{mu rho}."""
    G = G.gamma if isinstance(G, GlobalConnectionValue) else np.asarray(G)
    return G - np.transpose(G, (0, 2, 1))


def curvature_from(A, dA) -> np.ndarray:
    """R^{kl}_{mu nu} = d_nu A_mu - d_mu A_nu + (A_nu A_mu - A_mu A_nu)."""
    deriv = dA - np.transpose(dA, (0, 1, 3, 2))
    # (A_b eta A_a)^{kl} stored at [k, l, a, b]
    quad = np.einsum("kmb,mn,nla->klab", A, ETA, A)
    return deriv + quad - np.transpose(quad, (0, 1, 3, 2))


def curvature(c, p) -> np.ndarray:
    A, dA = c.jet(p)
    return curvature_from(A, dA)


@dataclass(frozen=True)
class RicciValue:
    ricci: np.ndarray  # R^l_mu, [l, mu]
    scalar: float
    lagrangian: float  # L_IB = h R
    mixed: np.ndarray  # R^mu_nu


def ricci_from(E, R) -> RicciValue:
    """Contractions of the curvature with the vierbein.

    R^l_mu = h_k^nu R^{kl}_{mu nu}, R^mu_nu = h_l^mu R^l_nu and
    R = R^mu_mu = h_l^mu h_k^nu R^{kl}_{mu nu}.
    """
    ric = np.einsum("kn,klmn->lm", E, R)
    mixed = np.einsum("lm,ln->mn", E, ric)
    scalar = float(np.trace(mixed))
    return RicciValue(ric, scalar, density(E) * scalar, mixed)


def ricci_scalar_lagrangian(h, c, p) -> RicciValue:
    E = h.value(p)
    _check_nondegenerate(E, p)
    return ricci_from(E, curvature(c, p))


def einstein_from(ricci: RicciValue) -> np.ndarray:
    """B^mu_nu = R^mu_nu - 1/2 delta^mu_nu R."""
    return ricci.mixed - 0.5 * np.eye(4) * ricci.scalar


def einstein_tensor_B(h, c, p) -> np.ndarray:
    return einstein_from(ricci_scalar_lagrangian(h, c, p))


# ---------------------------------------------------------------------------
# volume-element diagnostic


@dataclass(frozen=True)
class VolumeElementReport:
    det_gravity: float  # det(hhat_k^mu)
    sfield_rank: int
    sfield_det: float  # determinant of any vierbein for g_S (0 when rank < 4)
    equal_volumes_possible: bool
    composite_nondegenerate: bool

    def as_dict(self):
        return {
            "det_gravity": self.det_gravity,
            "sfield_rank": self.sfield_rank,
            "sfield_det": self.sfield_det,
            "equal_volumes_possible": self.equal_volumes_possible,
            "composite_nondegenerate": self.composite_nondegenerate,
        }


def volume_element_check(hg, s: SFieldConfig, p) -> VolumeElementReport:
    """Compare the volume elements of the two bundles.

    The gradient coupling makes g_S rank <= 1, so it has no invertible
    vierbein and equal volume elements cannot hold.  This is reported, not
    raised.
    """
    E = hg.value(p)
    det_g = det4(E)
    gs = sfield_metric(s, hg, p)
    w = np.linalg.eigvalsh(gs)
    scale = max(1.0, float(np.abs(gravity_metric(hg, p)).max()))
    rank = int(np.sum(np.abs(w) > 1e-12 * scale))
    sdet = float(np.sqrt(abs(np.linalg.det(gs)))) if rank == 4 else 0.0
    try:
        composite_metric(hg, s, p)
        ok = True
    except (Degenerate, WrongSignature):
        ok = False
    possible = rank == 4 and np.isclose(abs(sdet), abs(det_g))
    return VolumeElementReport(det_g, rank, sdet, bool(possible), ok)
