"""Deliberately naive reference computations for the test suite.

Nothing here imports the tensor, gamma or geometry modules: the oracles work
from expressions and raw nested loops only, so an agreement between an oracle
and the main code path is evidence rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Degenerate
from .expr import eval_jet2

R4 = range(4)


def cofactor_det(m) -> float:
    """Determinant by Laplace expansion along the first row."""
    m = [list(map(float, row)) for row in m]
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_det(minor)
    return total


def cofactor_inverse(m):
    """Adjugate over determinant; raises Degenerate on a zero determinant."""
    n = len(m)
    d = cofactor_det(m)
    if d == 0.0:
        raise Degenerate("singular matrix in oracle inverse")
    inv = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [m[r][c] for c in range(n) if c != j] for r in range(n) if r != i
            ]
            inv[j][i] = (-1) ** (i + j) * cofactor_det(minor) / d
    return inv


@dataclass
class MetricOracleResult:
    christoffel: np.ndarray  # Gamma^nu_{rho mu}
    riemann: np.ndarray  # R^rho_{sigma mu nu}
    ricci: np.ndarray  # R_{sigma nu}
    scalar: float
    einstein_mixed: np.ndarray  # G^mu_nu = R^mu_nu - 1/2 delta R
    g_inv: np.ndarray


def _metric_jets(g_exprs, p):
    """Values, first and second derivatives of g_{mu nu} given as a symmetric 4x4 of expressions."""
    g = [[0.0] * 4 for _ in R4]
    dg = [[[0.0] * 4 for _ in R4] for _ in R4]
    ddg = [[[[0.0] * 4 for _ in R4] for _ in R4] for _ in R4]
    for a in R4:
        for b in R4:
            j = eval_jet2(g_exprs[a][b], p)
            g[a][b] = j.value
            for c in R4:
                dg[a][b][c] = j.grad[c]
                for d in R4:
                    ddg[a][b][c][d] = j.hess[c][d]
    return g, dg, ddg


def christoffel_from_metric(g_exprs, p) -> np.ndarray:
    """Gamma^nu_{rho mu} = 1/2 g^{nu s}(d_rho g_{s mu} + d_mu g_{s rho} - d_s g_{rho mu})."""
    return metric_curvature(g_exprs, p).christoffel


def metric_curvature(g_exprs, p) -> MetricOracleResult:
    """Textbook Levi-Civita curvature of a metric g_{mu nu} given as expressions.

    Conventions: R^r_{s m n} = d_m Gamma^r_{n s} - d_n Gamma^r_{m s}
    + Gamma^r_{m l} Gamma^l_{n s} - Gamma^r_{n l} Gamma^l_{m s};
    R_{s n} = R^r_{s r n}; R = g^{s n} R_{s n}.
    """
    g, dg, ddg = _metric_jets(g_exprs, p)
    gi = cofactor_inverse(g)
    # d_c g^{ab} = -g^{ae} d_c g_{ef} g^{fb}
    dgi = [[[-sum(gi[a][e] * dg[e][f][c] * gi[f][b] for e in R4 for f in R4) for c in R4]
            for b in R4] for a in R4]
    # lowered Christoffel [s, r, m] = 1/2 (d_r g_{s m} + d_m g_{s r} - d_s g_{r m})
    low = [[[0.5 * (dg[s][m][r] + dg[s][r][m] - dg[r][m][s]) for m in R4] for r in R4] for s in R4]
    dlow = [[[[0.5 * (ddg[s][m][r][c] + ddg[s][r][m][c] - ddg[r][m][s][c]) for c in R4]
              for m in R4] for r in R4] for s in R4]
    G = np.zeros((4, 4, 4))
    dG = np.zeros((4, 4, 4, 4))  # [n, r, m, c] = d_c Gamma^n_{r m}
    for n in R4:
        for r in R4:
            for m in R4:
                G[n, r, m] = sum(gi[n][s] * low[s][r][m] for s in R4)
                for c in R4:
                    dG[n, r, m, c] = sum(
                        dgi[n][s][c] * low[s][r][m] + gi[n][s] * dlow[s][r][m][c] for s in R4
                    )
    Riem = np.zeros((4, 4, 4, 4))
    for r in R4:
        for s in R4:
            for m in R4:
                for n in R4:
                    val = dG[r, n, s, m] - dG[r, m, s, n]
                    for l in R4:
                        val += G[r, m, l] * G[l, n, s] - G[r, n, l] * G[l, m, s]
                    Riem[r, s, m, n] = val
    Ric = np.zeros((4, 4))
    for s in R4:
        for n in R4:
            Ric[s, n] = sum(Riem[r, s, r, n] for r in R4)
    scalar = sum(gi[s][n] * Ric[s, n] for s in R4 for n in R4)
    Gmix = np.zeros((4, 4))
    for m in R4:
        for n in R4:
            Gmix[m, n] = sum(gi[m][s] * Ric[s, n] for s in R4) - (0.5 * scalar if m == n else 0.0)
    return MetricOracleResult(G, Riem, Ric, float(scalar), Gmix, np.array(gi))


def gamma_product_expand(matrices, psi, psibar) -> complex:
    """psibar M1 M2 ... Mn psi by explicit element-wise loops, no matrix routines."""
    psi = [complex(z) for z in psi]
    row = [complex(z) for z in psibar]
    for mat in matrices:
        new = [0j] * 4
        for b in R4:
            acc = 0j
            for a in R4:
                acc += row[a] * complex(mat[a][b])
            new[b] = acc
        row = new
    total = 0j
    for a in R4:
        total += row[a] * psi[a]
    return total


def dirac_adjoint_loops(psi, g0):
    return [sum(complex(psi[a]).conjugate() * complex(g0[a][b]) for a in R4) for b in R4]


# ---------------------------------------------------------------------------
# closed-form textbook results


def frw_christoffel(a: float, adot: float) -> np.ndarray:
    """Christoffel symbols of ds^2 = dt^2 - a(t)^2 (dx^2 + dy^2 + dz^2)."""
    G = np.zeros((4, 4, 4))
    for i in (1, 2, 3):
        G[0, i, i] = a * adot
        G[i, 0, i] = adot / a
        G[i, i, 0] = adot / a
    return G


def frw_ricci_scalar(a: float, adot: float, addot: float) -> float:
    """R = -6 (addot/a + adot^2/a^2) for signature (+, -, -, -)."""
    return -6.0 * (addot / a + adot**2 / a**2)


def frw_einstein_mixed(a: float, adot: float, addot: float) -> np.ndarray:
    """G^mu_nu for flat FRW: G^0_0 = 3 H^2, G^i_i = 2 addot/a + H^2."""
    H = adot / a
    return np.diag([3.0 * H**2] + [2.0 * addot / a + H**2] * 3)


def schwarzschild_christoffel(r: float, theta: float, mass: float) -> np.ndarray:
    """Nonzero Christoffels of diag(f, -1/f, -r^2, -r^2 sin^2 theta), f = 1 - 2M/r.

    Coordinates (t, r, theta, phi) = (x0, x1, x2, x3).
    """
    f = 1.0 - 2.0 * mass / r
    s, c = math.sin(theta), math.cos(theta)
    G = np.zeros((4, 4, 4))

    def sym(n, a, b, v):
        G[n, a, b] = v
        G[n, b, a] = v

    sym(0, 0, 1, mass / (r * r * f))
    G[1, 0, 0] = mass * f / (r * r)
    G[1, 1, 1] = -mass / (r * r * f)
    G[1, 2, 2] = -r * f
    G[1, 3, 3] = -r * f * s * s
    sym(2, 1, 2, 1.0 / r)
    G[2, 3, 3] = -s * c
    sym(3, 1, 3, 1.0 / r)
    sym(3, 2, 3, c / s)
    return G
