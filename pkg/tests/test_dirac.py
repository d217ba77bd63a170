import numpy as np
import pytest

from builders import (
    P,
    constant_direct_connection,
    flat_bundle,
    frw_bundle,
    milne_bundle,
    random_antisym,
    random_bundle,
    random_direct_connection,
    random_dirac,
    random_point,
)
from sfield import dirac as dd
from sfield import geometry as geo
from sfield.errors import NonRealTensor
from sfield.expr import parse_complex
from sfield.gamma import DIRAC, adjoint, spin_density, spinor_transform, weyl_gammas
from sfield.oracles import dirac_adjoint_loops, frw_einstein_mixed, gamma_product_expand
from sfield.tensor import lorentz_matrix, minkowski_eta

ETA = minkowski_eta()
ZERO_C = geo.ZeroConnection()
MOMENTUM = np.array([np.sqrt(1.0 + 0.09 + 0.04 + 0.01), 0.3, -0.2, 0.1])


def constant_dirac(psi, mass):
    return dd.DiracField([parse_complex((repr(float(z.real)), repr(float(z.imag)))) for z in psi], mass)


def test_field_validation():
    z = parse_complex(("0", "0"))
    with pytest.raises(ValueError):
        dd.DiracField([z] * 3, 1.0)
    with pytest.raises(ValueError):
        dd.DiracField([z] * 4, -1.0)
    with pytest.raises(ValueError):
        dd.plane_wave([1.0, 0.5, 0, 0], 1.0)


def test_covariant_derivative_without_connection_is_gradient():
    rng = np.random.default_rng(30)
    d = random_dirac(rng)
    p = random_point(rng)
    cov, cov_bar = dd.covariant_spinor_derivative(d, ZERO_C, dd.AdjointSign.AS_PRINTED, p)
    _, dpsi = d.jet(p)
    assert np.array_equal(cov, dpsi)
    assert np.allclose(cov_bar, np.conj(dpsi) @ DIRAC.g0)


def test_covariant_derivative_constant_fields():
    rng = np.random.default_rng(31)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    A = np.stack([random_antisym(rng) for _ in range(4)], axis=-1)
    cov, _ = dd.covariant_spinor_derivative(constant_dirac(psi, 1.0), constant_direct_connection(A), dd.AdjointSign.STANDARD, (0, 0, 0, 0))
    for mu in range(4):
        expect = 0.25 * np.einsum("kl,kab,lbc,c->a", A[:, :, mu], DIRAC.lower, DIRAC.lower, psi)
        assert np.allclose(cov[mu], expect, atol=1e-14)


def test_adjoint_sign_diagnostic():
    rng = np.random.default_rng(32)
    for _ in range(5):
        d = random_dirac(rng)
        c = random_direct_connection(rng)
        diag = dd.adjoint_consistency(d, c, random_point(rng))
        assert diag["standard"] < 1e-12
        assert diag["as-printed"] > 1e-6


def test_lagrangian_trivial_cases():
    rng = np.random.default_rng(33)
    assert dd.dirac_lagrangian(dd.zero_dirac(1.0), random_bundle(rng), random_direct_connection(rng), (0, 0, 0, 0)) == 0.0
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    L = dd.dirac_lagrangian(constant_dirac(psi, 0.7), flat_bundle(), ZERO_C, (0, 0, 0, 0))
    assert L == pytest.approx(0.7 * (adjoint(psi) @ psi).real, abs=1e-13)


def test_lagrangian_flat_limit_matches_special_relativistic_form():
    rng = np.random.default_rng(34)
    d = random_dirac(rng, mass=1.3)
    p = random_point(rng)
    psi, dpsi = d.jet(p)
    bar = dirac_adjoint_loops(psi, DIRAC.g0)
    dbar = [dirac_adjoint_loops(dpsi[mu], DIRAC.g0) for mu in range(4)]
    sr = 1.3 * gamma_product_expand([], psi, bar)
    for k in range(4):
        sr += 0.5j * (gamma_product_expand([DIRAC.upper[k]], dpsi[k], bar) - gamma_product_expand([DIRAC.upper[k]], psi, dbar[k]))
    assert dd.dirac_lagrangian(d, flat_bundle(), ZERO_C, p) == pytest.approx(sr.real, abs=1e-12)


@pytest.mark.parametrize("gammas", [DIRAC, weyl_gammas()], ids=["dirac", "weyl"])
@pytest.mark.parametrize("which", [0, 1])
def test_plane_wave_solves_the_equation(gammas, which):
    d = dd.plane_wave(MOMENTUM, 1.0, gammas, which)
    rng = np.random.default_rng(35)
    for _ in range(5):
        p = random_point(rng)
        assert dd.dirac_residual(d, flat_bundle(), ZERO_C, p, gammas).max_abs() < 1e-10
        assert abs(dd.dirac_lagrangian(d, flat_bundle(), ZERO_C, p, gammas)) < 1e-10
        oc = dd.onshell_lagrangian_check(d, flat_bundle(), ZERO_C, p, gammas)
        assert abs(oc.two_lagrangian) < 1e-10 and oc.bound < 1e-10


def test_zero_field_residuals():
    rng = np.random.default_rng(36)
    h, c = random_bundle(rng), random_direct_connection(rng)
    p = random_point(rng)
    z = dd.zero_dirac(1.0)
    assert dd.dirac_residual(z, h, c, p).max_abs() == 0.0
    oc = dd.onshell_lagrangian_check(z, h, c, p)
    assert oc.two_lagrangian == 0.0 and oc.bound == 0.0 and oc.holds
    assert not dd.stress_energy(z, h, c, p).T.any()


def test_eq22_equals_h_times_eq23():
    rng = np.random.default_rng(37)
    for _ in range(20):
        d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
        p = random_point(rng)
        r22 = dd.eq22_residual(d, h, c, p)
        r23 = dd.dirac_residual(d, h, c, p)
        dens = geo.density(h.value(p))
        assert np.abs(r22.psi - dens * r23.psi).max() < 1e-10
        assert np.abs(r22.psibar - dens * r23.psibar).max() < 1e-10


def test_onshell_identity_off_shell():
    rng = np.random.default_rng(38)
    for _ in range(20):
        d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
        oc = dd.onshell_lagrangian_check(d, h, c, random_point(rng))
        assert oc.holds
        assert oc.gap <= 1e-10 * max(1.0, oc.bound)


def test_stress_energy_plane_wave_against_expansion():
    d = dd.plane_wave(MOMENTUM, 1.0)
    p = (0.2, -0.3, 0.4, 0.1)
    T = dd.stress_energy(d, flat_bundle(), ZERO_C, p).T
    psi = d.value(p)
    bar = dirac_adjoint_loops(psi, DIRAC.g0)
    for l in range(4):
        cur = gamma_product_expand([DIRAC.upper[l]], psi, bar)
        for mu in range(4):
            assert T[l, mu] == pytest.approx(-MOMENTUM[mu] * cur.real, abs=1e-12)
    assert T[0, 0] < 0


def test_stress_energy_constant_field_without_connection():
    rng = np.random.default_rng(39)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert not dd.stress_energy(constant_dirac(psi, 1.0), flat_bundle(), ZERO_C, (0, 0, 0, 0)).T.any()


def test_stress_energy_strict_reality():
    rng = np.random.default_rng(40)
    d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
    p = random_point(rng)
    loose = dd.stress_energy(d, h, c, p, strict=False)
    assert loose.imag_residue > 1e-6
    with pytest.raises(NonRealTensor) as exc:
        dd.stress_energy(d, h, c, p)
    assert exc.value.residue == pytest.approx(loose.imag_residue)


def test_field_eq_A_trivial_and_antisymmetric():
    assert not dd.field_eq_A_residual(dd.zero_dirac(), flat_bundle(), ZERO_C, (0, 0, 0, 0)).any()
    rng = np.random.default_rng(41)
    for _ in range(10):
        res = dd.field_eq_A_residual(random_dirac(rng), random_bundle(rng), random_direct_connection(rng), random_point(rng))
        assert np.abs(res + np.swapaxes(res, 1, 2)).max() < 1e-10


def test_field_eq_A_levi_civita_sourceless():
    h = frw_bundle()
    c = geo.LeviCivitaConnection(h)
    assert np.abs(dd.field_eq_A_residual(None, h, c, (0.3, 0.1, -0.2, 0.5))).max() < 1e-8
    rng = np.random.default_rng(42)
    h = random_bundle(rng)
    assert np.abs(dd.field_eq_A_residual(None, h, geo.LeviCivitaConnection(h), random_point(rng))).max() < 1e-8


def test_field_eq_A_source_is_spin_density():
    rng = np.random.default_rng(43)
    d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
    fp = dd.field_point(d, h, c, random_point(rng))
    assert np.array_equal(dd.spin_density_at(fp), spin_density(fp.psi, fp.E, DIRAC, fp.p))
    src = dd.field_eq_A_at(dd.field_point(None, h, c, fp.p)) - dd.field_eq_A_at(fp)
    assert np.allclose(src, fp.h * dd.spin_density_at(fp), atol=1e-12)


def test_field_eq_h_vacuum():
    assert not dd.field_eq_h_residual(dd.zero_dirac(), flat_bundle(), ZERO_C, (0, 0, 0, 0)).any()
    h = milne_bundle()
    c = geo.LeviCivitaConnection(h)
    rng = np.random.default_rng(44)
    for _ in range(5):
        p = (rng.uniform(1, 2),) + tuple(rng.uniform(-1, 1, 3))
        assert np.abs(dd.field_eq_h_residual(dd.zero_dirac(), h, c, p)).max() < 1e-8


def test_field_eq_h_frw_is_einstein_combination():
    import math

    h = frw_bundle()
    c = geo.LeviCivitaConnection(h)
    t = 0.3
    p = (t, 0.1, -0.2, 0.5)
    a = math.exp(t / 2) + t * t / 5
    adot = 0.5 * math.exp(t / 2) + 2 * t / 5
    addot = 0.25 * math.exp(t / 2) + 0.4
    res = dd.field_eq_h_residual(dd.zero_dirac(), h, c, p)
    Einv = np.linalg.inv(h.value(p))
    expect = -2 * a**3 * Einv.T @ frw_einstein_mixed(a, adot, addot)
    assert np.abs(res - expect).max() < 1e-8


def test_commutator_trivial_and_constant():
    rng = np.random.default_rng(45)
    d = random_dirac(rng)
    assert dd.commutator_check(d, flat_bundle(), ZERO_C, (0, 0, 0, 0)).diff < 1e-9
    A = np.stack([random_antisym(rng) for _ in range(4)], axis=-1)
    chk = dd.commutator_check(d, flat_bundle(), constant_direct_connection(A), random_point(rng))
    assert chk.diff < 1e-7


def test_commutator_random_and_convergence():
    rng = np.random.default_rng(46)
    d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
    p = random_point(rng)
    assert dd.commutator_check(d, h, c, p).diff < 1e-5
    diffs = [dd.commutator_check(d, h, c, p, step=s).diff for s in (4e-3, 2e-3, 1e-3)]
    orders = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
    assert orders.min() >= 1.8


def test_naive_T_divergence():
    d = dd.plane_wave(MOMENTUM, 1.0)
    assert np.abs(dd.naive_T_divergence(d, flat_bundle(), ZERO_C, (0.1, 0.2, 0.3, 0.4))).max() < 1e-6
    assert not dd.naive_T_divergence(dd.zero_dirac(), frw_bundle(), ZERO_C, (0.1, 0.2, 0.3, 0.4)).any()


def test_bianchi_torsion_free():
    assert not dd.B_divergence(flat_bundle(), ZERO_C, (0, 0, 0, 0)).any()
    h = frw_bundle()
    assert np.abs(dd.B_divergence(h, geo.LeviCivitaConnection(h), (0.3, 0.1, -0.2, 0.5))).max() < 1e-6
    rng = np.random.default_rng(47)
    h = random_bundle(rng)
    assert np.abs(dd.B_divergence(h, geo.LeviCivitaConnection(h), random_point(rng))).max() < 1e-6


def test_current():
    J, div = dd.current_and_divergence(dd.zero_dirac(), flat_bundle(), (0, 0, 0, 0))
    assert not J.any() and div == 0.0
    d = dd.plane_wave(MOMENTUM, 1.0)
    J1, div1 = dd.current_and_divergence(d, flat_bundle(), (0.1, 0.2, 0.3, 0.4))
    J2, _ = dd.current_and_divergence(d, flat_bundle(), (-0.5, 0.7, 0.0, 0.9))
    assert np.allclose(J1, J2, atol=1e-12)
    assert abs(div1) < 1e-8
    rng = np.random.default_rng(48)
    for _ in range(10):
        d, h = random_dirac(rng), random_bundle(rng)
        p = random_point(rng)
        J, _ = dd.current_and_divergence(d, h, p)
        psi = d.value(p)
        assert J[0] >= 0
        assert J[0] == pytest.approx(geo.density(h.value(p)) * (h.value(p)[:, 0] @ np.einsum("a,kab,b->k", adjoint(psi), DIRAC.upper, psi)).real)


def test_four_momentum():
    assert not dd.four_momentum(flat_bundle(), ZERO_C, 0.0, [(-1, 1)] * 3, 2).any()
    bump = "exp(-(x1^2 + x2^2 + x3^2)/8)"
    c = geo.DirectConnection({(0, 1): [P("0"), P(f"0.5*{bump}"), P(f"0.2*x1*{bump}"), P("0")]})
    Ps = [dd.four_momentum(flat_bundle(), c, 0.0, [(-1, 1)] * 3, n) for n in (3, 6, 12)]
    d1 = np.abs(Ps[1] - Ps[0]).max()
    d2 = np.abs(Ps[2] - Ps[1]).max()
    assert np.log2(d1 / d2) >= 2 - 0.05
    assert d2 / np.abs(Ps[2]).max() < 0.01
    with pytest.raises(ValueError):
        dd.four_momentum(flat_bundle(), c, 0.0, [(-1, 1)] * 3, 0)


def test_global_lorentz_covariance():
    rng = np.random.default_rng(49)
    for _ in range(5):
        d, h, c = random_dirac(rng), random_bundle(rng), random_direct_connection(rng)
        p = random_point(rng)
        w = random_antisym(rng)
        lam = lorentz_matrix(w)
        S = spinor_transform(w)
        h2 = geo.ConstantFrameBundle(h, lam)
        c2 = geo.ConstantFrameConnection(c, lam)
        d2 = dd.TransformedDirac(d, S)
        assert dd.dirac_lagrangian(d2, h2, c2, p) == pytest.approx(dd.dirac_lagrangian(d, h, c, p), abs=1e-9)
        r1 = geo.ricci_scalar_lagrangian(h, c, p)
        r2 = geo.ricci_scalar_lagrangian(h2, c2, p)
        assert r2.scalar == pytest.approx(r1.scalar, abs=1e-9)
        assert r2.lagrangian == pytest.approx(r1.lagrangian, abs=1e-9)
        psi, psi2 = d.value(p), d2.value(p)
        assert adjoint(psi2) @ psi2 == pytest.approx(adjoint(psi) @ psi, abs=1e-9)


def test_eq43_experimental_is_finite():
    rng = np.random.default_rng(50)
    q = dd.eq43_experimental(random_dirac(rng), random_bundle(rng), random_direct_connection(rng), random_point(rng))
    assert q.shape == (4,) and np.isfinite(q).all()
    assert not dd.eq43_experimental(dd.zero_dirac(), flat_bundle(), ZERO_C, (0, 0, 0, 0)).any()
