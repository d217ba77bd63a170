import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sfield.errors import Degenerate
from sfield.oracles import cofactor_det, cofactor_inverse
from sfield.tensor import (
    GLOBAL_LOWER,
    GLOBAL_UPPER,
    LOCAL_LOWER,
    LOCAL_UPPER,
    IndexedTensor,
    det4,
    invert4,
    is_degenerate,
    lorentz_matrix,
    minkowski_eta,
    reindex,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
mat4 = arrays(np.float64, (4, 4), elements=finite)


def test_eta_is_read_only():
    eta = minkowski_eta()
    assert np.array_equal(eta, np.diag([1.0, -1.0, -1.0, -1.0]))
    with pytest.raises(ValueError):
        eta[0, 0] = 2.0


def test_identity_and_eta():
    assert det4(np.eye(4)) == 1.0
    assert np.array_equal(invert4(minkowski_eta()), minkowski_eta())


def test_zero_and_rank_deficient_raise():
    with pytest.raises(Degenerate):
        invert4(np.zeros((4, 4)))
    m = np.arange(16.0).reshape(4, 4)
    with pytest.raises(Degenerate):
        invert4(m)


def test_threshold_is_scale_aware():
    # uniformly tiny but perfectly conditioned
    m = 1e-6 * np.diag([1.0, 2.0, 3.0, 4.0])
    assert not is_degenerate(m)
    assert np.allclose(invert4(m) @ m, np.eye(4))


def test_bad_shape():
    with pytest.raises(ValueError):
        det4(np.eye(3))


@settings(max_examples=200, deadline=None)
@given(mat4)
def test_det_matches_cofactor_expansion(m):
    assert det4(m) == pytest.approx(cofactor_det(m), rel=1e-9, abs=1e-9 * max(1.0, np.abs(m).max()) ** 4)


@settings(max_examples=200, deadline=None)
@given(mat4)
def test_inverse_matches_oracle_when_well_conditioned(m):
    if np.linalg.cond(m) > 1e6:
        return
    inv = invert4(m)
    assert np.allclose(inv @ m, np.eye(4), atol=1e-9)
    assert np.allclose(inv, np.array(cofactor_inverse(m)), rtol=1e-7, atol=1e-9)


def test_indexed_tensor_validation():
    t = IndexedTensor(np.ones(4), (GLOBAL_UPPER,))
    assert t.rank == 1
    with pytest.raises(ValueError):
        t.components[0] = 3.0
    with pytest.raises(ValueError):
        IndexedTensor(np.ones((4, 4)), (GLOBAL_UPPER,))
    with pytest.raises(ValueError):
        IndexedTensor(np.ones(4), ("sideways",))
    with pytest.raises(ValueError):
        IndexedTensor(np.ones((4,) * 5), (LOCAL_UPPER,) * 5)


def test_reindex_with_eta_flips_sign_of_spatial():
    v = IndexedTensor(np.array([1.0, 2.0, 3.0, 4.0]), (LOCAL_UPPER,))
    low = reindex(v, 0, minkowski_eta())
    assert low.variance == (LOCAL_LOWER,)
    assert np.array_equal(low.components, [1.0, -2.0, -3.0, -4.0])
    assert np.array_equal(reindex(low, 0, minkowski_eta()).components, v.components)


def test_reindex_middle_slot_with_metric():
    rng = np.random.default_rng(0)
    t = IndexedTensor(rng.normal(size=(4, 4, 4)), (LOCAL_UPPER, GLOBAL_UPPER, GLOBAL_LOWER))
    g = np.diag([2.0, -1.0, -3.0, -0.5])
    out = reindex(t, 1, g)
    assert out.variance == (LOCAL_UPPER, GLOBAL_LOWER, GLOBAL_LOWER)
    assert np.allclose(out.components, np.einsum("ab,kbm->kam", g, t.components))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1, 1)))
def test_lorentz_matrix_preserves_eta(w):
    omega = w - w.T
    lam = lorentz_matrix(omega)
    eta = minkowski_eta()
    assert np.allclose(lam.T @ eta @ lam, eta, atol=1e-10 * max(1.0, np.abs(lam).max()) ** 2)


def test_lorentz_matrix_rejects_symmetric():
    with pytest.raises(ValueError):
        lorentz_matrix(np.eye(4))


def test_global_lower_tag_exists():
    assert GLOBAL_LOWER != GLOBAL_UPPER
