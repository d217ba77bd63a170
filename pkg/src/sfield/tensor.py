"""Fixed-size 4x4 linear algebra and index bookkeeping for spacetime tensors.

Storage convention: every tensor is a numpy array of shape ``(4,) * rank``
indexed row-major in the order its index tags are listed.  Matrices are plain
``(4, 4)`` float arrays; ``m[a, b]`` is the component with first index ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from .errors import Degenerate

GLOBAL_UPPER = "global-upper"
GLOBAL_LOWER = "global-lower"
LOCAL_UPPER = "local-upper"
LOCAL_LOWER = "local-lower"

VARIANCES = (GLOBAL_UPPER, GLOBAL_LOWER, LOCAL_UPPER, LOCAL_LOWER)

_FLIP = {
    GLOBAL_UPPER: GLOBAL_LOWER,
    GLOBAL_LOWER: GLOBAL_UPPER,
    LOCAL_UPPER: LOCAL_LOWER,
    LOCAL_LOWER: LOCAL_UPPER,
}

# |det| <= DEGENERACY_RTOL * (max|entry|)**4 counts as singular
DEGENERACY_RTOL = 1e-10

_ETA = np.diag([1.0, -1.0, -1.0, -1.0])
_ETA.setflags(write=False)


def minkowski_eta() -> np.ndarray:
    """The local Lorentz metric diag(+1, -1, -1, -1) (a read-only array)."""
    return _ETA


def _as_matrix4(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def det4(m) -> float:
    """Determinant of a 4x4 matrix (LU factorisation)."""
    return float(np.linalg.det(_as_matrix4(m)))


def is_degenerate(m) -> bool:
    m = _as_matrix4(m)
    scale = np.abs(m).max()
    if scale == 0.0:
        return True
    return abs(np.linalg.det(m)) <= DEGENERACY_RTOL * scale**4


def invert4(m, point=None) -> np.ndarray:
    """Inverse of a 4x4 matrix.

    Raises :class:`Degenerate` when ``|det m| <= 1e-10 * max|m_ij|**4``; the
    threshold is scale aware so a uniformly small but well conditioned matrix
    still inverts.
    """
    m = _as_matrix4(m)
    if is_degenerate(m):
        raise Degenerate(f"matrix is degenerate (det={np.linalg.det(m):.3e})", point)
    return np.linalg.inv(m)


@dataclass(frozen=True)
class IndexedTensor:
    """Components plus one variance tag per slot.

    ``components`` has shape ``(4,) * rank``; the array is made read-only on
    construction.
    """

    components: np.ndarray
    variance: Tuple[str, ...]

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        rank = len(self.variance)
        if not 1 <= rank <= 4:
            raise ValueError(f"rank must be 1..4, got {rank}")
        if comps.shape != (4,) * rank:
            raise ValueError(f"components shape {comps.shape} does not match rank {rank}")
        for tag in self.variance:
            if tag not in VARIANCES:
                raise ValueError(f"unknown variance tag {tag!r}")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", tuple(self.variance))

    @property
    def rank(self) -> int:
        return len(self.variance)


def reindex(t: IndexedTensor, slot: int, metric) -> IndexedTensor:
    """Raise or lower index ``slot`` by contracting it with ``metric``.

    The caller passes the metric appropriate to the slot's family and
    direction: eta for local indices, g_{mu nu} to lower / g^{mu nu} to raise a
    global one.  Only the variance tag of ``slot`` is flipped.
    """
    if not 0 <= slot < t.rank:
        raise ValueError(f"slot {slot} out of range for rank {t.rank}")
    metric = _as_matrix4(metric)
    moved = np.tensordot(metric, t.components, axes=([1], [slot]))
    comps = np.moveaxis(moved, 0, slot)
    variance = list(t.variance)
    variance[slot] = _FLIP[variance[slot]]
    return IndexedTensor(comps, tuple(variance))


def lorentz_matrix(omega) -> np.ndarray:
    """Constant Lorentz transformation Lambda = exp(omega eta).

    ``omega`` is any antisymmetric 4x4 array (upper indices); the result obeys
    Lambda^T eta Lambda = eta and acts on upper local indices, V^k -> Lambda^k_l V^l.
    """
    omega = np.asarray(omega, dtype=float)
    if np.abs(omega + omega.T).max() > 1e-14 * max(1.0, np.abs(omega).max()):
        raise ValueError("generator must be antisymmetric")
    return scipy.linalg.expm(omega @ _ETA)
