"""Small dense linear algebra for antisymmetric tensors.

Everything here works on the tiny fixed shapes that show up on phase and
evolution space (dim 2..8): cross products, the axial (hat) map, pfaffians
by direct expansion, and rank-revealing null spaces.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = [
    "AntisymMatrix",
    "axial_to_matrix",
    "cross",
    "nullspace",
    "pfaffian",
]

_SUPPORTED_DIMS = (2, 3, 4, 5, 6, 7, 8)

#: default relative tolerance for rank decisions, shared with the 2-form module
DEFAULT_TOL = 1e-10


def cross(a, b):
    """Cross product a x b with the right-handed convention (eps_123 = +1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.cross(a, b)


class AntisymMatrix:
    """Dense antisymmetric matrix with structural antisymmetry.

    Only the strict upper triangle is stored; entry (j, i) is always the
    exact negation of entry (i, j) and the diagonal is identically zero.
    Instances are immutable after construction.
    """

    __slots__ = ("dim", "_a")

    def __init__(self, dim, upper=None):
        if dim not in _SUPPORTED_DIMS:
            raise DimensionError(f"unsupported dimension {dim}")
        self.dim = dim
        a = np.zeros((dim, dim))
        if upper is not None:
            for (i, j), val in upper.items():
                if not (0 <= i < j < dim):
                    raise DimensionError(
                        f"entry ({i},{j}) is not in the strict upper triangle"
                    )
                a[i, j] = val
                a[j, i] = -val
        a.setflags(write=False)
        self._a = a

    @classmethod
    def from_dense(cls, arr, atol=0.0):
        """Build from a dense array, verifying antisymmetry to ``atol``."""
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
        if not np.all(np.abs(arr + arr.T) <= atol):
            raise ValueError("matrix is not antisymmetric")
        m = cls(arr.shape[0])
        a = 0.5 * (arr - arr.T)
        a.setflags(write=False)
        m._a = a
        return m

    @property
    def array(self):
        """Read-only dense view."""
        return self._a

    def entry(self, i, j):
        return float(self._a[i, j])

    def __getitem__(self, ij):
        return float(self._a[ij])

    def __matmul__(self, other):
        return self._a @ other

    def __rmatmul__(self, other):
        return other @ self._a

    def __repr__(self):
        return f"AntisymMatrix(dim={self.dim})"


def axial_to_matrix(v):
    """Axial 3-vector to its antisymmetric matrix: (result) @ w == v x w."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"expected a 3-vector, got shape {v.shape}")
    return AntisymMatrix(3, {(0, 1): -v[2], (0, 2): v[1], (1, 2): -v[0]})


def eps_matrix(v):
    """Dense matrix with entries eps_ijk v_k (transpose of the hat map)."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, v[2], -v[1]],
        [-v[2], 0.0, v[0]],
        [v[1], -v[0], 0.0],
    ])


def hat_matrix(v):
    """Dense hat map: hat(v) @ w == v x w."""
    return -eps_matrix(v)


def _pf(a):
    n = a.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(1, n):
        if a[0, j] == 0.0:
            continue
        idx = [k for k in range(n) if k != 0 and k != j]
        sub = a[np.ix_(idx, idx)]
        total += (-1.0) ** (j + 1) * a[0, j] * _pf(sub)
    return total

def pfaffian(a):
    """Pfaffian by direct combinatorial expansion (15 terms at dim 6).

    Exactness of the sign matters for orientation checks, so no
    factorization-based shortcut is taken; dimensions here are tiny.
    """
    if isinstance(a, AntisymMatrix):
        arr = a.array
    else:
        arr = np.asarray(a, dtype=float)
    n = arr.shape[0]
    if n % 2:
        raise DimensionError(f"pfaffian requires even dimension, got {n}")
    return _pf(arr)


def nullspace(a, tol=DEFAULT_TOL):
    """Orthonormal basis of the numerical kernel {v : |A v| <= tol * |A|}.

    The tolerance is relative to the largest singular value; entries of the
    matrices handled here scale strongly with the state (|r|^3 |p|^3 near
    capture), so an absolute cut would misclassify rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(a, AntisymMatrix):
        arr = a.array
    else:
        arr = np.asarray(a, dtype=float)
    _, s, vt = np.linalg.svd(arr)
    if s[0] == 0.0:
        return [np.eye(arr.shape[0])[:, k] for k in range(arr.shape[0])]
    return [vt[k] for k in range(len(s)) if s[k] <= tol * s[0]]
