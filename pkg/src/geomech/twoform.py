"""Evolution-space 2-form assembly and kernel-based equations of motion.

The 2-form lives on the 7-dimensional evolution space (r, p, t).  Its kernel
carries the dynamics: at regular points the kernel is one-dimensional with a
nonzero time component and normalizing that component to 1 yields the phase
velocity.  Rank degeneration (the vanishing-effective-mass locus) is reported,
never extrapolated; regularization is the dynamics module's business.

Sign conventions are pinned by two regression anchors: the double-monopole
kernel must reproduce the closed-form equations of motion of that model, and
the planar specialization must reproduce the exotic planar equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DegenerateMassError
from .fields import FieldSample
from .linalg import AntisymMatrix, DEFAULT_TOL, eps_matrix, hat_matrix, nullspace

__all__ = [
    "PhaseVelocity",
    "SingularReport",
    "SouriauMatrix",
    "assemble_sigma",
    "assemble_sigma_planar",
    "effective_mass_matrix",
    "kernel_velocity",
    "verify_energy_identity",
]

# coordinate order of the 7x7 form
COORDS = ("r1", "r2", "r3", "p1", "p2", "p3", "t")


@dataclass(frozen=True)
class SouriauMatrix:
    """The assembled 2-form with the couplings recorded for provenance."""

    A: AntisymMatrix
    e: float
    theta: Optional[float] = None


@dataclass(frozen=True)
class PhaseVelocity:
    rdot: np.ndarray
    pdot: np.ndarray


@dataclass(frozen=True)
class SingularReport:
    """Kernel data at a point where the variational problem is not regular."""

    kernel_dim: int
    basis: tuple
    tol: float


def assemble_sigma(sample: FieldSample, e: float, theta: Optional[float] = None) -> SouriauMatrix:
    """Fill the 7x7 antisymmetric coefficient matrix of the 2-form.

    Blocks, in coordinate order (r1, r2, r3, p1, p2, p3, t):

    * (r_i, r_j):  e eps_ijk B_k          magnetic term
    * (p_i, p_j):  eps_ijk kappa_k        dual-magnetic term
    * (p_i, r_i):  1 - mu_i               mass block
    * (r_i, p_j):  eps_ijk q_k            antisymmetric mass correction
    * (r_i, t):    e E_i                  force term
    * (p_i, t):    -(1 - mu_i) g_i        velocity relation
    """
    a = np.zeros((7, 7))
    a[0:3, 0:3] = e * eps_matrix(sample.B)
    a[3:6, 3:6] = eps_matrix(sample.kappa)
    a[0:3, 3:6] = -np.diag(1.0 - sample.mu) + eps_matrix(sample.q)
    a[3:6, 0:3] = -a[0:3, 3:6].T
    a[0:3, 6] = e * sample.E
    a[6, 0:3] = -e * sample.E
    a[3:6, 6] = -(1.0 - sample.mu) * sample.g
    a[6, 3:6] = (1.0 - sample.mu) * sample.g
    return SouriauMatrix(A=AntisymMatrix.from_dense(a), e=e, theta=theta)


def assemble_sigma_planar(B: float, E, p, m: float, e: float, theta: float) -> AntisymMatrix:
    """Planar 5x5 analogue in coordinates (x1, x2, p1, p2, t)."""
    E = np.asarray(E, dtype=float).reshape(2)
    p = np.asarray(p, dtype=float).reshape(2)
    a = np.zeros((5, 5))
    a[0, 1] = e * B
    a[2, 3] = theta
    a[2, 0] = 1.0
    a[3, 1] = 1.0
    a[0, 2] = -1.0
    a[1, 3] = -1.0
    a[0:2, 4] = e * E
    a[2:4, 4] = -p / m
    a[1, 0] = -a[0, 1]
    a[3, 2] = -a[2, 3]
    a[4, 0:2] = -a[0:2, 4]
    a[4, 2:4] = -a[2:4, 4]
    return AntisymMatrix.from_dense(a)


def kernel_velocity(sigma: Union[SouriauMatrix, AntisymMatrix], tol: float = DEFAULT_TOL):
    """Phase velocity from the kernel, or a SingularReport.

    Regular case: kernel is one-dimensional and its time component exceeds
    ``tol``; the vector is rescaled so the time component is 1 and split into
    (rdot, pdot).  Anything else (higher-dimensional kernel, or a kernel
    orthogonal to the time direction) is reported, not solved.
    """
    A = sigma.A if isinstance(sigma, SouriauMatrix) else sigma
    basis = nullspace(A, tol)
    dim = len(basis)
    if dim == 1 and abs(basis[0][-1]) > tol:
        v = basis[0] / basis[0][-1]
        n = A.dim - 1
        half = n // 2
        return PhaseVelocity(rdot=v[0:half], pdot=v[half:n])
    return SingularReport(kernel_dim=dim, basis=tuple(basis), tol=tol)


def effective_mass_matrix(sample: FieldSample, e: float) -> np.ndarray:
    """The 3x3 effective mass matrix M + 2 Q_A + e hat(kappa) M^-1 hat(B).

    M = 1 - Q - Q_A with Q = diag(mu) and (Q_A)_ij = eps_ijk q_k.  The sign
    of the field term follows from eliminating the momentum variation in the
    kernel equations; it makes det of this matrix vanish exactly where the
    scalar effective mass of the double monopole does.
    """
    Q = np.diag(sample.mu)
    QA = eps_matrix(sample.q)
    M = np.eye(3) - Q - QA
    det = np.linalg.det(M)
    if abs(det) < 1e-14 * max(1.0, float(np.max(np.abs(M))) ** 3):
        raise DegenerateMassError("det(1 - Q - Q_A) vanishes")
    Minv = np.linalg.inv(M)
    return M + 2.0 * QA + e * hat_matrix(sample.kappa) @ Minv @ hat_matrix(sample.B)


def verify_energy_identity(sigma: SouriauMatrix, v: PhaseVelocity,
                           sample: FieldSample, e: float) -> float:
    """Residual of the energy row along a kernel solution.

    Returns e rdot.E - ((1-Q) pdot).g; identically zero for exact kernel
    velocities regardless of the velocity-relation vector g.
    """
    lhs = e * float(v.rdot @ sample.E)
    rhs = float(((1.0 - sample.mu) * v.pdot) @ sample.g)
    return lhs - rhs
