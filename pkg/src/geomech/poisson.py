"""Non-canonical Poisson structures, numerical brackets, and diagnostics.

The co-symplectic matrix is the inverse of the phase-space part of the
2-form; brackets are {f, g} = grad(f) . omega . grad(g) with gradients taken
by central finite differences plus one Richardson step.

Conventions for the double monopole (phase order r1..r3, p1..p3), with
L = |r|^3 |p|^3 and effective mass M* = L - e theta r.p:

    omega = (1/M*) [[ theta |r|^3 pt,  L 1 - e theta r(x)p ],
                    [ -L 1 + e theta p(x)r,  e |p|^3 rt    ]]

where vt_ij = eps_ijk v_k.  The identity-block signs are pinned by requiring
Hamilton's equations with H = |p|^2/2 to reproduce the closed-form equations
of motion of the model; the angular-momentum algebra and the pfaffian
identity |Pf| = L/|M*| both follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateStructureError, SingularPointError
from .fields import PhasePoint
from .linalg import AntisymMatrix, eps_matrix

__all__ = [
    "CoSymplecticMatrix",
    "Observable",
    "angular_momentum",
    "bracket",
    "cosymplectic_double_monopole",
    "cosymplectic_general",
    "cosymplectic_planar",
    "critical_bracket_closed_form",
    "critical_bracket_residual",
    "desingularized_double_monopole",
    "j_norm_identity_residual",
    "jacobi_residual",
    "mstar_scalar",
]


@dataclass(frozen=True)
class CoSymplecticMatrix:
    """Poisson tensor on phase space (dim 6, or 4 for the planar model).

    ``degeneracy_factor`` is the scalar denominator whose vanishing marks
    the breakdown of the Hamiltonian split.
    """

    A: AntisymMatrix
    degeneracy_factor: float


@dataclass(frozen=True)
class Observable:
    name: str
    fn: Callable[[PhasePoint], float]

    def __call__(self, point: PhasePoint) -> float:
        return float(self.fn(point))


def mstar_scalar(point: PhasePoint, e: float, theta: float) -> float:
    """Scalar effective mass |r|^3 |p|^3 - e theta r.p of the double monopole."""
    nr = np.linalg.norm(point.r)
    npp = np.linalg.norm(point.p)
    return nr**3 * npp**3 - e * theta * float(point.r @ point.p)


def _require_regular(point):
    if np.linalg.norm(point.r) == 0.0 or np.linalg.norm(point.p) == 0.0:
        raise SingularPointError("r=0 or p=0")


def desingularized_double_monopole(point: PhasePoint, e: float, theta: float) -> np.ndarray:
    """The matrix M* omega: regular across the critical manifold.

    Useful for brackets restricted to the vanishing-effective-mass locus,
    where omega itself blows up.
    """
    _require_regular(point)
    r, p = point.r, point.p
    nr = np.linalg.norm(r)
    npp = np.linalg.norm(p)
    big = nr**3 * npp**3
    w = np.zeros((6, 6))
    w[0:3, 0:3] = theta * nr**3 * eps_matrix(p)
    w[3:6, 3:6] = e * npp**3 * eps_matrix(r)
    w[0:3, 3:6] = big * np.eye(3) - e * theta * np.outer(r, p)
    w[3:6, 0:3] = -big * np.eye(3) + e * theta * np.outer(p, r)
    return w


def cosymplectic_double_monopole(point: PhasePoint, e: float, theta: float) -> CoSymplecticMatrix:
    """Poisson tensor of the double monopole at a regular point.

    Degenerate exactly on M* = 0; that is an error here, not a NaN later.
    """
    _require_regular(point)
    mstar = mstar_scalar(point, e, theta)
    if mstar == 0.0:
        raise DegenerateStructureError("effective mass M* vanishes at this point")
    w = desingularized_double_monopole(point, e, theta) / mstar
    return CoSymplecticMatrix(A=AntisymMatrix.from_dense(w, atol=1e-12 * np.max(np.abs(w))),
                              degeneracy_factor=mstar)


def cosymplectic_general(chi, b, kappa) -> CoSymplecticMatrix:
    """General block formula for the Poisson tensor from 3x3 input tensors.

    Inputs follow the tensor conventions b_ij = -eps_ijk (e B)_k and
    kappa_ij = eps_ijk kappa_k; chi carries the position-derivative gauge
    data (zero for all built-ins).  The block layout is

        D^-1 { [[kappa + [chi,kappa], 0], [0, -b + [chi,b]]]
               + (1 - Tr(chi^2 + b kappa)/2) [[0, 1], [-1, 0]]
               + [[0, (chi^2 + b kappa)^T], [-(chi^2 + b kappa), 0]] }

    with D = 1 - Tr(chi^2 + b (1 + 2 chi) kappa)/2.  For axial b, kappa this
    inverts the phase-space 2-form exactly and reproduces the
    double-monopole tensor entrywise.
    """
    chi = np.asarray(chi, dtype=float)
    b = b.array if isinstance(b, AntisymMatrix) else np.asarray(b, dtype=float)
    kappa = kappa.array if isinstance(kappa, AntisymMatrix) else np.asarray(kappa, dtype=float)

    D = 1.0 - 0.5 * float(np.trace(chi @ chi + b @ (np.eye(3) + 2.0 * chi) @ kappa))
    if D == 0.0:
        raise DegenerateStructureError("degeneracy factor vanishes")
    corr = chi @ chi + b @ kappa
    mid = 1.0 - 0.5 * float(np.trace(chi @ chi + b @ kappa))
    w = np.zeros((6, 6))
    w[0:3, 0:3] = kappa + chi @ kappa - kappa @ chi
    w[3:6, 3:6] = -b + chi @ b - b @ chi
    w[0:3, 3:6] = mid * np.eye(3) + corr.T
    w[3:6, 0:3] = -mid * np.eye(3) - corr
    w /= D
    return CoSymplecticMatrix(A=AntisymMatrix.from_dense(w, atol=1e-12 * max(1.0, np.max(np.abs(w)))),
                              degeneracy_factor=D)


def cosymplectic_planar(B: float, e: float, theta: float) -> CoSymplecticMatrix:
    """Planar 4x4 Poisson tensor in coordinates (x1, x2, p1, p2).

    {x1,x2} = theta/(1 - e theta B), {x_i,p_j} = delta_ij/(1 - e theta B),
    {p1,p2} = e B/(1 - e theta B).
    """
    D = 1.0 - e * theta * B
    if D == 0.0:
        raise DegenerateStructureError("planar effective mass vanishes (critical field)")
    w = np.zeros((4, 4))
    w[0, 1] = theta
    w[1, 0] = -theta
    w[2, 3] = e * B
    w[3, 2] = -e * B
    w[0:2, 2:4] = np.eye(2)
    w[2:4, 0:2] = -np.eye(2)
    w /= D
    return CoSymplecticMatrix(A=AntisymMatrix.from_dense(w), degeneracy_factor=D)


# ---------------------------------------------------------------------------
# finite-difference brackets
# ---------------------------------------------------------------------------

def _phase_dim(structure):
    if isinstance(structure, CoSymplecticMatrix):
        return structure.A.dim
    return np.asarray(structure).shape[0]


def _structure_array(structure):
    if isinstance(structure, CoSymplecticMatrix):
        return structure.A.array
    if isinstance(structure, AntisymMatrix):
        return structure.array
    return np.asarray(structure, dtype=float)


def _point_like(point, coords, dim):
    if dim == 6:
        return PhasePoint(r=coords[0:3], p=coords[3:6], t=point.t)
    return coords


def _coords_of(point, dim):
    if isinstance(point, PhasePoint):
        return point.coords()
    return np.asarray(point, dtype=float)


def fd_gradient(f, point, step, dim=6):
    """Central-difference gradient with one Richardson step, per coordinate.

    Steps are relative to the coordinate scale so brackets stay accurate for
    states far from unit magnitude.
    """
    x = _coords_of(point, dim)
    t = point.t if isinstance(point, PhasePoint) else 0.0
    g = np.zeros(dim)

    def feval(y):
        if dim == 6:
            return float(f(PhasePoint(r=y[0:3], p=y[3:6], t=t)))
        return float(f(y))

    for a in range(dim):
        h = step * max(1.0, abs(x[a]))
        yp = x.copy(); ym = x.copy()
        yp[a] += h; ym[a] -= h
        d1 = (feval(yp) - feval(ym)) / (2.0 * h)
        yp2 = x.copy(); ym2 = x.copy()
        yp2[a] += 0.5 * h; ym2[a] -= 0.5 * h
        d2 = (feval(yp2) - feval(ym2)) / h
        g[a] = (4.0 * d2 - d1) / 3.0
    return g


def bracket(f, g, point, structure, step: float = 1e-5) -> float:
    """{f, g} at a point: finite-difference gradients contracted with omega."""
    if step <= 0:
        raise ValueError("step must be positive")
    dim = _phase_dim(structure)
    gf = fd_gradient(f, point, step, dim)
    gg = fd_gradient(g, point, step, dim)
    return float(gf @ _structure_array(structure) @ gg)


def jacobi_residual(structure_builder, point, step: float = 1e-5) -> float:
    """Max cyclic-sum residual of the Jacobi identity over coordinate triples.

    For coordinate observables the identity reduces to
    sum_cyc omega^{a beta} d_beta omega^{bc}; the derivatives of the
    structure are taken by central differences with one Richardson step.
    """
    dim = _phase_dim(structure_builder(point))
    x = _coords_of(point, dim)
    t = point.t if isinstance(point, PhasePoint) else 0.0

    def w_at(y):
        return _structure_array(structure_builder(_point_like(point, y, dim)))

    w0 = w_at(x)
    dw = np.zeros((dim, dim, dim))  # dw[beta, b, c] = d omega^{bc} / d xi_beta
    for a in range(dim):
        h = step * max(1.0, abs(x[a]))
        yp = x.copy(); ym = x.copy()
        yp[a] += h; ym[a] -= h
        d1 = (w_at(yp) - w_at(ym)) / (2.0 * h)
        yp2 = x.copy(); ym2 = x.copy()
        yp2[a] += 0.5 * h; ym2[a] -= 0.5 * h
        d2 = (w_at(yp2) - w_at(ym2)) / h
        dw[a] = (4.0 * d2 - d1) / 3.0

    # rho[a, b, c] = omega^{a beta} d_beta omega^{bc}
    rho = np.einsum("ax,xbc->abc", w0, dw)
    worst = 0.0
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(b + 1, dim):
                s = rho[a, b, c] + rho[b, c, a] + rho[c, a, b]
                worst = max(worst, abs(s))
    return worst


# ---------------------------------------------------------------------------
# double-monopole observables and identities
# ---------------------------------------------------------------------------

def angular_momentum(point: PhasePoint, e: float, theta: float) -> np.ndarray:
    """Conserved total angular momentum r x p - theta p/|p| - e r/|r|."""
    _require_regular(point)
    r, p = point.r, point.p
    return np.cross(r, p) - theta * p / np.linalg.norm(p) - e * r / np.linalg.norm(r)


def j_norm_identity_residual(point: PhasePoint, e: float, theta: float) -> float:
    """|j|^2 minus its half-angle closed form.

    The closed form is (r x p)^2 + (|theta|+|e|)^2 - 4 |e theta| s^2 where s
    is sin(angle/2) for e theta > 0 and cos(angle/2) for e theta < 0, the
    angle being the one between r and p.
    """
    _require_regular(point)
    r, p = point.r, point.p
    j = angular_momentum(point, e, theta)
    lhs = float(j @ j)
    cross_sq = float(np.cross(r, p) @ np.cross(r, p))
    ang = math.atan2(np.linalg.norm(np.cross(r, p)), float(r @ p))
    half = 0.5 * ang
    s = math.sin(half) if e * theta >= 0 else math.cos(half)
    rhs = cross_sq + (abs(theta) + abs(e)) ** 2 - 4.0 * abs(e * theta) * s * s
    return lhs - rhs


def critical_bracket_closed_form(point: PhasePoint, e: float, theta: float) -> float:
    """Restricted bracket of M* with H on the critical manifold."""
    r, p = point.r, point.p
    nr = np.linalg.norm(r)
    npp = np.linalg.norm(p)
    return 3.0 * npp**2 * (nr**4 * npp**4 - e**2 * theta**2) * float(p @ r)


def critical_bracket_residual(point: PhasePoint, e: float, theta: float,
                              step: float = 1e-5, tol_capture: float = 1e-8) -> float:
    """Finite-difference restricted bracket minus its closed form, on M* = 0.

    omega diverges on the critical manifold, so the bracket is evaluated
    with the desingularized structure M* omega; off the manifold the two
    sides differ by -4 e theta |p|^2 M*, which the precondition bounds.
    """
    if e * theta == 0.0:
        raise ValueError("no critical manifold without both couplings")
    nr = np.linalg.norm(point.r)
    npp = np.linalg.norm(point.p)
    rel = abs(mstar_scalar(point, e, theta)) / (nr**3 * npp**3)
    if rel > tol_capture:
        raise ValueError(
            f"point is not on the critical manifold: |M*| relative {rel:.3e} > {tol_capture:.3e}"
        )
    w = desingularized_double_monopole(point, e, theta)
    f = Observable("Mstar", lambda pt: mstar_scalar(pt, e, theta))
    h = Observable("H", lambda pt: 0.5 * float(pt.p @ pt.p))
    gf = fd_gradient(f, point, step)
    gh = fd_gradient(h, point, step)
    fd = float(gf @ w @ gh)
    return fd - critical_bracket_closed_form(point, e, theta)
