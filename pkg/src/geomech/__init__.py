"""Geometric mechanics of monopole systems.

Assembles evolution-space 2-forms from field data, derives equations of
motion as their kernel, builds the associated non-canonical Poisson
structures, and simulates the magnetic/dual-magnetic double-monopole system
including capture onto the vanishing-effective-mass manifold.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateMassError,
    DegenerateStructureError,
    DimensionError,
    GeomechError,
    NoCaptureError,
    SingularPointError,
)
from .fields import (
    ClosureResidual,
    FieldModel,
    FieldSample,
    PhasePoint,
    PlanarModel,
    closure_residuals,
    double_monopole,
    exotic_planar,
    flux_integral,
    free_particle,
    momentum_monopole_uniform_E,
    uniform_fields,
)
from .linalg import AntisymMatrix, axial_to_matrix, cross, nullspace, pfaffian
from .twoform import (
    PhaseVelocity,
    SingularReport,
    SouriauMatrix,
    assemble_sigma,
    assemble_sigma_planar,
    effective_mass_matrix,
    kernel_velocity,
    verify_energy_identity,
)
from .poisson import (
    CoSymplecticMatrix,
    Observable,
    angular_momentum,
    bracket,
    cosymplectic_double_monopole,
    cosymplectic_general,
    cosymplectic_planar,
    critical_bracket_residual,
    j_norm_identity_residual,
    jacobi_residual,
    mstar_scalar,
)
from .dynamics import (
    Event,
    IntegratorOptions,
    Trajectory,
    capture_condition,
    critical_entry,
    double_monopole_initial,
    hall_reduced_planar,
    integrate,
    integrate_planar,
    reduced_evolve,
    refine_capture_initial,
    scatter_batch,
)
