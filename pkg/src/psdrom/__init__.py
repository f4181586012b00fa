"""Structure-preserving model reduction of forced Hamiltonian systems."""

__version__ = "0.1.0"

from .symplectic import (  # noqa: E402
    SymplecticBasis,
    SymplecticityError,
    is_symplectic,
    poisson_matrix,
    projector,
    symplectic_inverse,
)
from .decomposition import (  # noqa: E402
    SingularSpectrum,
    SnapshotEnsemble,
    build_energy_matrix,
    build_extended_matrix,
    build_state_matrix,
    cotangent_lift,
    cotangent_lift_energy,
    error_ordering_report,
    pod_basis,
    projection_error,
)
from .reduction import (  # noqa: E402
    ForcedHamiltonianModel,
    ReducedModel,
    energy_rate,
    energy_rate_preservation_report,
    reduce_pod_galerkin,
    reduce_structure_preserving,
    reduce_variational,
)
from .integrator import (  # noqa: E402
    EnergySeries,
    Trajectory,
    integrate,
    midpoint_step_linear,
    midpoint_step_nonlinear,
)
from .wave import (  # noqa: E402
    WaveParams,
    assemble_wave_model,
    coarse_model,
    discrete_hamiltonian,
    dxx_eigenvalues,
    full_model_eigenvalues,
    initial_condition,
    reference_solution,
)
from .stability import StabilityReport, psd_stability, reduced_spectrum, table2_cell  # noqa: E402
