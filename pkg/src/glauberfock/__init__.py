"""Light propagation and two-particle correlations in Glauber-Fock waveguide lattices."""

from .correlation import (
    CorrelationMatrix,
    InputState,
    Normalization,
    Provenance,
    StateKind,
    correlation_boson_separable,
    correlation_fermion,
    correlation_for,
    correlation_noon,
    peak_normalize,
    single_particle_distribution,
)
from .errors import (
    GlauberFockError,
    InfeasibleGeometryError,
    InvalidArgumentError,
    InvalidPlanError,
    NumericalError,
)
from .estimator import (
    EstimateReport,
    PhasePlan,
    classical_estimate_noon,
    classical_estimate_separable,
    estimator_error,
)
from .lattice import (
    CALIBRATIONS,
    Calibration,
    CouplingMatrix,
    CouplingProfile,
    GeometrySpec,
    build_glauber_fock_profile,
    build_power_law_profile,
    coupling_matrix,
    couplings_from_geometry,
    design_geometry,
    validate_fabrication,
)
from .propagation import (
    EvolutionOperator,
    FieldState,
    IntensityMap,
    count_maxima,
    dfs_amplitude,
    evolution_operator,
    intensity_map,
    propagate,
    spectrum,
    tail_leakage,
)

__version__ = "0.1.0"
