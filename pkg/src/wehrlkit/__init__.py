"""Phase-space entropy toolkit for continuous-variable states.

Heterodyne (Husimi-type) densities, their Wehrl-type entropies with
closed forms cross-checked by quadrature, entropic uncertainty sums
against the shared 1 + ln(pi) bound, and mutual-information witnesses
for pure bipartite states.
"""

from .entropies import (
    EULER_GAMMA,
    LN_E_PI,
    LN_PI,
    EntropyReport,
    WitnessVerdict,
    differential_entropy_marginal,
    entanglement_witness,
    entropy_report,
    harmonic_number,
    homodyne_entropy_thermal_closed,
    quantum_mutual_information_noon,
    quantum_mutual_information_tmss,
    von_neumann,
    wehrl_closed,
    wehrl_conditional_entropy,
    wehrl_fock_closed,
    wehrl_fock_stirling,
    wehrl_mutual_information,
    wehrl_quadrature,
    wehrl_relative_entropy,
    wehrl_thermal_closed,
)
from .errors import (
    ConditionOnZeroDensity,
    DegenerateBlock,
    DimensionMismatch,
    InadmissibleCovariance,
    LambdaOutOfRange,
    NonNormalizedMixture,
    NonSymmetric,
    NotBipartite,
    NotPure,
    SingularMatrix,
    SupportViolation,
    ToleranceNotReached,
    ToolkitError,
    UnsupportedState,
)
from .eur import (
    BOUND,
    EurReport,
    bbm_lhs_asymptotic,
    eur_report,
    eur_sweep,
    eur_sweep_fock,
    eur_sweep_mixture,
    eur_sweep_thermal,
    eur_thermal_closed,
    mixture_crossover,
    wl_lhs_stirling,
)
from .gaussian import (
    CovarianceModel,
    ModePartition,
    NormalFormParams,
    SeparabilityVerdict,
    apply_local_squeeze,
    c_from_v,
    from_grouped_ordering,
    gaussian_witness,
    minimum_symplectic_eigenvalue,
    ppt_reflect,
    random_admissible_covariance,
    simon_pure_separability,
    squeezed_vacuum_covariance,
    symplectic_eigenvalues,
    symplectic_form,
    tmss_covariance,
    von_neumann_gaussian,
    wehrl_gaussian_joint,
    wehrl_gaussian_local,
)
from .husimi import (
    ConvexCombinationHusimi,
    FockHusimi,
    FockPositionDensity,
    GaussianHusimi,
    HusimiEvaluator,
    MixturePositionDensity,
    NoonHusimi,
    NoonMarginalHusimi,
    PositionDensity,
    ProductHusimi,
    QuadratureMarginalHusimi,
    ThermalHusimi,
    ThermalPositionDensity,
    conditional_husimi,
    evaluator_for,
    homodyne_marginal_fock,
    homodyne_marginal_thermal,
    marginal_husimi,
    position_density_for,
    q_fock,
    q_gaussian,
    q_noon,
    q_thermal,
)
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    density_entropy_1d,
    density_normalization_1d,
    entropy_functional,
    gamma_tail_threshold,
    integrate,
    normalization,
    relative_entropy,
)
from .states import (
    FockMixtureState,
    FockState,
    GaussianState,
    NoonState,
    ThermalState,
    TwoModeSqueezedState,
    partition_of,
    state_from_dict,
    state_to_dict,
    validate,
)

__version__ = "0.1.0"
