"""Privacy calibration, certification, and private estimation for quantum channels."""

from .channels import (
    FiniteUnitaryGroup,
    QuantumChannel,
    apply,
    apply_superop,
    channels_close,
    compose,
    conjugated_channel,
    depolarizing,
    fit_depolarizing,
    identity_channel,
    pauli_measurement_channel,
    random_channel,
    replacement_channel,
    twirl,
    unitary_conjugate,
)
from .errors import (
    ChannelParseError,
    DegenerateObservableError,
    InfeasibleError,
    InvalidInputError,
    NoninvertibleError,
    OutOfRegimeError,
    QldpError,
)
from .estimate import (
    AccuracyDemand,
    PrivatizedSample,
    QhtBounds,
    QhtReduction,
    build_qht_reduction,
    estimate_expectation,
    fidelity_lower_bound,
    measurement_operator_protocol,
    privatize_sample,
    qht_sample_bounds,
    required_samples_lower,
    required_samples_upper,
    threshold_test,
)
from .pauli import (
    CliffordElement,
    PauliDecomposition,
    decompose,
    enumerate_cliffords,
    from_coeffs,
    pauli_matrix,
    random_clifford,
    sample_pauli,
)
from .privacy import (
    CertificationResult,
    PrivacyBudget,
    SearchConfig,
    certify_qldp,
    depolarizing_privacy_profile,
    optimal_depolarizing_p,
    qubit_depolarizing_q,
)
from .qops import (
    fidelity,
    hockey_stick,
    positive_part,
    random_density,
    random_pure,
    trace_distance,
)
from .shadows import (
    ShadowConfig,
    ShadowSample,
    effective_depolarizing_q,
    median_of_means_estimate,
    private_shadow_p_hat,
    shadow_required_samples,
    shadow_sample,
    snapshot_inverse,
)
from .utility import (
    UtilityReport,
    fidelity_utility,
    optimal_fidelity_utility,
    optimal_trace_utility,
    postprocessed_fidelity_utility,
    trace_utility,
    utility_curve,
    utility_report,
)

__version__ = "0.1.0"
