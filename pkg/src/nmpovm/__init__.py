"""Informationally complete symmetric measurements in finite dimension."""

from ._config import (
    DEFAULT_TOLERANCES,
    ArityError,
    ContractError,
    DegenerateBasisError,
    NMPOVMError,
    PositivityError,
    SingularFrameError,
    Tolerances,
)
from .bases import (
    GroupedBasis,
    HermitianBasis,
    dual_regroup,
    gell_mann_basis,
    group,
    load_basis,
    pauli_tensor_basis,
    save_basis,
    validate_basis,
)
from .entanglement import (
    DetectionReport,
    bell_state,
    correlation_matrix,
    criterion_trace,
    criterion_trace_norm,
    detect,
    isotropic,
    product,
    random_separable,
    threshold_scan,
)
from .estimator import SymmetricPOVMTomography
from .info import (
    coincidence_bound,
    coincidence_closed_form,
    entropy_bound_check,
    index_of_coincidence,
    shannon_entropies,
)
from .linalg import hs_inner, herm_eig, kron, random_density, trace_norm
from .measurements import (
    MeasurementParams,
    SymmetricMeasurement,
    admissible_pairs,
    assemble,
    build,
    build_h_operators,
    classify,
    dual_frame,
    ic_check,
    load_measurement,
    probabilities,
    reconstruct,
    recover_basis,
    save_measurement,
    t_range,
    validate_symmetry,
)

__version__ = "0.1.0"
