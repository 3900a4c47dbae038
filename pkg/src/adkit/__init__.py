"""Affine diffusions on R+ x R^n with a square-root first coordinate:
model validation and regime classification, exact and Euler path
simulation, the Riccati flow of the Fourier-Laplace transform, drift MLE
from discrete observations, and Monte Carlo study drivers.

The simulation kernels run on a compiled lane when the optional extension
built from source is importable, and on a NumPy lane otherwise; the two
lanes produce bit-identical paths (see adkit._kernels.BACKEND, and the
ADKIT_FORCE_PURE=1 environment override).
"""

from ._version import __version__
from ._kernels import BACKEND
from .errors import NumericalError, ValidationError
from .linalg import Spectrum, cholesky, expm, kron, kron_sum, spectrum, unvec, vec
from .model import (
    LyapunovCertificate,
    ModelSpec,
    RegimeClass,
    Violation,
    classify,
    decouple,
    generator_apply,
    lyapunov_certificate,
    mean_x,
    mean_y,
    spec_from_json,
    spec_hash,
    spec_to_json,
    stationary_moments,
    validate,
)
from .simulate import (
    PathGrid,
    SimConfig,
    cir_transition_density,
    load_path_csv,
    save_path_csv,
    simulate_arrays,
    simulate_ensemble,
    simulate_path,
)
from .riccati import (
    FLArgument,
    PsiFlow,
    RiccatiSolution,
    psi_system,
    riccati_rhs,
    solve_riccati,
    stationary_cf,
    tail_bound,
)
from .estimate import (
    ORDERING_TAG,
    MleResult,
    RestrictedMleResult,
    estimate_diffusion,
    info_rate,
    lambda_matrix,
    lambda_tilde,
    mle_full,
    mle_restricted,
    normalizer,
    tau_tilde_vector,
    tau_vector,
)
from .studies import (
    MODES,
    REPORT_SCHEMA,
    StudyConfig,
    StudyReport,
    empirical_cf,
    ergodic_average,
    run_cf_compare_study,
    run_consistency_study,
    run_ergodic_study,
    run_normality_study,
    run_study,
    run_supercritical_study,
)

__all__ = [
    "__version__",
    "BACKEND",
    "NumericalError",
    "ValidationError",
    "Spectrum",
    "cholesky",
    "expm",
    "kron",
    "kron_sum",
    "spectrum",
    "unvec",
    "vec",
    "LyapunovCertificate",
    "ModelSpec",
    "RegimeClass",
    "Violation",
    "classify",
    "decouple",
    "generator_apply",
    "lyapunov_certificate",
    "mean_x",
    "mean_y",
    "spec_from_json",
    "spec_hash",
    "spec_to_json",
    "stationary_moments",
    "validate",
    "PathGrid",
    "SimConfig",
    "cir_transition_density",
    "load_path_csv",
    "save_path_csv",
    "simulate_arrays",
    "simulate_ensemble",
    "simulate_path",
    "FLArgument",
    "PsiFlow",
    "RiccatiSolution",
    "psi_system",
    "riccati_rhs",
    "solve_riccati",
    "stationary_cf",
    "tail_bound",
    "ORDERING_TAG",
    "MleResult",
    "RestrictedMleResult",
    "estimate_diffusion",
    "info_rate",
    "lambda_matrix",
    "lambda_tilde",
    "mle_full",
    "mle_restricted",
    "normalizer",
    "tau_tilde_vector",
    "tau_vector",
    "MODES",
    "REPORT_SCHEMA",
    "StudyConfig",
    "StudyReport",
    "empirical_cf",
    "ergodic_average",
    "run_cf_compare_study",
    "run_consistency_study",
    "run_ergodic_study",
    "run_normality_study",
    "run_study",
    "run_supercritical_study",
]
