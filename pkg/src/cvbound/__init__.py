"""Truncated-Fock numerics for PPT entangled two-mode states built from shifted thermal light."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BlockLeakage,
    CertificationError,
    ConfigError,
    CutoffExceeded,
    DegenerateAngle,
    EmptyInput,
    FactorOverflow,
    FilterOverflow,
    InvalidParameter,
    InvalidScaling,
    NonHermitian,
    ZeroTrace,
)
from .fock import (  # noqa: E402
    FockCutoff,
    SingleModeVector,
    TwoModeState,
    TwoModeVector,
    hermitian_eigenvalues,
    orthonormalize,
    trace_and_renormalize,
)
from .states import (  # noqa: E402
    MixtureSpec,
    PhotonDistribution,
    apply_local_filter,
    beam_split_diagonal_state,
    beam_split_number_state,
    build_mixture,
    build_omega_state,
    photon_added_thermal_distribution,
    shifted_thermal_distribution,
    squeezed_vacuum_coefficients,
    thermal_distribution,
)
from .transpose import block_decompose, min_block_eigenvalues, partial_transpose_B  # noqa: E402
from .hankel import hankel_ppt_test, proposition1_ppt_test  # noqa: E402
from .pipeline import Config, Verdict, run_certify  # noqa: E402
