"""Spectral theory of non-reciprocal impurity chains at configurable precision.

The package covers the single-band chain with asymmetric hoppings and one
onsite impurity (spectra under open and periodic ends, exact eigenvectors,
quantization conditions, the critical impurity strength and its linear mode,
skin-effect diagnostics and the impurity strength that cancels the skin
effect), the analogous two-band chain, and a discrete-time walk realization.
"""

__version__ = "0.1.0"

from .analytics import (
    FibContext,
    QuantizationResidual,
    closed_form_eigenvector,
    delta_critical,
    fib_poly,
    fib_poly_kd,
    icse_delta,
    icse_energy_estimate,
    kappa_localization,
    linear_mode,
    quantization_residual_obc,
    quantization_residual_pbc,
    refine_wavevector,
    skin_length_scale,
    y_critical,
)
from .diagnostics import (
    PhaseScan,
    SCAN_SENTINEL,
    delta_wrap,
    find_impurity_mode,
    fragmentation_check,
    gradient_Dx,
    nhse_profile,
    phase_scan,
    resolution_transform,
    ssh_tail_flatness,
    tail_flatness,
    winding_number,
    winding_of_curve,
)
from .lattice import (
    ChainSpec,
    DenseMatrix,
    SSHSpec,
    build_hatano_nelson,
    build_nr_ssh,
    chain_from_json,
    chain_to_json,
    dispersion_obc,
    dispersion_pbc,
    sqrt_hopping_product,
    ssh_bloch_spectrum,
    ssh_from_json,
    ssh_to_json,
)
from .precision import (
    PrecisionConfig,
    acos_c,
    acosh_c,
    hpc,
    precision_context,
    three_term_sequence,
)
from .profile import ModeProfile
from .spectral import (
    ConvergenceError,
    Spectrum,
    aberth_roots,
    char_poly_eval,
    eigenvector_pair,
    full_spectrum,
    qr_reference,
)
from .walk import (
    CoinSpec,
    ImpuritySpec,
    WalkState,
    build_coin,
    evolve,
    mean_position,
    position_distribution,
    site_coin,
    step,
)
