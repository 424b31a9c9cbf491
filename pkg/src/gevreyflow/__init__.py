"""Pseudospectral simulation and Gevrey-regularity verification for a
two-component shallow water system with inertia operator ``(1 - d_x^2)^s``."""

__version__ = "0.1.0"

from .dynamics import (
    BlowUpError,
    KDecomposition,
    StiffnessError,
    SystemParams,
    TwoComponentState,
    conserved_quantities,
    derive_k_decomposition,
    evolve,
    rhs_kform,
    rhs_mform,
    step,
)
from .harness import (
    CheckRecord,
    ETNormParams,
    OvsyannikovDelta,
    check_commutator,
    check_interpolation,
    check_luo_integral,
    check_pointwise_difference,
    continuity_experiment,
    et_norm,
    ovs_delta_of_t,
)
from .initial import from_modes, gevrey_random, random_field
from .norms import (
    GevreyParams,
    bar_gevrey_norm,
    check_embeddings,
    check_gradient_estimate,
    check_sandwich,
    estimate_radius,
    gevrey_norm,
    sobolev_norm,
)
from .spectral import GridSpec, SpectralField, collocate, pointwise_product, synthesize
from .tracking import (
    LifespanParams,
    MonitorConfig,
    holomorphy_time,
    lifespan_T0,
    lifespan_T0_reduced,
    regularity_monitor,
)
