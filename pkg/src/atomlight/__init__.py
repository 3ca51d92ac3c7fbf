"""Gaussian continuous-variable engine for a tunable light-matter interface.

Core pieces: labeled Gaussian states and symplectic maps (gaussian),
the interface's input-output maps (interactions), the asymmetry parameter
from atomic structure (levels), dissipative entanglement dynamics
(lindblad), protocol pipelines (protocols), a truncated-Fock validator
(fock), and a scenario runner (scenarios, cli).
"""

from .constants import EPR_BOUND, VACUUM_VAR
from .gaussian import (
    GaussianError,
    GaussianState,
    ModeId,
    ModeKind,
    PhysicalityReport,
    SymplecticMap,
    apply_map,
    check_physical,
    displace,
    epr_variance,
    fidelity,
    homodyne_condition,
    is_epr_entangled,
    reduce,
    squeezed_vacuum,
    symplectic_defect,
    symplectic_eigenvalues,
    tensor,
    thermal,
    two_mode_squeezed,
    vacuum,
)
from .interactions import (
    InteractionParams,
    ModeFunctionSpec,
    coupling_params,
    kappa_effective,
    kappa_qnd_limit,
    long_time_limit,
    mode_function,
    mode_overlap,
    nonqnd_single_cell,
    nonqnd_two_cell,
    qnd_single_pass,
    qnd_two_cell,
    reading_mode_pass,
    sideband_to_reading,
)
from .levels import (
    BranchingResult,
    LevelScheme,
    cesium_d2_tables,
    clebsch_gordan,
    path_rate,
    wigner_6j,
    z_from_scheme,
)
from .lindblad import (
    EntanglementReport,
    LindbladModel,
    NoUniqueSteadyState,
    add_noise_channel,
    build_ideal_model,
    entanglement_report,
    evolve,
    is_unique,
    jump_expectation,
    steady_state,
)
from .protocols import (
    HybridEprResult,
    MagnetometryConfig,
    MemoryConfig,
    OptomechParams,
    SqueezingBudget,
    entanglement_assisted_snr,
    heisenberg_scan,
    hybrid_epr_closed_form,
    hybrid_epr_protocol,
    magnetometry_run,
    memory_fidelity_report,
    memory_store,
    optimize_eta,
    optomech_kappa,
    spin_squeezing_xi,
)

__version__ = "0.1.0"
