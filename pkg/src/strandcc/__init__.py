"""Circulating currents in parallel-connected winding strands.

Per-harmonic hybrid circuit model of a phase bundle: slot conductor
layouts and winding maps give the strand impedance matrices, an external
vector-potential field gives the driving flux, and each harmonic's bordered
system yields strand currents, losses and their split into uniform-sharing
and circulating parts.
"""

from .assembly import (
    MU_0,
    HarmonicSystem,
    PhaseSystem,
    SlotMatrices,
    assemble_phase,
    bordered_matrix,
    build_harmonic_system,
    slot_inductance_matrix,
    slot_resistance_matrix,
    strand_impedance,
)
from .errors import (
    AssemblyError,
    ConfigError,
    IncompleteFieldError,
    InvalidGeometryError,
    InvalidParameterError,
    SingularLayoutError,
    SingularSystemError,
    StrandCCError,
)
from .flux import (
    FluxSpectrum,
    HarmonicTerm,
    SyntheticFieldParams,
    VectorPotentialField,
    phase_flux,
    read_flux_file,
    slot_flux,
    synthetic_field,
    write_flux_file,
)
from .losses import (
    LossReport,
    bundle_losses,
    loss_decomposition,
    reconstruct_waveforms,
    strand_rms,
)
from .scenario import Scenario, case_study, dump_scenario, load_scenario
from .solver import (
    CirculatingDecomposition,
    HarmonicSolution,
    SolutionSet,
    closed_form_inverse,
    decompose_currents,
    detect_circulating,
    solve_harmonic,
    solve_spectrum,
)
from .sweep import SweepResult, run_sweep, solve_scenario, verify_property
from .winding import (
    AlphaW,
    MachineGeometry,
    SlotLayout,
    WindingDescription,
    WindingMap,
    alpha_w,
    conductor_distance,
    validate_winding,
)

__version__ = "0.1.0"
