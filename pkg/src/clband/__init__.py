"""C+L-band elastic optical network planning toolkit.

ISRS-aware per-span physics, end-to-end GSNR estimation, band-wide launch
power optimization, maximum-reach tables, and a dynamic lightpath
simulation comparing exact first-fit and exact last-fit spectrum
assignment.
"""

from .constants import (
    AmplifierParams,
    Band,
    Channel,
    ChannelGrid,
    FiberParams,
    MODULATION_FORMATS,
    ModulationFormat,
    build_grid,
    format_by_m,
    snr_threshold_table,
)
from .errors import (
    ClbandError,
    ConfigError,
    GridError,
    InfeasibleProblemError,
    PhysicsError,
    QuadratureError,
    TopologyError,
)
from .gsnr import PathPhysics, SpanPhysicsCache, gsnr, gsnr_profile, gsnr_sweep_power, span_operating_point
from .isrs import PowerProfile, closed_form_profile, compute_ase_power, solve_raman_ode, span_gains
from .nli import NliCoefficient, QuadratureSettings, closed_form_eta, compute_nli_coefficient
from .optimizer import (
    MrdTable,
    OptimizationProblem,
    PsoSettings,
    max_reach,
    optimize_band_power,
    per_channel_optimum,
)
from .sim import (
    Demand,
    EFF,
    ELF,
    SimReport,
    SpectrumState,
    assign_spectrum,
    generate_traffic,
    run_simulation,
    select_format_and_width,
)
from .topology import (
    Link,
    Topology,
    builtin_topology,
    k_disjoint_shortest_paths,
    load_topology,
    save_topology,
    synthetic_topology,
)

__version__ = "0.1.0"
