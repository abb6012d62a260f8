"""Cyclic multi-antenna coded caching toolkit.

Builds the circulant cache placement and the full delivery plan of the
cyclic scheme, reduces subpacketization by gcd-based user grouping (with
optional phantom users), designs per-transmission max-min-SINR beamformers
via uplink-downlink duality (plus a zero-forcing baseline), and runs
seeded Monte-Carlo symmetric-rate sweeps.
"""

from .beamforming import (
    BeamformerSolution,
    ChannelRealization,
    DualityWorkspace,
    backend_name,
    downlink_sinrs,
    inner_power_fixed_point,
    solve_maxmin,
    solve_zero_forcing,
    uplink_sinr,
)
from .delivery import (
    StreamDescriptor,
    Transmission,
    TransmissionPlan,
    VerificationReport,
    build_plan,
    index_vectors,
    interference_set,
    mod1,
    shift_check,
    verify_plan,
)
from .errors import (
    ParameterError,
    PlanConsistencyError,
    PlanFormatError,
    RankDeficiencyError,
    SolverError,
)
from .grouping import (
    GroupingMap,
    PhantomScheme,
    apply_phantoms,
    build_scheme_plan,
    elevate_placement,
    elevate_plan,
    filter_phantom_streams,
    grouping_map,
    virtual_params,
)
from .params import (
    ComplexityReport,
    OrderDescriptor,
    Scheme,
    SchemeParams,
    binary_entropy,
    complexity_order,
    complexity_report,
    phi,
    validate,
)
from .placement import (
    CacheContents,
    PlacementMatrix,
    build_placement_matrix,
    cache_contents,
)
from .simulator import (
    DegenerateRateWarning,
    RatePoint,
    SimConfig,
    draw_channel,
    nocc_plan,
    rate_points_csv,
    simulate,
    symmetric_rate,
)

__version__ = "0.1.0"
