"""Two-tier wireless network scaling simulator.

A dense secondary tier relays packets for a sparse primary tier on the unit
square. The package builds random deployments, routes over cell grids,
schedules transmissions with preservation and collection regions, moves
packets at the frame level, audits SINR, and fits the measured rates and
delays against their predicted scaling laws.
"""

from .deployment import (
    PRIMARY,
    SECONDARY,
    CellGrid,
    ConfigurationError,
    Deployment,
    Node,
    OccupancyReport,
    SimConfig,
    build_deployment,
    cell_occupancy,
    pair_sd,
    primary_cell_area,
    sample_ppp,
    secondary_cell_area,
)
from .routing import (
    CellPath,
    RelayAssignment,
    hv_path,
    hv_path_cells,
    path_load_census,
    paths_through_cell,
    select_relays,
)
from .scheduler import (
    Region,
    active_cells,
    blocked_secondary_cells,
    make_region,
    place_collection_regions,
    preservation_regions,
    slot_offsets,
)
from .phy import LinkSample, RateReport, pathloss, rate_of, sinr, tx_power
from .transport import (
    PacketRecord,
    RunOptions,
    SegmentBundle,
    TransportSim,
    relay_count,
    segment_gap,
)
from .harness import (
    CSV_COLUMNS,
    ExperimentResult,
    FitReport,
    SweepPlan,
    check_theorems,
    emit,
    fit_exponent,
    fit_line,
    format_fit_report,
    planted_results,
    run_point,
    run_sweep,
    sweep_configs,
    trace_packet,
)

__version__ = "0.1.0"
