"""Random two-tier deployment on the unit square.

Primary nodes arrive as a Poisson point process of density n, secondary
nodes as an independent PPP of density m = n**beta. Each tier gets a square
cell grid sized from its density, with the secondary grid an exact
refinement of the primary one, and nodes are matched into directed
source-destination pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "SimConfig",
    "CellGrid",
    "Node",
    "Deployment",
    "OccupancyReport",
    "sample_ppp",
    "primary_cell_area",
    "secondary_cell_area",
    "pair_sd",
    "cell_occupancy",
    "build_deployment",
]

PRIMARY = "primary"
SECONDARY = "secondary"


class ConfigurationError(ValueError):
    """A density / cell-size combination the protocol cannot operate at."""


# ======== configuration ========


@dataclass(frozen=True)
class SimConfig:
    """One experiment point. m = n**beta is always derived, never stored."""

    n: float
    beta: float = 2.0
    alpha: float = 4.0
    power_const: float = 1.0
    noise: float = 1.0
    ap_scale: float = 1.0
    frames: int = 512
    warmup_frames: int = 128
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.n > 1.0:
            raise ConfigurationError(f"n must exceed 1, got {self.n}")
        if not self.beta >= 2.0:
            raise ConfigurationError(f"beta must be >= 2, got {self.beta}")
        if not self.alpha > 2.0:
            raise ConfigurationError(f"alpha must exceed 2, got {self.alpha}")
        if not self.power_const > 0.0:
            raise ConfigurationError("power_const must be positive")
        if self.noise < 0.0:
            raise ConfigurationError("noise must be nonnegative")
        if not self.ap_scale >= 1.0:
            raise ConfigurationError(f"ap_scale must be >= 1, got {self.ap_scale}")
        if self.frames <= 0:
            raise ConfigurationError("frames must be positive")
        if not 0 <= self.warmup_frames < self.frames:
            raise ConfigurationError("warmup_frames must lie in [0, frames)")

    @property
    def m(self) -> float:
        return self.n ** self.beta


# ======== grids ========


@dataclass(frozen=True)
class CellGrid:
    """Square tessellation of the unit square into side_count**2 cells.

    Cells are indexed flat as cx * side_count + cy with cx the column
    (x axis) and cy the row (y axis).
    """

    side_count: int
    tier: str

    def __post_init__(self) -> None:
        if self.side_count < 1:
            raise ConfigurationError("side_count must be positive")

    @property
    def cell_area(self) -> float:
        return 1.0 / (self.side_count * self.side_count)

    @property
    def cell_count(self) -> int:
        return self.side_count * self.side_count

    def cell_of(self, positions: np.ndarray) -> np.ndarray:
        """Flat cell index for each (x, y) row; points on 1.0 clip inward."""
        k = self.side_count
        ij = np.minimum((positions * k).astype(np.int64), k - 1)
        return ij[:, 0] * k + ij[:, 1]

    def coords(self, cells: np.ndarray | int):
        """(cx, cy) for flat cell indices."""
        return np.divmod(cells, self.side_count)

    def center(self, cell: int) -> tuple[float, float]:
        cx, cy = divmod(cell, self.side_count)
        w = 1.0 / self.side_count
        return ((cx + 0.5) * w, (cy + 0.5) * w)


def primary_cell_area(n: float, ap_scale: float = 1.0) -> tuple[float, CellGrid]:
    """Target primary cell area ap_scale*2*ln(n)/n and the realized grid.

    The side count is the largest multiple of 8 whose cells still meet the
    target, so 8x8 slot clusters tile exactly. Below side count 8 (small n)
    the plain floor is used instead; fewer than 2 cells per side leaves no
    room for multi-cell routing and is rejected.
    """
    if n <= math.e:
        raise ConfigurationError(f"n must exceed e for a valid cell target, got {n}")
    if ap_scale < 1.0:
        raise ConfigurationError("ap_scale must be >= 1")
    target = ap_scale * 2.0 * math.log(n) / n
    if target >= 1.0:
        raise ConfigurationError(f"cell target {target:.4g} covers the whole square")
    inv = 1.0 / math.sqrt(target)
    if inv >= 8.0:
        k = 8 * int(inv / 8.0)
    else:
        k = int(inv)
        if k < 2:
            raise ConfigurationError(
                f"n={n} admits only {k} cell(s) per side; need at least 2"
            )
    return target, CellGrid(side_count=k, tier=PRIMARY)


def secondary_cell_area(n: float, beta: float, a_p: float) -> tuple[float, CellGrid]:
    """Secondary cell target beta^2 n^2 a_p^2 / (2 m ln m) and realized grid.

    a_p is the realized primary cell area 1/k_p^2. The secondary side count
    is q*k_p with q = floor(sqrt(a_p/target)), so every secondary cell nests
    inside exactly one primary cell.
    """
    m = n ** beta
    if m <= math.e:
        raise ConfigurationError(f"m={m} too small for a secondary grid")
    k_p = round(1.0 / math.sqrt(a_p))
    if abs(1.0 / (k_p * k_p) - a_p) > 1e-12 * a_p:
        raise ConfigurationError(f"a_p={a_p} is not a realized grid cell area")
    target = beta * beta * n * n * a_p * a_p / (2.0 * m * math.log(m))
    q = int(math.sqrt(a_p / target))
    if q < 1:
        raise ConfigurationError(
            "secondary cells would be coarser than primary cells"
        )
    return target, CellGrid(side_count=q * k_p, tier=SECONDARY)


# ======== nodes ========


@dataclass(frozen=True)
class Node:
    """On-demand view of one deployed radio (storage is array-based)."""

    id: int
    tier: str
    position: tuple[float, float]
    sd_peer: int | None = None


def sample_ppp(density: float, seed) -> np.ndarray:
    """Positions of a PPP of the given density on the unit square.

    Returns an (N, 2) array with N ~ Poisson(density). `seed` may be an
    integer or a numpy Generator; a fixed integer seed reproduces the set.
    """
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    count = rng.poisson(density)
    return rng.random((count, 2))


def pair_sd(count: int, seed) -> np.ndarray:
    """Uniform perfect matching of node indices into directed S-D pairs.

    Returns an (P, 2) array of (source, destination) index pairs. With an
    odd count one uniformly random node stays unpaired; with fewer than 2
    nodes the pairing is empty.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if count < 2:
        return np.empty((0, 2), dtype=np.int64)
    perm = rng.permutation(count)
    half = count // 2
    return np.stack([perm[:half], perm[half : 2 * half]], axis=1)


def peer_array(count: int, pairs: np.ndarray) -> np.ndarray:
    """Symmetric peer map: peer[src]=dst and peer[dst]=src, -1 if unpaired."""
    peer = np.full(count, -1, dtype=np.int64)
    if len(pairs):
        peer[pairs[:, 0]] = pairs[:, 1]
        peer[pairs[:, 1]] = pairs[:, 0]
    return peer


# ======== deployment ========


class CellIndex:
    """Sorted-order lookup of node ids per cell for one grid."""

    def __init__(self, cells: np.ndarray, cell_count: int):
        self.cells = cells
        self.counts = np.bincount(cells, minlength=cell_count)
        self.order = np.argsort(cells, kind="stable")
        self.starts = np.concatenate([[0], np.cumsum(self.counts)])

    def members(self, cell: int) -> np.ndarray:
        return self.order[self.starts[cell] : self.starts[cell + 1]]


@dataclass
class Deployment:
    """Immutable snapshot of one sampled network."""

    config: SimConfig
    primary_grid: CellGrid
    secondary_grid: CellGrid
    primary_target: float
    secondary_target: float
    primary_pos: np.ndarray
    secondary_pos: np.ndarray
    primary_pairs: np.ndarray
    secondary_pairs: np.ndarray
    primary_peer: np.ndarray = field(repr=False, default=None)
    secondary_peer: np.ndarray = field(repr=False, default=None)
    # flat cell index per node, on each grid that matters for its tier
    primary_cells: np.ndarray = field(repr=False, default=None)
    secondary_cells_primary_grid: np.ndarray = field(repr=False, default=None)
    secondary_cells: np.ndarray = field(repr=False, default=None)
    primary_index: CellIndex = field(repr=False, default=None)
    secondary_index: CellIndex = field(repr=False, default=None)
    secondary_index_primary_grid: CellIndex = field(repr=False, default=None)

    @property
    def refinement(self) -> int:
        return self.secondary_grid.side_count // self.primary_grid.side_count

    def node(self, tier: str, node_id: int) -> Node:
        pos = self.primary_pos if tier == PRIMARY else self.secondary_pos
        peer = self.primary_peer if tier == PRIMARY else self.secondary_peer
        p = int(peer[node_id])
        return Node(
            id=node_id,
            tier=tier,
            position=(float(pos[node_id, 0]), float(pos[node_id, 1])),
            sd_peer=None if p < 0 else p,
        )


@dataclass(frozen=True)
class OccupancyReport:
    """Per-cell node counts plus connectivity flags (flags, not failures)."""

    primary_per_primary_cell: np.ndarray
    secondary_per_primary_cell: np.ndarray
    secondary_per_secondary_cell: np.ndarray
    any_empty_primary_cell: bool
    any_empty_secondary_cell: bool
    any_cell_below_relay_count: bool


def build_deployment(config: SimConfig) -> Deployment:
    """Sample both tiers, build both grids, and pair sources with sinks.

    Deterministic in config.seed: the generator is spawned into independent
    streams for deployment, pairing, relay choice, and transport, in that
    fixed order.
    """
    g_deploy, g_pairs, _g_relays, _g_transport = np.random.default_rng(
        config.seed
    ).spawn(4)

    p_target, p_grid = primary_cell_area(config.n, config.ap_scale)
    s_target, s_grid = secondary_cell_area(config.n, config.beta, p_grid.cell_area)

    primary_pos = sample_ppp(config.n, g_deploy)
    secondary_pos = sample_ppp(config.m, g_deploy)

    primary_pairs = pair_sd(len(primary_pos), g_pairs)
    secondary_pairs = pair_sd(len(secondary_pos), g_pairs)

    primary_cells = p_grid.cell_of(primary_pos) if len(primary_pos) else np.empty(0, np.int64)
    sec_on_primary = p_grid.cell_of(secondary_pos) if len(secondary_pos) else np.empty(0, np.int64)
    secondary_cells = s_grid.cell_of(secondary_pos) if len(secondary_pos) else np.empty(0, np.int64)

    return Deployment(
        config=config,
        primary_grid=p_grid,
        secondary_grid=s_grid,
        primary_target=p_target,
        secondary_target=s_target,
        primary_pos=primary_pos,
        secondary_pos=secondary_pos,
        primary_pairs=primary_pairs,
        secondary_pairs=secondary_pairs,
        primary_peer=peer_array(len(primary_pos), primary_pairs),
        secondary_peer=peer_array(len(secondary_pos), secondary_pairs),
        primary_cells=primary_cells,
        secondary_cells_primary_grid=sec_on_primary,
        secondary_cells=secondary_cells,
        primary_index=CellIndex(primary_cells, p_grid.cell_count),
        secondary_index=CellIndex(secondary_cells, s_grid.cell_count),
        secondary_index_primary_grid=CellIndex(sec_on_primary, p_grid.cell_count),
    )


def cell_occupancy(deployment: Deployment, relay_count: int = 1) -> OccupancyReport:
    """Per-cell counts and the empty / thin-cell flags.

    relay_count is the per-packet relay requirement N; a primary cell with
    fewer secondary nodes than that cannot host a full segment bundle.
    """
    prim = deployment.primary_index.counts
    sec_on_prim = deployment.secondary_index_primary_grid.counts
    sec = deployment.secondary_index.counts
    return OccupancyReport(
        primary_per_primary_cell=prim,
        secondary_per_primary_cell=sec_on_prim,
        secondary_per_secondary_cell=sec,
        any_empty_primary_cell=bool((prim == 0).any()),
        any_empty_secondary_cell=bool((sec == 0).any()),
        any_cell_below_relay_count=bool((sec_on_prim < relay_count).any()),
    )
