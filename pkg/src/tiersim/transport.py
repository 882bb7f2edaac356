"""Packet transport across both tiers of the network.

Time structure: one scheduler frame holds one primary broadcast slot and one
secondary frame of three subframes (relay, carry, deliver), each subframe
spanning 64 secondary ticks. A frame therefore spans three primary slots of
64 ticks each. Primary delay is stamped in primary slots, secondary delay in
the packet's own subframe ticks.

Primary packets do not hop between primary nodes. An active source cell
broadcasts one packet per activation; the packet is split into N segments
picked up by relays in the next path cell, carried across the secondary grid
as one atomic bundle, and handed to the destination inside an admitted
collection region. Sources are saturated: an occupied cell transmits every
time it is active, sources within a cell taking turns.

Secondary traffic is simulated for a sampled subset of pairs. Motion is
exact per the cell schedule; rates are scaled by the fluid packet-size
factor derived from the full-population path census, so the reported
per-pair throughput reflects the load of the whole network, not the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import phy
from .deployment import PRIMARY, SECONDARY, ConfigurationError, Deployment
from .routing import RelayAssignment, hv_path_cells, path_load_census
from .scheduler import Region, preservation_regions, place_collection_regions, slot_offsets

__all__ = [
    "RunOptions",
    "PacketRecord",
    "SegmentBundle",
    "TransportSim",
    "relay_count",
    "segment_gap",
]

TICKS = 64


def relay_count(m: float) -> int:
    """Segments (and relays) per primary packet: max(1, floor(sqrt(m / ln m)))."""
    if m <= 1:
        raise ConfigurationError(f"relay count needs secondary density > 1, got {m}")
    return max(1, int(math.sqrt(m / math.log(m))))


def segment_gap(arrival_ticks: np.ndarray) -> int:
    """Spread between first and last segment arrival of one bundle, in ticks."""
    ticks = np.asarray(arrival_ticks)
    if ticks.size == 0:
        raise ValueError("bundle has no segment arrivals")
    return int(ticks.max() - ticks.min())


@dataclass(frozen=True)
class RunOptions:
    """Knobs for one simulation run that are not part of the model config."""

    sample_pairs: int = 256
    inject_every: int = 2        # secondary source period, frames per packet
    audit_frames: int = 512      # SINR audit window starting at warmup
    audit_broadcasts: int = 64   # broadcasts fully audited across all ticks
    audit_hops_per_frame: int = 8
    audit_rx_cap: int = 64       # relay receivers sampled per audited broadcast
    collect_records: bool = False
    log_tx_frames: int = 0       # log every secondary TX cell for this many frames


@dataclass(frozen=True)
class PacketRecord:
    packet_id: int
    tier: str
    creation: int        # primary slots (3 per frame) or secondary ticks
    delivery: int
    path_length: int
    segments: int


@dataclass
class SegmentBundle:
    """One primary packet riding the secondary grid as N co-moving segments."""

    pair: int
    path: np.ndarray          # secondary cells, lead relay's cell .. int-dest's cell
    segments: int
    born: int                 # broadcast frame
    lead_pos: np.ndarray      # lead relay position, the first transmitter
    sink_cell: int            # destination primary cell
    dst_node: int
    int_dest: int             # secondary node handing the packet over
    pos: int = 0
    arrival_frame: int = -1
    delivered_frame: int = -1
    arrival_ticks: np.ndarray | None = None
    ready_frame: int = -1
    hops_log: list = field(default_factory=list)


class TransportSim:
    """Frame-stepped transport over a built deployment and relay assignment."""

    def __init__(
        self,
        deployment: Deployment,
        relays: RelayAssignment,
        options: RunOptions,
        rng: np.random.Generator,
    ):
        self.dep = deployment
        self.cfg = deployment.config
        self.opt = options
        self.rng = rng
        self.gp = deployment.primary_grid
        self.gs = deployment.secondary_grid
        self.k_p = self.gp.side_count
        self.k_s = self.gs.side_count
        self.sigma_p = slot_offsets(self.k_p)
        self.sigma_s = slot_offsets(self.k_s)
        self.sec_relay = relays.secondary_relay
        self.sec_pos = deployment.secondary_pos
        self.pri_pos = deployment.primary_pos
        self.n_relays = relay_count(self.cfg.m)
        self.p_p = phy.tx_power(self.gp.cell_area, self.cfg.power_const, self.cfg.alpha)
        self.p_s = phy.tx_power(self.gs.cell_area, self.cfg.power_const, self.cfg.alpha)

        self._setup_primary()
        self._setup_secondary()
        self._setup_schedule()

        # counters
        self.frame = 0
        self.injected_p = 0
        self.delivered_direct = 0
        self.delivered_direct_post = 0
        self.delivered_carried = 0
        self.dropped_p = 0
        self.injected_s = 0
        self.delivered_s = 0
        self.delivered_s_post = 0
        self.delay_s_sum = 0.0
        self.delay_p_sum = 0.0
        self.delivered_carried_post = 0
        self.wait_sum = 0.0
        self.gap_ok = 0
        self.gap_total = 0
        self.max_gap = 0
        self.bundles: list[SegmentBundle] = []
        self.pending: list[SegmentBundle] = []
        self.records: list[PacketRecord] = []
        self.delivered_bundles: list[SegmentBundle] = []
        self.report = phy.RateReport()
        self._audited_broadcasts = 0
        self._packet_seq = 0
        self.tx_log_frames: list[int] = []
        self.tx_log_cells: list[int] = []
        self._audit_cache: dict[int, list] = {}

    # ======== setup ========

    def _setup_primary(self) -> None:
        dep = self.dep
        pairs = dep.primary_pairs
        self.pairs_p = pairs
        self.n_pairs_p = len(pairs)
        src_cells = dep.primary_cells[pairs[:, 0]]
        dst_cells = dep.primary_cells[pairs[:, 1]]
        self.pair_path: list[tuple[int, ...]] = []
        self.pair_direct = np.zeros(self.n_pairs_p, dtype=bool)
        self.pair_relay_cell = np.full(self.n_pairs_p, -1, dtype=np.int64)
        self.pair_int_dest = np.full(self.n_pairs_p, -1, dtype=np.int64)
        self.pair_int_dest_cell = np.full(self.n_pairs_p, -1, dtype=np.int64)
        self.pair_sink = dst_cells.astype(np.int64)
        sec_in_prim = dep.secondary_index_primary_grid
        for i in range(self.n_pairs_p):
            path = hv_path_cells(int(src_cells[i]), int(dst_cells[i]), self.k_p)
            self.pair_path.append(path)
            if len(path) <= 2:
                self.pair_direct[i] = True
                continue
            self.pair_relay_cell[i] = path[1]
            penult = path[-2]
            members = sec_in_prim.members(penult)
            if len(members) == 0:
                continue  # stays unservable, packets will be counted as drops
            center = self.gp.center(path[-1])
            d2 = ((self.sec_pos[members] - center) ** 2).sum(axis=1)
            node = int(members[np.argmin(d2)])
            self.pair_int_dest[i] = node
            self.pair_int_dest_cell[i] = dep.secondary_cells[node]

        # sources grouped by their cell, with a round-robin cursor per cell
        order = np.argsort(src_cells, kind="stable")
        counts = np.bincount(src_cells, minlength=self.gp.cell_count)
        starts = np.zeros(self.gp.cell_count + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        self._src_order = order
        self._src_starts = starts
        self._src_counts = counts
        self._rr = np.zeros(self.gp.cell_count, dtype=np.int64)

    def _setup_secondary(self) -> None:
        dep = self.dep
        pairs = dep.secondary_pairs
        self.n_pairs_s = len(pairs)
        pair_cells = dep.secondary_cells[pairs] if len(pairs) else np.empty((0, 2), np.int64)
        census = path_load_census(pair_cells, self.k_s)
        self.census_max = int(census.max()) if self.n_pairs_s else 0
        self.packet_size_factor = 1.0 / self.census_max if self.census_max else float("nan")

        take = min(self.opt.sample_pairs, self.n_pairs_s)
        rows = np.sort(self.rng.choice(self.n_pairs_s, size=take, replace=False))
        self.sample_rows = rows
        self.s_src = pairs[rows, 0]
        self.s_dst = pairs[rows, 1]
        paths = []
        for r in range(take):
            sc = int(dep.secondary_cells[self.s_src[r]])
            dc = int(dep.secondary_cells[self.s_dst[r]])
            raw = hv_path_cells(sc, dc, self.k_s)
            if len(raw) == 1:
                raw = (sc, sc)  # same-cell pair still takes one in-cell hop
            interior = [c for c in raw[1:-1] if self.sec_relay[c] >= 0]
            paths.append((raw[0], *interior, raw[-1]))
        self.plen = np.array([len(p) for p in paths], dtype=np.int64)
        self.path_off = np.zeros(take, dtype=np.int64)
        np.cumsum(self.plen[:-1], out=self.path_off[1:])
        self.path_flat = np.array([c for p in paths for c in p], dtype=np.int64)
        self.birth_sigma = self.sigma_s[self.path_flat[self.path_off]]

        cap = int(self.plen.max()) // max(1, self.opt.inject_every) + 96 if take else 8
        self._cap = cap
        self.pos2 = np.full((take, cap), -1, dtype=np.int64)
        self.birth2 = np.full((take, cap), -1, dtype=np.int64)
        self.cnt = np.zeros(take, dtype=np.int64)
        self.n_sampled = take

    def _setup_schedule(self) -> None:
        occupied = np.flatnonzero(self._src_counts > 0)
        self.phase_cells: list[np.ndarray] = []
        self.phase_regions: list[list[Region]] = []
        self.phase_rects: list[list[tuple[int, int, int, int]]] = []
        for phase in range(TICKS):
            cells = occupied[self.sigma_p[occupied] == phase]
            regions = preservation_regions(cells, self.gp, self.gs)
            self.phase_cells.append(cells)
            self.phase_regions.append(regions)
            self.phase_rects.append([r.secondary_rect() for r in regions])
        by_tick = np.argsort(self.sigma_s, kind="stable")
        bounds = np.searchsorted(self.sigma_s[by_tick], np.arange(TICKS + 1))
        self.cells_by_tick = [by_tick[bounds[t] : bounds[t + 1]] for t in range(TICKS)]

    # ======== per-frame mechanics ========

    def _blocked(self, cells: np.ndarray, rects) -> np.ndarray:
        cx = cells // self.k_s
        cy = cells % self.k_s
        out = np.zeros(cells.shape, dtype=bool)
        for x0, x1, y0, y1 in rects:
            out |= (cx >= x0) & (cx <= x1) & (cy >= y0) & (cy <= y1)
        return out

    def _log_tx(self, t: int, cells) -> None:
        if not (0 < self.opt.log_tx_frames and
                self.cfg.warmup_frames <= t < self.cfg.warmup_frames + self.opt.log_tx_frames):
            return
        arr = np.atleast_1d(np.asarray(cells, dtype=np.int64))
        self.tx_log_frames.extend([t] * len(arr))
        self.tx_log_cells.extend(int(c) for c in arr)

    def _in_audit(self, t: int) -> bool:
        return self.cfg.warmup_frames <= t < self.cfg.warmup_frames + self.opt.audit_frames

    def _broadcast(self, t: int) -> list:
        """Every active source cell emits one packet; returns this frame's TX list."""
        events = []
        for cell in self.phase_cells[t % TICKS]:
            k = self._rr[cell] % self._src_counts[cell]
            self._rr[cell] += 1
            pair = int(self._src_order[self._src_starts[cell] + k])
            self.injected_p += 1
            src_pos = self.pri_pos[self.pairs_p[pair, 0]]
            if self.pair_direct[pair]:
                self.delivered_direct += 1
                if t >= self.cfg.warmup_frames:
                    self.delivered_direct_post += 1
                dst_pos = self.pri_pos[self.pairs_p[pair, 1]]
                # a direct handoff is a broadcast-slot reception, so it is
                # audited with the primary receptions, not the region deliveries
                events.append((src_pos, dst_pos[None, :], "primary", pair))
                if self.opt.collect_records:
                    self.records.append(PacketRecord(
                        self._next_id(), PRIMARY, 3 * t, 3 * t + 2,
                        len(self.pair_path[pair]), 0))
                continue
            if self.pair_int_dest[pair] < 0:
                self.dropped_p += 1
                continue
            members = self.dep.secondary_index_primary_grid.members(
                int(self.pair_relay_cell[pair]))
            if len(members) < self.n_relays:
                self.dropped_p += 1
                continue
            ids = self.rng.choice(members, size=self.n_relays, replace=False)
            lead = int(ids[self.rng.integers(self.n_relays)])
            lead_cell = int(self.dep.secondary_cells[lead])
            raw = hv_path_cells(lead_cell, int(self.pair_int_dest_cell[pair]), self.k_s)
            interior = [c for c in raw[1:-1] if self.sec_relay[c] >= 0]
            path = np.array([raw[0], *interior, raw[-1]] if len(raw) > 1 else raw,
                            dtype=np.int64)
            bundle = SegmentBundle(
                pair=pair, path=path, segments=self.n_relays, born=t,
                lead_pos=self.sec_pos[lead].copy(),
                sink_cell=int(self.pair_sink[pair]),
                dst_node=int(self.pairs_p[pair, 1]),
                int_dest=int(self.pair_int_dest[pair]))
            if len(path) == 1:
                self._bundle_arrived(bundle, t, int(path[0]))
            else:
                self.bundles.append(bundle)
            events.append((src_pos, self.sec_pos[ids], "primary", pair))
        return events

    def _next_id(self) -> int:
        self._packet_seq += 1
        return self._packet_seq

    def _grow(self) -> None:
        cap = self._cap * 2
        for name in ("pos2", "birth2"):
            old = getattr(self, name)
            new = np.full((self.n_sampled, cap), -1, dtype=np.int64)
            new[:, : self._cap] = old
            setattr(self, name, new)
        self._cap = cap

    def _inject(self, t: int) -> None:
        if self.n_sampled == 0 or t % self.opt.inject_every:
            return
        if (self.cnt >= self._cap).any():
            self._grow()
        rows = np.arange(self.n_sampled)
        self.pos2[rows, self.cnt] = 0
        self.birth2[rows, self.cnt] = 64 * t + self.birth_sigma
        self.cnt += 1
        self.injected_s += self.n_sampled

    def _advance_secondary(self, t: int, rects) -> list:
        """Subframe 1: one hop per unblocked cell per path, eldest packet first."""
        if self.n_sampled == 0:
            return []
        pos = self.pos2
        occ = pos >= 0
        idx = self.path_off[:, None] + np.clip(pos, 0, None)
        cells = self.path_flat[idx]
        lead = occ.copy()
        lead[:, 1:] &= pos[:, 1:] != pos[:, :-1]
        blocked = self._blocked(cells, rects) if rects else np.zeros_like(lead)
        move = lead & ~blocked
        prev_cells = cells[:, 0].copy()
        pos += move
        self._log_tx(t, cells[move])

        moved_hops = []
        if self._in_audit(t) and self.opt.audit_hops_per_frame:
            rows, cols = np.nonzero(move)
            for j in range(min(len(rows), self.opt.audit_hops_per_frame)):
                r, c = int(rows[j]), int(cols[j])
                newpos = int(pos[r, c])
                prev = int(self.path_flat[self.path_off[r] + newpos - 1])
                new = int(self.path_flat[self.path_off[r] + newpos])
                tx = (self.sec_pos[self.s_src[r]] if newpos == 1
                      else self.sec_pos[self.sec_relay[prev]])
                rx = (self.sec_pos[self.s_dst[r]] if newpos == self.plen[r] - 1
                      else self.sec_pos[self.sec_relay[new]])
                moved_hops.append((tx, rx, prev))

        done = occ[:, 0] & (pos[:, 0] == self.plen - 1)
        rows = np.flatnonzero(done)
        if len(rows):
            arrival = 64 * t + self.sigma_s[prev_cells[rows]] + 1
            delays = arrival - self.birth2[rows, 0]
            self.delivered_s += len(rows)
            if t >= self.cfg.warmup_frames:
                self.delivered_s_post += len(rows)
                self.delay_s_sum += float(delays.sum())
            if self.opt.collect_records:
                for j, r in enumerate(rows):
                    self.records.append(PacketRecord(
                        self._next_id(), SECONDARY, int(self.birth2[r, 0]),
                        int(arrival[j]), int(self.plen[r]), 1))
            self.pos2[rows, :-1] = self.pos2[rows, 1:]
            self.pos2[rows, -1] = -1
            self.birth2[rows, :-1] = self.birth2[rows, 1:]
            self.birth2[rows, -1] = -1
            self.cnt[rows] -= 1
        return moved_hops

    def _bundle_arrived(self, b: SegmentBundle, t: int, last_cell: int) -> None:
        b.arrival_frame = t
        tick = 64 * t + int(self.sigma_s[last_cell]) + 1
        b.arrival_ticks = np.full(b.segments, tick, dtype=np.int64)
        b.ready_frame = t + 1  # joins the delivery roster next frame
        self.pending.append(b)

    def _advance_bundles(self, t: int, rects) -> list:
        """Subframe 2: bundles hop atomically, one bundle per cell per pair."""
        moved = []
        still: list[SegmentBundle] = []
        taken: set[tuple[int, int]] = set()
        for b in self.bundles:
            if b.born == t:  # segments only land by the end of the broadcast slot
                still.append(b)
                continue
            cell = int(b.path[b.pos])
            key = (cell, b.pair)
            if key in taken or (rects and self._blocked(np.array([cell]), rects)[0]):
                still.append(b)
                continue
            taken.add(key)
            b.pos += 1
            if self.opt.collect_records:
                b.hops_log.append(t)
            self._log_tx(t, cell)
            new_cell = int(b.path[b.pos])
            if self._in_audit(t):
                tx = b.lead_pos if b.pos == 1 else self.sec_pos[self.sec_relay[cell]]
                rx = (self.sec_pos[b.int_dest] if b.pos == len(b.path) - 1
                      else self.sec_pos[self.sec_relay[new_cell]])
                moved.append((tx, rx, cell))
            if b.pos == len(b.path) - 1:
                self._bundle_arrived(b, t, cell)
            else:
                still.append(b)
        self.bundles = still
        return moved

    def _deliver(self, t: int, regions) -> list:
        """Subframe 3: greedy disjoint collection regions, one packet per sink node."""
        ready = [b for b in self.pending if b.ready_frame <= t]
        if not ready:
            return []
        sinks = np.array(sorted({b.sink_cell for b in ready}), dtype=np.int64)
        admitted = place_collection_regions(sinks, regions, self.gp, self.gs)
        if not admitted:
            return []
        open_sinks = {r.center for r in admitted}
        served: set[int] = set()
        busy_tx: set[int] = set()
        delivered = []
        for b in ready:
            if (b.sink_cell not in open_sinks or b.dst_node in served
                    or b.int_dest in busy_tx):
                continue
            served.add(b.dst_node)
            busy_tx.add(b.int_dest)
            delivered.append(b)
        if not delivered:
            return []
        events = []
        done = set()
        for b in delivered:
            done.add(id(b))
            b.delivered_frame = t
            self.delivered_carried += 1
            self._log_tx(t, int(self.dep.secondary_cells[b.int_dest]))
            gap = segment_gap(b.arrival_ticks)
            self.gap_total += 1
            self.gap_ok += gap <= TICKS
            self.max_gap = max(self.max_gap, gap)
            if t >= self.cfg.warmup_frames:
                self.delivered_carried_post += 1
                self.delay_p_sum += 3 * (t - b.born) + 2
                self.wait_sum += t - b.arrival_frame
            if self.opt.collect_records:
                self.delivered_bundles.append(b)
                self.records.append(PacketRecord(
                    self._next_id(), PRIMARY, 3 * b.born, 3 * t + 2,
                    len(b.path), b.segments))
            events.append((self.sec_pos[b.int_dest], self.pri_pos[b.dst_node],
                           b.sink_cell))
        self.pending = [b for b in self.pending if id(b) not in done]
        return events

    # ======== SINR audit ========

    def _tick_sets(self, phase: int) -> list:
        """Structural transmitter positions per tick: every unblocked active cell."""
        cached = self._audit_cache.get(phase)
        if cached is not None:
            return cached
        rects = self.phase_rects[phase]
        sets = []
        for tick in range(TICKS):
            cells = self.cells_by_tick[tick]
            cells = cells[self.sec_relay[cells] >= 0]
            if rects:
                cells = cells[~self._blocked(cells, rects)]
            sets.append((cells, self.sec_pos[self.sec_relay[cells]]))
        self._audit_cache[phase] = sets
        return sets

    def _audit_frame(self, t, broadcasts, hops, deliveries) -> None:
        if not self._in_audit(t):
            return
        noise, alpha = self.cfg.noise, self.cfg.alpha
        sets = self._tick_sets(t % TICKS)
        bc_pos = np.array([b[0] for b in broadcasts]).reshape(-1, 2)
        deliv_tx = np.array([d[0] for d in deliveries]).reshape(-1, 2)

        for tx, rx, prev_cell in hops:
            cells, pos = sets[int(self.sigma_s[prev_cell])]
            keep = cells != prev_cell
            int_pos = np.vstack([pos[keep], bc_pos])
            int_pow = np.concatenate([
                np.full(int(keep.sum()), self.p_s), np.full(len(bc_pos), self.p_p)])
            s = phy.sinr_at(rx[None, :], np.asarray(tx, dtype=float), self.p_s,
                            int_pos, int_pow, noise, alpha)
            self.report.record("secondary", s)

        sink_of = np.array([d[2] for d in deliveries], dtype=np.int64)
        for tx_int_dest, rx_dst, sink in deliveries:
            # same-region deliveries take distinct ticks of the subframe,
            # so only other regions' transmitters interfere
            others = deliv_tx[sink_of != sink]
            int_pos = np.vstack([others, bc_pos])
            int_pow = np.full(len(int_pos), self.p_p)
            s = phy.sinr_at(rx_dst[None, :], np.asarray(tx_int_dest, dtype=float),
                            self.p_p, int_pos, int_pow, noise, alpha)
            self.report.record("delivery", s)

        if self._audited_broadcasts >= self.opt.audit_broadcasts:
            return
        for j, (src_pos, rx_all, category, _pair) in enumerate(broadcasts):
            if self._audited_broadcasts >= self.opt.audit_broadcasts:
                break
            self._audited_broadcasts += 1
            rx = rx_all[: self.opt.audit_rx_cap]
            other_bc = np.delete(bc_pos, j, axis=0)
            worst = np.full(len(rx), np.inf)
            for tick in range(TICKS):
                _cells, pos = sets[tick]
                int_pos = np.vstack([pos, other_bc])
                int_pow = np.concatenate([
                    np.full(len(pos), self.p_s), np.full(len(other_bc), self.p_p)])
                s = phy.sinr_at(rx, np.asarray(src_pos, dtype=float), self.p_p,
                                int_pos, int_pow, noise, alpha)
                worst = np.minimum(worst, s)
            # the delivery subframe runs concurrently with the broadcast slot
            int_pos = np.vstack([deliv_tx, other_bc])
            int_pow = np.full(len(int_pos), self.p_p)
            s = phy.sinr_at(rx, np.asarray(src_pos, dtype=float), self.p_p,
                            int_pos, int_pow, noise, alpha)
            worst = np.minimum(worst, s)
            self.report.record(category, worst)

    # ======== driver ========

    def step(self) -> None:
        t = self.frame
        phase = t % TICKS
        regions = self.phase_regions[phase]
        rects = self.phase_rects[phase]
        broadcasts = self._broadcast(t)
        self._inject(t)
        hops = self._advance_secondary(t, rects)
        bundle_hops = self._advance_bundles(t, rects)
        deliveries = self._deliver(t, regions)
        self._audit_frame(t, broadcasts, hops + bundle_hops, deliveries)
        alive_s = int(self.cnt.sum())
        assert self.injected_s == self.delivered_s + alive_s
        assert self.injected_p == (self.delivered_direct + self.delivered_carried
                                   + self.dropped_p + len(self.bundles) + len(self.pending))
        self.frame = t + 1

    def run(self) -> None:
        while self.frame < self.cfg.frames:
            self.step()

    def metrics(self) -> dict:
        """Rates per slot in each tier's own units, delays, audit floors, drops."""
        cfg = self.cfg
        span = cfg.frames - cfg.warmup_frames
        pairs_s = self.n_pairs_s
        rate_s = (self.delivered_s_post / (self.n_sampled * span * TICKS)
                  if self.n_sampled else 0.0)
        # zero traffic reports zero throughput, not nan; delay stays undefined
        lambda_s = rate_s * self.packet_size_factor if rate_s else 0.0
        delivered_p_post = self.delivered_carried_post + self.delivered_direct_post
        lambda_p = (delivered_p_post / (self.n_pairs_p * span * 3)
                    if self.n_pairs_p else float("nan"))
        injected = self.injected_p + self.injected_s
        dropped = self.dropped_p
        return {
            "lambda_p": lambda_p,
            "T_p": lambda_p * self.n_pairs_p,
            "D_p": (self.delay_p_sum / self.delivered_carried_post
                    if self.delivered_carried_post else float("nan")),
            "lambda_s": lambda_s,
            "T_s": lambda_s * pairs_s,
            "D_s": (self.delay_s_sum / self.delivered_s_post
                    if self.delivered_s_post else float("nan")),
            "min_sinr_primary": self.report.floor("primary"),
            "min_sinr_delivery": self.report.floor("delivery"),
            "min_sinr_secondary": self.report.floor("secondary"),
            "drop_rate": dropped / injected if injected else 0.0,
            "delivered_secondary": self.delivered_s_post,
            "delivered_carried": self.delivered_carried_post,
            "delivered_direct": self.delivered_direct_post,
            "pending_wait": (self.wait_sum / self.delivered_carried_post
                             if self.delivered_carried_post else float("nan")),
            "census_max": self.census_max,
            "packet_size_factor": self.packet_size_factor,
            "segment_gap_within_frame": (self.gap_ok / self.gap_total
                                         if self.gap_total else float("nan")),
            "segment_gap_max": self.max_gap,
            "low_confidence": (self.delivered_s_post < 30
                               or self.delivered_carried_post < 30),
            "audit_samples": dict(self.report.samples),
        }
