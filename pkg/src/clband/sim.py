"""Dynamic lightpath simulation with EFF/ELF spectrum assignment.

Arrivals are Poisson, holding times exponential, source/destination pairs
and bitrates uniform.  Each arrival tries its k link-disjoint candidate
routes in order; the first route whose reach admits a modulation format
and whose links share an exactly-sized free channel-aligned block wins.
Blocking is counted in bitrate (bandwidth blocking probability).

Slot layout follows the scan order of the channel plan: the C-band block
comes first, slots ascending in wavelength, then the L-band block.  Exact
first fit scans that axis upward (C band first), exact last fit downward
(L band first); the two policies are mirror images of each other.

Physics is precomputed once per span length at the configured launch power
with every channel lit (ASE loading for idle channels); the event loop
never recomputes it.
"""

import heapq
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np
from scipy import stats as sps

from .constants import Band, MODULATION_FORMATS, SLOTS_PER_CHANNEL
from .errors import ConfigError
from .gsnr import SpanPhysicsCache
from .topology import k_disjoint_shortest_paths
from .units import db_to_lin, lin_to_db

BITRATES_GBPS = (100, 200, 300, 400, 500, 600)

EFF = "eff"
ELF = "elf"


@dataclass(frozen=True)
class Demand:
    id: int
    source: str
    destination: str
    bitrate_gbps: int
    arrival_time: float
    holding_time: float


def generate_traffic(seed, arrival_rate, mean_holding, n_demands, nodes):
    """Reproducible demand stream.

    Inter-arrivals are exponential with rate ``arrival_rate``, holding
    times exponential with mean ``mean_holding``; (source, destination)
    ordered pairs and bitrates are uniform.  The offered traffic load is
    arrival_rate * mean_holding normalized units.
    """
    if arrival_rate <= 0 or mean_holding <= 0:
        raise ConfigError("arrival rate and holding time must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    inter = rng.exponential(1.0 / arrival_rate, n_demands)
    holding = rng.exponential(mean_holding, n_demands)
    src_idx = rng.integers(0, len(nodes), n_demands)
    dst_off = rng.integers(1, len(nodes), n_demands)
    dst_idx = (src_idx + dst_off) % len(nodes)
    rates = rng.integers(0, len(BITRATES_GBPS), n_demands)
    t = np.cumsum(inter)
    return [
        Demand(
            id=i,
            source=nodes[src_idx[i]],
            destination=nodes[dst_idx[i]],
            bitrate_gbps=BITRATES_GBPS[rates[i]],
            arrival_time=float(t[i]),
            holding_time=float(holding[i]),
        )
        for i in range(n_demands)
    ]


def select_format_and_width(route_spans, mrd_table, bitrate_gbps):
    """Highest-cardinality format whose band-wide reach covers the route.

    Returns (m, n_subchannels) or None when even PM-BPSK cannot reach
    (distance blocking).
    """
    for fmt in reversed(MODULATION_FORMATS):
        if mrd_table.reach_of(fmt.m) >= route_spans:
            n_sub = -(-bitrate_gbps // fmt.subchannel_gbps)  # ceil
            return fmt.m, n_sub
    return None


@dataclass(frozen=True)
class SpectrumAssignment:
    band: Band
    start_slot: int          # within-band slot index, scan order
    n_slots: int
    scan_positions: tuple    # channel positions in scan order
    channel_indices: tuple   # 1-based frequency-ascending channel indices


class SpectrumState:
    """Per-link slot occupancy bitmaps plus the lightpath reverse index."""

    def __init__(self, grid, n_links):
        self.grid = grid
        self.c_slots = grid.c_slots
        self.n_slots = grid.c_slots + grid.l_slots
        self.n_positions = self.n_slots // SLOTS_PER_CHANNEL
        self.c_positions = self.c_slots // SLOTS_PER_CHANNEL
        self.occ = np.zeros((n_links, self.n_slots), dtype=bool)
        self._held = {}

    def band_bitmap(self, link_id, band):
        if band is Band.C:
            return self.occ[link_id, : self.c_slots]
        return self.occ[link_id, self.c_slots :]

    def find_block(self, link_ids, n_subchannels, policy):
        """First (EFF) or last (ELF) exactly-sized free aligned block.

        Blocks never straddle the band boundary.  Returns a scan-order
        channel position or None.
        """
        free = ~np.bitwise_or.reduce(self.occ[list(link_ids)], axis=0)
        chfree = free.reshape(self.n_positions, SLOTS_PER_CHANNEL).all(axis=1)
        n = n_subchannels
        bands = [(0, self.c_positions), (self.c_positions, self.n_positions)]
        order = bands if policy == EFF else bands[::-1]
        for lo, hi in order:
            if hi - lo < n:
                continue
            runs = np.convolve(chfree[lo:hi], np.ones(n), mode="valid") == n
            idx = np.nonzero(runs)[0]
            if len(idx) == 0:
                continue
            return lo + (idx[0] if policy == EFF else idx[-1])
        return None

    def assignment_at(self, pos, n_subchannels):
        start = pos * SLOTS_PER_CHANNEL
        n_slots = n_subchannels * SLOTS_PER_CHANNEL
        in_c = pos < self.c_positions
        band = Band.C if in_c else Band.L
        band_start = start if in_c else start - self.c_slots
        positions = tuple(range(pos, pos + n_subchannels))
        channels = tuple(self.grid.n_channels - p for p in positions)
        return SpectrumAssignment(band, band_start, n_slots, positions, channels)

    def occupy(self, lightpath_id, link_ids, pos, n_subchannels):
        lo = pos * SLOTS_PER_CHANNEL
        hi = lo + n_subchannels * SLOTS_PER_CHANNEL
        sel = self.occ[list(link_ids), lo:hi]
        assert not sel.any(), "allocation overlaps an owned slot"
        self.occ[list(link_ids), lo:hi] = True
        self._held[lightpath_id] = (tuple(link_ids), lo, hi)

    def release(self, lightpath_id):
        link_ids, lo, hi = self._held.pop(lightpath_id)
        sel = self.occ[list(link_ids), lo:hi]
        assert sel.all(), "releasing a slot that was not held"
        self.occ[list(link_ids), lo:hi] = False

    def occupied_slot_count(self):
        return int(self.occ.sum())

    def is_empty(self):
        return not self.occ.any() and not self._held


def assign_spectrum(state, link_ids, n_slots, policy):
    """Spec-level entry point: exact-fit search for ``n_slots`` (multiple of 6).

    Returns a SpectrumAssignment or None when blocked.
    """
    if n_slots % SLOTS_PER_CHANNEL:
        raise ConfigError("spectrum requests must be whole 6-slot channels")
    if policy not in (EFF, ELF):
        raise ConfigError(f"unknown assignment policy {policy!r}")
    pos = state.find_block(link_ids, n_slots // SLOTS_PER_CHANNEL, policy)
    if pos is None:
        return None
    return state.assignment_at(pos, n_slots // SLOTS_PER_CHANNEL)


@dataclass
class ReplicationStats:
    offered_gbps: float = 0.0
    blocked_gbps: float = 0.0
    gsnr_sum_db: float = 0.0
    accepted: int = 0

    @property
    def bbp(self):
        return self.blocked_gbps / self.offered_gbps if self.offered_gbps else 0.0

    @property
    def mean_gsnr_db(self):
        return self.gsnr_sum_db / self.accepted if self.accepted else float("nan")


@dataclass(frozen=True)
class SimReport:
    otl_grid: tuple
    policies: tuple
    replications: int
    n_demands: int
    warmup_frac: float
    seeds: tuple
    bbp: dict = field(default_factory=dict)            # (otl, policy) -> per-rep list
    mean_gsnr_db: dict = field(default_factory=dict)

    @staticmethod
    def _ci(values):
        v = np.asarray(values, dtype=float)
        if len(v) < 2:
            return 0.0
        return float(sps.t.ppf(0.975, len(v) - 1) * v.std(ddof=1) / np.sqrt(len(v)))

    def summary_rows(self):
        rows = []
        for otl in self.otl_grid:
            for policy in self.policies:
                b = self.bbp[(otl, policy)]
                g = self.mean_gsnr_db[(otl, policy)]
                rows.append(
                    {
                        "otl": otl,
                        "policy": policy,
                        "bbp": float(np.mean(b)),
                        "bbp_ci": self._ci(b),
                        "mean_gsnr_db": float(np.mean(g)),
                        "gsnr_ci": self._ci(g),
                    }
                )
        return rows

    def to_dict(self):
        return {
            "otl_grid": list(self.otl_grid),
            "policies": list(self.policies),
            "replications": self.replications,
            "n_demands": self.n_demands,
            "warmup_frac": self.warmup_frac,
            "seeds": list(self.seeds),
            "bbp": {f"{o}|{p}": v for (o, p), v in self.bbp.items()},
            "mean_gsnr_db": {
                f"{o}|{p}": v for (o, p), v in self.mean_gsnr_db.items()
            },
        }

    @classmethod
    def from_dict(cls, d):
        def parse(entry):
            return {
                (float(key.split("|")[0]), key.split("|")[1]): v
                for key, v in entry.items()
            }

        return cls(
            otl_grid=tuple(float(o) for o in d["otl_grid"]),
            policies=tuple(d["policies"]),
            replications=int(d["replications"]),
            n_demands=int(d["n_demands"]),
            warmup_frac=float(d["warmup_frac"]),
            seeds=tuple(int(s) for s in d["seeds"]),
            bbp=parse(d["bbp"]),
            mean_gsnr_db=parse(d["mean_gsnr_db"]),
        )


class RoutePhysics:
    """Per-route candidate list with precomputed full-load GSNR tables.

    One physics evaluation per distinct span length; route GSNR follows
    from inverse-SNR additivity over the route's spans plus the
    transceiver term, identical to the gsnr engine output.
    """

    def __init__(self, grid, fiber, amplifier, topology, mrd_table, snr_trx_db=36.0,
                 k_paths=3, engine="closed-form", disk_cache=None, config_hash=None):
        self.grid = grid
        self.mrd = mrd_table
        lengths = sorted({s for lk in topology.links for s in lk.span_lengths_km})
        inv_by_len = {}
        for length in lengths:
            fib = dc_replace(fiber, span_length_km=length)
            cache = SpanPhysicsCache(
                grid, fib, amplifier, engine=engine,
                disk_cache=disk_cache, config_hash=config_hash,
            )
            inv_by_len[length] = cache.inverse_snr(mrd_table.optimum_power_dbm)
        link_inv = []
        for lk in topology.links:
            acc = np.zeros(grid.n_channels)
            for s in lk.span_lengths_km:
                acc += inv_by_len[s]
            link_inv.append(acc)
        trx_inv = 1.0 / db_to_lin(snr_trx_db)
        self.routes = {}
        for s in topology.nodes:
            for d in topology.nodes:
                if s == d:
                    continue
                entries = []
                for route in k_disjoint_shortest_paths(topology, s, d, k_paths):
                    inv = np.zeros(grid.n_channels)
                    for li in route.link_ids:
                        inv += link_inv[li]
                    gsnr_db = lin_to_db(1.0 / (inv + trx_inv))
                    entries.append((route, gsnr_db))
                self.routes[(s, d)] = entries


def run_replication(route_physics, topology, policy, demands, warmup_frac=0.05):
    """One single-threaded event loop; returns ReplicationStats."""
    grid = route_physics.grid
    mrd = route_physics.mrd
    links = topology.links
    state = SpectrumState(grid, 2 * topology.n_links)
    rep = ReplicationStats()
    warmup = int(len(demands) * warmup_frac)
    heap = [(dm.arrival_time, dm.id, 0, dm) for dm in demands]
    heapq.heapify(heap)
    seq = len(demands)
    while heap:
        _t, _o, kind, payload = heapq.heappop(heap)
        if kind == 1:
            state.release(payload)
            continue
        dm = payload
        counted = dm.id >= warmup
        if counted:
            rep.offered_gbps += dm.bitrate_gbps
        placed = False
        for route, gsnr_db in route_physics.routes[(dm.source, dm.destination)]:
            sel = select_format_and_width(route.n_spans, mrd, dm.bitrate_gbps)
            if sel is None:
                continue
            _m, n_sub = sel
            link_ids = [
                2 * li
                + (0 if (route.nodes[h], route.nodes[h + 1]) == (links[li].a, links[li].b) else 1)
                for h, li in enumerate(route.link_ids)
            ]
            pos = state.find_block(link_ids, n_sub, policy)
            if pos is None:
                continue
            assign = state.assignment_at(pos, n_sub)
            state.occupy(dm.id, link_ids, pos, n_sub)
            heapq.heappush(heap, (dm.arrival_time + dm.holding_time, seq, 1, dm.id))
            seq += 1
            if counted:
                chans = np.asarray(assign.channel_indices) - 1
                rep.gsnr_sum_db += float(np.mean(gsnr_db[chans]))
                rep.accepted += 1
            placed = True
            break
        if not placed and counted:
            rep.blocked_gbps += dm.bitrate_gbps
    assert state.is_empty(), "spectrum not fully released at drain"
    return rep


_WORKER = {}


def _init_worker(route_physics, topology, policies, seed, mean_holding,
                 n_demands, warmup_frac):
    _WORKER["ctx"] = (
        route_physics, topology, policies, seed, mean_holding, n_demands, warmup_frac
    )


def _run_task(task):
    route_physics, topology, policies, seed, mean_holding, n_demands, warmup_frac = (
        _WORKER["ctx"]
    )
    oi, otl, rep_idx = task
    demands = generate_traffic(
        [seed, oi, rep_idx], otl / mean_holding, mean_holding, n_demands,
        list(topology.nodes),
    )
    return {
        policy: run_replication(route_physics, topology, policy, demands, warmup_frac)
        for policy in policies
    }


def run_simulation(
    grid, fiber, amplifier, topology, mrd_table,
    otl_grid, policies=(EFF, ELF), replications=5, n_demands=20000,
    seed=1, k_paths=3, warmup_frac=0.05, snr_trx_db=36.0,
    mean_holding=1.0, engine="closed-form", jobs=1,
    disk_cache=None, config_hash=None,
):
    """Sweep offered load and policies; replication statistics per point.

    Replication r at OTL index o draws its demand stream from
    SeedSequence([seed, o, r]); both policies see identical demands, and
    results are independent of execution order or parallelism.
    """
    route_physics = RoutePhysics(
        grid, fiber, amplifier, topology, mrd_table, snr_trx_db, k_paths, engine,
        disk_cache=disk_cache, config_hash=config_hash,
    )
    tasks = [
        (oi, otl, rep)
        for oi, otl in enumerate(otl_grid)
        for rep in range(replications)
    ]
    init_args = (
        route_physics, topology, tuple(policies), seed, mean_holding,
        n_demands, warmup_frac,
    )
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=init_args
        ) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        _init_worker(*init_args)
        results = [_run_task(t) for t in tasks]

    report = SimReport(
        otl_grid=tuple(otl_grid),
        policies=tuple(policies),
        replications=replications,
        n_demands=n_demands,
        warmup_frac=warmup_frac,
        seeds=tuple(range(replications)),
    )
    for (oi, otl, rep), res in zip(tasks, results):
        for policy, st in res.items():
            report.bbp.setdefault((otl, policy), []).append(st.bbp)
            report.mean_gsnr_db.setdefault((otl, policy), []).append(st.mean_gsnr_db)
    return report
