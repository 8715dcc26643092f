"""Band-wide launch-power optimization and maximum-reach tables.

The decision variable is a single uniform launch power applied to every
channel of the fully loaded C+L comb.  Candidate powers are judged by the
cumulative GSNR (dB sum over all channels and formats, each format
evaluated at its span budget N_span) under the constraint that every
(channel, format) pair still clears its SNR threshold plus the aging
margin at that budget.  A particle swarm searches the power window;
per-channel golden-section optima supply the window bounds and the span
budgets, following the channel-by-channel strategy.

Reach feasibility everywhere in this module means

    GSNR(n spans) >= snr_threshold(m) + aging margin

evaluated on uniform 70 km spans with power restored at each span input.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import MODULATION_FORMATS, Band
from .errors import InfeasibleProblemError, PhysicsError
from .gsnr import DEFAULT_SNR_TRX_DB, SpanPhysicsCache
from .units import db_to_lin, lin_to_db

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
DEFAULT_AGING_MARGIN_DB = 2.0


@dataclass(frozen=True)
class PsoSettings:
    particles: int = 30
    iterations: int = 100
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp_frac: float = 0.2
    penalty_per_db: float = 1e3
    seed: int = 1


@dataclass
class OptimizationProblem:
    grid: object
    fiber: object
    amplifier: object
    formats: tuple = MODULATION_FORMATS
    snr_trx_db: float = DEFAULT_SNR_TRX_DB
    aging_margin_db: float = DEFAULT_AGING_MARGIN_DB
    p_min_dbm: float = -6.0          # channel-by-channel search window
    p_max_dbm: float = 4.0
    pso: PsoSettings = field(default_factory=PsoSettings)
    engine: str = "closed-form"
    correction_enabled: bool = False
    power_resolution_db: float = 0.01

    def __post_init__(self):
        if self.p_min_dbm > self.p_max_dbm:
            raise PhysicsError("p_min must not exceed p_max")
        for f in self.formats:
            if f.snr_threshold_db <= 0:
                raise PhysicsError("thresholds must be positive dB")


@dataclass(frozen=True)
class MrdTable:
    """Maximum reach per format at the band-wide optimum power."""

    optimum_power_dbm: float
    per_format: tuple            # of (m, reach_spans, worst_channel)
    n_span: tuple                # per-format span budgets used by the optimizer
    p_min_dbm: float
    p_max_dbm: float
    per_channel: np.ndarray | None = None   # (n_formats, n_channels)

    def reach_of(self, m):
        for fm, reach, _ in self.per_format:
            if fm == m:
                return reach
        raise KeyError(f"no format m={m} in table")

    def to_dict(self):
        d = {
            "optimum_power_dbm": self.optimum_power_dbm,
            "p_min_dbm": self.p_min_dbm,
            "p_max_dbm": self.p_max_dbm,
            "n_span": list(self.n_span),
            "per_format": [
                {"m": m, "reach_spans": int(r), "worst_channel": int(w)}
                for m, r, w in self.per_format
            ],
        }
        if self.per_channel is not None:
            d["per_channel"] = np.asarray(self.per_channel).astype(int).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            optimum_power_dbm=float(d["optimum_power_dbm"]),
            per_format=tuple(
                (e["m"], int(e["reach_spans"]), int(e["worst_channel"]))
                for e in d["per_format"]
            ),
            n_span=tuple(int(x) for x in d["n_span"]),
            p_min_dbm=float(d["p_min_dbm"]),
            p_max_dbm=float(d["p_max_dbm"]),
            per_channel=(
                np.asarray(d["per_channel"], dtype=int)
                if "per_channel" in d
                else None
            ),
        )


def build_caches(problem: OptimizationProblem, disk_cache=None, config_hash=None):
    """One physics cache per format; shared when the kurtosis correction is off."""
    common = dict(
        engine=problem.engine,
        quantum_db=problem.power_resolution_db / 10,
        disk_cache=disk_cache,
        config_hash=config_hash,
    )
    if not problem.correction_enabled:
        shared = SpanPhysicsCache(
            problem.grid, problem.fiber, problem.amplifier, **common
        )
        return {f.m: shared for f in problem.formats}
    return {
        f.m: SpanPhysicsCache(
            problem.grid, problem.fiber, problem.amplifier,
            interferer_kurtosis=f.excess_kurtosis, **common,
        )
        for f in problem.formats
    }


def _gsnr_db_at(cache, power_dbm, n_spans, snr_trx_db):
    inv = cache.inverse_snr(power_dbm)
    trx = 0.0 if np.isinf(snr_trx_db) else 1.0 / db_to_lin(snr_trx_db)
    return lin_to_db(1.0 / (n_spans * inv + trx))


def per_channel_optimum(
    cache, channel_index, fmt, spans,
    p_min_dbm, p_max_dbm, snr_trx_db=DEFAULT_SNR_TRX_DB, resolution_db=0.01,
):
    """Golden-section launch-power maximization of one channel's GSNR.

    The candidate power applies uniformly to the whole comb when the ISRS
    profile is evaluated; only the objective is per-channel.  Returns
    (power_dbm, gsnr_db at ``spans``).
    """
    i = channel_index - 1

    def score(p):
        return _gsnr_db_at(cache, p, spans, snr_trx_db)[i]

    lo, hi = float(p_min_dbm), float(p_max_dbm)
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = score(x1), score(x2)
    while b - a > resolution_db:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = score(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = score(x1)
    best = 0.5 * (a + b)
    return best, score(best)


def max_reach(
    cache, channel_index, fmt, power_dbm,
    snr_trx_db=DEFAULT_SNR_TRX_DB, aging_margin_db=DEFAULT_AGING_MARGIN_DB,
):
    """Largest span count keeping the channel above threshold + margin.

    Doubles until failure, then binary-searches; GSNR is strictly
    decreasing in span count so the bracket is exact.  Returns 0 when a
    single span already fails.
    """
    i = channel_index - 1
    need = fmt.snr_threshold_db + aging_margin_db

    def ok(n):
        return _gsnr_db_at(cache, power_dbm, n, snr_trx_db)[i] >= need

    if not ok(1):
        return 0
    hi = 1
    while ok(hi * 2):
        hi *= 2
        if hi > 1 << 24:
            raise PhysicsError("reach is unbounded; no noise in the model?")
    lo = hi  # ok(lo) holds, ok(2*hi) failed
    hi = hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def reach_vector(cache, fmt, power_dbm, snr_trx_db, aging_margin_db):
    """Reach of every channel at once (same rule as max_reach)."""
    inv = cache.inverse_snr(power_dbm)
    need = db_to_lin(fmt.snr_threshold_db + aging_margin_db)
    trx = 0.0 if np.isinf(snr_trx_db) else 1.0 / db_to_lin(snr_trx_db)
    budget = 1.0 / need - trx
    if budget <= 0:
        return np.zeros(len(inv), dtype=int)
    return np.floor(budget / inv + 1e-12).astype(int)


def _philox(seed, iteration, particle):
    key = np.array([seed, (iteration << 20) + particle], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def optimize_band_power(problem: OptimizationProblem, caches=None):
    """Solve the uniform-launch-power problem and build the reach table.

    Steps: (1) golden-section per-channel optima define the power window
    and, via the worst channel, the per-format span budgets N_span;
    (2) a particle swarm maximizes the cumulative GSNR under the
    threshold constraint (exterior penalty, final feasibility repair);
    (3) the reach table is recomputed at the winning power.

    Deterministic for a fixed ``problem.pso.seed``.  Raises
    InfeasibleProblemError listing the violating (channel, m) pairs when
    no power in the window satisfies the constraint.
    """
    caches = caches or build_caches(problem)
    formats = problem.formats
    trx = problem.snr_trx_db
    margin = problem.aging_margin_db
    n_ch = problem.grid.n_channels

    # channel-by-channel stage: per-channel optima (format-independent
    # because the optimum maximizes the per-span SNR).
    ref_cache = caches[formats[0].m]
    optima = np.array(
        [
            per_channel_optimum(
                ref_cache, i + 1, formats[0], 1,
                problem.p_min_dbm, problem.p_max_dbm, trx,
                problem.power_resolution_db,
            )[0]
            for i in range(n_ch)
        ]
    )
    p_lo = ref_cache.quantize(optima.min())
    p_hi = ref_cache.quantize(optima.max())

    # span budgets: best worst-case reach achievable at any single power
    # in the window (the paper's channel-by-channel N_span, taken over the
    # worst channel of the whole comb).
    grid_powers = np.arange(p_lo, p_hi + 1e-9, problem.power_resolution_db)
    if len(grid_powers) == 0:
        grid_powers = np.array([p_lo])
    n_span = []
    for fmt in formats:
        worst = [
            reach_vector(caches[fmt.m], fmt, p, trx, margin).min()
            for p in grid_powers
        ]
        n_span.append(int(max(worst)))
    n_span = tuple(n_span)

    trx_inv = 0.0 if np.isinf(trx) else 1.0 / db_to_lin(trx)

    def fitness(p_dbm):
        """(objective, worst violation dB); objective is the dB-sum GSNR."""
        obj = 0.0
        worst_violation = 0.0
        for fmt, n in zip(formats, n_span):
            if n == 0:
                continue
            inv = caches[fmt.m].inverse_snr(p_dbm)
            g_db = lin_to_db(1.0 / (n * inv + trx_inv))
            obj += float(g_db.sum())
            short = (fmt.snr_threshold_db + margin) - g_db.min()
            worst_violation = max(worst_violation, float(short))
        return obj, max(0.0, worst_violation)

    def penalized(p_dbm):
        obj, viol = fitness(p_dbm)
        return obj - problem.pso.penalty_per_db * viol, viol

    if p_hi - p_lo < problem.power_resolution_db / 2:
        best_p = p_lo
        _, viol = fitness(best_p)
        if viol > 0:
            raise InfeasibleProblemError(
                "collapsed power bounds violate the SNR constraint",
                violations=_violations(caches, formats, n_span, best_p, trx, margin),
            )
        return _final_table(problem, caches, best_p, p_lo, p_hi, n_span)

    s = problem.pso
    vmax = s.velocity_clamp_frac * (p_hi - p_lo)
    x = np.empty(s.particles)
    for p in range(s.particles):
        x[p] = p_lo + (p_hi - p_lo) * _philox(s.seed, 0, p).random()
    v = np.zeros(s.particles)
    pbest_x = x.copy()
    pbest_f = np.full(s.particles, -np.inf)
    gbest_x, gbest_f = x[0], -np.inf
    feas_x, feas_f = None, -np.inf

    for it in range(1, s.iterations + 1):
        for p in range(s.particles):
            f, viol = penalized(x[p])
            if viol == 0.0:
                obj = f  # no penalty applied
                if obj > feas_f:
                    feas_f, feas_x = obj, x[p]
            if f > pbest_f[p]:
                pbest_f[p], pbest_x[p] = f, x[p]
            if f > gbest_f:
                gbest_f, gbest_x = f, x[p]
        for p in range(s.particles):
            r1, r2 = _philox(s.seed, it, p).random(2)
            v[p] = (
                s.inertia * v[p]
                + s.cognitive * r1 * (pbest_x[p] - x[p])
                + s.social * r2 * (gbest_x - x[p])
            )
            v[p] = np.clip(v[p], -vmax, vmax)
            x[p] = np.clip(x[p] + v[p], p_lo, p_hi)

    # feasibility repair: the answer must satisfy the constraint exactly.
    best_p = ref_cache.quantize(gbest_x)
    if fitness(best_p)[1] > 0:
        if feas_x is None:
            raise InfeasibleProblemError(
                "no launch power in the window satisfies the SNR constraint",
                violations=_violations(
                    caches, formats, n_span, best_p, trx, margin
                ),
            )
        best_p = ref_cache.quantize(feas_x)
    return _final_table(problem, caches, best_p, p_lo, p_hi, n_span)


def _violations(caches, formats, n_span, power_dbm, trx, margin):
    out = []
    trx_inv = 0.0 if np.isinf(trx) else 1.0 / db_to_lin(trx)
    for fmt, n in zip(formats, n_span):
        if n == 0:
            continue
        inv = caches[fmt.m].inverse_snr(power_dbm)
        g_db = lin_to_db(1.0 / (n * inv + trx_inv))
        for i in np.nonzero(g_db < fmt.snr_threshold_db + margin)[0]:
            out.append((int(i + 1), fmt.m))
    return out


def _final_table(problem, caches, power_dbm, p_lo, p_hi, n_span):
    formats = problem.formats
    per_channel = np.array(
        [
            reach_vector(
                caches[fmt.m], fmt, power_dbm,
                problem.snr_trx_db, problem.aging_margin_db,
            )
            for fmt in formats
        ]
    )
    per_format = []
    for row, fmt in zip(per_channel, formats):
        worst = int(np.argmin(row)) + 1
        per_format.append((fmt.m, int(row.min()), worst))
    return MrdTable(
        optimum_power_dbm=float(power_dbm),
        per_format=tuple(per_format),
        n_span=tuple(n_span),
        p_min_dbm=float(p_lo),
        p_max_dbm=float(p_hi),
        per_channel=per_channel,
    )
