"""End-to-end lightpath GSNR from per-span physics.

The per-span signal-to-noise contribution of channel i is

    SNR_span = (P_ch - P_ch^3 eta) / (P_ASE + P_ch^3 eta)

and contributions accumulate inversely along the path, with the
transceiver ceiling entering once:

    GSNR^-1 = sum_spans SNR_span^-1 + SNR_TRX^-1

Amplifier gain restores every channel to its span-input power, so a span
is fully described by its launch power vector and fiber/amplifier
parameters.  ``SpanOperatingPoint`` bundles the derived per-channel
arrays; ``PathPhysics`` strings spans together.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PhysicsError
from .isrs import ase_powers, closed_form_profile, solve_raman_ode, span_gains
from .nli import closed_form_eta, compute_nli_coefficient
from .units import db_to_lin, dbm_to_w, lin_to_db

DEFAULT_SNR_TRX_DB = 36.0


@dataclass(frozen=True)
class SpanOperatingPoint:
    """Per-channel physics of one amplified span at a fixed launch state."""

    launch_w: np.ndarray
    received_w: np.ndarray
    gain_lin: np.ndarray
    p_ase_w: np.ndarray
    eta_per_w2: np.ndarray
    span_length_km: float

    def inverse_snr(self):
        """Per-channel inverse SNR contribution of this span."""
        p = self.launch_w
        p_nli = p**3 * self.eta_per_w2
        depleted = p - p_nli
        if np.any(depleted <= 0):
            bad = int(np.argmin(depleted)) + 1
            raise PhysicsError(
                f"nonphysical NLI depletion on channel {bad}: P^3*eta >= P"
            )
        return (self.p_ase_w + p_nli) / depleted


def span_operating_point(
    grid, fiber, amplifier, power_dbm,
    engine="closed-form", interferer_kurtosis=0.0, quad=None,
):
    """Compute one span's operating point at uniform launch power.

    ``engine`` selects the NLI route: "closed-form" (fast path) or
    "integral" (numerical GN oracle, slow).  The power profile always uses
    the closed form, which is exact for flat attenuation.
    """
    p = np.full(grid.n_channels, dbm_to_w(power_dbm))
    profile = closed_form_profile(grid, fiber, p)
    gains = span_gains(profile)
    p_ase = ase_powers(grid, amplifier, gains)
    if engine == "closed-form":
        eta, _, _ = closed_form_eta(grid, fiber, p, interferer_kurtosis)
    elif engine == "integral":
        eta = np.array(
            [
                compute_nli_coefficient(
                    grid, fiber, p, i + 1, quad=quad
                ).eta_per_w2
                for i in range(grid.n_channels)
            ]
        )
    else:
        raise ValueError(f"unknown NLI engine {engine!r}")
    return SpanOperatingPoint(
        launch_w=p,
        received_w=profile.received_w,
        gain_lin=gains,
        p_ase_w=p_ase,
        eta_per_w2=eta,
        span_length_km=fiber.span_length_km,
    )


@dataclass(frozen=True)
class PathPhysics:
    """Ordered spans of a lightpath plus the transceiver ceiling."""

    spans: tuple
    snr_trx_db: float = DEFAULT_SNR_TRX_DB

    @classmethod
    def uniform(cls, op: SpanOperatingPoint, n_spans, snr_trx_db=DEFAULT_SNR_TRX_DB):
        return cls(spans=(op,) * int(n_spans), snr_trx_db=snr_trx_db)

    @property
    def n_spans(self):
        return len(self.spans)

    def inverse_snr_total(self):
        total = np.zeros(len(self.spans[0].launch_w))
        for k, op in enumerate(self.spans):
            try:
                total += op.inverse_snr()
            except PhysicsError as exc:
                raise PhysicsError(f"span {k + 1}: {exc}") from None
        return total

    def trx_inverse(self):
        if np.isinf(self.snr_trx_db):
            return 0.0
        return 1.0 / db_to_lin(self.snr_trx_db)


def gsnr(path: PathPhysics, channel_index):
    """End-to-end GSNR of one channel in dB."""
    inv = path.inverse_snr_total()[channel_index - 1] + path.trx_inverse()
    return float(lin_to_db(1.0 / inv))


def gsnr_profile(path: PathPhysics):
    """Per-channel GSNR in dB plus per-span linear SNR contributions."""
    per_span = np.array([op.inverse_snr() for op in path.spans])
    inv = per_span.sum(axis=0) + path.trx_inverse()
    return lin_to_db(1.0 / inv), 1.0 / per_span


def gsnr_sweep_power(
    grid, fiber, amplifier, channel_index, powers_dbm, n_spans,
    snr_trx_db=DEFAULT_SNR_TRX_DB, engine="closed-form", interferer_kurtosis=0.0,
):
    """GSNR of one channel across a launch-power sweep.

    Powers outside the [-10, +5] dBm sanity window are rejected.
    """
    powers_dbm = np.asarray(powers_dbm, dtype=float)
    if np.any(powers_dbm < -10.0) or np.any(powers_dbm > 5.0):
        raise PhysicsError("sweep powers must lie within [-10, +5] dBm")
    out = []
    for p_dbm in powers_dbm:
        op = span_operating_point(
            grid, fiber, amplifier, float(p_dbm),
            engine=engine, interferer_kurtosis=interferer_kurtosis,
        )
        out.append(gsnr(PathPhysics.uniform(op, n_spans, snr_trx_db), channel_index))
    return out


class SpanPhysicsCache:
    """Memoized uniform-power span physics, shared by optimizer and simulator.

    Launch powers are quantized to ``quantum_db`` before lookup so that
    golden-section and swarm iterates reuse each other's evaluations.  An
    optional disk cache (keyed by a config hash) persists the tables
    across runs, which matters for the slow integral engine; hits are
    bit-identical to recomputation.  Safe for concurrent readers once
    warmed.
    """

    def __init__(
        self, grid, fiber, amplifier,
        engine="closed-form", interferer_kurtosis=0.0, quantum_db=0.001,
        disk_cache=None, config_hash=None,
    ):
        self.grid = grid
        self.fiber = fiber
        self.amplifier = amplifier
        self.engine = engine
        self.interferer_kurtosis = interferer_kurtosis
        self.quantum_db = quantum_db
        self.disk_cache = disk_cache
        self.config_hash = config_hash
        self._ops: dict[int, SpanOperatingPoint] = {}

    def quantize(self, power_dbm):
        return round(float(power_dbm) / self.quantum_db) * self.quantum_db

    def _disk_key(self, key):
        return (
            f"span-{self.config_hash}-{self.engine}-k{self.interferer_kurtosis}"
            f"-L{self.fiber.span_length_km}-p{key}"
        )

    def operating_point(self, power_dbm) -> SpanOperatingPoint:
        key = round(float(power_dbm) / self.quantum_db)
        op = self._ops.get(key)
        if op is not None:
            return op
        if self.disk_cache is not None and self.config_hash is not None:
            hit = self.disk_cache.get(self._disk_key(key))
            if hit is not None:
                op = SpanOperatingPoint(
                    launch_w=hit["launch_w"],
                    received_w=hit["received_w"],
                    gain_lin=hit["gain_lin"],
                    p_ase_w=hit["p_ase_w"],
                    eta_per_w2=hit["eta_per_w2"],
                    span_length_km=self.fiber.span_length_km,
                )
                self._ops[key] = op
                return op
        op = span_operating_point(
            self.grid, self.fiber, self.amplifier,
            key * self.quantum_db,
            engine=self.engine,
            interferer_kurtosis=self.interferer_kurtosis,
        )
        self._ops[key] = op
        if self.disk_cache is not None and self.config_hash is not None:
            self.disk_cache.put(
                self._disk_key(key),
                {
                    "launch_w": op.launch_w,
                    "received_w": op.received_w,
                    "gain_lin": op.gain_lin,
                    "p_ase_w": op.p_ase_w,
                    "eta_per_w2": op.eta_per_w2,
                },
            )
        return op

    def inverse_snr(self, power_dbm):
        return self.operating_point(power_dbm).inverse_snr()
