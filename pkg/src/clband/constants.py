"""C+L channel plan, modulation-format table, and physical parameter types.

Channel indexing convention: channels are numbered 1..N in strictly
increasing frequency order, so index 1 is the lowest-frequency L-band
channel and index N the highest-frequency C-band channel.  Spectrum-slot
indexing runs the other way: slots follow the assignment scan order, which
is ascending in *wavelength* (C band first, then L band), matching the
first-fit orientation that starts at the shortest-wavelength C channel.
``Channel.slot_range`` and ``ChannelGrid.scan_position`` record the mapping
between the two conventions.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import GridError
from .units import DB_PER_KM_TO_NP_PER_M, db_to_lin


class Band(str, Enum):
    L = "L"
    C = "C"


SLOTS_PER_CHANNEL = 6


@dataclass(frozen=True)
class Channel:
    """One 6-slot channel of the C+L plan.

    ``relative_hz`` is the offset from the equal-power spectral center of
    gravity of the full plan; positive for channels above the center.
    ``slot_range`` is the (start, stop) half-open within-band slot interval
    in scan order (ascending wavelength).
    """

    index: int
    center_hz: float
    relative_hz: float
    band: Band
    slot_range: tuple[int, int]

    @property
    def n_slots(self):
        return self.slot_range[1] - self.slot_range[0]


@dataclass(frozen=True)
class ModulationFormat:
    """PM modulation format of cardinality m carrying 100*m Gb/s per subchannel.

    ``snr_threshold_db`` is the ideal AWGN GSNR threshold at the design BER;
    the aging margin is applied separately by reach computations.
    ``excess_kurtosis`` feeds the optional modulation-dependent NLI
    correction (0 = Gaussian).
    """

    m: int
    name: str
    subchannel_gbps: int
    snr_threshold_db: float
    excess_kurtosis: float


MODULATION_FORMATS = (
    ModulationFormat(1, "PM-BPSK", 100, 6.79, -1.0),
    ModulationFormat(2, "PM-QPSK", 200, 9.81, -1.0),
    ModulationFormat(3, "PM-8QAM", 300, 13.71, -0.8889),
    ModulationFormat(4, "PM-16QAM", 400, 16.54, -0.68),
    ModulationFormat(5, "PM-32QAM", 500, 19.58, -0.69),
    ModulationFormat(6, "PM-64QAM", 600, 22.54, -0.619),
)


def snr_threshold_table():
    """GSNR thresholds in dB keyed by format cardinality m."""
    return {f.m: f.snr_threshold_db for f in MODULATION_FORMATS}


def format_by_m(m):
    if not 1 <= m <= len(MODULATION_FORMATS):
        raise KeyError(f"no modulation format with m={m}")
    return MODULATION_FORMATS[m - 1]


@dataclass(frozen=True)
class FiberParams:
    """Span fiber parameters in engineering units (dB/km, ps^2/km, km).

    ``attenuation_l_db_km`` optionally overrides the L-band attenuation;
    when None the flat ``attenuation_db_km`` applies to both bands.
    """

    attenuation_db_km: float = 0.2
    attenuation_l_db_km: float | None = None
    dispersion_beta2_ps2_km: float = -21.3
    dispersion_beta3_ps3_km: float = 0.12
    nonlinear_gamma_w_km: float = 1.3
    raman_slope_w_km_thz: float = 0.028
    span_length_km: float = 70.0

    def __post_init__(self):
        if self.attenuation_db_km <= 0:
            raise GridError("attenuation must be positive")
        if self.raman_slope_w_km_thz < 0:
            raise GridError("raman_slope must be >= 0")
        if self.span_length_km <= 0:
            raise GridError("span_length must be positive")

    # SI conversions
    @property
    def alpha_np_m(self):
        return self.attenuation_db_km * DB_PER_KM_TO_NP_PER_M

    @property
    def alpha_l_np_m(self):
        db = self.attenuation_l_db_km
        return self.alpha_np_m if db is None else db * DB_PER_KM_TO_NP_PER_M

    @property
    def beta2_s2_m(self):
        return self.dispersion_beta2_ps2_km * 1e-27

    @property
    def beta3_s3_m(self):
        return self.dispersion_beta3_ps3_km * 1e-39

    @property
    def gamma_w_m(self):
        return self.nonlinear_gamma_w_km * 1e-3

    @property
    def raman_slope_w_m_hz(self):
        return self.raman_slope_w_km_thz / 1e3 / 1e12

    @property
    def span_length_m(self):
        return self.span_length_km * 1e3

    def alpha_np_m_per_channel(self, grid):
        """Per-channel attenuation in Np/m honouring a per-band override."""
        a = np.full(grid.n_channels, self.alpha_np_m)
        if self.attenuation_l_db_km is not None:
            a[grid.band_mask(Band.L)] = self.alpha_l_np_m
        return a


@dataclass(frozen=True)
class AmplifierParams:
    """Per-band EDFA noise figures; gain restores each channel to its span-input power."""

    noise_figure_c_db: float = 4.5
    noise_figure_l_db: float = 6.0

    def noise_figure_lin(self, band):
        db = self.noise_figure_c_db if band is Band.C else self.noise_figure_l_db
        return float(db_to_lin(db))


@dataclass(frozen=True)
class ChannelGrid:
    """Immutable C+L frequency plan."""

    slot_width_hz: float
    channel_bandwidth_hz: float
    signal_bandwidth_hz: float
    guard_band_hz: float
    c_band_hz: tuple[float, float]
    l_band_hz: tuple[float, float]
    channels: tuple[Channel, ...]
    c_slots: int
    l_slots: int
    _center_hz: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "_center_hz", np.array([c.center_hz for c in self.channels])
        )

    @property
    def n_channels(self):
        return len(self.channels)

    @property
    def center_hz(self):
        return self._center_hz

    @property
    def relative_hz(self):
        return self._center_hz - self.center_of_gravity_hz

    @property
    def center_of_gravity_hz(self):
        return float(self._center_hz.mean())

    def band_mask(self, band):
        return np.array([c.band is band for c in self.channels])

    @property
    def n_l_channels(self):
        return int(self.band_mask(Band.L).sum())

    @property
    def n_c_channels(self):
        return int(self.band_mask(Band.C).sum())

    def channel(self, index):
        """Channel by 1-based frequency-ascending index."""
        if not 1 <= index <= self.n_channels:
            raise GridError(f"channel index {index} out of range 1..{self.n_channels}")
        return self.channels[index - 1]

    def scan_position(self, index):
        """Position of a channel in the allocator scan order (0-based).

        Scan order is ascending wavelength: position 0 is the
        highest-frequency C channel, the last position the lowest-frequency
        L channel.
        """
        return self.n_channels - index

    def channel_at_scan_position(self, pos):
        return self.channels[self.n_channels - 1 - pos]

    @property
    def total_slots(self):
        """Slot count per band, keyed by Band."""
        return {Band.C: self.c_slots, Band.L: self.l_slots}


def build_grid(
    c_channels,
    l_channels,
    c_start_hz=191.3e12,
    slot_width_hz=12.5e9,
    guard_band_hz=500e9,
    slots_per_channel=SLOTS_PER_CHANNEL,
    signal_bandwidth_hz=64e9,
):
    """Construct a C+L channel plan.

    The C band grows upward from ``c_start_hz``; the L band sits below it,
    separated by ``guard_band_hz``.  Channel centers are spaced exactly one
    channel bandwidth (slots_per_channel * slot_width_hz) apart within each
    band.  Raises GridError if the bands would overlap after applying the
    guard band or if the counts/frequencies are invalid.
    """
    if c_channels < 1 or l_channels < 0:
        raise GridError("need at least one C-band channel and l_channels >= 0")
    if min(c_start_hz, slot_width_hz) <= 0 or guard_band_hz < 0:
        raise GridError("frequencies must be positive")
    if signal_bandwidth_hz <= 0:
        raise GridError("signal bandwidth must be positive")

    ch_bw = slots_per_channel * slot_width_hz
    if signal_bandwidth_hz > ch_bw:
        raise GridError("signal bandwidth cannot exceed the channel bandwidth")

    c_lo = c_start_hz
    c_hi = c_start_hz + c_channels * ch_bw
    l_hi = c_lo - guard_band_hz
    l_lo = l_hi - l_channels * ch_bw
    if l_channels and l_lo <= 0:
        raise GridError("L band extends below zero frequency")
    if l_channels and guard_band_hz <= 0:
        raise GridError("bands overlap after applying the guard band")

    centers = []
    for k in range(l_channels):
        centers.append((l_lo + ch_bw / 2 + k * ch_bw, Band.L))
    for k in range(c_channels):
        centers.append((c_lo + ch_bw / 2 + k * ch_bw, Band.C))

    cog = sum(f for f, _ in centers) / len(centers)
    n_per_band = {Band.L: l_channels, Band.C: c_channels}
    seen = {Band.L: 0, Band.C: 0}
    channels = []
    for i, (f, band) in enumerate(centers):
        pos_in_band = seen[band]  # ascending frequency within the band
        seen[band] += 1
        # scan order is descending frequency within the band
        slot_start = (n_per_band[band] - 1 - pos_in_band) * slots_per_channel
        channels.append(
            Channel(
                index=i + 1,
                center_hz=f,
                relative_hz=f - cog,
                band=band,
                slot_range=(slot_start, slot_start + slots_per_channel),
            )
        )

    return ChannelGrid(
        slot_width_hz=slot_width_hz,
        channel_bandwidth_hz=ch_bw,
        signal_bandwidth_hz=signal_bandwidth_hz,
        guard_band_hz=guard_band_hz,
        c_band_hz=(c_lo, c_hi),
        l_band_hz=(l_lo, l_hi) if l_channels else (c_lo, c_lo),
        channels=tuple(channels),
        c_slots=c_channels * slots_per_channel,
        l_slots=l_channels * slots_per_channel,
    )
