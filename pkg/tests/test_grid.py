import numpy as np
import pytest

from clband import Band, GridError, build_grid, format_by_m, snr_threshold_table
from clband.constants import MODULATION_FORMATS, SLOTS_PER_CHANNEL


def test_default_plan_dimensions(grid):
    assert grid.n_channels == 128
    assert grid.channel_bandwidth_hz == 6 * 12.5e9
    # 64 x 75 GHz = 4.8 THz per band
    assert grid.c_band_hz == (191.3e12, 196.1e12)
    assert grid.l_band_hz == (186.0e12, 190.8e12)
    assert grid.c_band_hz[0] - grid.l_band_hz[1] == 500e9


def test_channels_ascend_in_frequency(grid):
    centers = grid.center_hz
    assert np.all(np.diff(centers) > 0)
    assert grid.channels[0].band is Band.L
    assert grid.channels[-1].band is Band.C


def test_channel_spacing_exact(grid):
    for band in (Band.L, Band.C):
        c = grid.center_hz[grid.band_mask(band)]
        assert np.allclose(np.diff(c), grid.channel_bandwidth_hz)


def test_guard_band_gap(grid):
    top_l = max(c.center_hz for c in grid.channels if c.band is Band.L)
    bot_c = min(c.center_hz for c in grid.channels if c.band is Band.C)
    gap = (bot_c - grid.channel_bandwidth_hz / 2) - (top_l + grid.channel_bandwidth_hz / 2)
    assert gap >= grid.guard_band_hz - 1e-3


def test_relative_frequencies_sum_to_zero(grid):
    assert abs(grid.relative_hz.sum()) < 1.0  # Hz, pure rounding residue


def test_single_channel_grid_is_its_own_center():
    g = build_grid(1, 0, c_start_hz=193.4e12)
    assert g.n_channels == 1
    assert g.channels[0].relative_hz == 0.0


def test_zero_guard_band_rejected():
    with pytest.raises(GridError):
        build_grid(2, 2, guard_band_hz=0.0)


def test_bad_counts_rejected():
    with pytest.raises(GridError):
        build_grid(0, 4)
    with pytest.raises(GridError):
        build_grid(4, -1)


def test_grid_construction_deterministic():
    a = build_grid(16, 16)
    b = build_grid(16, 16)
    assert a.channels == b.channels


def test_slot_ranges_cover_bands(grid):
    total = sum(c.n_slots for c in grid.channels)
    assert total == 6 * grid.n_channels
    for band, slots in ((Band.C, grid.c_slots), (Band.L, grid.l_slots)):
        ranges = sorted(
            c.slot_range for c in grid.channels if c.band is band
        )
        assert ranges[0][0] == 0
        assert ranges[-1][1] == slots
        for (a0, a1), (b0, _) in zip(ranges, ranges[1:]):
            assert a1 == b0


def test_scan_order_is_wavelength_ascending(grid):
    # position 0 is the shortest-wavelength (highest-frequency) C channel
    assert grid.scan_position(grid.n_channels) == 0
    assert grid.scan_position(1) == grid.n_channels - 1
    top_c = grid.channel(grid.n_channels)
    assert top_c.band is Band.C and top_c.slot_range == (0, SLOTS_PER_CHANNEL)
    bottom_l = grid.channel(1)
    assert bottom_l.band is Band.L
    assert bottom_l.slot_range == (grid.l_slots - SLOTS_PER_CHANNEL, grid.l_slots)


def test_threshold_table_exact_values():
    table = snr_threshold_table()
    assert table == {1: 6.79, 2: 9.81, 3: 13.71, 4: 16.54, 5: 19.58, 6: 22.54}


def test_thresholds_strictly_increase():
    th = [f.snr_threshold_db for f in MODULATION_FORMATS]
    assert all(a < b for a, b in zip(th, th[1:]))


def test_format_bitrates():
    for f in MODULATION_FORMATS:
        assert f.subchannel_gbps == 100 * f.m
    assert format_by_m(4).name == "PM-16QAM"
    with pytest.raises(KeyError):
        format_by_m(7)
