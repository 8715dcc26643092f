import numpy as np
import pytest

from clband import FiberParams, PhysicsError, build_grid
from clband.gsnr import (
    PathPhysics,
    SpanOperatingPoint,
    SpanPhysicsCache,
    gsnr,
    gsnr_profile,
    gsnr_sweep_power,
    span_operating_point,
)
from clband.units import dbm_to_w


def synthetic_span(n_ch=4, p_w=1e-3, p_ase=6.5e-7, eta=0.0):
    p = np.full(n_ch, p_w)
    return SpanOperatingPoint(
        launch_w=p,
        received_w=p * 10 ** (-1.4),
        gain_lin=np.full(n_ch, 10**1.4),
        p_ase_w=np.full(n_ch, p_ase),
        eta_per_w2=np.full(n_ch, eta),
        span_length_km=70.0,
    )


def test_single_span_ase_only():
    path = PathPhysics.uniform(synthetic_span(), 1, snr_trx_db=np.inf)
    expect = 10 * np.log10(1e-3 / 6.5e-7)
    assert gsnr(path, 1) == pytest.approx(expect, abs=1e-9)
    assert expect == pytest.approx(31.87, abs=0.01)


def test_two_spans_lose_3db():
    one = PathPhysics.uniform(synthetic_span(), 1, snr_trx_db=np.inf)
    two = PathPhysics.uniform(synthetic_span(), 2, snr_trx_db=np.inf)
    assert gsnr(one, 2) - gsnr(two, 2) == pytest.approx(10 * np.log10(2), abs=1e-3)


def test_transceiver_ceiling():
    quiet = synthetic_span(p_ase=1e-12, eta=0.0)
    path = PathPhysics.uniform(quiet, 1, snr_trx_db=36.0)
    assert gsnr(path, 1) == pytest.approx(36.0, abs=0.01)
    assert gsnr(path, 1) < 36.0  # ceiling is an upper bound


def test_inverse_additivity_without_trx():
    a = PathPhysics.uniform(synthetic_span(p_ase=4e-7), 3, snr_trx_db=np.inf)
    b = PathPhysics.uniform(synthetic_span(p_ase=8e-7), 2, snr_trx_db=np.inf)
    joint = PathPhysics(spans=a.spans + b.spans, snr_trx_db=np.inf)
    inv = 10 ** (-gsnr(a, 1) / 10) + 10 ** (-gsnr(b, 1) / 10)
    assert gsnr(joint, 1) == pytest.approx(-10 * np.log10(inv), abs=1e-9)


def test_gsnr_decreases_with_span_count(grid, fiber, amp):
    op = span_operating_point(grid, fiber, amp, -0.15)
    values = [gsnr(PathPhysics.uniform(op, n), 64) for n in (1, 2, 5, 10, 20)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_depletion_domain_error_names_span():
    bad = synthetic_span(p_w=1e-3, eta=2e6)  # P^3 eta > P
    path = PathPhysics.uniform(bad, 1)
    with pytest.raises(PhysicsError, match="span 1"):
        gsnr(path, 1)


def test_profile_shape(grid, fiber, amp):
    op = span_operating_point(grid, fiber, amp, -0.15)
    path = PathPhysics.uniform(op, 10)
    g_db, per_span = gsnr_profile(path)
    assert g_db.shape == (grid.n_channels,)
    assert per_span.shape == (10, grid.n_channels)
    assert gsnr(path, 1) == pytest.approx(g_db[0])


def test_ten_spans_meet_16qam_threshold(grid, fiber, amp):
    """Full comb at the published optimum clears the PM-16QAM threshold at 10 spans."""
    op = span_operating_point(grid, fiber, amp, -0.15)
    g_db, _ = gsnr_profile(PathPhysics.uniform(op, 10))
    assert g_db.min() >= 16.54
    # GSNR declines toward higher frequency in both bands
    for sl in (slice(0, 64), slice(64, 128)):
        slope = np.polyfit(grid.relative_hz[sl], g_db[sl], 1)[0]
        assert slope < 0
        assert g_db[sl][0] > g_db[sl][-1]


def test_sweep_peaks_at_published_power(grid, fiber, amp):
    """The paper's five launch powers bracket the optimum at -0.15 dBm."""
    powers = [-2.15, -1.15, -0.15, 0.85, 1.85]
    for ch in (1, 64, 128):
        vals = gsnr_sweep_power(grid, fiber, amp, ch, powers, 10)
        assert int(np.argmax(vals)) == 2


def test_sweep_unimodal_on_dense_grid(grid, fiber, amp):
    cache = SpanPhysicsCache(grid, fiber, amp)
    powers = np.round(np.arange(-3.0, 2.0001, 0.1), 3)
    for ch in (1, 128):
        vals = np.array(
            [
                -10 * np.log10(10 * cache.inverse_snr(p)[ch - 1] + 10**-3.6)
                for p in powers
            ]
        )
        signs = np.sign(np.diff(vals))
        changes = np.count_nonzero(np.diff(signs[signs != 0]))
        assert changes == 1


def test_ase_only_monotone_in_power():
    grid = build_grid(4, 4)
    fiber = FiberParams(nonlinear_gamma_w_km=0.0, raman_slope_w_km_thz=0.0)
    from clband.constants import AmplifierParams

    amp = AmplifierParams()
    vals = gsnr_sweep_power(grid, fiber, amp, 5, [-10, -5, 0, 5], 1)
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 36.0


def test_sweep_rejects_out_of_window(grid, fiber, amp):
    with pytest.raises(PhysicsError):
        gsnr_sweep_power(grid, fiber, amp, 1, [-11.0], 1)
    with pytest.raises(PhysicsError):
        gsnr_sweep_power(grid, fiber, amp, 1, [6.0], 1)


def test_cache_quantizes_and_reuses(grid, fiber, amp):
    cache = SpanPhysicsCache(grid, fiber, amp, quantum_db=0.001)
    a = cache.operating_point(-0.1504)
    b = cache.operating_point(-0.1496)
    assert a is b  # same 0.001 dB bucket
    c = cache.operating_point(-0.1515)
    assert c is not a
