import numpy as np
import pytest

from clband import AmplifierParams, PhysicsError, build_grid, compute_ase_power
from clband.isrs import ase_powers
from clband.units import PLANCK_H


@pytest.fixture(scope="module")
def one_channel():
    return build_grid(1, 0, c_start_hz=193.4e12 - 37.5e9).channels[0]


def test_ase_arithmetic_oracle(one_channel, amp):
    # h*f*10^0.45*(10^1.4 - 1)*75e9 evaluated independently
    expect = PLANCK_H * 193.4e12 * 10**0.45 * (10**1.4 - 1.0) * 75e9
    got = compute_ase_power(one_channel, amp, 10**1.4, 75e9).p_ase_w
    assert got == pytest.approx(expect, rel=1e-9)
    assert got == pytest.approx(6.5e-7, rel=0.01)
    assert 10 * np.log10(got / 1e-3) == pytest.approx(-31.9, abs=0.1)


def test_unity_gain_no_ase(one_channel, amp):
    assert compute_ase_power(one_channel, amp, 1.0, 75e9).p_ase_w == 0.0


def test_gain_below_unity_rejected(one_channel, amp):
    with pytest.raises(PhysicsError):
        compute_ase_power(one_channel, amp, 0.9, 75e9)


def test_noise_figure_ratio(one_channel):
    lo = compute_ase_power(one_channel, AmplifierParams(4.5, 4.5), 10**1.4, 75e9)
    # same channel judged with the L-band figure applied band-wide
    g = build_grid(0 + 1, 1, c_start_hz=193.4e12 - 37.5e9)
    l_channel = g.channels[0]
    hi = compute_ase_power(l_channel, AmplifierParams(4.5, 6.0), 10**1.4, 75e9)
    ratio = hi.p_ase_w / lo.p_ase_w / (l_channel.center_hz / one_channel.center_hz)
    assert ratio == pytest.approx(10**0.15, rel=1e-9)


def test_ase_monotone_in_gain_and_nf(one_channel):
    base = compute_ase_power(one_channel, AmplifierParams(4.5, 6.0), 20.0, 75e9).p_ase_w
    more_gain = compute_ase_power(one_channel, AmplifierParams(4.5, 6.0), 30.0, 75e9).p_ase_w
    more_nf = compute_ase_power(one_channel, AmplifierParams(5.5, 6.0), 20.0, 75e9).p_ase_w
    assert more_gain > base
    assert more_nf > base


def test_vectorized_matches_scalar(grid, amp):
    gains = np.linspace(20.0, 30.0, grid.n_channels)
    vec = ase_powers(grid, amp, gains)
    for i in (0, 63, 64, 127):
        scalar = compute_ase_power(grid.channels[i], amp, gains[i], grid.channel_bandwidth_hz)
        assert vec[i] == pytest.approx(scalar.p_ase_w, rel=1e-12)


def test_vectorized_rejects_lossy_gain(grid, amp):
    gains = np.ones(grid.n_channels) * 10.0
    gains[5] = 0.5
    with pytest.raises(PhysicsError):
        ase_powers(grid, amp, gains)
