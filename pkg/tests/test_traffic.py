import numpy as np

from clband.sim import BITRATES_GBPS, generate_traffic

NODES = [f"n{i:02d}" for i in range(1, 22)]


def test_same_seed_same_stream():
    a = generate_traffic(7, 10.0, 1.0, 500, NODES)
    b = generate_traffic(7, 10.0, 1.0, 500, NODES)
    assert a == b


def test_different_seed_differs():
    a = generate_traffic(7, 10.0, 1.0, 500, NODES)
    b = generate_traffic(8, 10.0, 1.0, 500, NODES)
    assert a != b


def test_composite_seed_streams():
    a = generate_traffic([1, 0, 0], 10.0, 1.0, 200, NODES)
    b = generate_traffic([1, 0, 1], 10.0, 1.0, 200, NODES)
    assert a != b


def test_law_of_large_numbers():
    demands = generate_traffic(123, 10.0, 1.0, 100_000, NODES)
    arrivals = np.array([d.arrival_time for d in demands])
    inter = np.diff(np.concatenate([[0.0], arrivals]))
    holding = np.array([d.holding_time for d in demands])
    assert abs(inter.mean() - 0.1) / 0.1 < 0.01
    assert abs(holding.mean() - 1.0) < 0.01


def test_uniform_endpoints_and_bitrates():
    demands = generate_traffic(5, 2.0, 1.0, 60_000, NODES)
    assert all(d.source != d.destination for d in demands)
    src_counts = np.bincount([NODES.index(d.source) for d in demands])
    dst_counts = np.bincount([NODES.index(d.destination) for d in demands])
    expected = len(demands) / len(NODES)
    assert np.all(np.abs(src_counts - expected) / expected < 0.06)
    assert np.all(np.abs(dst_counts - expected) / expected < 0.06)
    rates = {d.bitrate_gbps for d in demands}
    assert rates == set(BITRATES_GBPS)


def test_arrival_times_increase():
    demands = generate_traffic(3, 5.0, 2.0, 1000, NODES)
    times = [d.arrival_time for d in demands]
    assert all(a < b for a, b in zip(times, times[1:]))
    # offered load = arrival rate x mean holding
    assert 5.0 * 2.0 == 10.0
