import numpy as np
import pytest

from scldpc.ensemble import DopingPattern, EnsembleSpec, StreamSpec, sample_graph
from scldpc.peeling import ChannelConfig, erase, peel
from scldpc.stats import wilson_interval
from scldpc.stream import (StreamRunStats, WindowConfig, _counted_positions,
                           decode_terminated_sw, simulate_stream,
                           simulate_terminated_sw, sw_decode)


def test_window_validation_and_latency():
    with pytest.raises(ValueError):
        WindowConfig(3).validate(5)
    w = WindowConfig(20)
    assert w.latency_positions(5) == 24
    assert w.latency_bits(5, 1166) == 1166 * 24


def test_full_window_equals_global_peeling():
    # a window covering the whole chain leaves the global peeling fixpoint
    spec = EnsembleSpec(5, 10, 15, 100, "terminated")
    for seed in range(4):
        g = sample_graph(spec, seed)
        res = erase(g, ChannelConfig(0.49, seed + 10))  # high enough to stall
        base = res.erased.copy()
        sw = sw_decode(g, WindowConfig(spec.num_cn_positions), res, 3)
        res.erased = base.copy()
        out, _ = peel(res, 3)
        assert np.array_equal(sw, out.residual_mask)


def test_epsilon_zero_stream():
    ss = StreamSpec(5, 10, 10, 50, DopingPattern((0, 1, 2)), periods=4)
    st = simulate_stream(ss, WindowConfig(8), 0.0, 2, 0)
    assert st.bit_errors == 0 and st.block_errors == 0


def test_window_monotonicity():
    # enlarging W never leaves more VNs unresolved
    spec = EnsembleSpec(5, 10, 20, 100, "terminated")
    g = sample_graph(spec, 2)
    res = erase(g, ChannelConfig(0.47, 5))
    base = res.erased.copy()
    prev = None
    for W in (5, 8, 12, 20, 24):
        res.erased = base.copy()
        mask = sw_decode(g, WindowConfig(W), res, 1)
        if prev is not None:
            # the unresolved set shrinks as a set, not just in count
            assert np.all(prev[mask])
            assert mask.sum() <= prev.sum()
        prev = mask


def test_sw_deterministic():
    spec = EnsembleSpec(5, 10, 12, 100, "terminated")
    g = sample_graph(spec, 1)
    res = erase(g, ChannelConfig(0.48, 2))
    base = res.erased.copy()
    a = sw_decode(g, WindowConfig(7), res, 9)
    res.erased = base.copy()
    b = sw_decode(g, WindowConfig(7), res, 9)
    assert np.array_equal(a, b)


def test_counted_positions_excludes_head_and_tail():
    ss = StreamSpec(5, 10, 10, 50, DopingPattern((0, 1, 2)), periods=5)
    pos = _counted_positions(ss)
    assert pos[0] == 13 and pos[-1] == 4 * 13 - 1
    with pytest.raises(ValueError):
        _counted_positions(StreamSpec(5, 10, 10, 50, DopingPattern((0,)),
                                      periods=2))
    with pytest.raises(ValueError):
        simulate_stream(StreamSpec(5, 10, 10, 50, periods=2), WindowConfig(8),
                        0.1, 1, 0)


def test_stream_stats_exclude_doped_bits():
    ss = StreamSpec(5, 10, 10, 50, DopingPattern((0, 1, 2)), periods=4)
    st = simulate_stream(ss, WindowConfig(8), 0.2, 2, 0)
    # counted span: 2 intervals of 13 positions, minus 3 doped positions each
    per_trial_bits = (2 * 13 - 2 * 3) * 50
    assert st.total_bits == 2 * per_trial_bits
    assert st.total_blocks == 2 * (2 * 13 - 2 * 3)
    assert st.latency_positions == 12


def test_terminated_sw_stats_and_failures():
    spec = EnsembleSpec(5, 10, 10, 100, "terminated")
    st = simulate_terminated_sw(spec, WindowConfig(6), 0.49, 10, 1)
    assert st.trials == 10
    assert st.total_bits == 10 * 10 * 100
    assert st.bit_errors > 0  # above the SW-limited threshold
    assert st.bler >= st.ber  # a block errs as soon as one bit does


def test_early_stopping():
    spec = EnsembleSpec(5, 10, 10, 100, "terminated")
    st = simulate_terminated_sw(spec, WindowConfig(6), 0.49, 100, 1,
                                max_frame_errors=3, min_trials=3)
    assert st.trials < 100
    assert st.frame_errors >= 3


def test_stats_merge_associative():
    a = StreamRunStats(bit_errors=3, total_bits=100, block_errors=1,
                       total_blocks=10, frame_errors=1, trials=2,
                       residual_per_position=np.array([1, 2]))
    b = StreamRunStats(bit_errors=1, total_bits=50, block_errors=1,
                       total_blocks=5, frame_errors=0, trials=1,
                       residual_per_position=np.array([0, 1, 4]))
    a.merge(b)
    assert a.bit_errors == 4 and a.total_bits == 150
    assert a.ber == pytest.approx(4 / 150)
    assert list(a.residual_per_position) == [1, 3, 4]


def test_wilson_ci_scaling():
    # quadrupling the sample roughly halves the interval width
    lo1, hi1 = wilson_interval(20, 1000)
    lo2, hi2 = wilson_interval(80, 4000)
    ratio = (hi1 - lo1) / (hi2 - lo2)
    assert 1.8 < ratio < 2.2
    lo, hi = wilson_interval(0, 500)
    assert lo == 0.0 and 0 < hi < 0.02
    assert wilson_interval(0, 0) == (0.0, 1.0)
