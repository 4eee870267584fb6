import numpy as np
import pytest

from scldpc.ensemble import (DopingPattern, EnsembleError, EnsembleSpec,
                             StreamSpec, apply_doping, design_rate,
                             full_termination_pattern, round_half_up,
                             sample_graph, spec_from_config)


def test_degree_accounting_tiny_tailbiting():
    # dv=2, dc=4, L=2, N=2: 8 edges total, every CN of degree 4
    spec = EnsembleSpec(2, 4, 2, 2, "tail-biting")
    g = sample_graph(spec, 0)
    assert g.edge_count() == 8
    assert np.all(g.cn_degrees() == 4)


def test_vn_connects_to_consecutive_positions():
    spec = EnsembleSpec(3, 6, 8, 6, "tail-biting")
    g = sample_graph(spec, 3)
    for v in range(g.num_vns):
        i = v // spec.N
        targets = sorted(g.cn_position(c) for c in g.vn_cns[v])
        assert targets == sorted((i + j) % spec.L for j in range(3))


def test_terminated_boundary_positions():
    spec = EnsembleSpec(5, 10, 12, 20, "terminated")
    assert spec.num_cn_positions == 12 + 4
    g = sample_graph(spec, 1)
    # every CN socket at an interior position is used; boundary CNs carry
    # fewer edges because fewer VN positions reach them
    deg = g.cn_degrees()
    cpp = spec.cns_per_pos
    interior = deg[4 * cpp : 12 * cpp]
    assert interior.sum() == 8 * spec.N * spec.dv  # all dv offsets reach here
    head = deg[:cpp]
    assert head.sum() == spec.N  # only position 0's offset-0 edges


def test_cn_degree_exact_per_position():
    spec = EnsembleSpec(5, 10, 12, 20, "terminated")
    g = sample_graph(spec, 2)
    deg = g.cn_degrees()
    cpp = spec.cns_per_pos
    for p in range(spec.num_cn_positions):
        reach = sum(1 for j in range(5) if 0 <= p - j < spec.L)
        assert deg[p * cpp : (p + 1) * cpp].sum() == reach * spec.N


def test_determinism_and_seed_sensitivity():
    spec = EnsembleSpec(5, 10, 6, 20, "tail-biting", DopingPattern((2,)))
    a = sample_graph(spec, 42)
    b = sample_graph(spec, 42)
    c = sample_graph(spec, 43)
    assert np.array_equal(a.vn_cns, b.vn_cns)
    assert np.array_equal(a.known, b.known)
    assert not np.array_equal(a.vn_cns, c.vn_cns)


def test_hard_doping_fixes_whole_position():
    spec = EnsembleSpec(3, 6, 8, 6, "tail-biting", DopingPattern((4,)))
    g = sample_graph(spec, 0)
    known = g.known.reshape(8, 6)
    assert known[4].all()
    assert known.sum() == 6


def test_soft_doping_counts_round_half_up():
    assert round_half_up(2.5) == 3
    assert round_half_up(2.49) == 2
    spec = EnsembleSpec(5, 10, 5, 10, "tail-biting")
    g = sample_graph(spec, 0)
    doped = apply_doping(g, DopingPattern((1, 3), (0.75, 0.25)), 0)
    known = doped.known.reshape(5, 10)
    assert known[1].sum() == 8  # round(7.5) up
    assert known[3].sum() == 3  # round(2.5) up
    assert known[[0, 2, 4]].sum() == 0


def test_doping_pattern_validation():
    with pytest.raises(EnsembleError):
        DopingPattern((1, 0))  # unsorted
    with pytest.raises(EnsembleError):
        DopingPattern((0, 0))  # duplicate
    with pytest.raises(EnsembleError):
        DopingPattern((0,), (0.0,))  # alpha out of range
    with pytest.raises(EnsembleError):
        DopingPattern((0, 1), (1.0,))  # length mismatch


def test_spec_validation():
    with pytest.raises(EnsembleError):
        EnsembleSpec(5, 10, 4, 7)  # 35 not divisible by 10
    with pytest.raises(EnsembleError):
        EnsembleSpec(5, 4, 4, 8)  # dc <= dv
    with pytest.raises(EnsembleError):
        EnsembleSpec(5, 10, 4, 10, "terminated", DopingPattern((4,)))
    with pytest.raises(EnsembleError):
        sample_graph(StreamSpec(5, 10, 10, 10), 0)  # type: ignore[arg-type]


def test_design_rate_direct_count():
    # rate = 1 - (#CNs) / (#transmitted VNs), counted over one doping period
    for pattern in (DopingPattern((0, 1, 2)),
                    DopingPattern((0, 2, 4)),
                    DopingPattern((0, 1, 2, 3, 4), (0.75, 0.2, 0.75, 0.2, 0.75))):
        for Ltilde in (20, 50, 100):
            period = Ltilde + pattern.span
            n_cns = period  # per-N units: cpp = N dv/dc, here dv/dc = 1/2
            n_tx = period - pattern.total_alpha
            direct = 1.0 - 0.5 * n_cns / n_tx
            assert design_rate(Ltilde, pattern, 5, 10) == pytest.approx(direct)


def test_design_rate_full_termination_matches_terminated_chain():
    # fixing dv-1 positions costs the same rate as the dv-1 extra CN positions
    # of an actually terminated chain of length Ltilde
    for dv, dc in ((3, 6), (5, 10)):
        pat = full_termination_pattern(dv)
        for Ltilde in (30, 80):
            terminated = 1.0 - (dv / dc) * (Ltilde + dv - 1) / Ltilde
            assert design_rate(Ltilde, pat, dv, dc) == pytest.approx(terminated)


def test_stream_spec_doped_positions():
    ss = StreamSpec(5, 10, 50, 100, DopingPattern((0, 1, 2)), periods=3)
    assert ss.period == 53
    assert ss.doped_positions() == [50, 51, 52, 103, 104, 105, 156, 157, 158]
    chain = ss.chain_spec()
    assert chain.L == 159
    assert chain.boundary == "terminated"
    assert chain.doping.positions == (50, 51, 52, 103, 104, 105, 156, 157, 158)


def test_stream_relative_positions_must_start_at_zero():
    with pytest.raises(EnsembleError):
        StreamSpec(5, 10, 50, 100, DopingPattern((1, 2)))


def test_spec_from_config():
    spec = spec_from_config({"dv": 5, "dc": 10, "N": 100, "L": 20,
                             "boundary": "terminated",
                             "doping": {"positions": [3], "alpha": [0.5]}})
    assert isinstance(spec, EnsembleSpec)
    assert spec.doping.alpha == (0.5,)
    ss = spec_from_config({"dv": 5, "dc": 10, "N": 100, "Ltilde": 40,
                           "boundary": "stream",
                           "doping": {"positions": [0, 1, 2]}})
    assert isinstance(ss, StreamSpec)
    with pytest.raises(EnsembleError):
        spec_from_config({"dv": 5, "dc": 10})
