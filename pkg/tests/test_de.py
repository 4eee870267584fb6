import numpy as np
import pytest

from scldpc.de import (DECODED, FIXED_POINT, ConvergenceError, de_converge,
                       de_step, find_threshold, initial_state,
                       mean_vn_erasure)
from scldpc.ensemble import DopingPattern, EnsembleSpec, StreamSpec


def tb(L=50, doping=DopingPattern()):
    return EnsembleSpec(5, 10, L, 100, "tail-biting", doping)


def test_first_sweep_from_all_ones():
    # with p = 1 everywhere the CN update gives q = 1, then the VN update
    # gives p = eps (1 - alpha_i)
    spec = tb(10, DopingPattern((3,), (0.5,)))
    state = de_step(initial_state(spec), spec, 0.4)
    assert np.allclose(state.q, 1.0)
    expect = np.full((10, 5), 0.4)
    expect[3] = 0.4 * 0.5
    assert np.allclose(state.p, expect)


def test_mean_erasure_monotone_in_iteration():
    spec = tb(20)
    state = initial_state(spec)
    prev = np.inf
    for _ in range(30):
        state = de_step(state, spec, 0.32)
        m = mean_vn_erasure(state, spec, 0.32)
        assert m <= prev + 1e-15
        prev = m


def test_mean_erasure_monotone_in_epsilon():
    spec = tb(20)
    means = []
    for eps in (0.25, 0.30, 0.35, 0.40):
        state = initial_state(spec)
        for _ in range(10):
            state = de_step(state, spec, eps)
        means.append(mean_vn_erasure(state, spec, eps))
    assert all(a < b for a, b in zip(means, means[1:]))


def test_uncoupled_verdicts_around_threshold():
    # undoped tail-biting behaves like the uncoupled ensemble: 0.3415
    assert de_converge(tb(), 0.30)[0] == DECODED
    assert de_converge(tb(), 0.36)[0] == FIXED_POINT


def test_epsilon_zero_decodes_immediately():
    verdict, mean, iters = de_converge(tb(), 0.0)
    assert verdict == DECODED and mean == 0.0


def test_stream_spec_rejected():
    with pytest.raises(ValueError):
        de_converge(StreamSpec(5, 10, 10, 100), 0.3)  # type: ignore[arg-type]


def test_iteration_cap_raises():
    with pytest.raises(ConvergenceError):
        de_converge(tb(), 0.30, max_iter=3)


def test_threshold_bracket_validation():
    with pytest.raises(ValueError):
        find_threshold(tb(), bracket=(0.36, 0.40), tol=1e-3)  # lo stuck
    with pytest.raises(ValueError):
        find_threshold(tb(), bracket=(0.25, 0.30), tol=1e-3)  # hi decodes


def test_threshold_bracket_width():
    res = find_threshold(tb(20), bracket=(0.30, 0.40), tol=1e-3)
    lo, hi = res.bracket
    assert hi - lo <= 1e-3
    assert lo <= res.epsilon_star <= hi
    assert res.converged


def test_doping_dominance_chain():
    # growing the doped cluster can only help: thresholds ordered
    t = {}
    for k in (1, 2, 3):
        spec = tb(30, DopingPattern(tuple(range(k))))
        t[k] = find_threshold(spec, bracket=(0.30, 0.52), tol=5e-4).epsilon_star
    assert t[1] < t[2] < t[3]


def test_full_termination_equivalence():
    # dv-1 consecutive hard-doped positions == terminated chain
    tol = 2e-4
    doped = tb(40, DopingPattern((0, 1, 2, 3)))
    term = EnsembleSpec(5, 10, 40, 100, "terminated")
    a = find_threshold(doped, bracket=(0.45, 0.52), tol=tol).epsilon_star
    b = find_threshold(term, bracket=(0.45, 0.52), tol=tol).epsilon_star
    assert a == pytest.approx(b, abs=3 * tol)
    assert a == pytest.approx(0.4994, abs=2e-3)  # L=40 is close to converged
