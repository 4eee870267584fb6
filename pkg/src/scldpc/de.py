"""Density evolution for doped semi-structured SC-LDPC ensembles.

Per-edge erasure probabilities are tracked as p[i, j] (VN at position i to CN
at position i+j) and q[i, j] (CN at position i+j back to the VN).  The CN
update averages the incoming probabilities over the dv offset classes because
a VN seen from a CN at position c is uniformly located in c-dv+1..c; the VN
update multiplies by epsilon and by (1 - alpha_i) at doped positions.
Tail-biting wraps all position arithmetic modulo L; terminated chains treat
out-of-range VN messages as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

DECODED = "decoded"
FIXED_POINT = "fixed-point"

DEFAULT_TOL_DECODED = 1e-8
DEFAULT_TOL_FIXED = 1e-10
DEFAULT_MAX_ITER = 500_000


class ConvergenceError(RuntimeError):
    """Density evolution hit the iteration cap without a verdict."""


@dataclass
class DEState:
    p: np.ndarray  # (L, dv)
    q: np.ndarray  # (L, dv)
    iteration: int = 0


@dataclass(frozen=True)
class ThresholdResult:
    epsilon_star: float
    converged: bool
    iterations_used: int
    bracket: tuple = (0.0, 1.0)


def _alpha_vector(spec):
    alpha = np.zeros(spec.L)
    for p, a in zip(spec.doping.positions, spec.doping.alpha):
        alpha[p] = a
    return alpha


def initial_state(spec):
    """All-ones initialization (every message an erasure)."""
    return DEState(np.ones((spec.L, spec.dv)), np.ones((spec.L, spec.dv)))


@njit(cache=True)
def _de_sweep(p, q, alpha, dv, dc, L, tail_biting, eps):
    """One CN update followed by one VN update, in place.

    Returns the mean a-posteriori VN erasure probability over the unknown
    (non-fixed) VN mass.
    """
    ncnpos = L if tail_biting else L + dv - 1
    s = np.zeros(ncnpos)
    for c in range(ncnpos):
        acc = 0.0
        for j in range(dv):
            i = c - j
            if tail_biting:
                i = i % L
            if 0 <= i < L:
                acc += p[i, j]
        s[c] = acc / dv
    for i in range(L):
        for j in range(dv):
            c = i + j
            if tail_biting:
                c = c % L
            q[i, j] = 1.0 - (1.0 - s[c]) ** (dc - 1)
    mean = 0.0
    unknown = 0.0
    for i in range(L):
        for j in range(dv):
            prod = 1.0
            for j2 in range(dv):
                if j2 != j:
                    prod *= q[i, j2]
            p[i, j] = eps * (1.0 - alpha[i]) * prod
        post = eps * (1.0 - alpha[i])
        for j in range(dv):
            post *= q[i, j]
        mean += post
        unknown += 1.0 - alpha[i]
    return mean / unknown


@njit(cache=True)
def _de_run(p, q, alpha, dv, dc, L, tail_biting, eps, max_iter,
            tol_decoded, tol_fixed):
    prev_mean = np.inf
    mean = 1.0
    for it in range(max_iter):
        mean = _de_sweep(p, q, alpha, dv, dc, L, tail_biting, eps)
        if mean < tol_decoded:
            return 1, it + 1, mean
        if abs(prev_mean - mean) < tol_fixed:
            return 0, it + 1, mean
        prev_mean = mean
    return -1, max_iter, mean


def de_step(state, spec, epsilon):
    """Apply one density evolution iteration (Eq. CN average, then VN update)."""
    p = state.p.copy()
    q = state.q.copy()
    _de_sweep(p, q, _alpha_vector(spec), spec.dv, spec.dc, spec.L,
              spec.boundary == "tail-biting", epsilon)
    return DEState(p, q, state.iteration + 1)


def mean_vn_erasure(state, spec, epsilon):
    """A-posteriori erasure probability averaged over the unknown VN mass."""
    alpha = _alpha_vector(spec)
    post = epsilon * (1.0 - alpha) * np.prod(state.q, axis=1)
    return float(post.sum() / (1.0 - alpha).sum())


def de_converge(spec, epsilon, max_iter=DEFAULT_MAX_ITER,
                tol_decoded=DEFAULT_TOL_DECODED, tol_fixed=DEFAULT_TOL_FIXED):
    """Iterate from the all-ones start until decoded or stuck at a fixed point.

    Returns (verdict, final mean erasure, iterations).  Raises
    ConvergenceError when max_iter runs out before either criterion fires.
    """
    if spec.boundary == "stream":
        raise ValueError("density evolution needs a tail-biting or terminated spec")
    if epsilon == 0.0:
        return DECODED, 0.0, 1
    p = np.ones((spec.L, spec.dv))
    q = np.ones((spec.L, spec.dv))
    status, iters, mean = _de_run(
        p, q, _alpha_vector(spec), spec.dv, spec.dc, spec.L,
        spec.boundary == "tail-biting", epsilon,
        max_iter, tol_decoded, tol_fixed,
    )
    if status == -1:
        raise ConvergenceError(
            f"no verdict after {max_iter} iterations at eps={epsilon} (mean={mean:g})"
        )
    return (DECODED if status == 1 else FIXED_POINT), mean, iters


def _classify(spec, epsilon, max_iter, retries=3):
    """de_converge with the iteration cap doubled on an inconclusive run."""
    cap = max_iter
    for _ in range(retries + 1):
        try:
            verdict, _, iters = de_converge(spec, epsilon, max_iter=cap)
            return verdict, iters
        except ConvergenceError:
            cap *= 2
    raise ConvergenceError(
        f"still inconclusive at eps={epsilon} with max_iter={cap // 2}"
    )


def find_threshold(spec, bracket=(0.25, 0.52), tol=1e-5,
                   max_iter=DEFAULT_MAX_ITER, retries=3):
    """Bisect for the BP threshold: decoded below, fixed point above.

    Probes landing within ~1e-5 of the threshold converge very slowly (the
    decoding wave speed vanishes there); raise `retries` to let the iteration
    cap double more often on such probes.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    total_iters = 0
    verdict, iters = _classify(spec, lo, max_iter, retries)
    total_iters += iters
    if verdict != DECODED:
        raise ValueError(f"bracket low end {lo} does not decode")
    verdict, iters = _classify(spec, hi, max_iter, retries)
    total_iters += iters
    if verdict != FIXED_POINT:
        raise ValueError(f"bracket high end {hi} decodes; raise it")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        verdict, iters = _classify(spec, mid, max_iter, retries)
        total_iters += iters
        if verdict == DECODED:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), True, total_iters, (lo, hi))


def threshold_with_stability_check(spec, bracket=(0.25, 0.52), tol=1e-5):
    """Threshold at L and at 2L; flags a discrepancy beyond 2*tol.

    The chain length used for threshold computation is a modeling choice; the
    check guards against L-dependent artifacts.
    """
    from dataclasses import replace

    res = find_threshold(spec, bracket, tol)
    doubled = replace(spec, L=2 * spec.L)
    res2 = find_threshold(doubled, bracket, tol)
    stable = abs(res.epsilon_star - res2.epsilon_star) <= 2 * tol
    return res, res2, stable
