"""Monte-Carlo mean decoding trajectories and the dip-based scaling constants.

The expected number of degree-one CNs through peeling iterations is estimated
by averaging simulated trajectories.  For a doped terminated chain below its
threshold the average shows a local minimum (the "dip") before the waves from
the doping point establish; the surplus of degree-one CNs at that minimum,
relative to the two termination waves alone, is the quantity

    delta = S / (2N) - (steady-state wave level) / 2

whose near-threshold slope kappa feeds the doping-switch probability.  The
wave level is measured on the undoped terminated chain at the same channel
parameter; gamma * (eps_sc - eps) is its linearization near eps_sc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import DopingPattern, EnsembleSpec, full_termination_pattern
from .peeling import decode

NU_BREVE_5_10 = 0.424  # trajectory variance scale for the (5,10) ensemble


@dataclass
class MeanTrajectory:
    """Pointwise average of per-trial trajectories (shorter trials padded with 0)."""

    mean: np.ndarray
    trials: int
    N: int


@dataclass
class DipEstimate:
    ell_star: int
    S: float
    delta: float | None = None


@dataclass(frozen=True)
class ScalingParams:
    eps_star_d: float
    eps_star_sc: float
    gamma: float
    kappa: float
    nu_breve: float

    def __post_init__(self):
        if self.gamma <= 0 or self.kappa <= 0 or self.nu_breve <= 0:
            raise ValueError("gamma, kappa and nu_breve must be positive")


def doped_chain_spec(dv, dc, N, pattern, half_length=50):
    """Terminated chain with the doped cluster centered: half_length undoped
    positions on each side."""
    shifted = pattern.shifted(half_length)
    L = 2 * half_length + pattern.span
    return EnsembleSpec(dv, dc, L, N, "terminated", shifted)


def mean_trajectory(spec, epsilon, trials, seed):
    """Average the degree-one-CN trajectory over `trials` decodings."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    acc = np.zeros(0)
    root = np.random.SeedSequence(seed)
    trial_seeds = root.generate_state(2 * trials, dtype=np.uint32)
    from .ensemble import sample_graph

    for t in range(trials):
        graph = sample_graph(spec, int(trial_seeds[2 * t]))
        _, traj = decode(graph, epsilon, int(trial_seeds[2 * t]),
                         peel_seed=int(trial_seeds[2 * t + 1]))
        counts = traj.counts
        if counts.size > acc.size:
            grown = np.zeros(counts.size)
            grown[: acc.size] = acc
            acc = grown
        acc[: counts.size] += counts
    return MeanTrajectory(acc / trials, trials, spec.N)


def smooth(x, radius):
    """Centered moving average; shrinks the window near the edges."""
    if radius < 1:
        return np.asarray(x, dtype=float)
    kernel = np.ones(2 * radius + 1)
    sums = np.convolve(x, kernel, mode="same")
    norm = np.convolve(np.ones(len(x)), kernel, mode="same")
    return sums / norm


def _active_length(mean):
    """Iterations until the averaged trajectory first dies out."""
    nonzero = np.nonzero(mean > 0)[0]
    return int(nonzero[-1]) + 1 if nonzero.size else len(mean)


def plateau_level(mt):
    """Steady-state level of an undoped terminated chain's mean trajectory.

    Median over the middle 60% of the plateau window, taken as the central
    portion of the trajectory's active length (waves formed, not yet merging).
    """
    T = _active_length(mt.mean)
    window = mt.mean[int(0.2 * T) : int(0.8 * T)]
    if window.size < 10:
        raise ValueError("trajectory too short to expose a plateau")
    mid = window[int(0.2 * window.size) : int(0.8 * window.size)]
    level = float(np.median(mid))
    spread = float(np.percentile(mid, 90) - np.percentile(mid, 10))
    if level <= 0 or spread > 0.2 * level + 5 * np.sqrt(max(level, 1.0)):
        raise ValueError("no steady-state plateau detected")
    return level


def estimate_gamma(dv, dc, eps_grid, N, trials, seed, eps_star_sc, L=100):
    """Slope of plateau/N against (eps_sc - eps), fit through the origin."""
    spec = EnsembleSpec(dv, dc, L, N, "terminated")
    xs, ys = [], []
    for k, eps in enumerate(eps_grid):
        if eps >= eps_star_sc:
            raise ValueError(f"eps={eps} is not below eps_star_sc={eps_star_sc}")
        mt = mean_trajectory(spec, eps, trials, seed + 7919 * k)
        ys.append(plateau_level(mt) / N)
        xs.append(eps_star_sc - eps)
    xs = np.array(xs)
    ys = np.array(ys)
    return float(np.dot(xs, ys) / np.dot(xs, xs))


def locate_dip(mt, search_window=None, smooth_radius_frac=0.005):
    """Find the local minimum before the steady state.

    The smoothed trajectory locates ell*; S is read off the unsmoothed mean.
    The default window runs from the first local maximum of the smoothed
    curve to 50% of the active length.
    """
    T = _active_length(mt.mean)
    radius = max(1, int(smooth_radius_frac * T))
    smoothed = smooth(mt.mean[:T], radius)
    if search_window is None:
        # The dip precedes the steady state, so search the first half.  Any
        # initial transient rise is skipped by starting at the first local
        # maximum -- but only one occurring before the trough itself, since a
        # cleanly decreasing start has no maximum until the post-dip plateau.
        trough = int(np.argmin(smoothed[: T // 2]))
        start = 0
        for i in range(1, trough):
            if smoothed[i] >= smoothed[i - 1] and smoothed[i] > smoothed[i + 1]:
                start = i
                break
        search_window = (start, T // 2)
        auto = True
    else:
        auto = False
    lo, hi = search_window
    segment = smoothed[lo:hi]
    if segment.size < 3:
        raise ValueError("dip search window is empty")
    k = int(np.argmin(segment))
    if auto and k == segment.size - 1:
        # patterns with a threshold close to the chain's see a broad, flat
        # dip that can drift past the half-way mark; extend once
        hi = int(0.75 * T)
        segment = smoothed[lo:hi]
        k = int(np.argmin(segment))
    if k == 0 or k == segment.size - 1:
        raise ValueError("dip lies on the search-window edge; widen the window")
    ell_star = lo + k
    return DipEstimate(ell_star=ell_star, S=float(mt.mean[ell_star]))


def compute_delta(S, gamma, epsilon, N, eps_star_sc, wave_level=None):
    """Normalized one-sided degree-one-CN surplus at the dip.

    The subtracted baseline is the steady-state degree-one count of the two
    termination waves, normalized by N.  gamma*(eps_sc - eps) is its
    near-threshold linearization; pass the measured level as `wave_level`
    when the operating point is far below eps_star_sc, where the
    linearization undershoots noticeably.
    """
    if wave_level is None:
        wave_level = gamma * (eps_star_sc - epsilon)
    return S / (2.0 * N) - wave_level / 2.0


def fit_kappa(points, eps_star_d):
    """Least-squares slope of delta against (eps_d - eps), through the origin."""
    if len(points) < 3:
        raise ValueError("need at least 3 (epsilon, delta) points")
    eps = np.array([p[0] for p in points])
    delta = np.array([p[1] for p in points])
    if np.any(eps >= eps_star_d):
        raise ValueError("all fit points must lie below eps_star_d")
    x = eps_star_d - eps
    kappa = float(np.dot(x, delta) / np.dot(x, x))
    residuals = delta - kappa * x
    return kappa, residuals


def kappa_fit_grid(eps_star_d, points=5, near=0.005, far=0.025):
    """Default epsilon grid for the kappa fit: the linear regime near threshold."""
    return np.linspace(eps_star_d - far, eps_star_d - near, points)


def estimate_kappa(dv, dc, pattern, eps_star_d, eps_star_sc, N=10_000,
                   trials=200, seed=0, half_length=50, eps_grid=None,
                   gamma=None, gamma_trials=None):
    """Full dip pipeline for one doping pattern.

    gamma is an ensemble constant, so unless supplied it is estimated once on
    a fixed grid comfortably below eps_star_sc (patterns whose threshold sits
    close to eps_star_sc would otherwise push the plateau measurement into
    the wave-death regime); returns (kappa, gamma, [(eps, delta)], residuals).
    """
    if eps_grid is None:
        eps_grid = kappa_fit_grid(eps_star_d)
    if gamma is None:
        gamma_grid = np.linspace(eps_star_sc - 0.05, eps_star_sc - 0.025, 5)
        gamma = estimate_gamma(dv, dc, gamma_grid, N,
                               gamma_trials or max(20, trials // 4),
                               seed + 104729, eps_star_sc, L=2 * half_length)
    spec = doped_chain_spec(dv, dc, N, pattern, half_length)
    ref_spec = EnsembleSpec(dv, dc, 2 * half_length, N, "terminated")
    ref_trials = gamma_trials or max(20, trials // 4)
    points = []
    for k, eps in enumerate(eps_grid):
        mt = mean_trajectory(spec, eps, trials, seed + 15485863 * (k + 1))
        dip = locate_dip(mt)
        # the baseline is the undoped chain's measured steady state; fall
        # back to the gamma linearization where the plateau is unmeasurable
        # (close to eps_star_sc finite-N waves die stochastically, but there
        # the linearization is accurate anyway)
        try:
            ref = mean_trajectory(ref_spec, eps, ref_trials,
                                  seed + 27644437 * (k + 1))
            wave_level = plateau_level(ref) / N
        except ValueError:
            wave_level = None
        delta = compute_delta(dip.S, gamma, eps, N, eps_star_sc, wave_level)
        points.append((float(eps), delta))
    kappa, residuals = fit_kappa(points, eps_star_d)
    return kappa, gamma, points, residuals
