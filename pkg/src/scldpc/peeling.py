"""BEC transmission and peeling decoding on a sampled Tanner graph.

Peeling repeatedly resolves a uniformly random degree-one CN until none is
left.  The per-iteration count of degree-one CNs (the decoding trajectory) is
the statistic driving the finite-length scaling analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

RESIDUAL_EMPTY = "empty"
RESIDUAL_DEG2 = "degree2-stopping-set"
RESIDUAL_LARGE = "large"


@dataclass(frozen=True)
class ChannelConfig:
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass
class Trajectory:
    """Degree-one-CN count before each peeling iteration."""

    counts: np.ndarray
    N: int


@dataclass
class DecodeOutcome:
    resolved: int
    residual_per_position: np.ndarray
    residual_class: str
    residual_mask: np.ndarray

    @property
    def failed(self):
        return self.residual_class != RESIDUAL_EMPTY


class ResidualGraph:
    """Erasure pattern on a graph: the VNs still unknown to the decoder."""

    def __init__(self, graph, erased):
        self.graph = graph
        self.erased = erased

    @property
    def num_erased(self):
        return int(np.count_nonzero(self.erased))

    def residual_edge_count(self):
        return self.num_erased * self.graph.dv


def erase(graph, ch):
    """Erase each unknown VN independently with probability epsilon.

    Known (doped) VNs are never erased; non-erased VNs are recovered for free,
    which removes them and their edges from the residual graph.
    """
    rng = np.random.default_rng(ch.seed)
    erased = rng.random(graph.num_vns) < ch.epsilon
    erased &= ~graph.known
    return ResidualGraph(graph, erased)


@njit(cache=True)
def _peel_core(vn_cns, erased, num_cns, seed, traj):
    """Peel to fixpoint; updates `erased` in place and fills `traj`.

    cn_deg counts residual edges per CN and cn_sum the sum of attached erased
    VN ids, so the last VN on a degree-one CN is cn_sum itself.  A CN enters
    the candidate stack at most once (degrees only decrease); entries whose
    degree has since dropped to zero are discarded lazily, keeping the pick
    uniform over the CNs that are currently at degree one.
    """
    np.random.seed(seed)
    num_vns, dv = vn_cns.shape
    cn_deg = np.zeros(num_cns, dtype=np.int32)
    cn_sum = np.zeros(num_cns, dtype=np.int64)
    for v in range(num_vns):
        if erased[v]:
            for j in range(dv):
                c = vn_cns[v, j]
                cn_deg[c] += 1
                cn_sum[c] += v
    stack = np.empty(num_cns, dtype=np.int32)
    top = 0
    num_deg1 = 0
    for c in range(num_cns):
        if cn_deg[c] == 1:
            stack[top] = c
            top += 1
            num_deg1 += 1
    resolved = 0
    it = 0
    traj[it] = num_deg1
    while num_deg1 > 0:
        # uniform pick among valid entries; stale ones are swap-popped
        while True:
            k = np.random.randint(top)
            c = stack[k]
            if cn_deg[c] == 1:
                stack[k] = stack[top - 1]
                top -= 1
                break
            stack[k] = stack[top - 1]
            top -= 1
        v = cn_sum[c]
        erased[v] = False
        resolved += 1
        for j in range(dv):
            cj = vn_cns[v, j]
            cn_deg[cj] -= 1
            cn_sum[cj] -= v
            if cn_deg[cj] == 1:
                stack[top] = cj
                top += 1
                num_deg1 += 1
            elif cn_deg[cj] == 0 and cj != c:
                # was at degree one (counted), resolved via another CN
                num_deg1 -= 1
        num_deg1 -= 1  # the CN we just used dropped from one to zero
        it += 1
        traj[it] = num_deg1
    return resolved, it


def residual_cn_degrees(graph, erased):
    """Residual degree of every CN given the erased-VN mask."""
    edges = graph.vn_cns[erased].ravel()
    return np.bincount(edges, minlength=graph.num_cns)


def peel(residual, seed=0):
    """Run peeling decoding to its fixpoint.

    Returns the outcome and the trajectory of degree-one-CN counts (one entry
    before each iteration, the last one being zero at the stall/finish).
    """
    graph = residual.graph
    erased = residual.erased.copy()
    traj = np.zeros(residual.num_erased + 1, dtype=np.int32)
    resolved, iters = _peel_core(graph.vn_cns, erased, graph.num_cns,
                                 np.uint32(seed), traj)
    residual.erased = erased
    per_pos = np.bincount(np.nonzero(erased)[0] // graph.N,
                          minlength=graph.num_vn_positions)
    outcome = DecodeOutcome(
        resolved=resolved,
        residual_per_position=per_pos.astype(np.int64),
        residual_class=classify_residual_mask(graph, erased),
        residual_mask=erased,
    )
    return outcome, Trajectory(traj[: iters + 1], graph.N)


def classify_residual_mask(graph, erased):
    """Classify the stalled residual by its CN degrees.

    degree2-stopping-set: every CN touching the residual has residual degree
    exactly two.  Anything else non-empty is `large`.
    """
    if not erased.any():
        return RESIDUAL_EMPTY
    deg = residual_cn_degrees(graph, erased)
    touched = deg > 0
    if np.all(deg[touched] == 2):
        return RESIDUAL_DEG2
    return RESIDUAL_LARGE


def classify_residual(outcome):
    return outcome.residual_class


def stopping_sets(graph, erased):
    """Connected components of the residual (VNs linked through shared CNs)."""
    residual_vns = np.nonzero(erased)[0]
    if residual_vns.size == 0:
        return []
    cn_to_vns = {}
    for v in residual_vns:
        for c in graph.vn_cns[v]:
            cn_to_vns.setdefault(int(c), []).append(int(v))
    seen = set()
    components = []
    for v0 in residual_vns:
        v0 = int(v0)
        if v0 in seen:
            continue
        comp = {v0}
        frontier = [v0]
        while frontier:
            v = frontier.pop()
            for c in graph.vn_cns[v]:
                for u in cn_to_vns[int(c)]:
                    if u not in comp:
                        comp.add(u)
                        frontier.append(u)
        seen |= comp
        components.append(np.array(sorted(comp), dtype=np.int64))
    return components


def filter_degree2(graph, erased):
    """Drop residual components whose CNs all have residual degree two.

    These are the error-floor events excluded from waterfall statistics;
    returns a copy of the mask with those VNs cleared.
    """
    deg = residual_cn_degrees(graph, erased)
    filtered = erased.copy()
    for comp in stopping_sets(graph, erased):
        comp_cns = np.unique(graph.vn_cns[comp].ravel())
        if np.all(deg[comp_cns] == 2):
            filtered[comp] = False
    return filtered


@njit(cache=True)
def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:  # path compression
        parent[v], v = root, parent[v]
    return root


@njit(cache=True)
def _filter_deg2_core(vn_cns, erased, num_cns):
    """Union-find variant of filter_degree2 for the hot simulation loops.

    VNs sharing a CN are unioned; a component survives the filter (counts as
    errors) iff it touches a CN whose residual degree differs from two.
    """
    num_vns, dv = vn_cns.shape
    cn_deg = np.zeros(num_cns, dtype=np.int32)
    first_vn = np.full(num_cns, -1, dtype=np.int64)
    parent = np.arange(num_vns, dtype=np.int64)
    for v in range(num_vns):
        if erased[v]:
            for j in range(dv):
                c = vn_cns[v, j]
                cn_deg[c] += 1
                if first_vn[c] < 0:
                    first_vn[c] = v
                else:
                    ra = _find(parent, v)
                    rb = _find(parent, first_vn[c])
                    if ra != rb:
                        parent[ra] = rb
    bad = np.zeros(num_vns, dtype=np.bool_)
    for c in range(num_cns):
        if first_vn[c] >= 0 and cn_deg[c] != 2:
            bad[_find(parent, first_vn[c])] = True
    out = np.zeros(num_vns, dtype=np.bool_)
    for v in range(num_vns):
        if erased[v] and bad[_find(parent, v)]:
            out[v] = True
    return out


def filter_degree2_fast(graph, erased):
    """Same result as filter_degree2, but linear-time and allocation-light."""
    return _filter_deg2_core(graph.vn_cns, erased, graph.num_cns)


def decode(graph, epsilon, seed, peel_seed=None):
    """Erase-then-peel convenience wrapper used by the simulation loops."""
    residual = erase(graph, ChannelConfig(epsilon, seed))
    return peel(residual, seed if peel_seed is None else peel_seed)


def simulate_fer(spec, epsilon, trials, seed, filter_deg2=True,
                 max_errors=None, min_trials=0):
    """Frame error rate of full peeling decoding over fresh graph samples.

    With filter_deg2, frames stalling in a pure degree-2 stopping set count
    as decoded (error-floor events excluded from the waterfall statistic).
    Stops early after max_errors frame errors; returns (errors, trials_run).
    """
    from .ensemble import sample_graph

    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    errors = 0
    done = 0
    for t in range(trials):
        graph = sample_graph(spec, int(seeds[t]))
        outcome, _ = decode(graph, epsilon, int(seeds[t]), int(seeds[t]) + 1)
        if filter_deg2:
            errors += outcome.residual_class == RESIDUAL_LARGE
        else:
            errors += outcome.residual_class != RESIDUAL_EMPTY
        done = t + 1
        if max_errors is not None and done >= min_trials and errors >= max_errors:
            break
    return errors, done
