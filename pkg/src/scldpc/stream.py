"""Sliding-window decoding of SC-LDPC chains over the BEC.

The window covers W consecutive CN positions and every VN adjacent to them
(spanning W + dv - 1 VN positions, which sets the decoding latency).  At each
placement peeling runs to its fixpoint restricted to the windowed CNs, the
leftmost VN position adjacent to the window is decided, and the window slides
one position to the right.  Bits still erased at decision time stay erased
for good: their CNs can never fire again.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .ensemble import sample_graph
from .peeling import ChannelConfig, erase, filter_degree2_fast
from .stats import wilson_interval


@dataclass(frozen=True)
class WindowConfig:
    W: int
    max_window_iterations: int | None = None  # None: peel to fixpoint

    def validate(self, dv):
        if self.W < dv:
            raise ValueError(f"window must span at least dv={dv} CN positions")

    def latency_positions(self, dv):
        return self.W + dv - 1

    def latency_bits(self, dv, N):
        return N * self.latency_positions(dv)


@dataclass
class StreamRunStats:
    bit_errors: int = 0
    total_bits: int = 0
    block_errors: int = 0
    total_blocks: int = 0
    frame_errors: int = 0
    trials: int = 0
    warmup_intervals: int = 1
    latency_positions: int = 0
    residual_per_position: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def ber(self):
        return self.bit_errors / self.total_bits if self.total_bits else 0.0

    @property
    def bler(self):
        return self.block_errors / self.total_blocks if self.total_blocks else 0.0

    @property
    def fer(self):
        return self.frame_errors / self.trials if self.trials else 0.0

    def ber_ci(self, confidence=0.95):
        return wilson_interval(self.bit_errors, self.total_bits, confidence)

    def bler_ci(self, confidence=0.95):
        return wilson_interval(self.block_errors, self.total_blocks, confidence)

    def merge(self, other):
        self.bit_errors += other.bit_errors
        self.total_bits += other.total_bits
        self.block_errors += other.block_errors
        self.total_blocks += other.total_blocks
        self.frame_errors += other.frame_errors
        self.trials += other.trials
        if self.residual_per_position.size < other.residual_per_position.size:
            grown = np.zeros(other.residual_per_position.size, dtype=np.int64)
            grown[: self.residual_per_position.size] = self.residual_per_position
            self.residual_per_position = grown
        self.residual_per_position[: other.residual_per_position.size] += (
            other.residual_per_position
        )
        return self


@njit(cache=True)
def _sw_core(vn_cns, erased, N, dv, cpp, ncnpos, nvpos, W, seed):
    """Slide the window over the chain; `erased` ends as the residual mask.

    A CN enters the candidate stack when its degree reaches one while inside
    the window, or when its position is activated; entries whose CN has left
    the window, lost its last edge, or points at an already-decided bit are
    discarded lazily.
    """
    np.random.seed(seed)
    num_vns = nvpos * N
    num_cns = ncnpos * cpp
    cn_deg = np.zeros(num_cns, dtype=np.int32)
    cn_sum = np.zeros(num_cns, dtype=np.int64)
    for v in range(num_vns):
        if erased[v]:
            for j in range(dv):
                c = vn_cns[v, j]
                cn_deg[c] += 1
                cn_sum[c] += v
    stuck = np.zeros(num_vns, dtype=np.bool_)
    stack = np.empty(num_cns, dtype=np.int32)
    for w in range(ncnpos):
        # activate the CN positions entering the window at this placement
        if w == 0:
            new_lo, new_hi = 0, min(W, ncnpos)
        else:
            new_lo, new_hi = w + W - 1, w + W
        top = 0
        for p in range(new_lo, min(new_hi, ncnpos)):
            for c in range(p * cpp, (p + 1) * cpp):
                if cn_deg[c] == 1 and not stuck[cn_sum[c]]:
                    stack[top] = c
                    top += 1
        win_lo = w * cpp
        win_hi = min(w + W, ncnpos) * cpp
        while top > 0:
            k = np.random.randint(top)
            c = stack[k]
            stack[k] = stack[top - 1]
            top -= 1
            if cn_deg[c] != 1 or c < win_lo or c >= win_hi:
                continue
            v = cn_sum[c]
            if stuck[v]:
                continue
            erased[v] = False
            for j in range(dv):
                cj = vn_cns[v, j]
                cn_deg[cj] -= 1
                cn_sum[cj] -= v
                if cn_deg[cj] == 1 and win_lo <= cj < win_hi:
                    stack[top] = cj
                    top += 1
        # decide the leftmost VN position adjacent to this window placement
        pdec = w - dv + 1
        if 0 <= pdec < nvpos:
            for v in range(pdec * N, (pdec + 1) * N):
                if erased[v]:
                    stuck[v] = True


def sw_decode(graph, window, residual, seed=0):
    """Sliding-window peeling on an erased graph; returns the residual mask."""
    window.validate(graph.dv)
    erased = residual.erased.copy()
    _sw_core(graph.vn_cns, erased, graph.N, graph.dv, graph.cns_per_pos,
             graph.num_cn_positions, graph.num_vn_positions, window.W,
             np.uint32(seed))
    return erased


def _per_position_counts(mask, N, num_positions):
    idx = np.nonzero(mask)[0]
    return np.bincount(idx // N, minlength=num_positions).astype(np.int64)


def _collect_stats(graph, residual_mask, positions, filter_deg2):
    """Aggregate bit/block errors over the given VN positions."""
    mask = residual_mask
    if filter_deg2:
        mask = filter_degree2_fast(graph, residual_mask)
    counts = _per_position_counts(mask, graph.N, graph.num_vn_positions)
    transmitted = graph.N - _per_position_counts(graph.known, graph.N,
                                                 graph.num_vn_positions)
    stats = StreamRunStats(trials=1)
    sel = np.asarray(positions)
    tx = transmitted[sel]
    blocks = tx > 0
    stats.total_bits = int(tx.sum())
    stats.bit_errors = int(counts[sel].sum())
    stats.total_blocks = int(blocks.sum())
    stats.block_errors = int(((counts[sel] > 0) & blocks).sum())
    stats.frame_errors = int(stats.bit_errors > 0)
    stats.residual_per_position = counts[sel]
    return stats


def decode_terminated_sw(spec, window, epsilon, seed, filter_deg2=True):
    """One SW-decoded transmission of a terminated chain; stats over all positions."""
    graph = sample_graph(spec, seed)
    residual = erase(graph, ChannelConfig(epsilon, seed))
    mask = sw_decode(graph, window, residual, seed + 1)
    stats = _collect_stats(graph, mask, np.arange(spec.L), filter_deg2)
    stats.latency_positions = window.latency_positions(spec.dv)
    return stats


def simulate_terminated_sw(spec, window, epsilon, trials, seed,
                           filter_deg2=True, max_frame_errors=None,
                           min_trials=0):
    """Monte-Carlo BER/BLER of the terminated ensemble under SW decoding.

    Stops early once max_frame_errors frame errors were seen (but not before
    min_trials trials), the usual waterfall-simulation budget rule.
    """
    window.validate(spec.dv)
    total = StreamRunStats(trials=0)
    total.latency_positions = window.latency_positions(spec.dv)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    for t in range(trials):
        total.merge(decode_terminated_sw(spec, window, epsilon,
                                         int(seeds[t]), filter_deg2))
        if (max_frame_errors is not None and t + 1 >= min_trials
                and total.frame_errors >= max_frame_errors):
            break
    return total


def _counted_positions(stream_spec, skip_head=1, skip_tail=1):
    """VN positions inside the counted doping intervals.

    The first interval rides on the head termination and the last one on the
    truncation tail, so both are excluded from the statistics.
    """
    period = stream_spec.period
    first = skip_head * period
    last = (stream_spec.periods - skip_tail) * period
    if last <= first:
        raise ValueError("need at least skip_head + skip_tail + 1 periods")
    return np.arange(first, last)


def simulate_stream(stream_spec, window, epsilon, trials, seed,
                    filter_deg2=True, max_frame_errors=None, min_trials=0):
    """Monte-Carlo BER/BLER of the regularly doped stream under SW decoding."""
    if stream_spec.periods < 3:
        raise ValueError("periods must be >= 3 (one warm-up, one counted, one tail)")
    window.validate(stream_spec.dv)
    chain = stream_spec.chain_spec()
    positions = _counted_positions(stream_spec)
    total = StreamRunStats(trials=0)
    total.latency_positions = window.latency_positions(stream_spec.dv)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    for t in range(trials):
        graph = sample_graph(chain, int(seeds[t]))
        residual = erase(graph, ChannelConfig(epsilon, int(seeds[t])))
        mask = sw_decode(graph, window, residual, int(seeds[t]) + 1)
        stats = _collect_stats(graph, mask, positions, filter_deg2)
        total.merge(stats)
        if (max_frame_errors is not None and t + 1 >= min_trials
                and total.frame_errors >= max_frame_errors):
            break
    return total
