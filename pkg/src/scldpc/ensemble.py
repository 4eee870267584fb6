"""Semi-structured SC-LDPC ensembles with VN doping.

A chain has L spatial positions, each holding N variable nodes (VNs) of
degree dv and N*dv/dc check nodes (CNs) of degree dc.  Every VN at position i
owns one edge socket per offset j in 0..dv-1; the socket targeting CN
position i+j is matched to a uniformly random free CN socket at that position
(configuration-model matching, multi-edges allowed).

Doping fixes a fraction alpha of the VNs at selected positions to known
values; fixed VNs are never transmitted and never erased.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOUNDARIES = ("tail-biting", "terminated", "stream")


class EnsembleError(ValueError):
    """Invalid ensemble or doping parameters."""


def round_half_up(x):
    """round(alpha * N) with ties going up, independent of banker's rounding."""
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class DopingPattern:
    """Doped spatial positions and the fixed fraction at each of them."""

    positions: tuple = ()
    alpha: tuple = ()

    def __post_init__(self):
        positions = tuple(int(p) for p in self.positions)
        alpha = tuple(float(a) for a in self.alpha) if self.alpha else (1.0,) * len(positions)
        if len(alpha) != len(positions):
            raise EnsembleError("alpha must have one entry per doped position")
        if len(set(positions)) != len(positions):
            raise EnsembleError("doped positions must be distinct")
        if any(not 0.0 < a <= 1.0 for a in alpha):
            raise EnsembleError("each alpha must lie in (0, 1]")
        if sorted(positions) != list(positions):
            raise EnsembleError("doped positions must be sorted")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "alpha", alpha)

    def __len__(self):
        return len(self.positions)

    @property
    def is_hard(self):
        return all(a == 1.0 for a in self.alpha)

    @property
    def span(self):
        """Positions covered by the doped cluster, including undoped gaps."""
        return 0 if not self.positions else max(self.positions) - min(self.positions) + 1

    @property
    def total_alpha(self):
        return float(sum(self.alpha))

    def shifted(self, offset):
        return DopingPattern(tuple(p + offset for p in self.positions), self.alpha)

    def alpha_at(self, position):
        for p, a in zip(self.positions, self.alpha):
            if p == position:
                return a
        return 0.0


def full_termination_pattern(dv, offset=0):
    """dv-1 consecutive hard-doped positions, equivalent to terminating the chain."""
    return DopingPattern(tuple(range(offset, offset + dv - 1)))


@dataclass(frozen=True)
class EnsembleSpec:
    dv: int
    dc: int
    L: int
    N: int
    boundary: str = "tail-biting"
    doping: DopingPattern = field(default_factory=DopingPattern)

    def __post_init__(self):
        if self.dv < 2:
            raise EnsembleError("dv must be >= 2")
        if self.dc <= self.dv:
            raise EnsembleError("dc must exceed dv")
        if self.L < 1 or self.N < 1:
            raise EnsembleError("L and N must be positive")
        if (self.N * self.dv) % self.dc != 0:
            raise EnsembleError(
                f"N*dv = {self.N * self.dv} must be divisible by dc = {self.dc}"
            )
        if self.boundary not in BOUNDARIES:
            raise EnsembleError(f"boundary must be one of {BOUNDARIES}")
        if self.boundary != "stream":
            for p in self.doping.positions:
                if not 0 <= p < self.L:
                    raise EnsembleError(f"doped position {p} outside [0, {self.L})")

    @property
    def cns_per_pos(self):
        return self.N * self.dv // self.dc

    @property
    def num_cn_positions(self):
        return self.L if self.boundary == "tail-biting" else self.L + self.dv - 1

    @property
    def num_vns(self):
        return self.L * self.N

    @property
    def num_cns(self):
        return self.num_cn_positions * self.cns_per_pos


@dataclass(frozen=True)
class StreamSpec:
    """Semi-infinite chain doped every Ltilde positions, truncated to `periods` intervals.

    Doped positions are given relative to each doping point: Ltilde = 50 and
    positions (0, 1, 2) put the doped positions at 50, 51, 52, 103, 104, 105, ...
    """

    dv: int
    dc: int
    Ltilde: int
    N: int
    doping: DopingPattern = field(default_factory=DopingPattern)
    periods: int = 3

    def __post_init__(self):
        if self.Ltilde < 1:
            raise EnsembleError("Ltilde must be >= 1")
        if self.periods < 1:
            raise EnsembleError("periods must be >= 1")
        if self.doping.positions and min(self.doping.positions) != 0:
            raise EnsembleError("stream doping positions are relative; the first must be 0")

    @property
    def boundary(self):
        return "stream"

    @property
    def period(self):
        """Spatial positions per doping interval (undoped run + doped cluster span)."""
        return self.Ltilde + self.doping.span

    def doped_positions(self, periods=None):
        """Absolute doped positions over the truncated chain."""
        periods = self.periods if periods is None else periods
        out = []
        for k in range(periods):
            base = k * self.period + self.Ltilde
            out.extend(base + p for p in self.doping.positions)
        return out

    def chain_spec(self, periods=None):
        """Terminated chain covering `periods` doping intervals.

        The natural left boundary of a terminated chain plays the role of the
        stream head; the trailing doped cluster of the last interval is included.
        """
        periods = self.periods if periods is None else periods
        L = periods * self.period
        positions = [p for p in self.doped_positions(periods) if p < L]
        alpha = tuple(self.doping.alpha) * periods
        pattern = DopingPattern(tuple(positions), alpha[: len(positions)])
        return EnsembleSpec(self.dv, self.dc, L, self.N, "terminated", pattern)


class TannerGraph:
    """A sampled element of the ensemble.

    vn_cns[v, j] is the global CN index matched to socket j of VN v; the VN at
    global index v sits at spatial position v // N.  known[v] is True for VNs
    fixed by doping (never transmitted, never erased).
    """

    def __init__(self, spec, vn_cns, known):
        self.spec = spec
        self.vn_cns = vn_cns
        self.known = known

    @property
    def dv(self):
        return self.spec.dv

    @property
    def dc(self):
        return self.spec.dc

    @property
    def N(self):
        return self.spec.N

    @property
    def num_vns(self):
        return self.vn_cns.shape[0]

    @property
    def num_cns(self):
        return self.spec.num_cns

    @property
    def num_vn_positions(self):
        return self.spec.L

    @property
    def num_cn_positions(self):
        return self.spec.num_cn_positions

    @property
    def cns_per_pos(self):
        return self.spec.cns_per_pos

    def vn_position(self, v):
        return v // self.N

    def cn_position(self, c):
        return c // self.cns_per_pos

    def cn_degrees(self):
        """Edge count per CN (multi-edges counted with multiplicity)."""
        return np.bincount(self.vn_cns.ravel(), minlength=self.num_cns)

    def edge_count(self):
        return self.vn_cns.size


def _position_rng(seed, position, stream):
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(position), stream)))


def _sample_position_edges(spec, seed, p, vn_cns):
    """Match all VN sockets targeting CN position p to that position's CN sockets.

    Sockets arrive in canonical order (source position, then VN index), so the
    adjacency contributed by position p depends only on (seed, p).
    """
    dv, dc, L, N = spec.dv, spec.dc, spec.L, spec.N
    cpp = spec.cns_per_pos
    tail_biting = spec.boundary == "tail-biting"
    sources = []
    for j in range(dv):
        i = p - j
        if tail_biting:
            i %= L
        elif not 0 <= i < L:
            continue
        sources.append((i, j))
    rng = _position_rng(seed, p, 0)
    perm = rng.permutation(cpp * dc)
    cn_local = perm[: len(sources) * N] // dc
    base = p * cpp
    for k, (i, j) in enumerate(sources):
        vn_cns[i * N : (i + 1) * N, j] = base + cn_local[k * N : (k + 1) * N]


def sample_graph(spec, seed):
    """Draw a Tanner graph from the ensemble; deterministic given seed.

    The doping pattern carried by the spec is applied with the same seed.
    """
    if spec.boundary == "stream":
        raise EnsembleError("materialize a stream via StreamSpec.chain_spec() first")
    vn_cns = np.empty((spec.num_vns, spec.dv), dtype=np.int32)
    for p in range(spec.num_cn_positions):
        _sample_position_edges(spec, seed, p, vn_cns)
    graph = TannerGraph(spec, vn_cns, np.zeros(spec.num_vns, dtype=bool))
    if len(spec.doping):
        graph = apply_doping(graph, spec.doping, seed)
    return graph


def apply_doping(graph, pattern, seed):
    """Mark round(alpha_i * N) uniformly chosen VNs known at each doped position."""
    spec = graph.spec
    known = np.zeros(graph.num_vns, dtype=bool)
    for p, a in zip(pattern.positions, pattern.alpha):
        if not 0 <= p < spec.L:
            raise EnsembleError(f"doped position {p} outside the chain")
        num_fixed = round_half_up(a * spec.N)
        rng = _position_rng(seed, p, 1)
        chosen = rng.permutation(spec.N)[:num_fixed]
        known[p * spec.N + chosen] = True
    return TannerGraph(spec, graph.vn_cns, known)


def design_rate(Ltilde, pattern, dv, dc):
    """Design rate of the regularly doped stream, per doping period.

    One period holds P = Ltilde + span(pattern) VN positions and as many CN
    positions; sum(alpha) * N of its VNs are fixed and not transmitted.
    """
    if Ltilde < 1:
        raise EnsembleError("Ltilde must be >= 1")
    period = Ltilde + pattern.span
    transmitted = period - pattern.total_alpha
    if transmitted <= 0:
        raise EnsembleError("doping fixes every bit in the period")
    rate = 1.0 - (dv / dc) * period / transmitted
    return rate


def spec_from_config(cfg):
    """Build an EnsembleSpec or StreamSpec from a plain config mapping.

    Keys: dv, dc, N, boundary, doping.positions, doping.alpha, and either
    L (tail-biting/terminated) or Ltilde [+ periods] (stream).
    """
    doping_cfg = cfg.get("doping", {}) or {}
    pattern = DopingPattern(
        tuple(doping_cfg.get("positions", ())),
        tuple(doping_cfg.get("alpha", ())),
    )
    boundary = cfg.get("boundary", "tail-biting")
    try:
        dv, dc, N = int(cfg["dv"]), int(cfg["dc"]), int(cfg["N"])
    except KeyError as e:
        raise EnsembleError(f"config missing required key {e}") from e
    if boundary == "stream":
        return StreamSpec(dv, dc, int(cfg["Ltilde"]), N, pattern,
                          int(cfg.get("periods", 3)))
    return EnsembleSpec(dv, dc, int(cfg["L"]), N, boundary, pattern)
