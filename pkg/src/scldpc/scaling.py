"""Doping-switch scaling law for streaming error rates.

Below threshold each doping point either stops the decoding waves running
into it (full termination) or lets them pass; the success probability is

    psi_d = 1 - Q(kappa * (eps_d - eps) / sqrt(nu_breve / N)).

The number of doping intervals a failed wave traverses before the next
successful doping point is then geometric in psi_d, and the streaming
BER/BLER is the pmf-weighted average of terminated-chain error rates at
lengths k * Ltilde.  Those component rates come from a pluggable provider
backed by Monte-Carlo simulation with an on-disk cache and an explicit
extrapolation model in L (BER proportional, BLER affine).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .ensemble import EnsembleSpec
from .stream import WindowConfig, simulate_terminated_sw

PROVENANCE_SIMULATED = "simulated"
PROVENANCE_EXTRAPOLATED = "extrapolated"

_HARD_K_CAP = 5_000_000


def q_function(x):
    """Standard normal tail probability, accurate in the far tails."""
    return 0.5 * erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class DopingSwitchModel:
    params: "ScalingParams"  # noqa: F821 - meanevol.ScalingParams, duck-typed
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")


def psi_d(model, epsilon):
    """Probability that a doping point stops the incoming decoding waves."""
    p = model.params
    arg = p.kappa * (p.eps_star_d - epsilon) / math.sqrt(p.nu_breve / model.N)
    return 1.0 - q_function(arg)


def interval_pmf(psi, k):
    """Geometric distribution of the number of intervals until a doping success."""
    if not 0.0 < psi <= 1.0:
        raise ValueError("psi must lie in (0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    return (1.0 - psi) ** (k - 1) * psi


def _eps_key(epsilon):
    return f"{epsilon:.12g}"


def _record_hash(params):
    payload = json.dumps(params, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class TerminatedRateProvider:
    """Terminated-ensemble SW error rates with a JSON-lines cache.

    One record per (dv, dc, L, N, W, epsilon, filter) point.  Lengths beyond
    the simulated range are served by extrapolation when enabled: BER grows
    proportionally in L (each position contributes the same residual mass)
    and BLER affinely (fixed boundary effect plus a per-position hazard).
    """

    def __init__(self, dv, dc, N, cache_path=None, allow_extrapolation=True):
        self.dv = dv
        self.dc = dc
        self.N = N
        self.cache_path = cache_path
        self.allow_extrapolation = allow_extrapolation
        self._records = {}
        if cache_path and os.path.exists(cache_path):
            with open(cache_path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self._records[self._key_of(rec)] = rec

    def _params(self, L, W, epsilon, filter_deg2):
        return {
            "dv": self.dv, "dc": self.dc, "L": int(L), "N": self.N,
            "W": int(W), "epsilon": _eps_key(epsilon),
            "filter": bool(filter_deg2),
        }

    @staticmethod
    def _key_of(rec):
        return (rec["dv"], rec["dc"], rec["L"], rec["N"], rec["W"],
                rec["epsilon"], rec["filter"])

    def get(self, L, W, epsilon, filter_deg2=True):
        """The cached record for an exact point, or None."""
        params = self._params(L, W, epsilon, filter_deg2)
        return self._records.get(self._key_of(params))

    def _append(self, rec):
        self._records[self._key_of(rec)] = rec
        if self.cache_path:
            with open(self.cache_path, "a") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def simulate(self, L, W, epsilon, budget, seed=0, filter_deg2=True,
                 max_frame_errors=100, min_trials=50):
        """Simulate one point unless cached; returns the record."""
        cached = self.get(L, W, epsilon, filter_deg2)
        if cached is not None:
            return cached
        spec = EnsembleSpec(self.dv, self.dc, int(L), self.N, "terminated")
        stats = simulate_terminated_sw(spec, WindowConfig(int(W)), epsilon,
                                       budget, seed, filter_deg2,
                                       max_frame_errors, min_trials)
        params = self._params(L, W, epsilon, filter_deg2)
        low_confidence = stats.bit_errors == 0
        if low_confidence:
            # no errors seen: report the upper confidence bound instead of 0
            ber = stats.ber_ci()[1]
            bler = stats.bler_ci()[1]
        else:
            ber = stats.ber
            bler = stats.bler
        rec = dict(params)
        rec.update({
            "trials": stats.trials,
            "bit_errors": stats.bit_errors,
            "total_bits": stats.total_bits,
            "block_errors": stats.block_errors,
            "total_blocks": stats.total_blocks,
            "ber": ber,
            "bler": bler,
            "ber_ci": list(stats.ber_ci()),
            "bler_ci": list(stats.bler_ci()),
            "provenance": PROVENANCE_SIMULATED,
            "low_confidence": low_confidence,
            "hash": _record_hash(params),
        })
        self._append(rec)
        return rec

    def simulated_lengths(self, W, epsilon, filter_deg2=True):
        eps = _eps_key(epsilon)
        return sorted(
            rec["L"] for rec in self._records.values()
            if rec["W"] == W and rec["epsilon"] == eps
            and rec["filter"] == filter_deg2 and rec["dv"] == self.dv
            and rec["dc"] == self.dc and rec["N"] == self.N
        )

    def curve(self, W, epsilon, filter_deg2=True):
        """Length-dependent rate curve over the cached points at (W, epsilon)."""
        lengths = self.simulated_lengths(W, epsilon, filter_deg2)
        if not lengths:
            raise KeyError(f"no cached rates for W={W}, eps={epsilon}")
        recs = {L: self.get(L, W, epsilon, filter_deg2) for L in lengths}
        return RateCurve(recs, self.allow_extrapolation)


class RateCurve:
    """(BER, BLER) as a function of terminated-chain length L.

    Simulated lengths are served verbatim; others through the extrapolation
    model (needs at least two simulated lengths).
    """

    def __init__(self, records, allow_extrapolation):
        self.records = records
        self.lengths = np.array(sorted(records), dtype=float)
        self.allow_extrapolation = allow_extrapolation
        self.used_extrapolation = False
        bers = np.array([records[int(L)]["ber"] for L in self.lengths])
        blers = np.array([records[int(L)]["bler"] for L in self.lengths])
        if len(self.lengths) >= 2:
            self.ber_slope = float(np.dot(self.lengths, bers)
                                   / np.dot(self.lengths, self.lengths))
            self.bler_affine = tuple(np.polyfit(self.lengths, blers, 1))
        else:
            self.ber_slope = None
            self.bler_affine = None

    def _eval(self, L, which):
        rec = self.records.get(int(L))
        if rec is not None:
            return rec[which]
        if not self.allow_extrapolation:
            raise KeyError(f"length {L} not simulated and extrapolation disabled")
        if self.ber_slope is None:
            raise KeyError("extrapolation needs at least two simulated lengths")
        self.used_extrapolation = True
        if which == "ber":
            val = self.ber_slope * L
        else:
            a1, a0 = self.bler_affine
            val = a0 + a1 * L
        return min(1.0, max(0.0, val))

    def ber(self, L):
        return self._eval(L, "ber")

    def bler(self, L):
        return self._eval(L, "bler")

    def saturation_k(self, Ltilde):
        """Smallest k beyond which both extrapolated rates clamp to one."""
        if self.ber_slope is None or self.ber_slope <= 0:
            return None
        k_ber = 1.0 / (self.ber_slope * Ltilde)
        a1, a0 = self.bler_affine
        if a1 <= 0:
            return None
        k_bler = (1.0 - a0) / (a1 * Ltilde)
        return int(math.ceil(max(k_ber, k_bler, 1.0)))


def provider_fill(provider, lengths, W, epsilon, budget, seed=0,
                  filter_deg2=True, max_frame_errors=100, min_trials=50):
    """Populate the provider cache at the given terminated-chain lengths."""
    for i, L in enumerate(lengths):
        provider.simulate(L, W, epsilon, budget, seed + 1009 * i,
                          filter_deg2, max_frame_errors, min_trials)
    return provider


def predict_stream(model, provider, Ltilde, W, epsilon, tail_mass=1e-6,
                   filter_deg2=True):
    """Streaming (BER, BLER) from the geometric mixture of terminated rates.

    The sum over interval counts k is truncated once the remaining geometric
    mass drops below tail_mass; since error rates are at most one, the
    truncation error is below tail_mass.  VN positions inside the doping
    points themselves are not part of the terminated components.
    """
    psi = psi_d(model, epsilon)
    if psi <= 0.0:
        raise ValueError("psi_d is zero; the interval distribution degenerates")
    if psi >= 1.0:
        k_max = 1
    else:
        k_max = int(math.ceil(math.log(tail_mass) / math.log(1.0 - psi)))
    curve = provider.curve(W, epsilon, filter_deg2)
    k_sat = curve.saturation_k(Ltilde)
    k_sim = int(curve.lengths.max() // Ltilde)
    if k_sat is None:
        k_top = k_max
    else:
        k_top = min(k_max, max(k_sat, k_sim))
    if k_top > _HARD_K_CAP:
        raise ValueError("interval sum too long; raise tail_mass or psi")
    ks = np.arange(1, k_top + 1)
    pmf = (1.0 - psi) ** (ks - 1) * psi
    ber = sum(curve.ber(int(k) * Ltilde) * w for k, w in zip(ks, pmf))
    bler = sum(curve.bler(int(k) * Ltilde) * w for k, w in zip(ks, pmf))
    if k_top < k_max:
        # every remaining term has both rates clamped at one
        rest = (1.0 - psi) ** k_top - (1.0 - psi) ** k_max
        ber += rest
        bler += rest
    return float(min(ber, 1.0)), float(min(bler, 1.0))
