"""Small statistics helpers shared by the simulation and prediction modules."""

from __future__ import annotations

from scipy import stats as _st


def wilson_interval(successes, total, confidence=0.95):
    """Wilson score interval for a binomial proportion.

    Preferred over the normal approximation because our error counts are
    often zero or single-digit.
    """
    if total == 0:
        return 0.0, 1.0
    z = _st.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = (z / denom) * (phat * (1 - phat) / total
                          + z * z / (4 * total * total)) ** 0.5
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == total else min(1.0, center + half)
    return lo, hi
