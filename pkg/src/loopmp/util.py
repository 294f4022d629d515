"""Small shared numerics."""

from __future__ import annotations

import numpy as np


def binomial_pmf(m: int, p: float) -> np.ndarray:
    """Binomial(m, p) probabilities for k = 0..m, computed by the stable
    outward recurrence from the mode (safe for large m where p**k underflows).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    out = np.zeros(m + 1)
    if p == 0.0:
        out[0] = 1.0
        return out
    if p == 1.0:
        out[m] = 1.0
        return out
    kmax = int(round(p * m))
    out[kmax] = 1.0
    for k in range(kmax + 1, m + 1):
        out[k] = out[k - 1] * (m - k + 1.0) / k * p / (1.0 - p)
    for k in range(kmax - 1, -1, -1):
        out[k] = out[k + 1] * (k + 1.0) / (m - k) * (1.0 - p) / p
    return out / out.sum()
