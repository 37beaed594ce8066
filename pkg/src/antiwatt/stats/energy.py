"""Trapezoidal integration of a sampled power series into energy."""

from __future__ import annotations

import math
from typing import Iterable, Sequence


def trapezoid_energy(samples: Iterable[Sequence[float]]) -> float:
    """E = Σᵢ (pᵢ + pᵢ₊₁)/2 · (tᵢ₊₁ − tᵢ) in joules for (t_s, watts) pairs.

    Requires at least 2 samples with strictly increasing timestamps;
    exact for affine power series.
    """
    pairs = [(float(t), float(p)) for t, p in samples]
    if len(pairs) < 2:
        raise ValueError("trapezoid_energy needs at least 2 samples")
    terms = []
    for (t0, p0), (t1, p1) in zip(pairs, pairs[1:]):
        if t1 <= t0:
            raise ValueError("timestamps must be strictly increasing")
        terms.append((p0 + p1) / 2.0 * (t1 - t0))
    return math.fsum(terms)
