"""Paired two-tailed permutation (sign-flip) test."""

from __future__ import annotations

import numpy as np

__all__ = ["permutation_test", "bonferroni"]

_TIE_EPS = 1e-12


def permutation_test(
    a,
    b,
    n_perm: int = 100_000,
    seed: int = 0,
    exact: bool | None = None,
) -> float:
    """Two-tailed p-value for paired samples via random sign flips of the
    per-pair differences.

    ``exact=True`` enumerates all 2^n sign patterns (n <= 24) and returns
    the exact tail fraction; ``exact=None`` picks enumeration whenever it
    is no more work than ``n_perm`` samples. The sampled estimate uses the
    add-one convention (1 + hits) / (1 + n_perm) so it can never report 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equal-length 1-D paired samples")
    if a.size == 0:
        raise ValueError("empty samples")
    d = a - b
    n = d.size
    observed = abs(d.mean())

    if exact is None:
        exact = n <= 24 and 2**n <= n_perm
    if exact:
        if n > 24:
            raise ValueError("exact enumeration is limited to 24 pairs")
        patterns = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1) * 2 - 1
        means = np.abs(patterns @ d) / n
        return float(np.count_nonzero(means >= observed - _TIE_EPS) / 2**n)

    rng = np.random.default_rng(seed)
    flips = rng.integers(0, 2, size=(n_perm, n)) * 2 - 1
    means = np.abs(flips @ d) / n
    hits = int(np.count_nonzero(means >= observed - _TIE_EPS))
    return float((1 + hits) / (1 + n_perm))


def bonferroni(p: float, comparisons: int) -> float:
    """Corrected p-value: min(1, p * comparisons)."""
    if comparisons < 1:
        raise ValueError("comparisons must be >= 1")
    return min(1.0, p * comparisons)
