import itertools

import numpy as np
import pytest

from breakscope.factors import segment_logdet


def brute_force(stats, m, h):
    """Exhaustive minimiser of the segmented log-determinant objective.

    Enumerates every admissible configuration in lexicographic order and
    keeps the first strict improvement, so ties resolve to the smallest
    breakpoint vector.
    """
    T = stats.T
    best, best_val = None, np.inf
    for ks in itertools.combinations(range(1, T), m):
        b = (0,) + ks + (T,)
        if min(np.diff(b)) < h:
            continue
        val = 0.0
        for s, e in zip(b[:-1], b[1:]):
            cov = (stats.prefix[e] - stats.prefix[s]) / (e - s)
            val += (e - s) * np.linalg.slogdet(cov)[1]
        if val < best_val:
            best, best_val = ks, val
    return best, best_val


def direct_covariance(G, s, e):
    rows = G[s:e]
    return rows.T @ rows / (e - s)


def random_orthogonal(r, rng):
    q, rr = np.linalg.qr(rng.standard_normal((r, r)))
    return q * np.sign(np.diag(rr))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


__all__ = ["brute_force", "direct_covariance", "random_orthogonal", "segment_logdet"]
