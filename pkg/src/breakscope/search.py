"""Quasi-likelihood break search over pseudo-factor segment covariances.

The cost of a segment ``(s, e]`` is ``(e - s) * log|Sigma(s, e)|``.  The
objective of a configuration is the sum of its segment costs, and the
exact minimiser for a fixed number of breaks is found by dynamic
programming over a precomputed cost table.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int
from .exceptions import DataError, InfeasibleSpacing, SegmentTooShort, TooFewObservations
from .factors import PseudoFactorSet, logdet_psd, segment_logdet, segment_stats

#: Ridge added to the VAR(1) regressor Gram matrix when it is numerically singular.
VAR_RIDGE = 1e-10


@dataclass(frozen=True)
class BreakConfiguration:
    """Ordered breakpoints ``0 < k_1 < ... < k_m < T``.

    Breakpoint ``k`` means the new regime starts at period ``k + 1``
    (1-based), i.e. row ``k`` of a 0-based array.  Every segment, including
    the first and last, has at least ``h`` periods.
    """

    breakpoints: tuple
    T: int
    h: int = 1

    def __post_init__(self):
        bps = tuple(int(k) for k in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        bounds = (0,) + bps + (self.T,)
        gaps = np.diff(bounds)
        if np.any(gaps <= 0):
            raise DataError(f"breakpoints {bps} are not strictly increasing inside (0, {self.T})")
        if np.any(gaps < self.h):
            raise DataError(f"breakpoints {bps} violate minimum spacing h={self.h}")

    @property
    def m(self):
        return len(self.breakpoints)

    @property
    def bounds(self):
        return (0,) + self.breakpoints + (self.T,)

    def segments(self):
        b = self.bounds
        return list(zip(b[:-1], b[1:]))


def _as_stats(stats_or_g):
    if isinstance(stats_or_g, (PseudoFactorSet, np.ndarray)):
        return segment_stats(stats_or_g)
    return stats_or_g


def qml_objective(stats, config):
    """``sum_l (k_l - k_{l-1}) * log|Sigma(k_{l-1}, k_l)|`` for a configuration."""
    stats = _as_stats(stats)
    if config.T != stats.T:
        raise DataError(f"configuration is for T={config.T}, statistics have T={stats.T}")
    return float(sum((e - s) * segment_logdet(stats, s, e) for s, e in config.segments()))


def cost_table(stats, h):
    """Segment costs ``c[s, e] = (e - s) log|Sigma(s, e)|`` for ``e - s >= h``.

    Inadmissible entries are ``+inf``.  Returns an array of shape (T+1, T+1).
    """
    T, r = stats.T, stats.r
    h = check_positive_int(h, "h")
    if h <= r:
        raise SegmentTooShort(f"minimum spacing h={h} must exceed r={r}")
    C = np.full((T + 1, T + 1), np.inf)
    P = stats.prefix
    for s in range(0, T - h + 1):
        ends = np.arange(s + h, T + 1)
        n = (ends - s).astype(float)
        covs = (P[ends] - P[s]) / n[:, None, None]
        ld, clamped = logdet_psd(covs)
        stats.clamp_events += clamped
        C[s, s + h:] = n * ld
    return C


def _suffix_tables(C, n_segments):
    """``B[j][s]`` = least cost of covering ``(s, T]`` with ``j`` segments."""
    B = [None, C[:, -1].copy()]
    for _ in range(2, n_segments + 1):
        B.append((C + B[-1][None, :]).min(axis=1))
    return B


def _backtrack(C, B, m):
    # forward pass taking the first minimiser gives the lexicographically smallest optimum
    bps, s = [], 0
    for i in range(1, m + 1):
        e = int(np.argmin(C[s] + B[m + 1 - i]))
        bps.append(e)
        s = e
    return tuple(bps)


def _check_spacing(T, m, h):
    if (m + 1) * h > T:
        raise InfeasibleSpacing(f"{m} breaks with spacing {h} need T >= {(m + 1) * h}, got T={T}")


def dp_detect(stats, m, h, costs=None):
    """Exact minimiser of the QML objective over configurations with ``m`` breaks.

    Parameters
    ----------
    stats : SegmentStats, PseudoFactorSet or ndarray of shape (T, r)
    m : int
        Number of breaks, ``m >= 1``.
    h : int
        Minimum segment length; must exceed ``r``.
    costs : ndarray, optional
        A table from :func:`cost_table` to reuse.

    Returns
    -------
    BreakConfiguration
        Ties are broken toward the lexicographically smallest breakpoint vector.
    """
    stats = _as_stats(stats)
    m = check_positive_int(m, "m")
    h = check_positive_int(h, "h")
    _check_spacing(stats.T, m, h)
    C = cost_table(stats, h) if costs is None else costs
    B = _suffix_tables(C, m + 1)
    if not np.isfinite(B[m + 1][0]):
        raise InfeasibleSpacing(f"no admissible configuration with m={m}, h={h}")
    return BreakConfiguration(_backtrack(C, B, m), stats.T, h)


def fit_var1(g):
    """Least-squares VAR(1) coefficient ``A`` in ``g_t ~ A g_{t-1}`` (no intercept).

    Returns ``(A, ridged)`` where ``ridged`` tells whether a ridge term was
    needed to invert the regressor Gram matrix.
    """
    G = g.g_hat if isinstance(g, PseudoFactorSet) else np.atleast_2d(np.asarray(g, float))
    T, r = G.shape
    if T <= r + 1:
        raise TooFewObservations(f"VAR(1) needs T > r + 1, got T={T}, r={r}")
    Y, Z = G[1:], G[:-1]
    ZZ = Z.T @ Z
    ridged = bool(np.linalg.cond(ZZ) > 1e12)
    if ridged:
        ZZ = ZZ + VAR_RIDGE * np.eye(r)
    A = np.linalg.solve(ZZ, Z.T @ Y).T
    return A, ridged


def fit_var1_radius(g):
    """Spectral radius of the fitted VAR(1) coefficient matrix of the pseudo-factors."""
    A, _ = fit_var1(g)
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def ic_penalty(m, rho_hat, r, N, T):
    return m * (1.0 + abs(rho_hat)) * r ** 2 * np.log(min(N, T))


def information_criterion(stats, config, rho_hat, N):
    """``U(config) + m (1 + |rho_hat|) r^2 log(min(N, T))``."""
    stats = _as_stats(stats)
    if rho_hat < 0:
        raise DataError(f"rho_hat must be nonnegative, got {rho_hat}")
    return qml_objective(stats, config) + ic_penalty(config.m, rho_hat, stats.r, N, stats.T)


@dataclass
class SelectionReport:
    """Outcome of choosing the number of breaks by the information criterion.

    Attributes
    ----------
    best_config_per_m : dict
        ``m -> BreakConfiguration`` minimising the objective with ``m`` breaks.
    objective_per_m, ic_per_m : dict
        ``m -> float``.
    rho_hat : float
        Spectral radius of the pseudo-factor VAR(1).
    m_hat : int
        Selected number of breaks.
    clamp_events : int
        Eigenvalues floored while computing log-determinants.
    var_ridged : bool
        Whether the VAR(1) fit needed a ridge term.
    """

    best_config_per_m: dict
    objective_per_m: dict
    ic_per_m: dict
    rho_hat: float
    m_hat: int
    clamp_events: int = 0
    var_ridged: bool = False
    penalty_per_m: dict = field(default_factory=dict)

    @property
    def config(self):
        return self.best_config_per_m[self.m_hat]


def select_num_breaks(stats, g, m_max, h, N):
    """Evaluate IC(m) for ``m = 0..m_max`` and pick the minimiser.

    The cost table is built once and shared by every ``m``.  ``m = 0`` uses
    the whole-sample objective, which is zero up to round-off under the
    PCA normalisation, with no penalty.  Ties go to the smaller ``m``.
    """
    stats = _as_stats(stats)
    m_max = check_positive_int(m_max, "m_max")
    h = check_positive_int(h, "h")
    T, r = stats.T, stats.r
    _check_spacing(T, m_max, h)
    A, ridged = fit_var1(g)
    rho_hat = float(np.max(np.abs(np.linalg.eigvals(A))))

    start = stats.clamp_events
    C = cost_table(stats, h)
    B = _suffix_tables(C, m_max + 1)
    configs, objective, ic, penalty = {}, {}, {}, {}
    configs[0] = BreakConfiguration((), T, h)
    objective[0] = T * segment_logdet(stats, 0, T)
    for m in range(1, m_max + 1):
        configs[m] = BreakConfiguration(_backtrack(C, B, m), T, h)
        objective[m] = float(B[m + 1][0])
    for m in range(m_max + 1):
        penalty[m] = float(ic_penalty(m, rho_hat, r, N, T))
        ic[m] = objective[m] + penalty[m]
    m_hat = min(ic, key=lambda k: (ic[k], k))
    return SelectionReport(configs, objective, ic, rho_hat, m_hat,
                           clamp_events=stats.clamp_events - start, var_ridged=ridged,
                           penalty_per_m=penalty)
