"""Panels, full-sample principal components and segment covariance statistics.

The pseudo-factors are the principal components of the whole panel,
normalised so that ``G.T @ G / T`` is the identity.  Segment covariances
of the pseudo-factors are served from prefix sums, so any segment costs
O(r^2) after an O(T r^2) precomputation.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._validation import check_panel_array, check_positive_int
from .exceptions import (
    DataError,
    EigenFailure,
    EmptySegment,
    RankRequestTooLarge,
    SegmentTooShort,
    ZeroVarianceColumn,
)

#: Relative eigenvalue floor used by the log-determinant, as a fraction of the trace.
LOGDET_FLOOR = 1e-15
#: Relative floor on the Bai-Ng residual variance, as a fraction of V(0).
RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Panel:
    """A T x N panel of observations; rows are periods and columns are series.

    Parameters
    ----------
    values : array-like of shape (T, N)
        Finite observations.
    series_names : sequence of str, optional
        Column labels. Defaults to ``x0, x1, ...``.
    period_labels : sequence, optional
        Row labels. Defaults to ``1..T``.
    """

    values: np.ndarray
    series_names: tuple = None
    period_labels: tuple = None

    def __post_init__(self):
        values = check_panel_array(self.values)
        values = values.copy()
        values.setflags(write=False)
        T, N = values.shape
        names = (tuple(f"x{i}" for i in range(N)) if self.series_names is None
                 else tuple(str(s) for s in self.series_names))
        labels = (tuple(range(1, T + 1)) if self.period_labels is None
                  else tuple(self.period_labels))
        if len(names) != N:
            raise DataError(f"expected {N} series names, got {len(names)}")
        if len(labels) != T:
            raise DataError(f"expected {T} period labels, got {len(labels)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "series_names", names)
        object.__setattr__(self, "period_labels", labels)

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def N(self):
        return self.values.shape[1]

    def rows(self, start, stop):
        """Sub-panel of periods ``start+1..stop`` (1-based, inclusive)."""
        return Panel(self.values[start:stop], self.series_names,
                     self.period_labels[start:stop])

    def with_values(self, values):
        return Panel(values, self.series_names, self.period_labels)


def as_panel(data):
    """Coerce an array, DataFrame or :class:`Panel` into a :class:`Panel`."""
    if isinstance(data, Panel):
        return data
    if hasattr(data, "columns") and hasattr(data, "index"):
        return Panel(np.asarray(data, dtype=float), list(data.columns), list(data.index))
    return Panel(data)


def standardize(panel, demean=True, unit_variance=True):
    """Demean and/or scale every column to unit (population) variance.

    Raises
    ------
    ZeroVarianceColumn
        If ``unit_variance`` is requested and a column is constant.
    """
    panel = as_panel(panel)
    X = panel.values.copy()
    if demean:
        X -= X.mean(axis=0)
    if unit_variance:
        sd = X.std(axis=0) if demean else np.sqrt(((X - X.mean(axis=0)) ** 2).mean(axis=0))
        scale = np.abs(panel.values).max(axis=0)
        for i in np.flatnonzero(sd <= 1e-14 * np.maximum(scale, 1e-300)):
            raise ZeroVarianceColumn(int(i), panel.series_names[i])
        X /= sd
    return panel.with_values(X)


@dataclass(frozen=True, eq=False)
class PseudoFactorSet:
    """Full-sample principal components.

    Attributes
    ----------
    g_hat : ndarray of shape (T, r)
        Row t is the estimated pseudo-factor at period t; ``g_hat.T @ g_hat / T = I``.
    eigenvalues : ndarray of shape (r,)
        Leading eigenvalues of ``X X' / (N T)``, descending.
    r : int
    """

    g_hat: np.ndarray
    eigenvalues: np.ndarray
    r: int

    @property
    def T(self):
        return self.g_hat.shape[0]


def _top_eigh(M, k):
    n = M.shape[0]
    try:
        vals, vecs = scipy.linalg.eigh(M, subset_by_index=[n - k, n - 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    return vals[::-1], vecs[:, ::-1]


def _fix_signs(G):
    idx = np.argmax(np.abs(G), axis=0)
    signs = np.where(G[idx, np.arange(G.shape[1])] < 0, -1.0, 1.0)
    return G * signs


def extract_pseudo_factors(panel, r, route="auto"):
    """Estimate ``r`` pseudo-factors by principal components of the full panel.

    Parameters
    ----------
    panel : Panel or array-like of shape (T, N)
    r : int
        Number of components, ``1 <= r <= min(N, T)``.
    route : {"auto", "time", "cross"}
        Which Gram matrix to diagonalise: the T x T matrix ``X X'`` ("time"),
        the N x N matrix ``X' X`` ("cross"), or the smaller one ("auto").

    Returns
    -------
    PseudoFactorSet
    """
    X = as_panel(panel).values
    T, N = X.shape
    r = check_positive_int(r, "r")
    if r > min(N, T):
        raise RankRequestTooLarge(f"r={r} exceeds min(N, T)={min(N, T)}")
    if route == "auto":
        route = "time" if T <= N else "cross"
    if route == "time":
        vals, U = _top_eigh(X @ X.T / (N * T), r)
    elif route == "cross":
        vals, V = _top_eigh(X.T @ X / (N * T), r)
        U = X @ V
        # re-orthonormalise; near-zero eigenvalues make X V ill-scaled
        Q, R = np.linalg.qr(U)
        U = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    else:
        raise DataError(f"unknown route {route!r}")
    if not np.all(np.isfinite(U)):
        raise EigenFailure("non-finite eigenvectors")
    G = _fix_signs(np.sqrt(T) * U)
    G.setflags(write=False)
    vals = np.clip(vals, 0.0, None)
    vals.setflags(write=False)
    return PseudoFactorSet(G, vals, r)


def bai_ng_ic2(panel, r_max):
    """IC2 criterion values for k = 0..r_max factors.

    ``IC2(k) = log V(k) + k (N+T)/(NT) log(min(N, T))`` where ``V(k)`` is the
    mean squared residual after removing the first k principal components.
    ``V(k)`` is floored at ``RESIDUAL_FLOOR * V(0)`` so exact low-rank panels
    do not produce ``log(0)``.
    """
    X = as_panel(panel).values
    T, N = X.shape
    r_max = check_positive_int(r_max, "r_max")
    if r_max > min(N, T) - 1:
        raise RankRequestTooLarge(f"r_max={r_max} exceeds min(N, T) - 1={min(N, T) - 1}")
    M = X @ X.T if T <= N else X.T @ X
    M = M / (N * T)
    total = np.trace(M)
    vals, _ = _top_eigh(M, r_max)
    V = total - np.concatenate([[0.0], np.cumsum(vals)])
    if total <= 0:
        V = np.zeros(r_max + 1)
    V = np.maximum(V, max(RESIDUAL_FLOOR * total, np.finfo(float).tiny))
    k = np.arange(r_max + 1)
    return np.log(V) + k * (N + T) / (N * T) * np.log(min(N, T))


def estimate_num_factors(panel, r_max):
    """Number of factors minimising Bai and Ng's IC2 over ``0..r_max``.

    Ties go to the smaller count.  The panel is used as given; standardise
    beforehand if the series are on different scales.
    """
    return int(np.argmin(bai_ng_ic2(panel, r_max)))


@dataclass(eq=False)
class SegmentStats:
    """Prefix sums ``S_t = sum_{u <= t} g_u g_u'`` of pseudo-factor outer products.

    ``clamp_events`` counts eigenvalues raised to the log-determinant floor.
    """

    prefix: np.ndarray
    r: int
    T: int
    clamp_events: int = field(default=0)

    def covariance(self, s, e):
        return segment_covariance(self, s, e)

    def logdet(self, s, e):
        return segment_logdet(self, s, e)


def segment_stats(g):
    """Build :class:`SegmentStats` from a :class:`PseudoFactorSet` or a (T, r) array."""
    G = g.g_hat if isinstance(g, PseudoFactorSet) else np.atleast_2d(np.asarray(g, float))
    T, r = G.shape
    prefix = np.zeros((T + 1, r, r))
    np.cumsum(G[:, :, None] * G[:, None, :], axis=0, out=prefix[1:])
    prefix.setflags(write=False)
    return SegmentStats(prefix, r, T)


def segment_covariance(stats, s, e):
    """Sample second-moment matrix of pseudo-factors over periods ``s+1..e``."""
    if not 0 <= s < e <= stats.T:
        if s >= e:
            raise EmptySegment(f"empty segment ({s}, {e})")
        raise DataError(f"segment ({s}, {e}) outside 0..{stats.T}")
    return (stats.prefix[e] - stats.prefix[s]) / (e - s)


def _logdet_eig(covs):
    try:
        eig = np.linalg.eigvalsh(covs)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    trace = np.trace(covs, axis1=-2, axis2=-1)
    floor = np.maximum(LOGDET_FLOOR * trace, np.finfo(float).tiny)[..., None]
    low = eig < floor
    eig = np.where(low, floor, eig)
    return np.log(eig).sum(axis=-1), int(low.sum())


def logdet_psd(covs):
    """Log-determinants of a stack of symmetric PSD matrices with an eigenvalue floor.

    Eigenvalues below ``LOGDET_FLOOR * trace`` are raised to that floor.
    Returns ``(logdets, n_clamped)``.

    A Cholesky factorisation is used where the determinant certifies
    ``lambda_min >= 1e-8 * trace`` or every pivot exceeds ``1e-10 * trace``;
    the result then agrees with the eigenvalue sum to round-off.  Everything
    else goes through ``eigvalsh``.
    """
    covs = np.asarray(covs, dtype=float)
    single = covs.ndim == 2
    covs = covs[None] if single else covs
    r = covs.shape[-1]
    try:
        L = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        out, clamped = _logdet_eig(covs)
    else:
        diag = np.diagonal(L, axis1=-2, axis2=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * np.log(diag).sum(axis=-1)
            trace = np.trace(covs, axis1=-2, axis2=-1)
            # lambda_min >= det / lambda_max^(r-1) >= det / trace^(r-1)
            bound = out - (r - 1) * np.log(trace)
            certified = bound >= np.log(1e-8) + np.log(trace)
            # pivots far above the floor: numerically definite, nothing to clamp
            pivots = diag.min(axis=-1) ** 2 >= 1e-10 * trace
            bad = ~(certified | pivots)
        clamped = 0
        if bad.any():
            out[bad], clamped = _logdet_eig(covs[bad])
    return (out[0] if single else out), clamped


def segment_logdet(stats, s, e):
    """``log |Sigma(s, e)|`` computed from clamped eigenvalues.

    Raises
    ------
    SegmentTooShort
        If the segment has ``r`` or fewer periods.
    """
    if e - s <= stats.r:
        raise SegmentTooShort(f"segment ({s}, {e}) has {e - s} <= r={stats.r} periods")
    value, clamped = logdet_psd(segment_covariance(stats, s, e))
    stats.clamp_events += clamped
    return float(value)
