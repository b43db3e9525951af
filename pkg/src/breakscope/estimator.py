"""scikit-learn compatible estimators wrapping the functional API."""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_panel_array, spacing_from_fraction
from .classify import classify_all, regime_factor_counts
from .exceptions import DataError, InfeasibleSpacing, RegimeTooShort
from .factors import (
    as_panel,
    estimate_num_factors,
    extract_pseudo_factors,
    segment_stats,
    standardize as standardize_panel,
)
from .search import (
    BreakConfiguration,
    SelectionReport,
    dp_detect,
    fit_var1,
    qml_objective,
    select_num_breaks,
)


class PseudoFactorPCA(TransformerMixin, BaseEstimator):
    """Principal-component factors normalised to ``G'G/T = I``.

    Parameters
    ----------
    n_factors : int or None
        Number of factors. If None, chosen by Bai and Ng's IC2 up to ``max_factors``.
    max_factors : int
    standardize : bool
        Demean and scale each series to unit variance before extraction.
    route : {"auto", "time", "cross"}
        Gram matrix used for the eigendecomposition.

    Attributes
    ----------
    factors_ : ndarray of shape (T, n_factors_)
    loadings_ : ndarray of shape (N, n_factors_)
    eigenvalues_ : ndarray of shape (n_factors_,)
    """

    def __init__(self, n_factors=None, max_factors=12, standardize=False, route="auto"):
        self.n_factors = n_factors
        self.max_factors = max_factors
        self.standardize = standardize
        self.route = route

    def _prepare(self, X):
        X = check_panel_array(X)
        if self.standardize:
            X = (X - self.mean_) / self.scale_
        return X

    def fit(self, X, y=None):
        X = check_panel_array(X)
        self.n_features_in_ = X.shape[1]
        if self.standardize:
            standardize_panel(X)  # rejects constant columns
            self.mean_ = X.mean(axis=0)
            self.scale_ = X.std(axis=0)
        X = self._prepare(X)
        r = self.n_factors
        if r is None:
            r = estimate_num_factors(X, min(self.max_factors, min(X.shape) - 1))
        if r == 0:
            raise DataError("IC2 found no common factors")
        pf = extract_pseudo_factors(X, r, route=self.route)
        self.n_factors_ = r
        self.factors_ = np.array(pf.g_hat)
        self.eigenvalues_ = np.array(pf.eigenvalues)
        self.loadings_ = X.T @ self.factors_ / X.shape[0]
        return self

    def transform(self, X):
        """Least-squares factor scores ``X L (L'L)^-1`` given the fitted loadings."""
        check_is_fitted(self, "loadings_")
        X = self._prepare(X)
        if X.shape[1] != self.n_features_in_:
            raise DataError(f"expected {self.n_features_in_} series, got {X.shape[1]}")
        L = self.loadings_
        return np.linalg.solve(L.T @ L, (X @ L).T).T


class QMLBreakDetector(BaseEstimator):
    """Detect breaks in factor loadings by minimising the QML objective.

    Parameters
    ----------
    n_breaks : int or None
        Known number of breaks. If None, chosen by the information criterion
        over ``0..max_breaks``.
    max_breaks : int
        Lowered, with a warning, to the largest count that fits ``T`` at
        the minimum spacing.
    n_factors : int or None
        Number of pseudo-factors. If None, chosen by IC2 up to ``max_factors``;
        when IC2 finds no factors the fit reports no breaks and a warning.
    max_factors : int
        Also caps the factor counts used to classify breaks.
    min_spacing : int or None
        Minimum regime length ``h``. Defaults to ``max(20, r + 2)``.
    eta : float or None
        Alternative to ``min_spacing``: ``h = ceil(eta * T)``.
    standardize : bool
    classify : bool
        Label each break as singular or rotational after detection.

    Attributes
    ----------
    breakpoints_ : tuple of int
        Last period (1-based) of each regime except the final one.
    n_breaks_, n_factors_, min_spacing_ : int
    pseudo_factors_ : ndarray of shape (T, n_factors_)
    objective_ : float
    rho_hat_ : float
    selection_ : SelectionReport or None
    regime_factor_counts_ : tuple of int or None
    break_types_ : list of BreakTypeReport
    r_full_ : int or None
    clamp_events_ : int
    warnings_ : list of str
    """

    def __init__(self, n_breaks=None, max_breaks=5, n_factors=None, max_factors=12,
                 min_spacing=None, eta=None, standardize=True, classify=True):
        self.n_breaks = n_breaks
        self.max_breaks = max_breaks
        self.n_factors = n_factors
        self.max_factors = max_factors
        self.min_spacing = min_spacing
        self.eta = eta
        self.standardize = standardize
        self.classify = classify

    def fit(self, X, y=None):
        panel = as_panel(X)
        self.n_features_in_ = panel.N
        if self.standardize:
            panel = standardize_panel(panel)
        self.panel_ = panel
        T, N = panel.T, panel.N
        self.warnings_ = []
        r_max = min(self.max_factors, min(N, T) - 1)
        r = self.n_factors if self.n_factors is not None else estimate_num_factors(panel, r_max)
        self.n_factors_ = r
        if self.eta is not None:
            h = spacing_from_fraction(self.eta, T)
        elif self.min_spacing is not None:
            h = int(self.min_spacing)
        else:
            h = max(20, r + 2)
        if h < r + 2:
            raise DataError(f"min_spacing={h} must be at least r + 2 = {r + 2}")
        self.min_spacing_ = h

        if r == 0:
            config, stats = self._fit_without_factors(T, h)
        else:
            pf = extract_pseudo_factors(panel, r)
            stats = segment_stats(pf)
            self.pseudo_factors_ = np.array(pf.g_hat)
            if self.n_breaks is None:
                m_max = min(self.max_breaks, T // h - 1)
                if m_max < 1:
                    raise InfeasibleSpacing(f"T={T} leaves no room for a break with spacing {h}")
                if m_max < self.max_breaks:
                    self._warn(f"max_breaks reduced from {self.max_breaks} to {m_max}: "
                               f"T={T} with spacing {h}")
                self.selection_ = select_num_breaks(stats, pf, m_max, h, N)
                config = self.selection_.config
                self.rho_hat_ = self.selection_.rho_hat
                self.objective_ = self.selection_.objective_per_m[self.selection_.m_hat]
            else:
                self.selection_ = None
                if self.n_breaks == 0:
                    config = BreakConfiguration((), T, h)
                else:
                    config = dp_detect(stats, self.n_breaks, h)
                A, _ = fit_var1(pf)
                self.rho_hat_ = float(np.max(np.abs(np.linalg.eigvals(A))))
                self.objective_ = qml_objective(stats, config)
        self.config_ = config
        self.breakpoints_ = config.breakpoints
        self.n_breaks_ = config.m
        self.clamp_events_ = stats.clamp_events if stats is not None else 0

        self.regime_factor_counts_ = None
        self.break_types_ = []
        self.r_full_ = None
        if self.classify:
            self.r_full_ = estimate_num_factors(panel, r_max)
            try:
                self.regime_factor_counts_ = regime_factor_counts(panel, config, r_max)
                self.break_types_ = classify_all(panel, config, r_max, self.r_full_)
            except RegimeTooShort as exc:
                self._warn(f"classification skipped: {exc}")
            for bt in self.break_types_:
                if not bt.consistent:
                    self._warn(f"break {bt.index}: factor counts violate "
                               "r_full >= r_combined >= max(r_left, r_right)")
        if self.clamp_events_:
            self._warn(f"{self.clamp_events_} eigenvalue(s) clamped in log-determinants")
        return self

    def _fit_without_factors(self, T, h):
        # no common component: the loadings cannot break
        if self.n_breaks:
            raise DataError(f"{self.n_breaks} break(s) requested but IC2 found no common factors")
        self._warn("IC2 found no common factors; reporting no breaks")
        config = BreakConfiguration((), T, h)
        self.pseudo_factors_ = np.empty((T, 0))
        self.rho_hat_ = 0.0
        self.objective_ = 0.0
        if self.n_breaks is None:
            self.selection_ = SelectionReport({0: config}, {0: 0.0}, {0: 0.0}, 0.0, 0,
                                              penalty_per_m={0: 0.0})
        else:
            self.selection_ = None
        return config, None

    def _warn(self, message):
        self.warnings_.append(message)
        warnings.warn(message, RuntimeWarning, stacklevel=3)

    def predict(self, X=None):
        """Regime index (0-based) of every period of the fitted panel."""
        check_is_fitted(self, "breakpoints_")
        T = self.config_.T
        if X is not None and len(X) != T:
            raise DataError(f"predict expects the {T} fitted periods, got {len(X)}")
        return np.searchsorted(np.asarray(self.breakpoints_), np.arange(T), side="right")

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()

    @property
    def break_labels_(self):
        labels = self.panel_.period_labels
        return tuple(labels[k - 1] for k in self.breakpoints_)
