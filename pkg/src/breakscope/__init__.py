"""Multiple structural breaks in the factor loadings of large panels.

Breaks are located by minimising a quasi-likelihood objective built from
segment covariances of full-sample principal components, the number of
breaks is chosen by an information criterion, and each break is labelled
singular or rotational from regime factor counts.
"""

from .classify import (
    BreakLabel,
    BreakSubtype,
    BreakTypeReport,
    classify_all,
    classify_break,
    regime_factor_counts,
)
from .estimator import PseudoFactorPCA, QMLBreakDetector
from .exceptions import BreakscopeError, DataError, NumericalError
from .factors import (
    Panel,
    PseudoFactorSet,
    SegmentStats,
    estimate_num_factors,
    extract_pseudo_factors,
    segment_covariance,
    segment_logdet,
    segment_stats,
    standardize,
)
from .io import detection_report, load_csv, write_csv
from .search import (
    BreakConfiguration,
    SelectionReport,
    dp_detect,
    fit_var1_radius,
    information_criterion,
    qml_objective,
    select_num_breaks,
)
from .simulate import (
    MetricsTable,
    SimulatedTruth,
    SimulationSpec,
    detection_rate_experiment,
    monte_carlo,
    simulate_panel,
)

__version__ = "0.1.0"
