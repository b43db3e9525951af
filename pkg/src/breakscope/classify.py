"""Singular versus rotational classification of detected breaks.

A break between regimes ``j`` and ``j + 1`` is rotational when the two
regimes and their union all need the same number of factors; otherwise it
is singular.  Factor counts are estimated with Bai and Ng's IC2.
"""

import enum
from dataclasses import dataclass

from .exceptions import DataError, RegimeTooShort
from .factors import as_panel, estimate_num_factors


class BreakLabel(str, enum.Enum):
    SINGULAR = "Singular"
    ROTATIONAL = "Rotational"


class BreakSubtype(str, enum.Enum):
    """Finer description of a break.

    This taxonomy is a convenience of this package: rotational breaks are
    full-rank or singular depending on whether the pooled regimes need all
    pseudo-factors, and singular breaks split into independent loadings,
    disappearing factors, emerging factors, or a general shift of the
    loading space.
    """

    INDEPENDENT_LOADINGS = "IndependentLoadings"
    FACTORS_DISAPPEAR = "FactorsDisappear"
    FACTORS_EMERGE = "FactorsEmerge"
    SPACE_SHIFT = "SpaceShift"
    FULL_RANK_ROTATION = "FullRankRotation"
    SINGULAR_ROTATION = "SingularRotation"


def break_label(r_left, r_right, r_combined):
    if r_left == r_right == r_combined:
        return BreakLabel.ROTATIONAL
    return BreakLabel.SINGULAR


def break_subtype(r_left, r_right, r_combined, r_full):
    if break_label(r_left, r_right, r_combined) is BreakLabel.ROTATIONAL:
        if r_combined < r_full:
            return BreakSubtype.SINGULAR_ROTATION
        return BreakSubtype.FULL_RANK_ROTATION
    if r_combined == r_left > r_right:
        return BreakSubtype.FACTORS_DISAPPEAR
    if r_combined == r_right > r_left:
        return BreakSubtype.FACTORS_EMERGE
    if r_combined == r_left + r_right:
        return BreakSubtype.INDEPENDENT_LOADINGS
    return BreakSubtype.SPACE_SHIFT


@dataclass(frozen=True)
class BreakTypeReport:
    """Factor counts around break ``index`` (1-based) and the resulting label.

    ``consistent`` is False when the estimates contradict the population
    ordering ``r_full >= r_combined >= max(r_left, r_right)``; the label is
    still the verbatim rule applied to the estimates.
    """

    index: int
    r_left: int
    r_right: int
    r_combined: int
    r_full: int
    label: BreakLabel
    subtype: BreakSubtype
    consistent: bool = True

    def to_dict(self):
        return {"index": self.index, "r_left": self.r_left, "r_right": self.r_right,
                "r_combined": self.r_combined, "r_full": self.r_full,
                "label": self.label.value, "subtype": self.subtype.value,
                "consistent": self.consistent}


def _regime_bounds(config, T):
    if config.T != T:
        raise DataError(f"configuration is for T={config.T}, panel has T={T}")
    return config.bounds


def _count(panel, s, e, r_max):
    if e - s < r_max + 2:
        raise RegimeTooShort(f"regime ({s}, {e}] has {e - s} periods; need >= r_max + 2 = {r_max + 2}")
    return estimate_num_factors(panel.rows(s, e), r_max)


def regime_factor_counts(panel, config, r_max):
    """IC2 factor count of every regime delimited by ``config``."""
    panel = as_panel(panel)
    b = _regime_bounds(config, panel.T)
    return tuple(_count(panel, s, e, r_max) for s, e in zip(b[:-1], b[1:]))


def classify_break(panel, config, j, r_max, r_full):
    """Classify break ``j`` (1-based) of ``config``."""
    panel = as_panel(panel)
    b = _regime_bounds(config, panel.T)
    if not 1 <= j <= config.m:
        raise DataError(f"break index {j} outside 1..{config.m}")
    lo, mid, hi = b[j - 1], b[j], b[j + 1]
    r_left = _count(panel, lo, mid, r_max)
    r_right = _count(panel, mid, hi, r_max)
    r_combined = _count(panel, lo, hi, r_max)
    consistent = r_full >= r_combined >= max(r_left, r_right)
    return BreakTypeReport(j, r_left, r_right, r_combined, r_full,
                           break_label(r_left, r_right, r_combined),
                           break_subtype(r_left, r_right, r_combined, r_full),
                           consistent)


def classify_all(panel, config, r_max, r_full=None):
    """Classify every break; ``r_full`` is estimated on the whole panel if not given."""
    panel = as_panel(panel)
    if config.m == 0:
        return []
    if r_full is None:
        r_full = estimate_num_factors(panel, r_max)
    return [classify_break(panel, config, j, r_max, r_full) for j in range(1, config.m + 1)]
