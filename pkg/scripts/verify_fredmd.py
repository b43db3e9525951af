"""Manual check of the FRED-MD breakpoint study.

Needs a panel that has already been cleaned: missing values filled,
series transformed to stationarity and outliers replaced (T=785, N=126).
The file has periods as rows and a leading ``sasdate`` (or ``date``) column.

    python scripts/verify_fredmd.py fredmd_stationary.csv

Exits 0 when the defaults reproduce the expected outcome and 1 otherwise.
"""

import argparse
import re
import sys
import warnings

from breakscope import QMLBreakDetector
from breakscope.io import load_csv

EXPECTED_DATES = [(1969, 1), (1983, 1), (2008, 6), (2010, 3), (2020, 2)]
EXPECTED_R_FULL = 7
EXPECTED_REGIME_COUNTS = (2, 5, 7, 3, 4, 7)


def year_month(label):
    """Parse ``M/D/YYYY``, ``YYYY-MM[-DD]``, ``YYYY:MM`` or ``YYYYMmm`` labels."""
    s = str(label).strip()
    m = re.fullmatch(r"(\d{1,2})/\d{1,2}/(\d{4})", s)
    if m:
        return int(m.group(2)), int(m.group(1))
    m = re.fullmatch(r"(\d{4})[-:M/](\d{1,2})(?:[-/]\d{1,2})?", s)
    if m:
        return int(m.group(1)), int(m.group(2))
    raise ValueError(f"cannot read a year and month from {label!r}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--date-column", default="auto")
    ap.add_argument("--convention", choices=("last", "first"), default="last",
                    help="compare the last period of the old regime (default) "
                         "or the first period of the new one")
    args = ap.parse_args(argv)

    panel = load_csv(args.path, date_column=args.date_column)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        det = QMLBreakDetector().fit(panel)

    labels = panel.period_labels
    offset = 0 if args.convention == "last" else 1
    dates = [year_month(labels[k - 1 + offset]) for k in det.breakpoints_]
    checks = {
        "break dates": (dates, EXPECTED_DATES),
        "full-sample factors": (det.r_full_, EXPECTED_R_FULL),
        "regime factor counts": (det.regime_factor_counts_, EXPECTED_REGIME_COUNTS),
    }
    print(f"T={panel.T} N={panel.N} r={det.n_factors_} m_hat={det.n_breaks_}")
    ok = True
    for name, (got, want) in checks.items():
        good = got == want
        ok &= good
        print(f"{'PASS' if good else 'FAIL'} {name}: got {got}, expected {want}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
