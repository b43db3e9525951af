"""CSV panel ingestion and JSON/CSV report emission."""

import csv
import json
import math
import warnings
from importlib import resources

import numpy as np

from .exceptions import DataError, MissingData, ParseError, RaggedRows
from .factors import Panel

REPORT_SCHEMA = "breakscope-report/1"
METRICS_COLUMNS = ("scheme", "N", "T", "rho", "alpha", "beta", "b", "reps",
                   "breakpoint_index", "rmse", "mae", "detection_rate")
_MISSING = {"", "na", "nan", "n/a", "null", "none"}
DATE_HEADERS = {"", "date", "period", "time", "sasdate"}


class ImputationWarning(UserWarning):
    pass


def _resolve_date_column(date_column, header, width):
    if date_column == "auto":
        if header and header[0].lower() in DATE_HEADERS:
            return 0
        return None
    if date_column is None:
        return None
    if isinstance(date_column, int) or (isinstance(date_column, str) and date_column.isdigit()):
        idx = int(date_column)
    elif header is not None and date_column in header:
        idx = header.index(date_column)
    else:
        raise DataError(f"date column {date_column!r} not found")
    if not 0 <= idx < width:
        raise DataError(f"date column index {idx} out of range")
    return idx


def load_csv(path, has_header=True, date_column="auto", impute_mean=False, transpose=False):
    """Read a comma-separated panel with periods as rows and series as columns.

    Parameters
    ----------
    path : str or path-like
    has_header : bool
        First row holds series names.
    date_column : int, str or None
        Index or header name of a column of period labels. The default
        ``"auto"`` uses the first column when its header is blank or one of
        ``date``, ``period``, ``time``, ``sasdate`` (case-insensitive); None
        treats every column as a series.
    impute_mean : bool
        Fill missing cells with the column mean of the present values and
        emit an :class:`ImputationWarning` listing them. Otherwise missing
        cells raise :class:`MissingData`.
    transpose : bool
        The file stores series as rows instead.

    Returns
    -------
    Panel
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    width = len(rows[0])
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRows(f"row {i + 1 + has_header} has {len(row)} fields, expected {width}")
    dcol = _resolve_date_column(date_column, header, width)
    cols = [j for j in range(width) if j != dcol]

    values = np.empty((len(body), len(cols)))
    missing = []
    for i, row in enumerate(body):
        for jj, j in enumerate(cols):
            cell = row[j].strip()
            if cell.lower() in _MISSING:
                values[i, jj] = np.nan
                missing.append((i, jj))
                continue
            try:
                values[i, jj] = float(cell)
            except ValueError:
                raise ParseError(i + 1 + has_header, j + 1, cell) from None
            if not math.isfinite(values[i, jj]):
                raise ParseError(i + 1 + has_header, j + 1, cell)
    names = [header[j] for j in cols] if header else None
    labels = [row[dcol].strip() for row in body] if dcol is not None else None

    if transpose:
        values = values.T
        missing = [(j, i) for i, j in missing]
        names, labels = labels, names
    if missing:
        if not impute_mean:
            raise MissingData(len(missing), missing)
        means = np.nanmean(values, axis=0)
        if np.any(np.isnan(means)):
            raise DataError("a column has no observed values; cannot impute")
        for i, j in missing:
            values[i, j] = means[j]
        warnings.warn(f"imputed {len(missing)} missing cell(s) with column means: "
                      + ", ".join(f"(row {i + 1}, col {j + 1})" for i, j in missing),
                      ImputationWarning, stacklevel=2)
    return Panel(values, names, labels)


def write_csv(panel, path, date_column=True):
    """Write a panel so that :func:`load_csv` reads it back exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow((["period"] if date_column else []) + list(panel.series_names))
        for label, row in zip(panel.period_labels, panel.values):
            w.writerow(([label] if date_column else []) + [repr(float(v)) for v in row])


def _label(v):
    return str(v)


def detection_report(detector):
    """JSON-ready dict describing a fitted :class:`~breakscope.QMLBreakDetector`."""
    labels = detector.panel_.period_labels
    T = detector.config_.T
    sel = detector.selection_
    intkeys = lambda d: {str(k): float(v) for k, v in d.items()}  # noqa: E731
    return {
        "schema": REPORT_SCHEMA,
        "T": T,
        "N": detector.panel_.N,
        "breakpoints": [
            {"index": j + 1, "period": k, "label": _label(labels[k - 1]),
             "next_label": _label(labels[k]) if k < T else None}
            for j, k in enumerate(detector.breakpoints_)
        ],
        "m_hat": detector.n_breaks_,
        "m_selected": sel is not None,
        "n_factors": detector.n_factors_,
        "r_full": detector.r_full_ if detector.r_full_ is not None else detector.n_factors_,
        "min_spacing": detector.min_spacing_,
        "objective": float(detector.objective_),
        "objective_per_m": intkeys(sel.objective_per_m) if sel else {},
        "ic_per_m": intkeys(sel.ic_per_m) if sel else {},
        "penalty_per_m": intkeys(sel.penalty_per_m) if sel else {},
        "rho_hat": float(detector.rho_hat_),
        "regime_factor_counts": (list(detector.regime_factor_counts_)
                                 if detector.regime_factor_counts_ is not None else None),
        "break_types": [bt.to_dict() for bt in detector.break_types_],
        "diagnostics": {"clamp_events": int(detector.clamp_events_),
                        "warnings": list(detector.warnings_)},
    }


def load_report_schema():
    with resources.files("breakscope").joinpath("schemas/report.schema.json").open() as fh:
        return json.load(fh)


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _csv_value(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_metrics_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _csv_value(row[k]) for k in METRICS_COLUMNS})


def metrics_json(tables, reps):
    out = []
    for t in tables:
        s = t.spec
        out.append({
            "spec": {"scheme": s.scheme, "N": s.N, "T": s.T, "m0": s.m0, "r0": s.r0,
                     "break_fractions": list(s.break_fractions), "rho": s.rho,
                     "alpha": s.alpha, "beta": s.beta, "b": s.b, "seed": s.seed},
            "reps": reps,
            "reps_used": t.reps_used,
            "true_breaks": list(s.true_breaks),
            "rmse": [None if math.isnan(v) else v for v in t.rmse],
            "mae": [None if math.isnan(v) else v for v in t.mae],
            "detection_rate": t.detection_rate,
        })
    return {"schema": "breakscope-metrics/1", "tables": out}
