"""End-to-end acceptance checks.

Each check prints exactly one ``PASS``/``FAIL`` line.  Run with
``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import sys

import numpy as np
import pytest

from breakscope import (
    BreakConfiguration,
    BreakLabel,
    BreakSubtype,
    Panel,
    classify_all,
    dp_detect,
    extract_pseudo_factors,
    qml_objective,
    segment_stats,
)
from breakscope.simulate import (
    SimulationSpec,
    detection_rate_experiment,
    make_rng,
    monte_carlo,
    simulate_errors,
    simulate_factors,
    simulate_panel,
)

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from conftest import brute_force, random_orthogonal  # noqa: E402

REPS = 200
CLASSIFY_REPS = 100

# 1: exhaustive-search oracle
DP_PANELS, DP_T, DP_R, DP_M, DP_H = 100, 30, 2, 2, 5
DP_OBJECTIVE_RTOL = 1e-12          # objective equality up to float summation order
# 2: normalisation and rotation invariance
NORM_PANELS, NORM_TOL = 50, 1e-8
ROTATIONS, ROTATION_TOL = 20, 1e-8
# 3: DGP 1.B, N=T=100, known m
B_RMSE_MAX, B_MAE_MAX = 1.0, 0.45
# 4: DGP 1.A, N=T=100
A_B1_RMSE_MAX, A_B0_RMSE_MAX = 0.5, 0.6
# 5: DGP 1.D
D100_RANGE, D300_RANGE, D_GROWTH_MAX = (1.5, 6.0), (1.0, 4.0), 1.20
# 6: DGP 1.E, N=T=300
E_FIRST_RANGE, E_SECOND_MAX = (1.0, 4.5), 0.4
# 7: break-count selection
B_DETECT_MIN, INDEP_DETECT_MIN, INDEP_M0 = 0.95, 0.90, (0, 1, 2, 3, 4)
# 8: classification with true breaks
CLASSIFY_MIN, CLASSIFY_R_MAX = 0.90, 6
# 10: simulation moments at T=20000
MOMENT_T = 20000
AR_VAR_RTOL, CORR_TOL = 0.05, 0.03


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
    if _capture is not None:
        with _capture.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


_capture = None


@pytest.fixture(autouse=True)
def _show_lines(capsys):
    global _capture
    _capture = capsys
    yield
    _capture = None


def _fmt(values):
    return "(" + ", ".join(f"{v:.3f}" for v in values) + ")"


def test_criterion_01_dp_matches_exhaustive_search():
    mismatches, worst = 0, 0.0
    for seed in range(DP_PANELS):
        X = np.random.default_rng(seed).standard_normal((DP_T, 10))
        stats = segment_stats(extract_pseudo_factors(X, DP_R))
        config = dp_detect(stats, DP_M, DP_H)
        best, best_val = brute_force(stats, DP_M, DP_H)
        value = qml_objective(stats, config)
        rel = abs(value - best_val) / max(1.0, abs(best_val))
        worst = max(worst, rel)
        mismatches += config.breakpoints != best or rel > DP_OBJECTIVE_RTOL
    report(1, "DP equals exhaustive enumeration", mismatches == 0,
           f"{DP_PANELS - mismatches}/{DP_PANELS} identical, max objective rel diff {worst:.1e}")


def test_criterion_02_normalization_and_rotation_invariance():
    worst_norm = 0.0
    for seed in range(NORM_PANELS):
        rng = np.random.default_rng(seed)
        T, N = rng.integers(10, 120, size=2)
        r = int(rng.integers(1, min(T, N) + 1))
        G = extract_pseudo_factors(rng.standard_normal((T, N)), r).g_hat
        worst_norm = max(worst_norm, np.max(np.abs(G.T @ G / T - np.eye(r))))

    truth = simulate_panel(SimulationSpec(100, 100, "dgp1b", seed=1))
    G = extract_pseudo_factors(truth.panel, 3).g_hat
    base_stats = segment_stats(G)
    base = dp_detect(base_stats, 2, 10)
    base_val = qml_objective(base_stats, base)
    rng = np.random.default_rng(99)
    worst_obj, same = 0.0, 0
    for _ in range(ROTATIONS):
        rot = segment_stats(G @ random_orthogonal(3, rng))
        config = dp_detect(rot, 2, 10)
        same += config.breakpoints == base.breakpoints
        worst_obj = max(worst_obj, abs(qml_objective(rot, base) - base_val))
    ok = worst_norm < NORM_TOL and worst_obj < ROTATION_TOL and same == ROTATIONS
    report(2, "normalisation and rotation invariance", ok,
           f"max |G'G/T - I| {worst_norm:.1e}, max objective diff {worst_obj:.1e}, "
           f"identical minimisers {same}/{ROTATIONS}")


def test_criterion_03_dgp1b_accuracy():
    t = monte_carlo(SimulationSpec(100, 100, "dgp1b"), REPS)
    ok = all(v <= B_RMSE_MAX for v in t.rmse) and all(v <= B_MAE_MAX for v in t.mae)
    report(3, "DGP 1.B N=T=100 known m", ok,
           f"RMSE {_fmt(t.rmse)} <= {B_RMSE_MAX}, MAE {_fmt(t.mae)} <= {B_MAE_MAX} "
           f"(reference RMSE (0.585, 0.587), MAE (0.238, 0.220))")


def test_criterion_04_dgp1a_accuracy():
    b1 = monte_carlo(SimulationSpec(100, 100, "dgp1a", b=1.0), REPS)
    b0 = monte_carlo(SimulationSpec(100, 100, "dgp1a", b=0.0), REPS)
    ok = all(v <= A_B1_RMSE_MAX for v in b1.rmse) and all(v <= A_B0_RMSE_MAX for v in b0.rmse)
    report(4, "DGP 1.A N=T=100 known m", ok,
           f"b=1 RMSE {_fmt(b1.rmse)} <= {A_B1_RMSE_MAX}, b=0 RMSE {_fmt(b0.rmse)} <= {A_B0_RMSE_MAX} "
           f"(reference (0.148, 0.134) and (0.182, 0.195))")


def test_criterion_05_rotational_breaks_bounded():
    small = monte_carlo(SimulationSpec(100, 100, "dgp1d"), REPS)
    large = monte_carlo(SimulationSpec(300, 300, "dgp1d"), REPS)
    in_small = all(D100_RANGE[0] <= v <= D100_RANGE[1] for v in small.rmse)
    in_large = all(D300_RANGE[0] <= v <= D300_RANGE[1] for v in large.rmse)
    no_growth = all(l <= D_GROWTH_MAX * s for s, l in zip(small.rmse, large.rmse))
    report(5, "DGP 1.D rotational breaks", in_small and in_large and no_growth,
           f"N=T=100 RMSE {_fmt(small.rmse)} in {D100_RANGE}, N=T=300 RMSE {_fmt(large.rmse)} "
           f"in {D300_RANGE}, 300-cell <= {D_GROWTH_MAX} x 100-cell: {no_growth} "
           f"(reference (3.496, 3.109) and (2.215, 2.111))")


def test_criterion_06_mixed_break_types():
    t = monte_carlo(SimulationSpec(300, 300, "dgp1e"), REPS)
    ok = E_FIRST_RANGE[0] <= t.rmse[0] <= E_FIRST_RANGE[1] and t.rmse[1] <= E_SECOND_MAX
    report(6, "DGP 1.E N=T=300 mixed types", ok,
           f"RMSE {_fmt(t.rmse)}: first in {E_FIRST_RANGE}, second <= {E_SECOND_MAX} "
           f"(reference (2.427, 0.100))")


def test_criterion_07_break_count_selection():
    rate_b = detection_rate_experiment(SimulationSpec(100, 100, "dgp1b"), REPS)
    rates = {m0: detection_rate_experiment(SimulationSpec(300, 600, "independent", m0=m0), REPS)
             for m0 in INDEP_M0}
    ok = rate_b >= B_DETECT_MIN and all(v >= INDEP_DETECT_MIN for v in rates.values())
    detail = ", ".join(f"m0={m}: {v:.3f}" for m, v in rates.items())
    report(7, "break-count selection", ok,
           f"DGP 1.B N=T=100 rate {rate_b:.3f} >= {B_DETECT_MIN}; independent regimes "
           f"N=300 T=600 {detail} (each >= {INDEP_DETECT_MIN})")


def _classification_rate(scheme, expected):
    hits = 0
    for rep in range(CLASSIFY_REPS):
        truth = simulate_panel(SimulationSpec(300, 300, scheme, seed=rep))
        config = BreakConfiguration(truth.true_breaks, truth.panel.T)
        got = [(bt.label, bt.subtype if bt.label is BreakLabel.ROTATIONAL else None)
               for bt in classify_all(truth.panel, config, CLASSIFY_R_MAX)]
        hits += got == expected
    return hits / CLASSIFY_REPS


def test_criterion_08_classification():
    S, R = BreakLabel.SINGULAR, BreakLabel.ROTATIONAL
    rates = {
        "DGP 1.B": _classification_rate("dgp1b", [(S, None), (S, None)]),
        "DGP 1.D": _classification_rate("dgp1d", [(R, BreakSubtype.FULL_RANK_ROTATION)] * 2),
        "DGP 1.E": _classification_rate("dgp1e", [(R, BreakSubtype.SINGULAR_ROTATION), (S, None)]),
    }
    ok = all(v >= CLASSIFY_MIN for v in rates.values())
    report(8, "break classification at N=T=300", ok,
           ", ".join(f"{k} {v:.2f}" for k, v in rates.items()) + f" (each >= {CLASSIFY_MIN})")


def _noiseless(Bs, seed=0, T=150, N=80):
    rng = make_rng(seed)
    Lambda = rng.standard_normal((N, 3))
    F = simulate_factors(T, 3, 0.0, rng)
    bounds = np.linspace(0, T, len(Bs) + 1).astype(int)
    X = np.vstack([F[s:e] @ B.T @ Lambda.T for B, s, e in zip(Bs, bounds[:-1], bounds[1:])])
    return Panel(X), BreakConfiguration(tuple(bounds[1:-1]), T)


def test_criterion_09_worked_example_population_labels():
    B1 = np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, 0]])
    B2 = np.array([[1.0, 1, 0], [0, 0, 0], [0, 0, 0]])
    B2_tilde = np.array([[1.0, 0, 0], [1, 0, 0], [0, 0, 0]])
    B3 = np.eye(3)
    case1 = [bt.label.value for bt in classify_all(*_noiseless([B1, B2, B3]), 6)]
    case2 = [bt.label.value for bt in classify_all(*_noiseless([B1, B2_tilde, B3]), 6)]
    ok = case1 == ["Rotational", "Singular"] and case2 == ["Singular", "Singular"]
    report(9, "noiseless rank examples", ok, f"case 1 {case1}, case 2 {case2}")


def _lag1(x):
    x = x - x.mean()
    return (x[1:] @ x[:-1]) / (x @ x)


def test_criterion_10_simulation_moments():
    checks = {}
    F0 = simulate_factors(5000, 3, 0.0, make_rng(10))
    checks["rho=0 var"] = np.max(np.abs(F0.var(axis=0) - 1)) < 0.08
    F = simulate_factors(MOMENT_T, 3, 0.7, make_rng(11))
    target = 1 / (1 - 0.7 ** 2)
    checks["rho=0.7 var"] = np.max(np.abs(F.var(axis=0) / target - 1)) < AR_VAR_RTOL
    checks["rho=0.7 acf"] = max(abs(_lag1(F[:, p]) - 0.7) for p in range(3)) < CORR_TOL
    E = simulate_errors(MOMENT_T, 5, 0.0, 0.3, make_rng(12))
    C = np.corrcoef(E.T)
    checks["beta=0.3 corr"] = max(abs(C[i, i + 1] - 0.3) for i in range(4)) < CORR_TOL
    E = simulate_errors(MOMENT_T, 5, 0.3, 0.0, make_rng(13))
    checks["alpha=0.3 acf"] = max(abs(_lag1(E[:, i]) - 0.3) for i in range(5)) < CORR_TOL
    E = simulate_errors(MOMENT_T, 5, 0.0, 0.0, make_rng(14))
    checks["iid field"] = (np.max(np.abs(E.var(axis=0) - 1)) < 0.05
                           and np.max(np.abs(np.corrcoef(E.T) - np.eye(5))) < CORR_TOL)
    failed = [k for k, v in checks.items() if not v]
    report(10, "simulation moments at T=20000", not failed,
           f"{len(checks) - len(failed)}/{len(checks)} moment checks within tolerance"
           + (f"; failed: {failed}" if failed else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
