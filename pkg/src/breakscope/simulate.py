"""Simulation designs with breaks in factor loadings, and Monte Carlo metrics.

Every panel is ``X = G Lambda' + E`` where, inside regime ``j``, the
pseudo-factors are ``G_j = F_j B_j'``.  Factors follow independent
AR(1) processes, and idiosyncratic errors follow an AR(1) in time with
Toeplitz cross-sectional correlation ``Omega_ij = beta^|i-j|``.

Randomness comes from numpy's counter-based ``Philox`` bit generator.
Replication ``i`` of a run seeded with ``s`` uses the stream keyed by
``s ^ i``, so serial and parallel runs produce the same numbers.  Streams
are reproducible bit-for-bit for a fixed numpy version.
"""

import functools
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.signal

from .exceptions import DataError, SchemeArityMismatch
from .factors import Panel, estimate_num_factors, extract_pseudo_factors, segment_stats
from .search import dp_detect, select_num_breaks

SCHEMES = ("dgp1a", "dgp1b", "dgp1c", "dgp1d", "dgp1e", "independent")
_DGP1 = SCHEMES[:5]
#: Environment variable overriding the number of parallel Monte Carlo workers.
THREADS_ENV = "BREAKSCOPE_NUM_THREADS"


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SimulationSpec:
    """One simulation design.

    ``scheme`` is one of ``dgp1a`` (independent regime loadings with means
    scaled by ``b``), ``dgp1b``/``dgp1c``/``dgp1d``/``dgp1e`` (fixed
    selector matrices applied to common loadings) or ``independent``
    (``m0 + 1`` regimes with independent loadings on ``r0`` factors).
    The ``dgp1*`` schemes have two breaks and three factors.
    """

    N: int
    T: int
    scheme: str = "dgp1b"
    m0: int = 2
    break_fractions: tuple = None
    r0: int = None
    rho: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    b: float = 1.0
    seed: int = 0
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DataError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.scheme in _DGP1 and self.m0 != 2:
            raise SchemeArityMismatch(f"{self.scheme} has exactly 2 breaks, got m0={self.m0}")
        if self.m0 < 0:
            raise DataError("m0 must be nonnegative")
        if self.r0 is None:
            object.__setattr__(self, "r0", 3 if self.scheme in _DGP1 else 2)
        if self.scheme in _DGP1 and self.r0 != 3 and self.scheme != "dgp1a":
            raise SchemeArityMismatch(f"{self.scheme} is defined for r0=3")
        if self.break_fractions is None:
            fr = (0.3, 0.7) if self.m0 == 2 else tuple((j + 1) / (self.m0 + 1) for j in range(self.m0))
            object.__setattr__(self, "break_fractions", fr)
        fr = tuple(float(x) for x in self.break_fractions)
        object.__setattr__(self, "break_fractions", fr)
        if len(fr) != self.m0 or any(not 0 < x < 1 for x in fr) or list(fr) != sorted(fr):
            raise DataError(f"break_fractions {fr} must be {self.m0} increasing values in (0, 1)")
        if not (abs(self.rho) < 1 and abs(self.alpha) < 1 and 0 <= self.beta < 1):
            raise DataError("need |rho| < 1, |alpha| < 1 and 0 <= beta < 1")
        gaps = np.diff((0,) + self.true_breaks + (self.T,))
        if np.any(gaps < self.r_pseudo + 2):
            raise DataError(f"regimes {tuple(gaps)} shorter than r + 2 = {self.r_pseudo + 2}")

    @property
    def true_breaks(self):
        return tuple(int(math.floor(x * self.T)) for x in self.break_fractions)

    @property
    def r_pseudo(self):
        if self.scheme in ("dgp1a", "independent"):
            return (self.m0 + 1) * self.r0
        return 3


@dataclass(frozen=True, eq=False)
class SimulatedTruth:
    """A simulated panel with the quantities that generated it.

    ``F`` is the (T, r) factor path in the pseudo-factor coordinates, so
    regime ``j`` of the common component is ``F_j B_j' Lambda'``.
    """

    panel: Panel
    true_breaks: tuple
    r_pseudo: int
    B_matrices: tuple
    Lambda: np.ndarray
    F: np.ndarray
    common: np.ndarray
    errors: np.ndarray
    extras: dict = field(default_factory=dict)


def simulate_factors(T, p, rho, rng):
    """T x p independent stationary AR(1) paths with unit-variance innovations."""
    if not abs(rho) < 1:
        raise DataError(f"|rho| must be < 1, got {rho}")
    u = rng.standard_normal((T, p))
    u[0] /= np.sqrt(1.0 - rho ** 2)
    if rho == 0:
        return u
    return scipy.signal.lfilter([1.0], [1.0, -rho], u, axis=0)


@functools.lru_cache(maxsize=16)
def _toeplitz_factor(N, beta):
    omega = scipy.linalg.toeplitz(beta ** np.arange(N))
    L = np.linalg.cholesky(omega)
    L.setflags(write=False)
    return L


def simulate_errors(T, N, alpha, beta, rng):
    """T x N idiosyncratic errors: AR(1) in time, ``beta^|i-j|`` correlation across series."""
    if not (abs(alpha) < 1 and 0 <= beta < 1):
        raise DataError("need |alpha| < 1 and 0 <= beta < 1")
    v = rng.standard_normal((T, N))
    if beta != 0:
        v = v @ _toeplitz_factor(N, float(beta)).T
    v[0] /= np.sqrt(1.0 - alpha ** 2)
    if alpha == 0:
        return v
    return scipy.signal.lfilter([1.0], [1.0, -alpha], v, axis=0)


def _block_selectors(n_blocks, size):
    Bs = []
    for j in range(n_blocks):
        B = np.zeros((n_blocks * size, n_blocks * size))
        B[j * size:(j + 1) * size, j * size:(j + 1) * size] = np.eye(size)
        Bs.append(B)
    return Bs


def build_loading_scheme(spec, rng):
    """Draw loadings for ``spec`` and return ``(Lambda, B_matrices, r_pseudo, extras)``."""
    N, r0 = spec.N, spec.r0
    if spec.scheme in _DGP1 and spec.m0 != 2:
        raise SchemeArityMismatch(f"{spec.scheme} needs m0=2")
    extras = {}
    if spec.scheme in ("dgp1a", "independent"):
        n_blocks = spec.m0 + 1
        if spec.scheme == "dgp1a":
            means = [0.5 * spec.b, spec.b, 1.5 * spec.b]
        else:
            means = [0.0] * n_blocks
        blocks = [mu + rng.standard_normal((N, r0)) / np.sqrt(r0) for mu in means]
        Lambda = np.hstack(blocks)
        Bs = _block_selectors(n_blocks, r0)
        return Lambda, tuple(Bs), n_blocks * r0, extras

    r = 3
    Lambda = rng.standard_normal((N, r)) / np.sqrt(r)
    I3 = np.eye(3)
    if spec.scheme == "dgp1b":
        Bs = [np.diag([1.0, 1, 0]), np.diag([1.0, 0, 1]), np.diag([0.0, 1, 1])]
    elif spec.scheme == "dgp1c":
        Bs = [I3, np.diag([1.0, 1, 0]), np.diag([0.0, 0, 1])]
    elif spec.scheme == "dgp1d":
        Bs = [I3, 2 * I3, I3]
    else:
        x, y, z = rng.standard_normal(3)
        R = np.array([[2.0, x, y], [0.0, 2.0, z], [0.0, 0.0, 1.0]])
        B1 = np.diag([1.0, 1, 0])
        Bs = [B1, np.array([[2.0, x, y], [0.0, 2.0, z], [0.0, 0.0, 0.0]]), np.diag([0.0, 0, 1])]
        extras["R"] = R
    return Lambda, tuple(Bs), r, extras


def simulate_panel(spec):
    """Generate one panel from ``spec`` using the stream keyed by ``spec.seed``."""
    rng = make_rng(spec.seed)
    Lambda, Bs, r, extras = build_loading_scheme(spec, rng)
    F0 = simulate_factors(spec.T, spec.r0, spec.rho, rng)
    F = np.tile(F0, r // spec.r0)
    bounds = (0,) + spec.true_breaks + (spec.T,)
    G = np.empty((spec.T, r))
    for j, B in enumerate(Bs):
        s, e = bounds[j], bounds[j + 1]
        G[s:e] = F[s:e] @ B.T
    common = G @ Lambda.T
    if spec.noise_scale == 0:
        E = np.zeros_like(common)
    else:
        E = spec.noise_scale * simulate_errors(spec.T, spec.N, spec.alpha, spec.beta, rng)
    extras["G"] = G
    return SimulatedTruth(Panel(common + E), spec.true_breaks, r, Bs, Lambda, F,
                          common, E, extras)


def default_min_spacing(T, r):
    """Minimum segment length used by the simulation runs: ``max(r + 2, ceil(T / 10))``."""
    return max(r + 2, int(math.ceil(0.1 * T)))


@dataclass(frozen=True)
class MetricsTable:
    """Breakpoint accuracy over Monte Carlo replications.

    ``rmse`` and ``mae`` have one entry per true break.  With break-count
    selection they are computed over the replications where the count was
    recovered; ``detection_rate`` is the share of those replications.
    """

    rmse: tuple
    mae: tuple
    detection_rate: float
    reps_used: int
    spec: SimulationSpec
    estimates: tuple = ()
    selected_m: tuple = ()

    def rows(self, reps=None):
        base = {"scheme": self.spec.scheme, "N": self.spec.N, "T": self.spec.T,
                "rho": self.spec.rho, "alpha": self.spec.alpha, "beta": self.spec.beta,
                "b": self.spec.b, "reps": reps if reps is not None else len(self.selected_m)}
        if not self.rmse:
            return [dict(base, breakpoint_index=None, rmse=None, mae=None,
                         detection_rate=self.detection_rate)]
        return [dict(base, breakpoint_index=j + 1, rmse=self.rmse[j], mae=self.mae[j],
                     detection_rate=self.detection_rate) for j in range(len(self.rmse))]


def _replicate(spec, rep, know_m, m_max, h, estimate_r, r_max):
    sp = replace(spec, seed=spec.seed ^ rep)
    truth = simulate_panel(sp)
    r = estimate_num_factors(truth.panel, r_max) if estimate_r else truth.r_pseudo
    if r == 0:
        # no common component detected: nothing to segment
        return 0, None
    g = extract_pseudo_factors(truth.panel, r)
    stats = segment_stats(g)
    hh = default_min_spacing(spec.T, r) if h is None else h
    if know_m:
        if spec.m0 == 0:
            return 0, ()
        return spec.m0, dp_detect(stats, spec.m0, hh).breakpoints
    report = select_num_breaks(stats, g, m_max, hh, spec.N)
    return report.m_hat, report.config.breakpoints


def _n_jobs(n_jobs):
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV, "1"))
    return max(1, int(n_jobs))


def monte_carlo(spec, reps, know_m=True, m_max=5, h=None, estimate_r=False, r_max=12,
                n_jobs=None):
    """Run ``reps`` replications of ``spec`` and summarise breakpoint errors.

    Parameters
    ----------
    spec : SimulationSpec
    reps : int
    know_m : bool
        Locate exactly ``spec.m0`` breaks; otherwise choose the count with
        the information criterion over ``0..m_max``.
    h : int, optional
        Minimum spacing; defaults to :func:`default_min_spacing`.
    estimate_r : bool
        Estimate the number of pseudo-factors with IC2 (``r_max``) in each
        replication instead of using the true count.
    n_jobs : int, optional
        Worker processes; defaults to ``$BREAKSCOPE_NUM_THREADS`` or 1.
        Results do not depend on it.
    """
    if reps < 1:
        raise DataError("reps must be >= 1")
    args = (know_m, m_max, h, estimate_r, r_max)
    jobs = _n_jobs(n_jobs)
    if jobs == 1:
        results = [_replicate(spec, i, *args) for i in range(reps)]
    else:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=jobs)(delayed(_replicate)(spec, i, *args) for i in range(reps))

    truth = np.asarray(spec.true_breaks, dtype=float)
    hits = [np.asarray(bps, dtype=float) for m, bps in results if m == spec.m0]
    if spec.m0 and hits:
        err = np.vstack(hits) - truth
        rmse = tuple(float(v) for v in np.sqrt(np.mean(err ** 2, axis=0)))
        mae = tuple(float(v) for v in np.mean(np.abs(err), axis=0))
    elif spec.m0:
        rmse = mae = (float("nan"),) * spec.m0
    else:
        rmse = mae = ()
    rate = None if know_m else len(hits) / reps
    return MetricsTable(rmse, mae, rate, len(hits), spec,
                        estimates=tuple(bps for _, bps in results),
                        selected_m=tuple(m for m, _ in results))


def detection_rate_experiment(spec, reps, m_max=5, h=None, estimate_r=None, n_jobs=None):
    """Share of replications in which the information criterion picks ``spec.m0``.

    The number of pseudo-factors is estimated per replication (IC2 with
    ``r_max = 12``) for the ``independent`` scheme and taken as known for
    the ``dgp1*`` schemes, unless ``estimate_r`` says otherwise.
    """
    if estimate_r is None:
        estimate_r = spec.scheme == "independent"
    table = monte_carlo(spec, reps, know_m=False, m_max=m_max, h=h,
                        estimate_r=estimate_r, n_jobs=n_jobs)
    return table.detection_rate
