"""Dimension estimates from samples or exact mass queries.

Every estimator produces a :class:`ScalingSeries` of (r, value) pairs and
fits a log-log slope over a window of scales.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .errors import (
    DegenerateBall,
    EmptyCorrelation,
    InvalidParameters,
    NonPositiveValue,
    TooFewPoints,
)
from .measures import (
    AtomFamily,
    AtomList,
    GeometricBlocks,
    PiecewiseDensity,
    SymbolicMeasure,
    ball_mass,
)

DEFAULT_STEPS = 24
MAX_SAMPLES = 100_000


@dataclass(frozen=True)
class ScalingSeries:
    r: tuple[float, ...]
    values: tuple[float, ...]
    method: str = ""
    delta: float | None = None
    n_samples: int | None = None
    seed: int | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.r) != len(self.values):
            raise ValueError("r and values differ in length")
        if any(b >= a for a, b in zip(self.r, self.r[1:])):
            raise ValueError("r must be strictly decreasing")

    def window(self, lo: float, hi: float) -> "ScalingSeries":
        keep = [i for i, r in enumerate(self.r) if _in_window(r, lo, hi)]
        return ScalingSeries(
            tuple(self.r[i] for i in keep), tuple(self.values[i] for i in keep),
            self.method, self.delta, self.n_samples, self.seed, self.metadata,
        )


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    stderr: float
    window: tuple[float, float]
    series: ScalingSeries

    def to_dict(self) -> dict:
        s = self.series
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "window": list(self.window),
            "method": s.method,
            "delta": s.delta,
            "n_samples": s.n_samples,
            "seed": s.seed,
            "metadata": s.metadata,
            "series": [[r, v] for r, v in zip(s.r, s.values)],
        }


def _in_window(r, lo, hi):
    return lo * (1 - 1e-9) <= r <= hi * (1 + 1e-9)


def workers() -> int:
    """Worker cap from DIMLAB_THREADS (0 or unset means one per CPU)."""
    try:
        n = int(os.environ.get("DIMLAB_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _map(fn, items):
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


# -- schedules and fitting --------------------------------------------------


def default_schedule(r_min: float, r_max: float, steps: int = DEFAULT_STEPS) -> tuple[float, ...]:
    """Log-spaced scales from r_max down to r_min."""
    if not 0 < r_min < r_max:
        raise InvalidParameters("need 0 < r_min < r_max")
    if steps < 3:
        raise InvalidParameters("need at least 3 scales")
    return tuple(float(r) for r in np.logspace(math.log10(r_max), math.log10(r_min), steps))


def default_window(rs) -> tuple[float, float]:
    """Central half of the schedule: a quarter of the scales dropped at each end."""
    rs = sorted(rs)
    k = len(rs)
    drop = k // 4
    lo, hi = rs[drop], rs[k - 1 - drop]
    return lo, hi


def _check_schedule(rs):
    rs = tuple(float(r) for r in rs)
    if not rs:
        raise InvalidParameters("empty r schedule")
    if any(r <= 0 for r in rs):
        raise InvalidParameters("scales must be positive")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise InvalidParameters("r schedule must be strictly decreasing")
    return rs


def loglog_fit(series: ScalingSeries, window=None) -> tuple[float, float]:
    """OLS slope of log(value) on log(r) and its standard error."""
    if window is not None:
        series = series.window(*window)
    if len(series.r) < 3:
        raise TooFewPoints(f"{len(series.r)} points in the fit window, need 3")
    v = np.asarray(series.values, dtype=float)
    if np.any(~(v > 0)):
        raise NonPositiveValue("log-log fit needs positive values")
    x = np.log(np.asarray(series.r, dtype=float))
    y = np.log(v)
    if np.all(y == y[0]):
        return 0.0, 0.0
    fit = stats.linregress(x, y)
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return float(fit.slope), stderr


def _estimate(series: ScalingSeries, window, sign: float = 1.0) -> DimensionEstimate:
    slope, err = loglog_fit(series, window)
    return DimensionEstimate(sign * slope if slope else 0.0, err, tuple(window), series)


# -- box counting -----------------------------------------------------------


def _family_boxes(c: AtomFamily, r: float):
    """Box indices and masses for an atom family, tail boxes via exact CDF."""
    if c.finite and c.n_max - c.n_min < 200_000:
        idx = np.arange(c.n_min, c.n_max + 1, dtype=float)
        return np.floor(c.location(idx) / r), c.weight(idx)
    # beyond index i_cut consecutive atoms are closer than r, so every box
    # below x_cut is reached by the family and masses come from the CDF
    i_cut = max(c.n_min, math.ceil((c.p / r) ** (1.0 / (c.p + 1.0))) + 1)
    if c.finite:
        i_cut = min(i_cut, c.n_max)
    x_cut = float(c.location(i_cut))
    k_cut = int(math.floor(x_cut / r))
    edges = np.arange(k_cut + 2, dtype=float) * r
    tail = np.diff(c.cdf_left(edges))
    head_idx = np.arange(c.n_min, i_cut + 1, dtype=float)
    head_x = c.location(head_idx)
    above = head_x >= (k_cut + 1) * r
    ks = np.concatenate([np.arange(k_cut + 1, dtype=float), np.floor(head_x[above] / r)])
    ms = np.concatenate([tail, c.weight(head_idx[above])])
    return ks, ms


def _cdf_boxes(c, r: float):
    lo, hi = c.support_bounds
    k0, k1 = int(math.floor(lo / r)), int(math.floor(hi / r))
    ks = np.arange(k0, k1 + 1, dtype=float)
    edges = np.arange(k0, k1 + 2, dtype=float) * r
    m = np.diff(c.cdf_left(edges))
    # the right endpoint of the support belongs to its own box
    m[-1] += float(c.cdf(np.asarray([hi]))[0] - c.cdf_left(np.asarray([hi]))[0])
    return ks, m


def box_masses(mu: SymbolicMeasure, r: float) -> np.ndarray:
    """Masses of the occupied boxes [k r, (k+1) r)."""
    if not r > 0:
        raise InvalidParameters("box side must be positive")
    ks, ms = [], []
    for c in mu.components:
        if isinstance(c, AtomList):
            k, m = np.floor(np.asarray(c.locations) / r), np.asarray(c.weights)
        elif isinstance(c, AtomFamily):
            k, m = _family_boxes(c, r)
        else:
            k, m = _cdf_boxes(c, r)
        ks.append(k)
        ms.append(m)
    k = np.concatenate(ks)
    m = np.concatenate(ms)
    uniq, inv = np.unique(k, return_inverse=True)
    out = np.zeros(len(uniq))
    np.add.at(out, inv, m)
    return out[out > 0]


def min_box_count(mu: SymbolicMeasure, r: float, delta: float = 0.0) -> int:
    """Fewest grid boxes carrying mass at least (1 - delta) * total."""
    if not 0 <= delta < 1:
        raise InvalidParameters("delta must lie in [0, 1)")
    m = box_masses(mu, r)
    if delta == 0:
        return int(len(m))
    m = np.sort(m)[::-1]
    need = (1 - delta) * float(np.sum(m))
    cum = np.cumsum(m)
    return int(np.searchsorted(cum, need * (1 - 1e-12)) + 1)


def box_count_exact(mu: SymbolicMeasure) -> bool:
    """Whether delta = 0 counts are exact for this measure."""
    return all(
        isinstance(c, (AtomList, AtomFamily, PiecewiseDensity)) or (isinstance(c, GeometricBlocks) and c.finite)
        for c in mu.components
    )


def box_dimension_estimate(mu: SymbolicMeasure, deltas, rs, window=None) -> dict[float, DimensionEstimate]:
    """Slope of log N_delta(r) against log(1/r), one estimate per delta."""
    rs = _check_schedule(rs)
    if not deltas:
        raise InvalidParameters("empty delta schedule")
    window = window or default_window(rs)
    out = {}
    for d in deltas:
        if d == 0 and not box_count_exact(mu):
            continue
        counts = _map(lambda r, d=d: min_box_count(mu, r, d), rs)
        series = ScalingSeries(rs, tuple(float(n) for n in counts), "box", float(d))
        out[d] = _estimate(series, window, sign=-1.0)
    return out


# -- local dimension --------------------------------------------------------


@dataclass(frozen=True)
class LocalProfile:
    estimates: dict
    excluded: int


def local_dimension_profile(mu: SymbolicMeasure, samples, rs, quantiles=(0.01, 0.99), window=None) -> LocalProfile:
    """Quantiles of log mu(B(x, r)) / log r across samples, fitted over r.

    A low quantile of the local exponent corresponds to a high quantile of
    the ball mass, so quantile q is read from the (1 - q) mass quantile.
    """
    rs = _check_schedule(rs)
    window = window or default_window(rs)
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InvalidParameters("no samples")
    masses = np.vstack([ball_mass(mu, x, r) for r in rs])
    ok = np.all(masses > 0, axis=0)
    excluded = int(np.sum(~ok))
    if not np.any(ok):
        raise DegenerateBall("every sample has a zero-mass ball")
    masses = masses[:, ok]
    est = {}
    for q in quantiles:
        if not 0 <= q <= 1:
            raise InvalidParameters("quantiles must lie in [0, 1]")
        vals = np.quantile(masses, 1.0 - q, axis=1, method="inverted_cdf")
        series = ScalingSeries(rs, tuple(float(v) for v in vals), "local", None, int(x.size), None,
                               {"quantile": q, "excluded": excluded})
        est[q] = _estimate(series, window)
    return LocalProfile(est, excluded)


# -- correlation dimension --------------------------------------------------


def _as_points(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim not in (1, 2):
        raise InvalidParameters("samples must be a list of reals or of d-vectors")
    if len(x) < 2:
        raise TooFewPoints("need at least two samples")
    if len(x) > MAX_SAMPLES:
        raise InvalidParameters(f"at most {MAX_SAMPLES} samples")
    return x


def pair_counts(samples, rs) -> list[int]:
    """#{i < j : dist(x_i, x_j) <= r} for each r, exact integers."""
    x = _as_points(samples)
    if x.ndim == 1:
        xs = np.sort(x)
        idx = np.arange(len(xs))

        def count(r):
            hi = np.searchsorted(xs, xs + r, side="right")
            return int(np.sum(hi - idx - 1, dtype=np.int64))

        return _map(count, rs)
    tree = cKDTree(x)
    n = len(x)
    return [int((int(c) - n) // 2) for c in tree.count_neighbors(tree, np.asarray(rs, dtype=float))]


def _correlation_series(x, rs, method, delta=None, meta=None):
    n = len(x)
    counts = pair_counts(x, rs)
    total = n * (n - 1) // 2
    keep = [i for i, c in enumerate(counts) if c > 0]
    return ScalingSeries(
        tuple(rs[i] for i in keep), tuple(counts[i] / total for i in keep), method, delta, n, None,
        dict(meta or {}, pairs={f"{rs[i]:.17g}": counts[i] for i in range(len(rs))}),
    )


def _fit_correlation(series, window):
    if not any(_in_window(r, *window) for r in series.r):
        raise EmptyCorrelation("no pairs within any scale of the window")
    return _estimate(series, window)


def correlation_dim_gp(samples, rs, window=None) -> DimensionEstimate:
    """Grassberger-Procaccia estimate from the pair-count correlation sum."""
    rs = _check_schedule(rs)
    window = window or default_window(rs)
    x = _as_points(samples)
    return _fit_correlation(_correlation_series(x, rs, "gp"), window)


def _neighbour_counts(x, r):
    if x.ndim == 1:
        xs = np.sort(x)
        order = np.argsort(x, kind="stable")
        c = np.searchsorted(xs, xs + r, side="right") - np.searchsorted(xs, xs - r, side="left")
        out = np.empty(len(x), dtype=np.int64)
        out[order] = c
        return out
    tree = cKDTree(x)
    return np.asarray([len(n) for n in tree.query_ball_point(x, r)], dtype=np.int64)


def modified_correlation_dim(samples, delta: float, rs, window=None) -> DimensionEstimate:
    """Correlation slope after discarding the floor(delta N) most crowded samples.

    Crowding is the empirical ball count at the largest scale of the
    schedule.  Ranking at a scale inside the fit window removes pairs at
    exactly the scales being fitted and biases the slope upward.  The
    retained samples form the set A; its size and the count threshold are
    kept in the series metadata.
    """
    if not 0 < delta < 1:
        raise InvalidParameters("delta must lie in (0, 1)")
    rs = _check_schedule(rs)
    window = window or default_window(rs)
    x = _as_points(samples)
    r_rank = rs[0]
    counts = _neighbour_counts(x, r_rank)
    drop = int(math.floor(delta * len(x)))
    order = np.lexsort((np.arange(len(x)), -counts))
    kept = np.sort(order[drop:])
    if len(kept) < 2:
        raise TooFewPoints("delta leaves fewer than two samples")
    meta = {
        "r_rank": r_rank,
        "dropped": drop,
        "retained": int(len(kept)),
        "drop_threshold": int(counts[order[drop - 1]]) if drop else None,
    }
    series = _correlation_series(x[kept], rs, "mc", float(delta), meta)
    return _fit_correlation(series, window)
