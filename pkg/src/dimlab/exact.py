"""Closed-form dimensions of symbolic measures and related exact quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRatios, NoRoot, UnsupportedMeasure, WrongShape, ZeroExponent
from .measures import (
    AtomFamily,
    AtomList,
    GeometricBlocks,
    PiecewiseDensity,
    SelfSimilar,
    SymbolicMeasure,
    ball_mass,
    mass,
)
from .sets import BorelTestSet

MAPPINGS = ("B_L", "B_U", "MB_L", "MB_U", "H_L", "H_U", "P_L", "P_U", "C", "MC")
SET_DIMS = ("B", "MB", "H", "P")
# countably stable set dimensions: the upper mapping is lower semicontinuous
COUNTABLY_STABLE = ("MB", "H", "P")

EXACT = "Exact"
UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class Entry:
    value: float | None
    status: str = EXACT

    @property
    def exact(self) -> bool:
        return self.status == EXACT


@dataclass
class DimensionTable:
    entries: dict[str, Entry] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Entry:
        return self.entries[key]

    def value(self, key: str) -> float | None:
        e = self.entries[key]
        return e.value if e.exact else None

    def values(self) -> dict[str, float | None]:
        return {k: self.value(k) for k in MAPPINGS}

    def violations(self, atol: float = 1e-12) -> list[str]:
        """Broken ordering constraints among the Exact entries."""
        out = []
        for d in SET_DIMS:
            lo, hi = self.value(f"{d}_L"), self.value(f"{d}_U")
            if lo is not None and hi is not None and lo > hi + atol:
                out.append(f"{d}_L > {d}_U")
        h, c, mc = self.value("H_L"), self.value("C"), self.value("MC")
        if None not in (h, c, mc) and not (h <= c + atol and c <= mc + atol):
            out.append("H_L <= C <= MC fails")
        return out

    def to_dict(self) -> dict:
        return {k: {"value": e.value, "status": e.status} for k, e in self.entries.items()}


# -- Bowen equation ---------------------------------------------------------


def bowen_solve(ratios, tol: float = 1e-12) -> float:
    """Root h of sum(r_i**h) = 1 by bisection on [0, 1]."""
    r = np.asarray(ratios, dtype=float)
    if r.size < 2:
        raise InvalidRatios("need at least two ratios")
    if not np.all((r > 0) & (r < 1)):
        raise InvalidRatios("ratios must lie in (0, 1)")
    if r.sum() > 1 + 1e-15:
        raise InvalidRatios("ratios sum above 1")

    def f(h):
        return math.fsum(np.power(r, h)) - 1.0

    lo, hi = 0.0, 1.0
    if f(hi) > 0:
        raise NoRoot("no root in [0, 1]")
    if abs(f(hi)) < tol:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 or fm == 0.0:
            break
    best = min((lo, hi, 0.5 * (lo + hi)), key=lambda h: abs(f(h)))
    if abs(f(best)) >= tol:
        raise NoRoot(f"bisection stalled with residual {f(best):.3g}")
    return best


# -- per-class rule table ---------------------------------------------------


def _component_dims(c) -> dict[str, float | None]:
    """Per-component dims; None marks a value outside the rule table."""
    if isinstance(c, AtomList) or (isinstance(c, AtomFamily) and c.finite):
        return {k: 0.0 for k in MAPPINGS}
    if isinstance(c, AtomFamily):
        out = {k: 0.0 for k in MAPPINGS}
        out["B_U"] = 1.0 / (1.0 + c.p)
        return out
    if isinstance(c, PiecewiseDensity) or (isinstance(c, GeometricBlocks) and c.finite):
        return {k: 1.0 for k in MAPPINGS}
    if isinstance(c, GeometricBlocks):
        out = {k: None for k in MAPPINGS}
        out["C"] = out["MC"] = 0.0
        return out
    if isinstance(c, SelfSimilar) and c.is_natural():
        h = bowen_solve(c.ifs.ratios) if c.ifs.k > 1 else 0.0
        return {k: h for k in MAPPINGS}
    return {k: None for k in MAPPINGS}


def exact_dims(mu: SymbolicMeasure) -> DimensionTable:
    """Dimension table by the per-class rules.

    Lower mappings take the minimum over components, upper mappings the
    maximum; correlation entries take the minimum (the smallest scaling
    exponent dominates the correlation integral).
    """
    if not mu.components:
        return DimensionTable({k: Entry(None, UNSUPPORTED) for k in MAPPINGS})
    per = [_component_dims(c) for c in mu.components]
    entries = {}
    for key in MAPPINGS:
        vals = [d[key] for d in per]
        if any(v is None for v in vals):
            entries[key] = Entry(None, UNSUPPORTED)
        elif key.endswith("_U"):
            entries[key] = Entry(max(vals))
        else:
            entries[key] = Entry(min(vals))
    return DimensionTable(entries)


# -- correlation integral ---------------------------------------------------


def _overlap_prob(a1, b1, a2, b2, r):
    """P(|X - Y| <= r) for X ~ U[a1, b1], Y ~ U[a2, b2], vectorised.

    The overlap length of [x - r, x + r] with the second interval is
    piecewise linear in x; trapezoids between its kinks are exact and sum
    only non-negative terms.
    """
    l1 = b1 - a1
    l2 = b2 - a2
    knots = np.stack([a1, b1, a2 - r, a2 + r, b2 - r, b2 + r], axis=-1)
    knots = np.sort(np.clip(knots, a1[..., None], b1[..., None]), axis=-1)

    def g(x):
        return np.clip(np.minimum(x + r, b2[..., None]) - np.maximum(x - r, a2[..., None]), 0.0, None)

    gv = g(knots)
    seg = np.diff(knots, axis=-1)
    # normalise before multiplying so tiny pieces do not underflow
    frac = (seg / l1[..., None]) * (0.5 * (gv[..., 1:] + gv[..., :-1]) / l2[..., None])
    return np.clip(np.sum(frac, axis=-1), 0.0, 1.0)


def _pieces_correlation(a, b, m, r):
    """sum_{P,Q} m_P m_Q P(|X_P - Y_Q| <= r) over sorted disjoint pieces."""
    n = len(a)
    if n == 0:
        return 0.0
    cum = np.concatenate([[0.0], np.cumsum(m)])
    total = float(np.sum(m * m * _overlap_prob(a, b, a, b, r)))
    full_end = np.searchsorted(b, a + r, side="right")
    near_end = np.searchsorted(a, b + r, side="right")
    # pairs i < j entirely within distance r
    lo = np.arange(n) + 1
    hi = np.maximum(full_end, lo)
    total += 2.0 * float(np.sum(m * (cum[hi] - cum[lo])))
    ii, jj = [], []
    for i in range(n):
        start = max(hi[i], i + 1)
        if near_end[i] > start:
            js = np.arange(start, near_end[i])
            ii.append(np.full(len(js), i))
            jj.append(js)
    if ii:
        ii = np.concatenate(ii)
        jj = np.concatenate(jj)
        total += 2.0 * float(np.sum(m[ii] * m[jj] * _overlap_prob(a[ii], b[ii], a[jj], b[jj], r)))
    return total


def _selfsimilar_correlation(c: SelfSimilar, r: float, rel: float = 1e-2):
    """Correlation integral of a self-similar component by pair refinement."""
    b = np.asarray(c.ifs.offsets)
    rr = np.asarray(c.ifs.ratios)
    p = np.asarray(c.weights)
    # pair arrays: left/len/mass for both cylinders
    L1 = np.zeros(1); S1 = np.ones(1); M1 = np.ones(1)
    L2 = np.zeros(1); S2 = np.ones(1); M2 = np.ones(1)
    total = 0.0
    err = 0.0
    for _ in range(200):
        if L1.size == 0:
            break
        gap = np.maximum(np.maximum(L2 - (L1 + S1), L1 - (L2 + S2)), 0.0)
        span = np.maximum(L1 + S1, L2 + S2) - np.minimum(L1, L2)
        inside = span <= r
        total += float(np.sum(M1[inside] * M2[inside]))
        keep = ~inside & (gap <= r)
        fine = keep & (np.maximum(S1, S2) < rel * r)
        total += 0.5 * float(np.sum(M1[fine] * M2[fine]))
        err += 0.5 * float(np.sum(M1[fine] * M2[fine]))
        keep &= ~fine
        L1, S1, M1, L2, S2, M2 = (x[keep] for x in (L1, S1, M1, L2, S2, M2))
        k = len(b)
        # split both cylinders of every pair
        nl1 = (L1[:, None] + S1[:, None] * b[None, :]).ravel()
        ns1 = (S1[:, None] * rr[None, :]).ravel()
        nm1 = (M1[:, None] * p[None, :]).ravel()
        nl2 = (L2[:, None] + S2[:, None] * b[None, :]).ravel()
        ns2 = (S2[:, None] * rr[None, :]).ravel()
        nm2 = (M2[:, None] * p[None, :]).ravel()
        L1 = np.repeat(nl1, k); S1 = np.repeat(ns1, k); M1 = np.repeat(nm1, k)
        L2 = np.tile(nl2.reshape(-1, k), (1, k)).ravel() if nl2.size else nl2
        S2 = np.tile(ns2.reshape(-1, k), (1, k)).ravel() if ns2.size else ns2
        M2 = np.tile(nm2.reshape(-1, k), (1, k)).ravel() if nm2.size else nm2
    return c.scale**2 * total, c.scale**2 * err


def _lump_spread(mu, x_top, r):
    """Mass that a ball of radius r may gain or lose as its centre moves in [0, x_top].

    Bounds the error of replacing atoms in [0, x_top] by one atom; the factor
    2 applied by callers covers both orders of each pair.
    """
    lo = BorelTestSet.interval(-r, x_top - r)
    hi = BorelTestSet.interval(r, x_top + r)
    return mass(mu, lo) + mass(mu, hi)


def correlation_integral_exact(mu: SymbolicMeasure, r: float, *, return_error: bool = False):
    """C(r) = integral of mu(B(x, r)) dmu(x), closed balls."""
    if not r > 0:
        raise ValueError("r must be positive")
    ss = mu.of_type(SelfSimilar)
    if ss:
        if len(mu.components) > 1:
            raise UnsupportedMeasure("self-similar parts mixed with other components")
        value, err = _selfsimilar_correlation(ss[0], r)
        return (value, err) if return_error else value

    # discrete part: atoms, explicit family atoms, lumped tails near 0
    xs, ws = [], []
    lump_x, lump_w = [], []
    err = 0.0
    for c in mu.of_type(AtomList):
        xs.append(np.asarray(c.locations))
        ws.append(np.asarray(c.weights))
    for c in mu.of_type(AtomFamily):
        # lumped atoms sit in (0, x_cut]; keep x_cut a small fraction of r
        n_exp = c.n_max if c.finite else max(c.n_min, math.ceil((1e3 / r) ** (1.0 / c.p)))
        n_exp = min(n_exp, c.n_min + 3_000_000)
        idx = np.arange(c.n_min, n_exp + 1, dtype=float)
        xs.append(c.location(idx))
        ws.append(c.weight(idx))
        tail = c.tail_mass(n_exp)
        if tail > 0:
            x_cut = float(c.location(n_exp))
            lump_x.append(0.5 * x_cut)
            lump_w.append(tail)
            err += 2 * tail * _lump_spread(mu, x_cut, r)
    pieces = []
    for c in mu.of_type(PiecewiseDensity):
        pieces.extend((a, b, h * (b - a)) for a, b, h in c.pieces)
    for c in mu.of_type(GeometricBlocks):
        explicit, start = c.explicit_pieces()
        pieces.extend((a, b, h * (b - a)) for a, b, h in explicit)
        if start is not None:
            lump = c.block_mass_sum(start, c.n_max)
            lump_x.append(0.0)
            lump_w.append(lump)
            x_top = c.block(start)[1]
            err += 2 * lump * _lump_spread(mu, x_top, r)
    pieces.sort()
    if lump_x:
        xs.append(np.asarray(lump_x))
        ws.append(np.asarray(lump_w))
    dens = SymbolicMeasure(tuple(PiecewiseDensity(((a, b, m / (b - a)),)) for a, b, m in pieces)) if pieces else None
    total = 0.0
    if xs:
        x = np.concatenate(xs)
        w = np.concatenate(ws)
        around = ball_mass(mu, x, r)
        if dens is not None:
            around = around + ball_mass(dens, x, r)
        total += float(np.dot(w, around))
        err += 1e-15 * len(x) * mu.total_mass**2
    if pieces:
        a = np.asarray([p[0] for p in pieces])
        b = np.asarray([p[1] for p in pieces])
        m = np.asarray([p[2] for p in pieces])
        total += _pieces_correlation(a, b, m, r)
    return (total, err) if return_error else total


# -- formula helpers --------------------------------------------------------


def young_dimension(entropy: float, lambda1: float, lambda2: float) -> float:
    """entropy * (1/lambda1 - 1/lambda2), verbatim."""
    if lambda1 == 0 or lambda2 == 0:
        raise ZeroExponent("Lyapunov exponents must be non-zero")
    return entropy * (1.0 / lambda1 - 1.0 / lambda2)


@dataclass(frozen=True)
class CertificateStep:
    n: int
    r: float
    core: BorelTestSet
    ball: float
    core_mass: float
    exponent: float


@dataclass(frozen=True)
class BallCoreCertificate:
    """Scale schedule showing that ball mass times core mass is r**o(1)."""

    a: float
    steps: tuple[CertificateStep, ...]

    @property
    def exponents(self) -> list[float]:
        return [s.exponent for s in self.steps]

    @property
    def decreasing(self) -> bool:
        e = self.exponents
        return all(x > 0 for x in e) and all(y < x for x, y in zip(e, e[1:]))


def _blocks_shape(mu: SymbolicMeasure, a: float) -> GeometricBlocks:
    if len(mu.components) != 1 or not isinstance(mu.components[0], GeometricBlocks):
        raise WrongShape("expected a single infinite block component")
    c = mu.components[0]
    if c.finite or c.n_min != 0 or abs(c.a - a) > 1e-15 or abs(c.coef - 1.0) > 1e-12:
        raise WrongShape("block component does not match the requested construction")
    return c


def ball_core_certificate(mu: SymbolicMeasure, a: float, n_max: int) -> BallCoreCertificate:
    """For n = 1..n_max take r = a**(n*n) and core [0, r]; exponent 2/n."""
    _blocks_shape(mu, a)
    if n_max * n_max * math.log(a) < -700:
        raise ValueError("scale a**(n_max**2) underflows double precision")
    steps = []
    for n in range(1, n_max + 1):
        r = a ** (n * n)
        core = BorelTestSet.interval(0.0, r)
        core_mass = mass(mu, core)
        ball = ball_mass(mu, 0.0, r)
        exponent = math.log(ball * core_mass) / math.log(r)
        steps.append(CertificateStep(n, r, core, ball, core_mass, exponent))
    return BallCoreCertificate(a, tuple(steps))

