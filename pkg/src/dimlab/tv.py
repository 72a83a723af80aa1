"""Total variation, absolute continuity and finite-horizon convergence checks.

The TV distance uses the sup form ``sup_A |mu(A) - nu(A)|`` (no factor 1/2):
it equals the larger of the positive and negative part masses of the signed
difference, which is computed exactly on the common refinement of atoms,
density breakpoints and block indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NotProbability, UnsupportedMeasure
from .measures import (
    BLOCK_FLOOR,
    AtomFamily,
    AtomList,
    GeometricBlocks,
    PiecewiseDensity,
    SelfSimilar,
    SymbolicMeasure,
    hurwitz_sum,
    mass,
    normalize,
)
from .sets import BorelTestSet, Skeleton

WEAK = "weak"
SETWISE = "setwise"
TV = "TV"

CERTIFIED = "Certified"
REFUTED = "Refuted"
UNKNOWN = "Unknown"


# -- signed decomposition ---------------------------------------------------


def _signed(mu: SymbolicMeasure, nu: SymbolicMeasure):
    return [(1.0, c) for c in mu.components] + [(-1.0, c) for c in nu.components]


def _atom_parts(terms) -> tuple[float, float]:
    lists = [(s, c) for s, c in terms if isinstance(c, AtomList)]
    fams = [(s, c) for s, c in terms if isinstance(c, AtomFamily)]
    pos = neg = 0.0
    loose: dict[float, float] = {}
    for s, c in lists:
        for x, w in zip(c.locations, c.weights):
            loose[x] = loose.get(x, 0.0) + s * w
    if fams:
        p, q = fams[0][1].p, fams[0][1].q
        if any(c.p != p or c.q != q for _, c in fams):
            raise UnsupportedMeasure("atom families with different exponents")
        probe = AtomFamily(p, q)
        corrections: dict[float, float] = {}
        for x in list(loose):
            i = float(probe.index_of(x))
            if i > 0:
                corrections[i] = corrections.get(i, 0.0) + loose.pop(x)
        cuts = {1.0, math.inf}
        for _, c in fams:
            cuts.add(float(c.n_min))
            cuts.add(c.n_max + 1.0)
        for i in corrections:
            cuts.add(i)
            cuts.add(i + 1.0)
        edges = sorted(cuts)
        for lo, nxt in zip(edges[:-1], edges[1:]):
            hi = nxt - 1.0
            coef = sum(s * c.c for s, c in fams if c.n_min <= lo and hi <= c.n_max)
            if lo in corrections and hi == lo:
                v = coef * lo ** -q + corrections[lo]
                pos, neg = pos + max(v, 0.0), neg + max(-v, 0.0)
                continue
            if coef == 0.0:
                continue
            seg = abs(coef) * hurwitz_sum(q, lo, hi)
            if coef > 0:
                pos += seg
            else:
                neg += seg
    for v in loose.values():
        pos, neg = pos + max(v, 0.0), neg + max(-v, 0.0)
    return pos, neg


def _density_parts(terms) -> tuple[float, float, float]:
    dens = [(s, c) for s, c in terms if isinstance(c, PiecewiseDensity)]
    blocks = [(s, c) for s, c in terms if isinstance(c, GeometricBlocks)]
    if not dens and not blocks:
        return 0.0, 0.0, 0.0
    if blocks and len({c.a for _, c in blocks}) > 1:
        raise UnsupportedMeasure("block components with different ratios")
    piece_lists = [(s, c.pieces) for s, c in dens]
    lumps = []
    for s, c in blocks:
        pieces, tail_start = c.explicit_pieces()
        if pieces:
            piece_lists.append((s, tuple(sorted(pieces))))
        if tail_start is not None:
            lumps.append((s, c, tail_start))
    edges = np.unique(np.concatenate([np.asarray([e for a, b, _ in pl for e in (a, b)]) for _, pl in piece_lists]))
    lengths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    net = np.zeros(len(mids))
    for s, pl in piece_lists:
        a = np.asarray([p[0] for p in pl])
        b = np.asarray([p[1] for p in pl])
        h = np.asarray([p[2] for p in pl])
        k = np.searchsorted(a, mids, side="right") - 1
        kc = np.maximum(k, 0)
        inside = (k >= 0) & (mids < b[kc])
        net += np.where(inside, s * h[kc] * lengths, 0.0)
    pos = float(np.sum(net[net > 0]))
    neg = float(-np.sum(net[net < 0]))
    err = 0.0
    if lumps:
        start = min(t for _, _, t in lumps)
        cuts = {float(start), math.inf}
        for _, c, _ in lumps:
            cuts.add(float(max(c.n_min, start)))
            cuts.add(c.n_max + 1.0)
        edges_i = sorted(cuts)
        for lo, nxt in zip(edges_i[:-1], edges_i[1:]):
            hi = nxt - 1.0
            coef = sum(s * c.coef for s, c, _ in lumps if c.n_min <= lo and hi <= c.n_max)
            if coef == 0.0:
                continue
            seg = abs(coef) * GeometricBlocks(blocks[0][1].a).block_mass_sum(lo, hi)
            if coef > 0:
                pos += seg
            else:
                neg += seg
        hmax = max((p[2] for _, pl in piece_lists for p in pl), default=0.0)
        err += hmax * BLOCK_FLOOR
    return pos, neg, err


def _singular_parts(terms) -> tuple[float, float, float]:
    groups: list[list] = []
    for s, c in terms:
        if not isinstance(c, SelfSimilar):
            continue
        for g in groups:
            if g[0].same_shape(c):
                g[1] += s * c.scale
                g[2] += c.error_bound
                break
        else:
            groups.append([c, s * c.scale, c.error_bound])
    pos = sum(v for _, v, _ in groups if v > 0)
    neg = sum(-v for _, v, _ in groups if v < 0)
    return pos, neg, 0.0


def signed_parts(mu: SymbolicMeasure, nu: SymbolicMeasure) -> tuple[float, float, float]:
    """Positive mass, negative mass and error bound of ``mu - nu``."""
    terms = _signed(mu, nu)
    pa, na = _atom_parts(terms)
    pd, nd, ed = _density_parts(terms)
    ps, ns, es = _singular_parts(terms)
    err = ed + es + 1e-15 * (mu.total_mass + nu.total_mass)
    return pa + pd + ps, na + nd + ns, err


def tv_distance(mu: SymbolicMeasure, nu: SymbolicMeasure, *, return_error: bool = False):
    pos, neg, err = signed_parts(mu, nu)
    value = max(pos, neg)
    return (value, err) if return_error else value


def density_l1(mu: SymbolicMeasure, nu: SymbolicMeasure) -> float:
    """L1 distance between the absolutely continuous parts."""
    pd, nd, _ = _density_parts(_signed(mu, nu))
    return pd + nd


# -- absolute continuity ----------------------------------------------------


def _merge_spans(spans):
    spans = sorted(spans)
    out: list[list[float]] = []
    for lo, hi in spans:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(s) for s in out]


def density_support(mu: SymbolicMeasure):
    """Merged spans (up to null sets) where the density part is positive."""
    spans = []
    for c in mu.components:
        if isinstance(c, PiecewiseDensity):
            spans.extend((a, b) for a, b, h in c.pieces if h > 0)
        elif isinstance(c, GeometricBlocks):
            spans.append(c.support_bounds)
    return _merge_spans(spans)


def _atoms_covered(mu: SymbolicMeasure, nu: SymbolicMeasure) -> bool:
    for c in mu.of_type(AtomList):
        if np.any(nu.point_mass(np.asarray(c.locations)) <= 0):
            return False
    for c in mu.of_type(AtomFamily):
        head_end = c.n_max if c.finite else c.n_min + 100_000
        idx = np.arange(c.n_min, min(head_end, c.n_min + 1_000_000) + 1, dtype=float)
        if np.any(nu.point_mass(c.location(idx)) <= 0):
            return False
        if not c.finite:
            tail_ok = any(f.p == c.p and f.n_min <= head_end and not f.finite for f in nu.of_type(AtomFamily))
            if not tail_ok:
                return False
    return True


def abs_continuous(mu: SymbolicMeasure, nu: SymbolicMeasure) -> bool:
    """Whether mu << nu, decided exactly on the symbolic class."""
    if not _atoms_covered(mu, nu):
        return False
    theirs = density_support(nu)
    for lo, hi in density_support(mu):
        if not any(a <= lo and hi <= b for a, b in theirs):
            return False
    for c in mu.of_type(SelfSimilar):
        if not any(c.same_shape(d) for d in nu.of_type(SelfSimilar)):
            return False
    return True


def equivalent(mu: SymbolicMeasure, nu: SymbolicMeasure) -> bool:
    return abs_continuous(mu, nu) and abs_continuous(nu, mu)


# -- sequences and verdicts -------------------------------------------------


@dataclass
class MeasureSequence:
    generator: Callable[[int], SymbolicMeasure]
    limit: SymbolicMeasure
    declared_mode: Optional[str] = None
    name: str = ""
    first: int = 1
    max_horizon: Optional[int] = None

    def __getitem__(self, n: int) -> SymbolicMeasure:
        return self.generator(n)

    def indices(self, horizon: int) -> range:
        if self.max_horizon is not None:
            horizon = min(horizon, self.max_horizon)
        return range(self.first, horizon + 1)

    def tail(self, horizon: int) -> range:
        idx = self.indices(horizon)
        start = max(idx.start, math.ceil((idx.stop - 1) / 2))
        return range(start, idx.stop)

    def normalized(self) -> "MeasureSequence":
        gen = self.generator
        return MeasureSequence(
            lambda n: normalize(gen(n)), normalize(self.limit), self.declared_mode, self.name, self.first, self.max_horizon
        )


@dataclass
class ConvergenceVerdict:
    mode: str
    status: str
    certificate: str = ""
    witness: Optional[BorelTestSet] = None
    witness_gap: Optional[float] = None
    witness_label: str = ""
    series: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "status": self.status,
            "certificate": self.certificate,
            "witness": self.witness_label or None,
            "witness_gap": self.witness_gap,
            "series": [[n, v] for n, v in self.series],
        }


def _trend_verdict(mode, series, tail, tol, what):
    values = dict(series)
    last = series[-1][1]
    tail_vals = [values[n] for n in tail]
    # the envelope must not grow across the tail; alternating sequences with a
    # shrinking envelope still qualify
    half = max(1, len(tail_vals) // 2)
    shrinking = max(tail_vals[half:], default=last) <= max(tail_vals[:half]) + 1e-9
    if last < tol and shrinking:
        return ConvergenceVerdict(mode, CERTIFIED, f"{what} decreasing to {last:.3g} < {tol:g} at n = {series[-1][0]}",
                                  series=series)
    # refuting needs a tail that stays above tol without shrinking
    stalled = max(tail_vals[half:], default=last) >= 0.9 * max(tail_vals[:half])
    if min(tail_vals) > tol and stalled:
        return ConvergenceVerdict(mode, REFUTED, f"{what} stays above {min(tail_vals):.3g} over the tail",
                                  series=series)
    return ConvergenceVerdict(mode, UNKNOWN, f"{what} at horizon {last:.3g}", series=series)


def tv_converges(seq: MeasureSequence, horizon: int, tol: float = 0.02) -> ConvergenceVerdict:
    series = [(n, tv_distance(seq[n], seq.limit)) for n in seq.indices(horizon)]
    return _trend_verdict(TV, series, seq.tail(horizon), tol, "TV distance")


def _all_atom_locations(mu: SymbolicMeasure):
    locs = []
    for c in mu.of_type(AtomList):
        locs.extend(c.locations)
    return locs


def _breakpoints(mu: SymbolicMeasure):
    pts = []
    for c in mu.components:
        if isinstance(c, PiecewiseDensity):
            pts.extend(e for a, b, _ in c.pieces for e in (a, b))
        elif isinstance(c, GeometricBlocks):
            pieces, _ = c.explicit_pieces(1e-12)
            pts.extend(e for a, b, _ in pieces for e in (a, b))
        else:
            pts.extend(c.support_bounds)
    return pts


def levy_distance(F, G, points, iters: int = 60) -> float:
    """Lévy distance between CDF callables, checked at ``points``.

    ``F`` and ``G`` are SymbolicMeasures; both right values and left limits of
    G are tested against the band F(x - eps) - eps, F(x + eps) + eps.
    """
    x = np.asarray(points)
    g_hi = G.cdf(x)
    g_lo = G.cdf_left(x)
    f_hi = F.cdf(x)
    f_lo = F.cdf_left(x)

    def ok(eps):
        upper = F.cdf(x + eps) + eps
        lower = F.cdf_left(x - eps) - eps
        rev_upper = G.cdf(x + eps) + eps
        rev_lower = G.cdf_left(x - eps) - eps
        return (
            np.all(g_hi <= upper + 1e-15) and np.all(g_lo >= lower - 1e-15)
            and np.all(f_hi <= rev_upper + 1e-15) and np.all(f_lo >= rev_lower - 1e-15)
        )

    lo, hi = 0.0, 1.0
    if ok(0.0):
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def weak_converges(seq: MeasureSequence, horizon: int, tol: float = 0.02, grid_size: int = 1024) -> ConvergenceVerdict:
    """Finite-horizon weak convergence evidence via the Lévy distance of CDFs."""
    idx = seq.indices(horizon)
    measures = {n: seq[n] for n in idx}
    for mu in list(measures.values()) + [seq.limit]:
        if not mu.is_probability:
            raise NotProbability("weak convergence check needs probability measures")
    lo = min(min(m.bounds[0] for m in measures.values()), seq.limit.bounds[0])
    hi = max(max(m.bounds[1] for m in measures.values()), seq.limit.bounds[1])
    pad = 0.05 * max(hi - lo, 1.0)
    grid = np.linspace(lo - pad, hi + pad, grid_size)
    limit_atoms = np.asarray(_all_atom_locations(seq.limit))
    if limit_atoms.size:
        on_atom = np.isin(grid, limit_atoms)
        grid = np.where(on_atom, grid + 1e-9, grid)
    base = np.concatenate([grid, limit_atoms, np.asarray(_breakpoints(seq.limit))])
    series = []
    for n, mu in measures.items():
        extra = np.asarray(_all_atom_locations(mu) + _breakpoints(mu))
        pts = np.unique(np.concatenate([base, extra]))
        series.append((n, levy_distance(seq.limit, mu, pts)))
    verdict = _trend_verdict(WEAK, series, seq.tail(horizon), tol, "Lévy distance")
    if verdict.status == REFUTED:
        mu = measures[series[-1][0]]
        gaps = np.abs(mu.cdf(grid) - seq.limit.cdf(grid))
        k = int(np.argmax(gaps))
        verdict.witness = BorelTestSet.interval(-math.inf, float(grid[k]))
        verdict.witness_gap = float(gaps[k])
        verdict.witness_label = f"(-inf, {grid[k]:.6g}]"
    return verdict


def _candidate_sets(seq: MeasureSequence, horizon: int, measures):
    """Discriminating test sets: skeletons, limit atoms, breakpoint cells."""
    cands = []
    locs = set(_all_atom_locations(seq.limit))
    fam_p = {c.p for c in seq.limit.of_type(AtomFamily)}
    attractors = {c.ifs for c in seq.limit.of_type(SelfSimilar)}
    for mu in measures.values():
        locs.update(_all_atom_locations(mu))
        fam_p.update(c.p for c in mu.of_type(AtomFamily))
        attractors.update(c.ifs for c in mu.of_type(SelfSimilar))
    if locs or fam_p:
        sk = Skeleton(tuple(locs), tuple(sorted(fam_p)), (), label=f"atom skeleton ({len(locs)} points"
                      + (f", families p={sorted(fam_p)}" if fam_p else "") + ")")
        cands.append((sk.label, BorelTestSet.of_skeleton(sk)))
    for ifs in attractors:
        sk = Skeleton(attractors=(ifs,), label=f"attractor of IFS ratios={list(ifs.ratios)}")
        cands.append((sk.label, BorelTestSet.of_skeleton(sk)))
    for x in sorted(_all_atom_locations(seq.limit))[:64]:
        cands.append((f"{{{x:.6g}}}", BorelTestSet.of_points([x])))
    bps = sorted(set(_breakpoints(seq.limit)))
    for a, b in zip(bps[:-1], bps[1:]):
        if b > a:
            cands.append((f"[{a:.6g}, {b:.6g}]", BorelTestSet.interval(a, b)))
    return cands


def _dyadic_gaps(seq, measures, tail, depth: int = 12):
    lo = min(min(m.bounds[0] for m in measures.values()), seq.limit.bounds[0])
    hi = max(max(m.bounds[1] for m in measures.values()), seq.limit.bounds[1])
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, 2**depth + 1)

    def cell_masses(mu):
        left = mu.cdf_left(edges)
        m = np.diff(left)
        m[-1] += mu.point_mass(np.asarray([edges[-1]]))[0]
        return m

    ref = cell_masses(seq.limit)
    best = (0.0, None)
    diffs = {n: cell_masses(measures[n]) - ref for n in tail}
    for d in range(1, depth + 1):
        width = 2 ** (depth - d)
        gaps = np.vstack([np.abs(diffs[n].reshape(-1, width).sum(axis=1)) for n in tail])
        persistent = gaps.min(axis=0)
        k = int(np.argmax(persistent))
        if persistent[k] > best[0]:
            a, b = edges[k * width], edges[(k + 1) * width]
            best = (float(persistent[k]), (f"dyadic [{a:.6g}, {b:.6g})", BorelTestSet.interval(a, b, True, False)))
    return best


def setwise_converges(seq: MeasureSequence, horizon: int, tol: float = 0.02) -> ConvergenceVerdict:
    """Refute by a persistent mass gap, certify by Scheffé or TV, else Unknown."""
    idx = seq.indices(horizon)
    tail = list(seq.tail(horizon))
    measures = {n: seq[n] for n in idx}
    best_gap, best = 0.0, None
    for label, A in _candidate_sets(seq, horizon, measures):
        ref = mass(seq.limit, A)
        gaps = [abs(mass(measures[n], A) - ref) for n in tail]
        if min(gaps) > best_gap:
            best_gap, best = min(gaps), (label, A)
    dy_gap, dy = _dyadic_gaps(seq, measures, tail)
    if best is None or dy_gap > best_gap + 1e-12:
        if dy is not None and dy_gap > best_gap:
            best_gap, best = dy_gap, dy
    if best is not None and best_gap > tol:
        label, A = best
        ref = mass(seq.limit, A)
        series = [(n, abs(mass(measures[n], A) - ref)) for n in idx]
        return ConvergenceVerdict(SETWISE, REFUTED, f"mass gap >= {best_gap:.3g} on every tail index",
                                  witness=A, witness_gap=best_gap, witness_label=label, series=series)

    scheffe = _scheffe(seq, measures, tol)
    if scheffe is not None:
        return scheffe
    tv = tv_converges(seq, horizon, tol)
    if tv.status == CERTIFIED:
        return ConvergenceVerdict(SETWISE, CERTIFIED, "TV dominance: " + tv.certificate, series=tv.series)
    return ConvergenceVerdict(SETWISE, UNKNOWN, "no persistent gap found and no analytic certificate",
                              series=tv.series)


def _scheffe(seq, measures, tol):
    limit = seq.limit
    if limit.of_type(AtomFamily) or limit.of_type(SelfSimilar):
        return None
    ref_atoms = _all_atom_locations(limit)
    series = []
    for n, mu in measures.items():
        if mu.of_type(AtomFamily) or mu.of_type(SelfSimilar):
            return None
        if _all_atom_locations(mu) and sorted(_all_atom_locations(mu)) != sorted(ref_atoms):
            return None
        wdiff = 0.0
        if ref_atoms:
            x = np.asarray(ref_atoms)
            wdiff = float(np.sum(np.abs(mu.point_mass(x) - limit.point_mass(x))))
        series.append((n, wdiff + density_l1(mu, limit)))
    last = series[-1][1]
    if last < tol:
        return ConvergenceVerdict(SETWISE, CERTIFIED,
                                  f"Scheffé: fixed atoms, atom-weight + density L1 distance {last:.3g} < {tol:g}",
                                  series=series)
    return None
