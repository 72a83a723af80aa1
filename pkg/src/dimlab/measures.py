"""Exact finite Borel measures on the line.

A :class:`SymbolicMeasure` is a finite sum of components, each of which can
report its CDF (right-continuous and left-limit versions), its total mass,
and draw samples:

* :class:`AtomList` - finitely many weighted atoms;
* :class:`AtomFamily` - atoms ``c * i**-q`` at ``i**-p`` for an index range;
* :class:`PiecewiseDensity` - piecewise-constant Lebesgue densities;
* :class:`GeometricBlocks` - uniform blocks on ``[a**((i+1)**2), a**(i**2)]``
  with masses ``coef * (1-a) * a**i``, possibly infinitely many;
* :class:`SelfSimilar` - the stationary measure of an affine IFS on [0, 1].

Everything is evaluated in double precision.  Series tails (atom families,
self-similar refinement) carry explicit error bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.special import zeta

from .errors import InvalidMeasure, NotProbability, UnsupportedSet, ZeroMass
from .sets import BorelTestSet, Interval

MASS_RTOL = 1e-12
SS_TOL = 1e-13
# below this, blocks of a GeometricBlocks component are treated as a lump at 0
BLOCK_FLOOR = 1e-280


def hurwitz_sum(q: float, lo, hi):
    """Sum of ``i**-q`` for integers ``lo <= i <= hi`` (``hi`` may be inf).

    Accepts arrays; empty ranges give 0.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo_c = np.maximum(lo, 1.0)
    head = zeta(q, lo_c)
    tail = np.where(np.isinf(hi), 0.0, zeta(q, np.where(np.isinf(hi), 1.0, hi + 1.0)))
    out = np.where(hi >= lo_c, head - tail, 0.0)
    return out if out.ndim else float(out)


def tail_bounds(q: float, n: int) -> tuple[float, float]:
    """Integral-comparison bracket for ``sum_{i>n} i**-q``."""
    return (n + 1) ** (1 - q) / (q - 1), (n ** (1 - q) / (q - 1)) if n >= 1 else math.inf


# -- components -------------------------------------------------------------


@dataclass(frozen=True)
class AtomList:
    locations: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.locations) != len(self.weights):
            raise InvalidMeasure("locations and weights differ in length")
        if not self.locations:
            raise InvalidMeasure("empty atom list")
        merged: dict[float, float] = {}
        for x, w in zip(self.locations, self.weights):
            if not (w > 0 and math.isfinite(w)) or not math.isfinite(x):
                raise InvalidMeasure(f"bad atom ({x}, {w})")
            merged[float(x)] = merged.get(float(x), 0.0) + float(w)
        locs = tuple(sorted(merged))
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", tuple(merged[x] for x in locs))

    @cached_property
    def _x(self):
        return np.asarray(self.locations)

    @cached_property
    def _cum(self):
        return np.concatenate([[0.0], np.cumsum(self.weights)])

    @property
    def mass(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def support_bounds(self):
        return self.locations[0], self.locations[-1]

    def cdf(self, x):
        return self._cum[np.searchsorted(self._x, x, side="right")]

    def cdf_left(self, x):
        return self._cum[np.searchsorted(self._x, x, side="left")]

    def point_mass(self, pts):
        pts = np.asarray(pts, dtype=float)
        idx = np.searchsorted(self._x, pts)
        idx_c = np.minimum(idx, len(self.locations) - 1)
        hit = self._x[idx_c] == pts
        return np.where(hit, np.asarray(self.weights)[idx_c], 0.0)

    def scaled(self, c: float) -> "AtomList":
        return AtomList(self.locations, tuple(c * w for w in self.weights))

    def sample(self, rng: np.random.Generator, n: int):
        w = np.asarray(self.weights)
        return self._x[rng.choice(len(w), size=n, p=w / w.sum())]


@dataclass(frozen=True)
class AtomFamily:
    """Atoms of weight ``c * i**-q`` at ``i**-p`` for ``n_min <= i <= n_max``."""

    p: float
    q: float
    c: float = 1.0
    n_max: float = math.inf
    n_min: int = 1

    def __post_init__(self):
        if not (self.p > 0 and self.q > 1 and self.c > 0):
            raise InvalidMeasure("atom family needs p > 0, q > 1, c > 0")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise InvalidMeasure("empty atom family index range")
        if math.isfinite(self.n_max):
            object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.n_max)

    def location(self, i):
        return np.power(np.asarray(i, dtype=float), -self.p)

    def weight(self, i):
        return self.c * np.power(np.asarray(i, dtype=float), -self.q)

    @property
    def mass(self) -> float:
        return self.c * hurwitz_sum(self.q, self.n_min, self.n_max)

    def tail_mass(self, n: int) -> float:
        """Mass of atoms with index > n."""
        return self.c * hurwitz_sum(self.q, max(n + 1, self.n_min), self.n_max)

    def tail_mass_bounds(self, n: int) -> tuple[float, float]:
        lo, hi = tail_bounds(self.q, n)
        return self.c * lo, self.c * hi

    @property
    def support_bounds(self):
        lo = 0.0 if not self.finite else float(self.location(self.n_max))
        return lo, float(self.location(self.n_min))

    def _first_index_at_most(self, x, strict: bool):
        """Smallest index i with location(i) <= x (or < x when strict)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            guess = np.where(x > 0, np.ceil(np.power(np.where(x > 0, x, 1.0), -1.0 / self.p)), np.inf)
        guess = np.maximum(guess, 1.0)
        small = guess < 2**52
        cmp = (lambda loc: loc < x) if strict else (lambda loc: loc <= x)
        g = np.where(small, guess, 1.0)
        # correct off-by-one rounding in either direction
        prev_ok = small & (g > 1) & cmp(self.location(np.maximum(g - 1, 1)))
        g = np.where(prev_ok, g - 1, g)
        cur_bad = small & ~cmp(self.location(g))
        g = np.where(cur_bad, g + 1, g)
        return np.where(small, g, guess)

    def _mass_from(self, first):
        lo = np.maximum(first, self.n_min)
        return self.c * hurwitz_sum(self.q, lo, self.n_max)

    def cdf(self, x):
        return self._mass_from(self._first_index_at_most(x, strict=False))

    def cdf_left(self, x):
        return self._mass_from(self._first_index_at_most(x, strict=True))

    def index_of(self, pts):
        """Index i with location(i) == pt exactly, else 0."""
        pts = np.asarray(pts, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            i = np.where(pts > 0, np.round(np.power(np.where(pts > 0, pts, 1.0), -1.0 / self.p)), 0.0)
        ok = (pts > 0) & (i >= self.n_min) & (i <= self.n_max) & (i < 2**52)
        ok &= self.location(np.where(ok, i, 1.0)) == pts
        return np.where(ok, i, 0.0)

    def point_mass(self, pts):
        i = self.index_of(pts)
        return np.where(i > 0, self.weight(np.where(i > 0, i, 1.0)), 0.0)

    def scaled(self, c: float) -> "AtomFamily":
        return AtomFamily(self.p, self.q, self.c * c, self.n_max, self.n_min)

    def sample(self, rng: np.random.Generator, n: int):
        if self.finite and self.n_max - self.n_min < 2_000_000:
            idx = np.arange(self.n_min, self.n_max + 1, dtype=float)
            w = self.weight(idx)
            cum = np.cumsum(w)
            u = rng.random(n) * cum[-1]
            return self.location(idx[np.minimum(np.searchsorted(cum, u, side="right"), len(idx) - 1)])
        out = np.empty(n)
        filled = 0
        while filled < n:
            # zeta distribution conditioned on the index range by rejection
            draw = rng.zipf(self.q, size=2 * (n - filled) + 16).astype(float)
            draw = draw[(draw >= self.n_min) & (draw <= self.n_max)]
            take = min(len(draw), n - filled)
            out[filled:filled + take] = draw[:take]
            filled += take
        return self.location(out)


@dataclass(frozen=True)
class PiecewiseDensity:
    """Lebesgue densities ``height`` on pairwise interior-disjoint ``[a, b]``."""

    pieces: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        pieces = sorted((float(a), float(b), float(h)) for a, b, h in self.pieces)
        for a, b, h in pieces:
            if not (a < b) or not (h >= 0) or not all(map(math.isfinite, (a, b, h))):
                raise InvalidMeasure(f"bad density piece ({a}, {b}, {h})")
        for (a0, b0, _), (a1, _, _) in zip(pieces, pieces[1:]):
            if a1 < b0:
                raise InvalidMeasure(f"density pieces overlap at [{a1}, {b0}]")
        pieces = [pc for pc in pieces if pc[2] > 0]
        if not pieces:
            raise InvalidMeasure("density has no positive piece")
        object.__setattr__(self, "pieces", tuple(pieces))

    @cached_property
    def _arr(self):
        a, b, h = (np.asarray(col) for col in zip(*self.pieces))
        cum = np.concatenate([[0.0], np.cumsum(h * (b - a))])
        return a, b, h, cum

    @property
    def mass(self) -> float:
        return float(math.fsum(h * (b - a) for a, b, h in self.pieces))

    @property
    def support_bounds(self):
        return self.pieces[0][0], self.pieces[-1][1]

    def cdf(self, x):
        a, b, h, cum = self._arr
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(a, x, side="right") - 1
        ic = np.maximum(idx, 0)
        partial = h[ic] * np.clip(x - a[ic], 0.0, b[ic] - a[ic])
        return np.where(idx < 0, 0.0, cum[ic] + partial)

    cdf_left = cdf

    def point_mass(self, pts):
        return np.zeros(np.shape(pts))

    def scaled(self, c: float) -> "PiecewiseDensity":
        return PiecewiseDensity(tuple((a, b, c * h) for a, b, h in self.pieces))

    def sample(self, rng: np.random.Generator, n: int):
        a, b, h, cum = self._arr
        u = rng.random(n) * cum[-1]
        k = np.minimum(np.searchsorted(cum, u, side="right") - 1, len(a) - 1)
        return a[k] + rng.random(n) * (b[k] - a[k])


@dataclass(frozen=True)
class GeometricBlocks:
    """Uniform blocks on ``[a**((i+1)**2), a**(i**2)]`` of mass ``coef*(1-a)*a**i``.

    Indices run over ``n_min <= i <= n_max`` (``n_max`` may be infinite).
    """

    a: float
    coef: float = 1.0
    n_max: float = math.inf
    n_min: int = 0

    def __post_init__(self):
        if not (0 < self.a < 1 and self.coef > 0):
            raise InvalidMeasure("geometric blocks need 0 < a < 1 and coef > 0")
        if self.n_min < 0 or self.n_max < self.n_min:
            raise InvalidMeasure("empty block index range")
        if math.isfinite(self.n_max):
            object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.n_max)

    def block_mass_sum(self, lo, hi):
        """Total mass of blocks lo..hi (inclusive, clipped to the index range)."""
        lo = np.maximum(np.asarray(lo, dtype=float), self.n_min)
        hi = np.minimum(np.asarray(hi, dtype=float), self.n_max)
        with np.errstate(over="ignore"):
            top = np.where(np.isinf(hi), 0.0, np.power(self.a, np.where(np.isinf(hi), 0.0, hi) + 1))
            out = np.where(hi >= lo, self.coef * (np.power(self.a, lo) - top), 0.0)
        return out if out.ndim else float(out)

    def block(self, i: int) -> tuple[float, float, float]:
        """(left, right, mass) of block i."""
        return self.a ** ((i + 1) ** 2), self.a ** (i * i), self.coef * (1 - self.a) * self.a**i

    @property
    def mass(self) -> float:
        return self.block_mass_sum(self.n_min, self.n_max)

    @property
    def support_bounds(self):
        lo = 0.0 if not self.finite else self.a ** ((self.n_max + 1) ** 2)
        return lo, self.a ** (self.n_min**2)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        la = math.log(self.a)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        t = np.log(xs) / la
        j = np.maximum(np.ceil(np.sqrt(t)) - 1, 0.0)
        # x / a**(j*j), computed in log space to survive underflow
        ratio = np.exp(np.log(xs) - j * j * la)
        shrink = self.a ** (2 * j + 1)
        frac = np.clip((ratio - shrink) / (1 - shrink), 0.0, 1.0)
        in_range = (j >= self.n_min) & (j <= self.n_max)
        own = np.where(in_range, self.coef * (1 - self.a) * np.power(self.a, j) * frac, 0.0)
        below = self.block_mass_sum(j + 1, np.full(j.shape, self.n_max))
        val = np.where(inside, below + own, np.where(x >= 1, self.mass, 0.0))
        return val if val.ndim else float(val)

    cdf_left = cdf

    def point_mass(self, pts):
        return np.zeros(np.shape(pts))

    def scaled(self, c: float) -> "GeometricBlocks":
        return GeometricBlocks(self.a, self.coef * c, self.n_max, self.n_min)

    def explicit_pieces(self, floor: float = BLOCK_FLOOR):
        """Blocks whose left end is above ``floor`` as density pieces, plus the
        first index of the remaining lump near 0 (``None`` when there is none)."""
        pieces = []
        i = self.n_min
        while i <= self.n_max:
            left, right, m = self.block(i)
            if left <= floor:
                return pieces, i
            pieces.append((left, right, m / (right - left)))
            i += 1
        return pieces, None

    def sample(self, rng: np.random.Generator, n: int):
        if self.finite:
            idx = np.arange(self.n_min, self.n_max + 1, dtype=float)
            w = np.power(self.a, idx)
            cum = np.cumsum(w)
            i = idx[np.minimum(np.searchsorted(cum, rng.random(n) * cum[-1], side="right"), len(idx) - 1)]
        else:
            i = self.n_min + rng.geometric(1 - self.a, size=n).astype(float) - 1
        left = np.power(self.a, (i + 1) ** 2)
        right = np.power(self.a, i * i)
        return left + rng.random(n) * (right - left)


@dataclass(frozen=True)
class IFS:
    """Affine maps ``s_i(x) = ratios[i] * x + offsets[i]`` on [0, 1]."""

    ratios: tuple[float, ...]
    offsets: tuple[float, ...] = ()

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) < 1 or not all(0 < r < 1 for r in ratios):
            raise InvalidMeasure("IFS ratios must lie in (0, 1)")
        offsets = tuple(float(b) for b in self.offsets)
        if not offsets:
            k = len(ratios)
            gap = (1 - sum(ratios)) / (k - 1) if k > 1 else 0.0
            pos, offs = 0.0, []
            for r in ratios:
                offs.append(pos)
                pos += r + gap
            offsets = tuple(offs)
        if len(offsets) != len(ratios):
            raise InvalidMeasure("ratios and offsets differ in length")
        order = sorted(range(len(ratios)), key=lambda i: offsets[i])
        ratios = tuple(ratios[i] for i in order)
        offsets = tuple(offsets[i] for i in order)
        for r, b in zip(ratios, offsets):
            if b < 0 or b + r > 1 + 1e-15:
                raise InvalidMeasure("IFS image leaves [0, 1]")
        for (r0, b0), b1 in zip(zip(ratios, offsets), offsets[1:]):
            if not b1 > b0 + r0:
                raise InvalidMeasure("IFS images overlap (strong separation fails)")
        if not sum(ratios) <= 1 + 1e-15:
            raise InvalidMeasure("ratios sum above 1")
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "offsets", offsets)

    @property
    def k(self) -> int:
        return len(self.ratios)

    def natural_weights(self) -> tuple[float, ...]:
        from .exact import bowen_solve

        h = bowen_solve(self.ratios)
        w = [r**h for r in self.ratios]
        s = math.fsum(w)
        return tuple(x / s for x in w)

    def cylinders(self, depth: int):
        """Left ends and lengths of all depth-``depth`` images of [0, 1]."""
        left = np.zeros(1)
        length = np.ones(1)
        r = np.asarray(self.ratios)
        b = np.asarray(self.offsets)
        for _ in range(depth):
            left = (left[:, None] + length[:, None] * b[None, :]).ravel()
            length = (length[:, None] * r[None, :]).ravel()
        return left, length

    def contains(self, x, depth: int = 60):
        """Whether x lies in the depth-``depth`` cylinder union (attractor proxy)."""
        y = np.array(x, dtype=float, ndmin=1)
        ok = (y >= 0) & (y <= 1)
        b = np.asarray(self.offsets)
        r = np.asarray(self.ratios)
        for _ in range(depth):
            j = np.clip(np.searchsorted(b, y, side="right") - 1, 0, self.k - 1)
            inside = (y >= b[j]) & (y <= b[j] + r[j])
            ok &= inside
            y = np.where(inside, (y - b[j]) / r[j], 0.5)
        return ok


@dataclass(frozen=True)
class SelfSimilar:
    ifs: IFS
    weights: tuple[float, ...] = ()
    scale: float = 1.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights) or self.ifs.natural_weights()
        if len(w) != self.ifs.k or any(x <= 0 for x in w) or abs(math.fsum(w) - 1) > 1e-12:
            raise InvalidMeasure("self-similar weights must be a positive probability vector")
        if not self.scale > 0:
            raise InvalidMeasure("self-similar scale must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        return self.scale

    @property
    def support_bounds(self):
        b, r = self.ifs.offsets, self.ifs.ratios
        return b[0] * 1.0, b[-1] + r[-1]

    @cached_property
    def depth(self) -> int:
        return max(1, math.ceil(math.log(SS_TOL) / math.log(max(self.weights))))

    @property
    def error_bound(self) -> float:
        return self.scale * max(self.weights) ** self.depth

    def is_natural(self, tol: float = 1e-9) -> bool:
        return all(abs(a - b) < tol for a, b in zip(self.weights, self.ifs.natural_weights()))

    def same_shape(self, other: "SelfSimilar") -> bool:
        return self.ifs == other.ifs and np.allclose(self.weights, other.weights, rtol=0, atol=1e-15)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        y = np.array(x, ndmin=1)
        b = np.asarray(self.ifs.offsets)
        r = np.asarray(self.ifs.ratios)
        p = np.asarray(self.weights)
        before = np.concatenate([[0.0], np.cumsum(p)])
        acc = np.zeros_like(y)
        mult = np.ones_like(y)
        active = np.ones(y.shape, dtype=bool)
        for _ in range(self.depth):
            above = active & (y >= 1)
            acc = np.where(above, acc + mult, acc)
            active &= (y >= 0) & (y < 1)
            j = np.searchsorted(b, y, side="right") - 1
            jc = np.maximum(j, 0)
            in_img = active & (j >= 0) & (y <= b[jc] + r[jc])
            gap = active & (j >= 0) & ~in_img
            acc = np.where(gap, acc + mult * before[jc + 1], acc)
            acc = np.where(in_img, acc + mult * before[jc], acc)
            mult = np.where(in_img, mult * p[jc], mult)
            y = np.where(in_img, (y - b[jc]) / r[jc], y)
            active = in_img
        acc = np.where(active, acc + mult * np.clip(y, 0, 1), acc)
        out = self.scale * acc
        return out.reshape(x.shape) if x.ndim else float(out[0])

    cdf_left = cdf

    def point_mass(self, pts):
        return np.zeros(np.shape(pts))

    def scaled(self, c: float) -> "SelfSimilar":
        return SelfSimilar(self.ifs, self.weights, self.scale * c)

    def sample(self, rng: np.random.Generator, n: int):
        b = np.asarray(self.ifs.offsets)
        r = np.asarray(self.ifs.ratios)
        p = np.asarray(self.weights)
        pos = np.zeros(n)
        length = np.ones(n)
        depth = max(1, math.ceil(math.log(1e-17) / math.log(max(r))))
        for _ in range(depth):
            j = rng.choice(len(p), size=n, p=p)
            pos += length * b[j]
            length *= r[j]
        return pos + length * rng.random(n)


MeasureComponent = Union[AtomList, AtomFamily, PiecewiseDensity, GeometricBlocks, SelfSimilar]


# -- the measure ------------------------------------------------------------


def _merge_key(comp):
    if isinstance(comp, AtomList):
        return ("atoms",)
    if isinstance(comp, PiecewiseDensity):
        return ("density",)
    if isinstance(comp, AtomFamily):
        return ("family", comp.p, comp.q, comp.n_min, comp.n_max)
    if isinstance(comp, GeometricBlocks):
        return ("blocks", comp.a, comp.n_min, comp.n_max)
    return ("selfsim", comp.ifs, comp.weights)


def _merge_densities(parts: Sequence[PiecewiseDensity]) -> PiecewiseDensity:
    edges = sorted({e for d in parts for a, b, _ in d.pieces for e in (a, b)})
    heights = np.zeros(len(edges) - 1)
    e = np.asarray(edges)
    mid = 0.5 * (e[:-1] + e[1:])
    for d in parts:
        for a, b, h in d.pieces:
            heights[(mid > a) & (mid < b)] += h
    pieces = []
    for lo, hi, h in zip(edges[:-1], edges[1:], heights):
        if h <= 0:
            continue
        if pieces and pieces[-1][1] == lo and pieces[-1][2] == h:
            pieces[-1] = (pieces[-1][0], hi, h)
        else:
            pieces.append((lo, hi, float(h)))
    return PiecewiseDensity(tuple(pieces))


def canonical_components(components) -> tuple:
    groups: dict = {}
    for comp in components:
        groups.setdefault(_merge_key(comp), []).append(comp)
    out = []
    for key, comps in groups.items():
        if len(comps) == 1:
            out.append(comps[0])
        elif key[0] == "atoms":
            out.append(AtomList(sum((c.locations for c in comps), ()), sum((c.weights for c in comps), ())))
        elif key[0] == "density":
            out.append(_merge_densities(comps))
        elif key[0] == "family":
            out.append(comps[0].scaled(sum(c.c for c in comps) / comps[0].c))
        elif key[0] == "blocks":
            out.append(comps[0].scaled(sum(c.coef for c in comps) / comps[0].coef))
        else:
            out.append(comps[0].scaled(sum(c.scale for c in comps) / comps[0].scale))
    order = ["atoms", "family", "density", "blocks", "selfsim"]
    out.sort(key=lambda c: order.index(_merge_key(c)[0]))
    return tuple(out)


@dataclass(frozen=True)
class SymbolicMeasure:
    components: tuple = ()
    total_mass: float = field(init=False)

    def __post_init__(self):
        comps = canonical_components(tuple(self.components))
        for c in comps:
            if not c.mass > 0:
                raise InvalidMeasure(f"component {c!r} has non-positive mass")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "total_mass", float(math.fsum(c.mass for c in comps)))

    @property
    def bounds(self) -> tuple[float, float]:
        if not self.components:
            return 0.0, 0.0
        los, his = zip(*(c.support_bounds for c in self.components))
        return float(min(los)), float(max(his))

    def of_type(self, kind):
        return [c for c in self.components if isinstance(c, kind)]

    @property
    def is_probability(self) -> bool:
        return abs(self.total_mass - 1.0) <= MASS_RTOL

    @property
    def error_bound(self) -> float:
        err = 0.0
        for c in self.components:
            if isinstance(c, SelfSimilar):
                err += 2 * c.error_bound
            elif isinstance(c, AtomFamily):
                err += 1e-15 * c.mass
        return err

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c in self.components:
            out = out + c.cdf(x)
        return out if out.ndim else float(out)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c in self.components:
            out = out + c.cdf_left(x)
        return out if out.ndim else float(out)

    def point_mass(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape)
        for c in self.components:
            out = out + c.point_mass(pts)
        return out

    def interval_mass(self, iv: Interval) -> float:
        upper = self.cdf(iv.hi) if iv.hi_closed else self.cdf_left(iv.hi)
        lower = self.cdf_left(iv.lo) if iv.lo_closed else self.cdf(iv.lo)
        return max(float(upper - lower), 0.0)

    def __add__(self, other: "SymbolicMeasure") -> "SymbolicMeasure":
        return SymbolicMeasure(self.components + other.components)

    def scaled(self, c: float) -> "SymbolicMeasure":
        return SymbolicMeasure(tuple(comp.scaled(c) for comp in self.components))


# -- constructors -----------------------------------------------------------


def dirac(x: float = 0.0, weight: float = 1.0) -> SymbolicMeasure:
    return SymbolicMeasure((AtomList((x,), (weight,)),))


def atoms(locations, weights) -> SymbolicMeasure:
    return SymbolicMeasure((AtomList(tuple(locations), tuple(weights)),))


def lebesgue(a: float = 0.0, b: float = 1.0, height: float = 1.0) -> SymbolicMeasure:
    return SymbolicMeasure((PiecewiseDensity(((a, b, height),)),))


def density(pieces) -> SymbolicMeasure:
    return SymbolicMeasure((PiecewiseDensity(tuple(pieces)),))


def atom_family(p: float = 1.0, q: float = 2.0, c: float = 1.0, n_max=math.inf) -> SymbolicMeasure:
    return SymbolicMeasure((AtomFamily(p, q, c, n_max),))


def self_similar(ratios, offsets=(), weights=(), scale: float = 1.0) -> SymbolicMeasure:
    return SymbolicMeasure((SelfSimilar(IFS(tuple(ratios), tuple(offsets)), tuple(weights), scale),))


# -- operations -------------------------------------------------------------


def _skeleton_mass(mu: SymbolicMeasure, A: BorelTestSet) -> float:
    sk = A.skeleton
    base = BorelTestSet(A.intervals, A.points)
    total = 0.0
    if sk.points:
        pts = np.asarray(sk.points)
        pts = pts[~base.contains(pts)]
        total += float(np.sum(mu.point_mass(pts)))
        covered = BorelTestSet(A.intervals, A.points + tuple(pts))
    else:
        covered = base
    for p in sk.power_families:
        for c in mu.components:
            if isinstance(c, AtomFamily):
                if c.p != p:
                    raise UnsupportedSet("skeleton family exponent differs from the measure's family")
                total += c.mass - _component_mass(c, covered)
            elif isinstance(c, AtomList):
                locs = np.asarray(c.locations)
                probe = AtomFamily(p, 2.0)
                hit = (probe.index_of(locs) > 0) & ~covered.contains(locs)
                total += float(np.sum(np.asarray(c.weights)[hit]))
    for ifs in sk.attractors:
        for c in mu.components:
            if isinstance(c, SelfSimilar):
                if c.ifs != ifs:
                    raise UnsupportedSet("attractor skeleton of a different IFS")
                total += c.mass - _component_mass(c, covered)
            elif isinstance(c, AtomList):
                locs = np.asarray(c.locations)
                hit = ifs.contains(locs) & ~covered.contains(locs)
                total += float(np.sum(np.asarray(c.weights)[hit]))
            elif isinstance(c, AtomFamily):
                raise UnsupportedSet("atom family against an attractor skeleton")
    return total


def _component_mass(comp, A: BorelTestSet) -> float:
    total = 0.0
    for iv in A.intervals:
        upper = comp.cdf(iv.hi) if iv.hi_closed else comp.cdf_left(iv.hi)
        lower = comp.cdf_left(iv.lo) if iv.lo_closed else comp.cdf(iv.lo)
        total += max(float(upper - lower), 0.0)
    if A.points:
        total += float(np.sum(comp.point_mass(np.asarray(A.points))))
    return total


def mass(mu: SymbolicMeasure, A: BorelTestSet, *, return_error: bool = False):
    """mu(A), optionally with a certified absolute error bound."""
    value = sum(_component_mass(c, BorelTestSet(A.intervals, A.points)) for c in mu.components)
    if A.skeleton is not None:
        value += _skeleton_mass(mu, A)
    value = min(max(value, 0.0), mu.total_mass)
    if return_error:
        return value, mu.error_bound
    return value


def cdf(mu: SymbolicMeasure, x):
    return mu.cdf(x)


def ball_mass(mu: SymbolicMeasure, x, r: float):
    """Mass of the closed ball [x - r, x + r]; vectorised over x."""
    if not r > 0:
        raise ValueError("ball radius must be positive")
    x = np.asarray(x, dtype=float)
    out = np.maximum(mu.cdf(x + r) - mu.cdf_left(x - r), 0.0)
    return out if np.ndim(out) else float(out)


def sample(mu: SymbolicMeasure, n: int, seed: int) -> np.ndarray:
    if not mu.is_probability:
        raise NotProbability(f"total mass {mu.total_mass!r} is not 1")
    rng = np.random.default_rng(seed)
    masses = np.asarray([c.mass for c in mu.components])
    counts = rng.multinomial(n, masses / masses.sum())
    parts = [c.sample(rng, int(k)) for c, k in zip(mu.components, counts) if k > 0]
    out = np.concatenate(parts) if parts else np.empty(0)
    return out[rng.permutation(len(out))]


def mix(coefficients, measures) -> SymbolicMeasure:
    if len(coefficients) != len(measures) or not measures:
        raise ValueError("mix needs equally many coefficients and measures, at least one")
    comps = []
    for c, mu in zip(coefficients, measures):
        if not c > 0:
            raise ValueError("mixture coefficients must be positive")
        comps.extend(comp.scaled(c) for comp in mu.components)
    return SymbolicMeasure(tuple(comps))


def normalize(mu: SymbolicMeasure) -> SymbolicMeasure:
    if not mu.total_mass > 0:
        raise ZeroMass("cannot normalise the zero measure")
    return mu.scaled(1.0 / mu.total_mass)


def _restrict_family(c: AtomFamily, A: BorelTestSet):
    out = []
    for iv in A.intervals:
        first = float(c._first_index_at_most(iv.hi, strict=not iv.hi_closed))
        if iv.lo <= 0:
            last = math.inf
        else:
            last = float(c._first_index_at_most(iv.lo, strict=iv.lo_closed)) - 1
        lo, hi = max(first, c.n_min), min(last, c.n_max)
        if hi >= lo:
            out.append(AtomFamily(c.p, c.q, c.c, hi, int(lo)))
    if A.points:
        pts = np.asarray(A.points)
        w = c.point_mass(pts)
        if np.any(w > 0):
            out.append(AtomList(tuple(pts[w > 0]), tuple(w[w > 0])))
    return out


def _block_index(a: float, x: float) -> float:
    """Index of the block containing x in (0, 1)."""
    t = math.log(x) / math.log(a)
    return max(math.ceil(math.sqrt(t)) - 1, 0)


def _restrict_blocks(c: GeometricBlocks, A: BorelTestSet):
    out = []
    for iv in A.intervals:
        lo, hi = max(iv.lo, 0.0), min(iv.hi, 1.0)
        if hi <= lo:
            continue
        j_hi = _block_index(c.a, hi) if hi < 1 else c.n_min
        j_lo = _block_index(c.a, lo) if lo > 0 else math.inf
        j_hi, j_lo = max(j_hi, c.n_min), min(j_lo, c.n_max)
        if j_hi > j_lo:
            continue
        full_lo, full_hi = j_hi, j_lo
        pieces = []
        for j in {j_hi, j_lo} - {math.inf}:
            left, right, m = c.block(int(j))
            a_, b_ = max(left, lo), min(right, hi)
            if a_ <= left and b_ >= right:
                continue
            if j == j_hi:
                full_lo = j_hi + 1
            if j == j_lo:
                full_hi = j_lo - 1
            if b_ > a_:
                pieces.append((a_, b_, m / (right - left)))
        if pieces:
            out.append(PiecewiseDensity(tuple(pieces)))
        if full_hi >= full_lo:
            out.append(GeometricBlocks(c.a, c.coef, full_hi, int(full_lo)))
    return out


def restrict(mu: SymbolicMeasure, A: BorelTestSet) -> SymbolicMeasure:
    """mu restricted to a finite union of intervals and points."""
    if A.skeleton is not None:
        raise UnsupportedSet("restriction to a skeleton set is not represented in the class")
    comps = []
    for c in mu.components:
        if isinstance(c, AtomList):
            keep = A.contains(c.locations)
            if np.any(keep):
                comps.append(AtomList(tuple(np.asarray(c.locations)[keep]), tuple(np.asarray(c.weights)[keep])))
        elif isinstance(c, AtomFamily):
            comps.extend(_restrict_family(c, A))
        elif isinstance(c, PiecewiseDensity):
            pieces = []
            for a, b, h in c.pieces:
                for iv in A.intervals:
                    lo, hi = max(a, iv.lo), min(b, iv.hi)
                    if hi > lo:
                        pieces.append((lo, hi, h))
            if pieces:
                comps.append(PiecewiseDensity(tuple(pieces)))
        elif isinstance(c, GeometricBlocks):
            comps.extend(_restrict_blocks(c, A))
        else:
            lo, hi = c.support_bounds
            inner = _component_mass(c, A)
            if inner >= c.mass - 1e-12:
                comps.append(c)
            elif inner > 1e-12:
                raise UnsupportedSet("restricting a self-similar measure to a partial set")
    return SymbolicMeasure(tuple(comps))
