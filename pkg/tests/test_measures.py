import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimlab.errors import InvalidMeasure, NotProbability, UnsupportedSet, ZeroMass
from dimlab.measures import (
    IFS,
    AtomFamily,
    GeometricBlocks,
    SymbolicMeasure,
    atom_family,
    atoms,
    ball_mass,
    cdf,
    dirac,
    hurwitz_sum,
    lebesgue,
    mass,
    mix,
    normalize,
    restrict,
    sample,
    self_similar,
)
from dimlab.sets import BorelTestSet, Interval, Skeleton


# -- test sets ---------------------------------------------------------------


def test_intervals_merge_and_absorb_points():
    A = BorelTestSet((Interval(0, 1, True, False), Interval(1, 2, False, True)), points=(1.0, 0.5, 3.0))
    assert A.intervals == (Interval(0, 2),)
    assert A.points == (3.0,)


def test_touching_open_ends_stay_apart():
    A = BorelTestSet((Interval(0, 1, True, False), Interval(1, 2, False, True)))
    assert len(A.intervals) == 2
    assert not A.contains(1.0)


def test_disjointness():
    assert BorelTestSet.interval(0, 1).is_disjoint(BorelTestSet.interval(1, 2, False, True))
    assert not BorelTestSet.interval(0, 1).is_disjoint(BorelTestSet.of_points([1.0]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 3), st.booleans(), st.booleans()), max_size=5),
       st.lists(st.integers(0, 12), max_size=4))
def test_canonical_form_is_membership_exact_and_minimal(raw, pts):
    ivs = tuple(Interval(lo, lo + w, c0, c1) for lo, w, c0, c1 in raw)
    A = BorelTestSet(ivs, points=tuple(float(p) for p in pts))
    grid = np.arange(0, 12.25, 0.25)
    want = np.zeros(grid.shape, bool)
    for iv in ivs:
        want |= iv.contains(grid)
    want |= np.isin(grid, pts)
    np.testing.assert_array_equal(A.contains(grid), want)
    # canonical intervals never touch
    for a, b in zip(A.intervals, A.intervals[1:]):
        assert a.hi < b.lo or (a.hi == b.lo and not (a.hi_closed or b.lo_closed))
    assert BorelTestSet(A.intervals, A.points) == A


def test_bad_interval():
    with pytest.raises(ValueError):
        Interval(2, 1)


# -- masses ----------------------------------------------------------------------


def test_lebesgue_interval_mass():
    assert mass(lebesgue(), BorelTestSet.interval(0.25, 0.5)) == pytest.approx(0.25, abs=1e-15)


def test_dirac_point_and_open_interval():
    d = dirac(0.3, 2.0)
    assert mass(d, BorelTestSet.of_points([0.3])) == 2.0
    assert mass(d, BorelTestSet.interval(0.3, 1, lo_closed=False)) == 0.0


def test_cdf_of_mixture():
    mu = mix([0.5, 0.5], [dirac(0.0), lebesgue()])
    assert cdf(mu, 0.0) == pytest.approx(0.5)
    assert cdf(mu, 0.5) == pytest.approx(0.75)
    assert mu.cdf_left(np.asarray([0.0]))[0] == 0.0


def test_family_tail_against_mpmath():
    fam = AtomFamily(1.0, 2.0)
    for n in (0, 1, 10, 1000, 10**6):
        assert fam.tail_mass(n) == pytest.approx(float(mpmath.zeta(2, n + 1)), rel=1e-12)


def test_hurwitz_sum_finite_range():
    assert hurwitz_sum(2.0, 1, 3) == pytest.approx(1 + 1 / 4 + 1 / 9, rel=1e-14)
    assert hurwitz_sum(2.0, 5, 4) == 0.0


def test_family_cdf_counts_atoms_below():
    fam = atom_family(1.0, 2.0)
    # atoms at 1/i lying in [0, 1/3] are i >= 3
    assert cdf(fam, 1 / 3) == pytest.approx(float(mpmath.zeta(2, 3)), rel=1e-12)


def test_family_skeleton_has_full_mass():
    fam = atom_family(1.0, 2.0)
    A = BorelTestSet.of_skeleton(Skeleton(power_families=(1.0,)))
    assert mass(fam, A) == pytest.approx(math.pi**2 / 6, rel=1e-12)


def test_lebesgue_skeleton_is_null():
    A = BorelTestSet.of_skeleton(Skeleton(points=(0.5,), power_families=(1.0,)))
    assert mass(lebesgue(), A) == 0.0


def test_self_similar_cdf_cantor_points():
    mu = self_similar((1 / 3, 1 / 3))
    assert cdf(mu, 1 / 3) == pytest.approx(0.5, abs=1e-12)
    assert cdf(mu, 0.25) == pytest.approx(1 / 3, abs=1e-9)  # 1/4 = 0.0202... in base 3


def test_attractor_skeleton_mass():
    mu = self_similar((1 / 3, 1 / 3))
    ifs = mu.components[0].ifs
    A = BorelTestSet.of_skeleton(Skeleton(attractors=(ifs,)))
    assert mass(mu, A) == pytest.approx(1.0)
    with pytest.raises(UnsupportedSet):
        restrict(mu, BorelTestSet.interval(0, 0.5))


def test_geometric_blocks_masses():
    a = 0.5
    g = SymbolicMeasure((GeometricBlocks(a),))
    assert g.total_mass == pytest.approx(1.0)
    lo, hi, m = g.components[0].block(0)
    assert (lo, hi) == (a, 1.0)
    assert m == pytest.approx(1 - a)
    # mass of [0, a**(n*n)] is a**n
    for n in (1, 3, 10, 20):
        assert mass(g, BorelTestSet.interval(0, a ** (n * n))) == pytest.approx(a**n, rel=1e-10)


def test_ball_mass_closed():
    assert ball_mass(dirac(0.2), 0.0, 0.2) == 1.0
    assert ball_mass(lebesgue(), 0.5, 0.1) == pytest.approx(0.2)
    np.testing.assert_allclose(ball_mass(lebesgue(), [0.0, 1.0], 0.1), [0.1, 0.1])


# -- operations ------------------------------------------------------------------


def test_mix_and_normalize():
    mu = mix([2.0, 2.0], [dirac(0.0), lebesgue()])
    assert mu.total_mass == pytest.approx(4.0)
    assert normalize(mu).is_probability
    with pytest.raises(ZeroMass):
        normalize(SymbolicMeasure(()))
    with pytest.raises(ValueError):
        mix([-1.0], [dirac()])


def test_restrict_family_and_density():
    fam = atom_family(1.0, 2.0)
    sub = restrict(fam, BorelTestSet.interval(0.2, 1.0))
    # atoms 1, 1/2, ..., 1/5
    assert sub.total_mass == pytest.approx(sum(1 / i**2 for i in range(1, 6)))
    sub = restrict(lebesgue(), BorelTestSet.interval(0.5, 3.0))
    assert sub.total_mass == pytest.approx(0.5)


def test_restrict_blocks_by_index():
    g = SymbolicMeasure((GeometricBlocks(0.5),))
    sub = restrict(g, BorelTestSet.interval(0.5**4, 1.0))
    assert sub.total_mass == pytest.approx(0.5 + 0.25)


def test_invalid_constructions():
    with pytest.raises(InvalidMeasure):
        atoms([0.0], [-1.0])
    with pytest.raises(InvalidMeasure):
        IFS((0.6, 0.6))
    with pytest.raises(InvalidMeasure):
        lebesgue(1.0, 0.0)


def test_sample_requires_probability():
    with pytest.raises(NotProbability):
        sample(lebesgue(0, 2), 10, 0)


def test_sample_is_seeded():
    mu = mix([0.5, 0.5], [dirac(0.0), self_similar((1 / 3, 1 / 3))])
    np.testing.assert_array_equal(sample(mu, 500, 3), sample(mu, 500, 3))
    assert not np.array_equal(sample(mu, 500, 3), sample(mu, 500, 4))


def test_family_sampler_matches_weights():
    mu = normalize(atom_family(1.0, 2.0))
    x = sample(mu, 20_000, 1)
    share = np.mean(x == 1.0)
    assert share == pytest.approx(6 / math.pi**2, abs=0.015)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 3)), min_size=1, max_size=6),
       st.floats(-6, 6), st.floats(0, 3))
def test_interval_mass_matches_cdf(pts, lo, width):
    mu = atoms([p[0] for p in pts], [p[1] for p in pts]) + lebesgue(-1, 1, 0.5)
    hi = lo + width
    got = mass(mu, BorelTestSet.interval(lo, hi))
    want = float(mu.cdf(np.asarray([hi]))[0] - mu.cdf_left(np.asarray([lo]))[0])
    assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.05, 0.3), min_size=2, max_size=3), st.floats(0, 1))
def test_self_similar_cdf_monotone_and_bounded(ratios, x):
    mu = self_similar(tuple(ratios))
    xs = np.asarray([0.0, x * 0.5, x, 1.0])
    f = mu.cdf(xs)
    assert np.all(np.diff(f) >= -1e-12)
    assert f[-1] == pytest.approx(1.0, abs=1e-12)
