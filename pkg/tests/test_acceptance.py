"""Acceptance suite: one test and one summary line per criterion."""

import itertools
import math
import os
import subprocess
import sys
import time

import numpy as np
from scipy import stats

from dimlab import numeric
from dimlab.exact import MAPPINGS, bowen_solve, correlation_integral_exact, exact_dims
from dimlab.measures import (
    atom_family,
    atoms,
    density,
    dirac,
    lebesgue,
    mix,
    normalize,
    restrict,
    sample,
    self_similar,
)
from dimlab.sequences import (
    NAMES,
    VIOLATED,
    make_example,
    random_scheffe_sequence,
    semicontinuity_check,
)
from dimlab.errors import UnsupportedSet
from dimlab.sets import BorelTestSet
from dimlab.tv import CERTIFIED, abs_continuous, equivalent, tv_converges, tv_distance


def test_criterion_1_tv_exactness(record):
    t0 = time.perf_counter()
    seq6 = make_example("ex6")
    worst6 = max(abs(tv_distance(seq6[n], seq6.limit) - 1.0 / n) for n in range(1, 1001))
    worst7 = {}
    for a in (0.3, 0.5, 0.9):
        seq7 = make_example("ex7", a=a)
        worst7[a] = max(
            abs(tv_distance(seq7[n], seq7.limit) - a ** (n + 1) / (1 - a ** (n + 1))) for n in range(0, 31)
        )
    elapsed = time.perf_counter() - t0
    ok6 = worst6 <= 1e-10
    ok7 = all(w <= 1e-10 for w in worst7.values())
    detail = (f"ex6 max err {worst6:.2e}; block sequence max err vs a^(n+1)/(1-a^(n+1)) "
              + ", ".join(f"a={a}: {w:.2e}" for a, w in worst7.items()) + f"; {elapsed:.2f}s")
    record("criterion 1", ok6 and ok7 and elapsed < 5, detail)
    assert ok6
    assert elapsed < 5
    assert ok7, detail


def test_criterion_2_bowen(record):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        r = rng.dirichlet(np.ones(k + 1))[:k] * rng.uniform(0.2, 1.0)
        r = np.clip(r, 1e-6, None)
        h = bowen_solve(tuple(r))
        worst = max(worst, abs(math.fsum(x**h for x in r) - 1.0))
    e1 = abs(bowen_solve((1 / 3, 1 / 3)) - math.log(2) / math.log(3))
    e2 = abs(bowen_solve((0.5, 0.25)) - math.log2((1 + math.sqrt(5)) / 2))
    ok = worst < 1e-12 and e1 < 1e-10 and e2 < 1e-10
    record("criterion 2", ok, f"max residual {worst:.2e}; closed forms {e1:.1e}, {e2:.1e}")
    assert ok


def test_criterion_3_correlation_oracle(record):
    rs = tuple(np.logspace(math.log10(0.5), -3, 12))
    cases = {
        "uniform": lebesgue(),
        "ex5 n=10": make_example("ex5")[10],
        "ex6 n=10": make_example("ex6")[10],
    }
    worst = {}
    for name, mu in cases.items():
        x = sample(mu, 10_000, 42)
        n = len(x)
        total = n * (n - 1) // 2
        z = 0.0
        for r, k in zip(rs, numeric.pair_counts(x, rs)):
            exact = correlation_integral_exact(mu, r)
            se = math.sqrt(exact * (1 - exact) / n)
            z = max(z, abs(k / total - exact) / se)
        worst[name] = z
    ok = all(z <= 3 for z in worst.values())
    record("criterion 3", ok, "max |z| " + ", ".join(f"{k}: {v:.2f}" for k, v in worst.items()))
    assert ok


def test_criterion_4_estimators(record):
    out = {}
    t0 = time.perf_counter()
    x = sample(lebesgue(), 10_000, 42)
    out["gp uniform"] = (numeric.correlation_dim_gp(x, numeric.default_schedule(1e-3, 1e-1), (1e-2, 1e-1)).slope, 1.0)
    y = sample(self_similar((1 / 3, 1 / 3)), 10_000, 42)
    out["gp cantor"] = (numeric.correlation_dim_gp(y, numeric.default_schedule(1e-4, 1e-1)).slope,
                        math.log(2) / math.log(3))
    z = sample(dirac(0.0), 10_000, 42)
    out["gp dirac"] = (numeric.correlation_dim_gp(z, numeric.default_schedule(1e-4, 1e-1)).slope, 0.0)
    est = numeric.box_dimension_estimate(atom_family(1.0, 2.0), [0.0], numeric.default_schedule(1e-6, 1e-2),
                                         window=(1e-6, 1e-2))
    out["box inverse squares"] = (est[0.0].slope, 0.5)
    elapsed = time.perf_counter() - t0
    ok = all(abs(v - t) <= 0.05 for v, t in out.values()) and out["gp dirac"][0] == 0.0 and elapsed < 30
    record("criterion 4", ok, ", ".join(f"{k} {v:.4f}" for k, (v, _) in out.items()) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_5_example_ledger(record, tmp_path):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "dimlab.cli", "verify", "--all", "--horizon", "50", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    ok = proc.returncode == 0 and elapsed < 120
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    record("criterion 5", ok, f"exit {proc.returncode}, {last}, {elapsed:.1f}s")
    assert ok, proc.stdout + proc.stderr


def test_criterion_6_semicontinuity(record):
    worst = math.inf
    failures = []
    for seed in range(100):
        rep = semicontinuity_check(random_scheffe_sequence(seed, 30), 30)
        if rep.mode_status != CERTIFIED:
            failures.append(f"scheffe {seed} not certified")
        for e in rep.entries:
            if e.margin is not None:
                worst = min(worst, e.margin)
            if e.verdict == VIOLATED:
                failures.append(f"scheffe {seed} {e.mapping}")
    for name in ("ex5", "ex6", "ex7", "ex8"):
        seq = make_example(name)
        if tv_converges(seq, 50, 0.05).status != CERTIFIED:
            failures.append(f"{name} not TV-certified")
            continue
        rep = semicontinuity_check(seq, 50)
        for e in rep.entries:
            if e.margin is not None and e.verdict != "NotApplicable(unsupported)":
                worst = min(worst, e.margin)
            if e.verdict == VIOLATED:
                failures.append(f"{name} {e.mapping}")
    rep4 = semicontinuity_check(make_example("ex4"), 50)
    gaps = [e.margin for e in rep4.entries if e.kind == "upper-lsc"]
    ex4_ok = all(e.verdict == "NotApplicable(setwise)" for e in rep4.entries) and min(gaps) == -1.0
    ok = not failures and worst >= -1e-9 and ex4_ok
    record("criterion 6", ok, f"min margin {worst:g}; ex4 gap {min(gaps):g}; failures {failures[:3]}")
    assert ok


def _class_pairs():
    """(nu1, nu2) pairs from the examples: restrictions, normalizations, scalings."""
    base = []
    for name in NAMES:
        seq = make_example(name)
        for n in list(seq.indices(6))[-2:]:
            base.append(seq[n])
        base.append(seq.limit)
    pairs = []
    cut = BorelTestSet.interval(0.5, 2.0)
    for mu in base:
        pairs.append((mu.scaled(3.0), mu))
        pairs.append((normalize(mu), mu))
        try:
            sub = restrict(mu, cut)
        except UnsupportedSet:
            sub = None
        if sub is not None and sub.components:
            pairs.append((sub, mu))
    for mu, nu in itertools.permutations(base, 2):
        pairs.append((mu, nu))
    return pairs


def test_criterion_7_ordering(record):
    checked = eq_checked = 0
    bad = []
    for mu, nu in _class_pairs():
        if not abs_continuous(mu, nu):
            continue
        t1, t2 = exact_dims(mu), exact_dims(nu)
        both_equiv = equivalent(mu, nu)
        for key in [k for k in MAPPINGS if k.endswith("_U")]:
            a, b = t1.value(key), t2.value(key)
            if a is None or b is None:
                continue
            checked += 1
            if not a <= b:
                bad.append(f"{key}: {a} > {b}")
            if both_equiv:
                eq_checked += 1
                if a != b:
                    bad.append(f"{key}: {a} != {b} for equivalent measures")
    ok = not bad and checked > 0 and eq_checked > 0
    record("criterion 7", ok, f"{checked} ordering and {eq_checked} equality comparisons, {len(bad)} broken")
    assert ok, bad[:5]


def _brute_min_boxes(masses, delta):
    """Fewest boxes reaching (1 - delta) of the mass, over all 2**k subsets."""
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int64)
    for m in masses:
        sums = np.concatenate([sums, sums + m])
        sizes = np.concatenate([sizes, sizes + 1])
    need = (1 - delta) * float(np.sum(masses)) * (1 - 1e-12)
    return int(sizes[sums >= need].min())


def _random_measure(rng):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        k = int(rng.integers(1, 21))
        return normalize(atoms(rng.uniform(0, 1, k), rng.uniform(0.1, 1, k)))
    if kind == 1:
        edges = np.sort(rng.uniform(0, 1, 3))
        return normalize(density([(edges[0], edges[1], rng.uniform(0.5, 2)), (edges[1], edges[2], rng.uniform(0.5, 2))]))
    return normalize(mix([0.5, 0.5], [dirac(float(rng.uniform(0, 1))), lebesgue(*sorted(rng.uniform(0, 1, 2)))]))


def test_criterion_8_structural(record, tmp_path):
    rng = np.random.default_rng(8)
    # greedy box count against exhaustive search
    greedy_bad = 0
    instances = 0
    largest = 0
    while instances < 200:
        if instances % 10 == 0:
            # one atom per box, pushing the occupied count to the limit
            r = 0.05
            k = int(rng.integers(15, 21))
            cells = rng.choice(20, size=k, replace=False)
            mu = normalize(atoms((cells + 0.5) * r, rng.uniform(0.1, 1, k)))
        else:
            mu = _random_measure(rng)
            r = float(rng.choice([0.05, 0.1, 0.2]))
        masses = list(numeric.box_masses(mu, r))
        if len(masses) > 20:
            continue
        instances += 1
        largest = max(largest, len(masses))
        for delta in (0.0, 0.1, 0.3):
            if numeric.min_box_count(mu, r, delta) != _brute_min_boxes(masses, delta):
                greedy_bad += 1
    # metric axioms
    axiom_bad = 0
    for _ in range(1000):
        m = [_random_measure(rng) for _ in range(3)]
        d01, d12, d02 = tv_distance(m[0], m[1]), tv_distance(m[1], m[2]), tv_distance(m[0], m[2])
        if abs(d01 - tv_distance(m[1], m[0])) > 1e-10 or d01 < -1e-10:
            axiom_bad += 1
        if d02 > d01 + d12 + 1e-10 or tv_distance(m[0], m[0]) > 1e-10:
            axiom_bad += 1
    # DKW band at 99%: a single run leaves the band with probability <= 1%,
    # so each family runs 20 seeds and may exceed at most the binomial
    # 99.9% quantile of exceedances
    eps = math.sqrt(math.log(2 / 0.01) / (2 * 10_000))
    allowed = int(stats.binom.ppf(0.999, 20, 0.01))
    dkw = {}
    for name, mu in (("uniform", lebesgue()), ("cantor", self_similar((1 / 3, 1 / 3))),
                     ("inverse squares", normalize(atom_family(1.0, 2.0)))):
        over = 0
        for seed in range(20):
            xs = np.sort(sample(mu, 10_000, seed))
            pts = np.unique(xs)
            n = len(xs)
            upper = np.abs(np.searchsorted(xs, pts, side="right") / n - mu.cdf(pts)).max()
            lower = np.abs(np.searchsorted(xs, pts, side="left") / n - mu.cdf_left(pts)).max()
            over += max(upper, lower) > eps
        dkw[name] = over
    # byte-identical outputs across runs and thread counts
    outs = []
    for threads in ("1", "1", "4"):
        env = dict(os.environ, DIMLAB_THREADS=threads)
        d = tmp_path / f"run{len(outs)}"
        subprocess.run([sys.executable, "-m", "dimlab.cli", "estimate", "--example", "ex3", "--method", "gp",
                        "--seed", "5", "--out", str(d)], check=True, env=env, capture_output=True)
        outs.append(((d / "estimate-gp.json").read_bytes(), (d / "estimate-gp.csv").read_bytes()))
    identical = all(o == outs[0] for o in outs)
    ok = greedy_bad == 0 and axiom_bad == 0 and all(v <= allowed for v in dkw.values()) and identical
    record("criterion 8", ok, f"greedy mismatches {greedy_bad}/{instances} (up to {largest} boxes), axiom failures {axiom_bad}, DKW "
           + ", ".join(f"{k} {v}/20" for k, v in dkw.items()) + f" outside the band (allowed {allowed}), identical outputs {identical}")
    assert ok
