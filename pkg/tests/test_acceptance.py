"""End-to-end acceptance checks, one test per criterion.

``conftest.py`` prints a PASS/FAIL line for each ``test_criterion_NN_*``.
"""
import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from gradcat.criteria import blows_up, verdict_from_coefficients
from gradcat.decisive import coefficients, decisive_function
from gradcat.dynamics import (
    equilibria,
    integrate_derivatives,
    integrate_extended_oracle,
    radon_derivatives,
    solve_characteristic,
)
from gradcat.epmodels import EPModel, model_matrix, sample_region
from gradcat.linalg2 import jordanize
from gradcat.sampling import ROUTES, random_matrix, stratified_instances
from gradcat.simplewave import bounded_integral_curves, first_integral

GOLDEN = (1 + math.sqrt(5)) / 2


def _summary(reports):
    return {(round(r.location[0], 12) + 0.0, round(r.location[1], 12) + 0.0): (r.kind, r.stability)
            for r in reports}


def test_criterion_01_oracle_agreement():
    start = time.perf_counter()
    decided = agreed = margin = undecided = 0
    for _route, Q, v0 in stratified_instances(10_000, seed=2024):
        q = decisive_function(jordanize(Q), v0)
        if abs(q.infimum()) < 1e-6:
            margin += 1
            continue
        ref = integrate_extended_oracle(Q, v0)
        if ref.blew_up is None:
            undecided += 1
            continue
        decided += 1
        agreed += blows_up(Q, v0).blows_up == ref.blew_up
    elapsed = time.perf_counter() - start
    rate = agreed / decided
    print(f"agreement {agreed}/{decided} = {rate:.5f}; margin {margin}, undecided {undecided}; {elapsed:.1f}s")
    assert rate >= 0.995
    assert elapsed < 300.0


def test_criterion_02_q_vs_linear_system():
    worst = 0.0
    ts = np.linspace(0.0, 10.0, 41)
    for _route, Q, v0 in stratified_instances(1000, seed=7):
        q = decisive_function(jordanize(Q), v0)
        M = np.zeros((3, 3))
        M[0, 1] = 1.0
        M[1:, 1:] = Q
        y0 = np.array([1.0, v0[0], v0[1]])
        vals = q(ts)
        for t, got in zip(ts, vals):
            ref = (expm(M * t) @ y0)[0]
            # relative to max(1, |q|) so that zero crossings do not divide by ~0
            worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    print(f"max relative error {worst:.3e}")
    assert worst < 1e-8


def test_criterion_03_case4_parabola():
    grid = sample_region(EPModel(-1, 1), (-3, 3), (-3, 3), 201, 201)
    checked = 0
    for v1, v2, hit, _t in grid.rows():
        gap = v1 * v1 - (1 - 2 * v2)
        if abs(gap) <= 1e-9:
            continue
        assert hit == (gap > 0), (v1, v2)
        checked += 1
    print(f"{checked} nodes match")


def _case1_predicate(C1: float, C2: float) -> bool:
    # q = 1 + C1 t + C2 t^2 / 2 has a positive zero
    if C2 < 0:
        return True
    if C2 == 0:
        return C1 < 0
    return C1 < 0 and C1 * C1 >= 2 * C2


def test_criterion_04_case1_predicate():
    grid = sample_region(EPModel(1, 0), (-3, 3), (-3, 3), 201, 201)
    for v1, v2, hit, _t in grid.rows():
        assert hit == _case1_predicate(v1, v2), (v1, v2)


def test_criterion_05_blowup_time():
    Q = model_matrix(EPModel(1, 0))
    verdict = blows_up(Q, (1.0, -2.0), want_time=True)
    ref = integrate_extended_oracle(Q, (1.0, -2.0))
    print(f"t* = {verdict.t_star!r}, oracle t_blow = {ref.t_blow!r}")
    assert abs(verdict.t_star - GOLDEN) < 1e-9
    assert ref.blew_up and abs(ref.t_blow - verdict.t_star) < 1e-3


def test_criterion_06_radon_equivalence():
    worst = 0.0
    dense = np.linspace(0.0, 10.0, 2001)
    for _route, Q, v0 in stratified_instances(500, seed=13):
        q = decisive_function(jordanize(Q), v0)
        low = np.nonzero(q(dense) < 0.1)[0]
        t_end = dense[low[0] - 1] if low.size else 10.0
        ts = np.linspace(0.0, t_end, 11)[1:]
        if t_end <= 0.0:
            continue
        direct = integrate_derivatives(Q, v0, ts)
        for t, ref in zip(ts, direct):
            d = radon_derivatives(Q, v0, float(t))
            worst = max(worst, abs(d.v1 - ref[0]), abs(d.v2 - ref[1]))
    print(f"sup-norm gap {worst:.3e}")
    assert worst < 1e-6


def test_criterion_07_equilibria():
    zero = _summary(equilibria(model_matrix(EPModel(1, 0))))
    assert list(zero) == [(0.0, 0.0)]
    assert list(_summary(equilibria(model_matrix(EPModel(-1, 0))))) == [(0.0, 0.0)]
    assert _summary(equilibria(model_matrix(EPModel(1, 1)))) == {
        (0.0, 0.0): ("saddle", "unstable"),
        (1.0, 1.0): ("node", "asymptotically-stable"),
        (-1.0, 1.0): ("node", "unstable"),
    }
    assert _summary(equilibria(model_matrix(EPModel(-1, 1)))) == {
        (0.0, 0.0): ("center", "non-asymptotically-stable"),
    }


def test_criterion_08_conservation():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        k, N = int(rng.choice([-1, 1])), int(rng.integers(0, 2))
        Q = [[0.0, k], [N, 0.0]]
        V0 = rng.uniform(-2, 2, 2)
        inv0 = N * V0[0] ** 2 - k * V0[1] ** 2
        for t in np.linspace(0, 10, 51):
            s = solve_characteristic(Q, V0, 0.0, t)
            # the case N = 1, k = 1 grows like e^t, so drift is measured against |V|^2
            scale = max(1.0, s.V1 ** 2 + s.V2 ** 2)
            worst = max(worst, abs(N * s.V1 ** 2 - k * s.V2 ** 2 - inv0) / scale)
    print(f"max invariant drift {worst:.3e}")
    assert worst < 1e-10

    orbit_gap = 0.0
    orbits = 0
    while orbits < 50:
        Q = random_matrix(rng, "center")
        v0 = rng.uniform(-1, 1, 2)
        if blows_up(Q, v0).blows_up:
            continue
        beta = jordanize(Q).spectrum.beta
        back = integrate_derivatives(Q, v0, [2 * math.pi / beta])[-1]
        orbit_gap = max(orbit_gap, float(np.max(np.abs(back - v0))))
        orbits += 1
    print(f"max return gap {orbit_gap:.3e}")
    assert orbit_gap < 1e-6


def test_criterion_09_invariance():
    rng = np.random.default_rng(9)
    for _route, Q, v0 in stratified_instances(1000, seed=19):
        jd = jordanize(Q)
        base = coefficients(jd, v0)
        s, r = rng.uniform(0.2, 5.0, 2) * rng.choice([-1, 1], 2)
        if jd.kind in ("defective", "complex"):
            r = s
        other = coefficients(jd.with_rows_scaled(float(s), float(r)), v0)
        scale = max(1.0, abs(base.C1), abs(base.C2))
        assert abs(base.C1 - other.C1) <= 1e-12 * scale
        assert abs(base.C2 - other.C2) <= 1e-12 * scale
        assert verdict_from_coefficients(base).blows_up == verdict_from_coefficients(other).blows_up

        q = decisive_function(jd, v0)
        if abs(q.infimum()) < 1e-6:
            continue
        verdict = blows_up(Q, v0, want_time=True)
        for k in (0.5, 2.0):
            moved = blows_up(k * Q, (k * v0[0], k * v0[1]), want_time=True)
            assert moved.blows_up == verdict.blows_up
            if verdict.blows_up:
                target = verdict.t_star / k
                assert abs(moved.t_star - target) <= 1e-9 * max(1.0, target)


def _drift(jd, path) -> float:
    values = np.array([first_integral(jd, *p).value for p in path])
    spec = jd.spectrum
    if jd.kind == "complex" and spec.alpha != 0.0:
        jump = 2.0 * math.pi * spec.alpha
        steps = np.diff(values)
        steps -= jump * np.round(steps / jump)
        values = np.concatenate(([values[0]], values[0] + np.cumsum(steps)))
    return float(values.max() - values.min()) / (1.0 + float(np.median(np.abs(values))))


def test_criterion_10_simple_waves():
    rng = np.random.default_rng(10)
    worst = 0.0
    for i in range(500):
        Q = random_matrix(rng, ROUTES[i % len(ROUTES)])
        jd = jordanize(Q)
        V0 = rng.uniform(-2, 2, 2)
        path = [(s.V1, s.V2) for s in (solve_characteristic(Q, V0, 0.0, t) for t in np.linspace(0, 3, 60))]
        worst = max(worst, _drift(jd, path))
    print(f"max relative first-integral drift {worst:.3e}")
    assert worst < 1e-6

    bounded = []
    for i in range(10_000):
        if i % 4 == 0:
            Q = random_matrix(rng, "center")
        else:
            Q = rng.uniform(-3, 3, (2, 2))
            if i % 4 == 1:
                Q[1, 1] = -Q[0, 0]
        a, b, c, d = Q.ravel()
        expected = a == -d and d * d + b * c < 0
        assert bounded_integral_curves(Q) == expected, Q
        if expected:
            bounded.append(Q)
    assert len(bounded) >= 50

    for Q in bounded[:50]:
        P = np.array(jordanize(Q).A_inv.to_list())
        V0 = rng.uniform(-2, 2, 2)
        ts = np.linspace(0, 100, 2001)
        radii = [math.hypot(s.V1, s.V2) for s in (solve_characteristic(Q, V0, 0.0, t) for t in ts)]
        # elliptic orbits stay within cond(P) of the initial radius; 10x leaves headroom
        assert max(radii) <= 10 * np.linalg.cond(P) * math.hypot(*V0)
