"""Acceptance criteria, one test each; every test records a PASS/FAIL line
that is printed in the terminal summary (and immediately with ``-s``)."""

import random
import time
from math import comb

import pytest

from conftest import ACCEPTANCE_LINES
from mvchern.cameras import random_config
from mvchern.chern import (
    chern_total,
    euler_characteristic_formula,
    printed_pushforward,
)
from mvchern.chow import ChowPresentation, PoincarePolynomial, build_presentation, degree, make_monomial
from mvchern.errors import InconsistentResolution
from mvchern.mather import (
    affine_count_polynomial,
    euler_obstruction,
    printed_mather,
    run_pipeline,
    self_intersection_E,
)
from mvchern.numeric.verify import (
    critical_count,
    monodromy_critical_points,
    random_critical_instance,
    slicing_run,
)


def _record(key, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {key}. {title}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    assert ok, line


def test_criterion_1_ed_degree():
    slow, got = [], []
    for N in range(2, 11):
        start = time.perf_counter()
        value = run_pipeline(N).edDegree
        if time.perf_counter() - start >= 1.0:
            slow.append(N)
        got.append(value)
    expected = [6 * N**3 - 15 * N**2 + 11 * N - 4 for N in range(2, 11)]
    ok = got == expected and not slow
    _record(1, "ED degree = 6N^3-15N^2+11N-4, N=2..10, <1 s each", ok, f"{got}, slow N: {slow or 'none'}")


def test_criterion_2_euler_characteristic():
    bad = []
    for N in range(2, 13):
        pres = build_presentation(N)
        chi = degree(pres, chern_total(pres).c(3))
        if chi != 4 + 2 * N + 2 * comb(N, 3) + 2 * comb(N, 2) or chi != euler_characteristic_formula(N):
            bad.append(N)
    _record(2, "integral of c3 = 4+2N+2C(N,3)+2C(N,2), N=2..12", not bad, f"failing N: {bad or 'none'}")


def test_criterion_3_printed_coefficients():
    bad = []
    for N in range(2, 11):
        r = run_pipeline(N)
        push, m = r.pushforward, r.matherClass
        pp, pm = printed_pushforward(N), printed_mather(N)
        if push.a3 - pp.a3 != 2 * comb(N, 2):
            bad.append((N, "a3 deviation"))
        if N >= 3:
            if (push.a1, push.a2) != (pp.a1, pp.a2):
                bad.append((N, "a1/a2"))
            if (m.a0, m.a1, m.a2) != (pm.a0, pm.a1, pm.a2):
                bad.append((N, "cM0..cM2"))
    _record(3, "printed a1, a2, cM0..cM2 reproduced; a3 off by 2C(N,2)", not bad, f"failures: {bad or 'none'}")


class _MutatedPointRelation(ChowPresentation):
    """Point relation Q^3 = -2h^3 instead of -h^3."""

    def poincare_polynomial(self, center):
        if center[0] == "q":
            return PoincarePolynomial((2 * self.h**3, self.zero(), self.zero(), self.one()))
        return super().poincare_polynomial(center)


def test_criterion_4_lemmas():
    bad = [
        N for N in range(2, 11)
        if self_intersection_E(ChowPresentation(N)) != -(N - 1) or euler_obstruction(N) != 3 - N
    ]
    mutated = self_intersection_E(_MutatedPointRelation(3))
    try:
        euler_obstruction(3, _MutatedPointRelation(3))
        caught = False
    except InconsistentResolution:
        caught = True
    ok = not bad and mutated != -2 and caught
    _record(4, "E.E = -(N-1), Eu = 3-N, N=2..10; mutation changes E.E", ok,
            f"failing N: {bad or 'none'}, mutated E.E at N=3 = {mutated}")


def test_criterion_5_confluence():
    h3 = make_monomial({("h",): 3})
    bad = []
    for N in range(2, 7):
        pres = build_presentation(N)
        rng = random.Random(5000 + N)
        gens = pres.generators
        for _ in range(1000):
            a, b, c = (pres.gen(*rng.choice(gens)) for _ in range(3))
            reference = (a * b) * c
            left = pres.multiply(pres.multiply(a, b, rng=rng), c, rng=rng)
            right = pres.multiply(a, pres.multiply(b, c, rng=rng), rng=rng)
            if left != reference or right != reference or not set(reference.terms) <= {h3}:
                bad.append(N)
                break
    _record(5, "confluence, 1000 degree-3 products per N=2..6", not bad, f"failing N: {bad or 'none'}")


def test_criterion_6_slicing_degree():
    start = time.perf_counter()
    details, ok = [], True
    for N, cfg_seed in ((2, 21), (3, 22)):
        cfg = random_config(N, cfg_seed)
        target = run_pipeline(N).pushforward.a3
        runs = [slicing_run(cfg, s) for s in range(3)]
        counts = [r.off_forbidden_locus for r in runs]
        rate = min(r.convergence_rate for r in runs)
        ok &= counts == [target] * 3 and rate >= 0.95
        details.append(f"N={N}: {counts} vs a3={target}, convergence {rate:.0%}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    _record(6, "degree by slicing = a3 for N=2,3 over 3 slice seeds, <30 s", ok,
            "; ".join(details) + f"; {elapsed:.1f} s")


def test_criterion_7_two_view_critical_count():
    start = time.perf_counter()
    counts = [critical_count(*random_critical_instance(2, s), seed=s) for s in range(10)]
    elapsed = time.perf_counter() - start
    hits = counts.count(affine_count_polynomial(2))
    ok = hits >= 9 and elapsed < 60
    _record(7, "N=2 critical count = 6 for >=9 of 10 seeds, <60 s", ok, f"{counts}, {elapsed:.1f} s")


def test_criterion_7_three_views_best_effort():
    # informational: the outcome is recorded but never fails the suite
    start = time.perf_counter()
    config, u = random_critical_instance(3, 0)
    mono = monodromy_critical_points(config, u, seed=0, stall=8)
    target = affine_count_polynomial(3)
    line = (f"[INFO] 7. N=3 best-effort critical count: {mono.critical.count} of {target} "
            f"({mono.generic_count} generic by monodromy, {mono.loops} loops, "
            f"{time.perf_counter() - start:.1f} s)")
    ACCEPTANCE_LINES[7.5] = line
    print(line)


def test_criterion_8_polar_degrees():
    bad = []
    for N in range(2, 11):
        r = run_pipeline(N)
        if min(r.polarDegrees) < 0 or r.polarDegrees[0] != r.pushforward.a3:
            bad.append(N)
    at3 = run_pipeline(3).polarDegrees
    ok = not bad and at3 == (7, 18, 21, 10) and sum(at3) == 56
    _record(8, "polar degrees nonnegative, delta0 = a3, N=3 gives (7,18,21,10)", ok,
            f"failing N: {bad or 'none'}, N=3: {at3}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
