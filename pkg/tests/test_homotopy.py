import csv

import numpy as np
import pytest

from mvchern.errors import TrackerBudgetExceeded
from mvchern.numeric.homotopy import (
    CONVERGED,
    DIVERGED,
    PATH_FAILURE,
    PathRun,
    PolynomialCallableSystem,
    SolutionSet,
    StartSystem,
    TrackerSettings,
    check_budget,
    deduplicate,
    track_parameter_path,
    track_total_degree,
)


def _quadrics(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = rng.normal(size=3) + 1j * rng.normal(size=3)

    def f(x):
        return np.einsum("kij,i,j->k", A, x, x) + B @ x + c

    def jac(x):
        return np.einsum("kij,j->ki", A, x) + np.einsum("kij,i->kj", A, x) + B

    return PolynomialCallableSystem(f, (2, 2, 2), jac), f


def test_univariate():
    system = PolynomialCallableSystem(lambda x: [x[0] ** 2 - 1], (2,))
    result = track_total_degree(system, seed=1)
    assert result.off_forbidden_locus == 2
    roots = sorted(x[0].real for x in result.solutions)
    assert roots == pytest.approx([-1.0, 1.0], abs=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_generic_quadrics_have_eight_solutions(seed):
    system, f = _quadrics(seed)
    result = track_total_degree(system, seed=seed)
    assert result.off_forbidden_locus == 8
    assert result.failures == 0
    for x in result.solutions:
        assert np.linalg.norm(f(x)) < 1e-8 * (1 + np.linalg.norm(x)) ** 2


def test_deterministic_given_seed():
    system, _ = _quadrics(4)
    a = track_total_degree(system, seed=9)
    b = track_total_degree(system, seed=9)
    assert [p.status for p in a.paths] == [p.status for p in b.paths]
    assert all(np.array_equal(p.end, q.end) for p, q in zip(a.paths, b.paths))


def _cubic_pair(x):
    return [x[0] ** 3 - 2 * x[0] + 1, x[1] ** 2 - x[0]]


def test_workers_do_not_change_results():
    system = PolynomialCallableSystem(_cubic_pair, (3, 2))
    serial = track_total_degree(system, seed=5)
    pooled = track_total_degree(system, seed=5, workers=2)
    assert [p.index for p in pooled.paths] == list(range(6))
    assert all(np.allclose(p.end, q.end) for p, q in zip(serial.paths, pooled.paths))


def test_path_count_conservation():
    # x*y - 1 = 0, x - 2 = 0 has one finite solution out of a Bezout bound of 2
    system = PolynomialCallableSystem(
        lambda x: [x[0] * x[1] - 1, x[0] - 2], (2, 1), lambda x: [[x[1], x[0]], [1, 0]]
    )
    result = track_total_degree(system, seed=3)
    assert result.raw + result.diverged + result.failures == 2
    assert result.off_forbidden_locus == 1
    assert result.diverged == 1
    assert result.solutions[0] == pytest.approx([2, 0.5])


def test_converged_paths_meet_corrector_tolerance():
    system, _ = _quadrics(7)
    settings = TrackerSettings()
    result = track_total_degree(system, settings, seed=7)
    for p in result.paths:
        if p.status == CONVERGED:
            assert p.residual < settings.corrector_tol


def test_start_system_solutions():
    start = StartSystem((2, 3), np.array([1.0 + 0j, -8.0 + 0j]), 1.0)
    sols = start.solutions()
    assert len(sols) == 6
    for x in sols:
        assert x[0] ** 2 == pytest.approx(1.0)
        assert x[1] ** 3 == pytest.approx(-8.0)


def test_deduplicate():
    pts = [np.array([1.0, 0.0]), np.array([1.0 + 1e-9, 0.0]), np.array([0.0, 1.0])]
    reps, mult = deduplicate(pts, 1e-6)
    assert len(reps) == 2 and mult == [2, 1]
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            assert np.linalg.norm(reps[a] - reps[b]) > 1e-6


def test_forbidden_locus_filter():
    class Shifted(PolynomialCallableSystem):
        def forbidden(self, x):
            return abs(x[0]) < 1e-6

    system = Shifted(lambda x: [x[0] * (x[0] - 3)], (2,))
    result = track_total_degree(system, seed=2)
    assert result.raw == 2 and result.off_forbidden_locus == 1


def test_budget():
    paths = [PathRun(k, np.zeros(1), np.zeros(1), PATH_FAILURE if k < 3 else CONVERGED, 0.0, 1, 1.0) for k in range(10)]
    check_budget(SolutionSet(paths=paths, failures=2))
    with pytest.raises(TrackerBudgetExceeded):
        check_budget(SolutionSet(paths=paths, failures=3))


def test_debug_csv(tmp_path):
    system, _ = _quadrics(1)
    out = tmp_path / "paths.csv"
    track_total_degree(system, seed=1, debug_csv=str(out))
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 8
    assert {r["status"] for r in rows} <= {CONVERGED, DIVERGED, PATH_FAILURE}


def test_parameter_path_follows_roots():
    def family(c):
        return PolynomialCallableSystem(lambda x: [x[0] ** 2 - c], (2,), lambda x: [[2 * x[0]]])

    runs = track_parameter_path(family(1.0 + 0.5j), family(4.0 + 0j), [np.array([np.sqrt(1.0 + 0.5j)])])
    assert runs[0].status == CONVERGED
    assert runs[0].end[0] ** 2 == pytest.approx(4.0)
