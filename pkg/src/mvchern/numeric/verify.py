"""Numerical oracles for the symbolic pipeline.

``degree_by_slicing`` counts the points of the multiview variety on a random
codimension-3 linear section; ``critical_count`` counts complex critical points
of the affine reprojection error.  Both track every path of a total-degree
homotopy and classify the endpoints; neither is certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..cameras import CameraConfig, random_config
from ..errors import TrackerBudgetExceeded, UnstableCount, UnsupportedN
from .homotopy import (
    CONVERGED,
    SolutionSet,
    TrackerSettings,
    check_budget,
    deduplicate,
    track_parameter_path,
    track_total_degree,
)
from .systems import CriticalSystem, SlicingSystem, affine_point, random_chart, reprojection_error

MIN_CONVERGENCE = 0.95
SLICE_SEEDS = 3


def slicing_system(config: CameraConfig, seed: int) -> SlicingSystem:
    """L_r(phi(X)) = 0 for three random complex linear forms and a random chart, all from ``seed``."""
    rng = np.random.default_rng(seed)
    k = 2 * config.N + 1
    slices = rng.normal(size=(3, k)) + 1j * rng.normal(size=(3, k))
    return SlicingSystem(config, slices, random_chart(rng))


def slicing_run(
    config: CameraConfig, seed: int, settings: Optional[TrackerSettings] = None, debug_csv: Optional[str] = None
) -> SolutionSet:
    return track_total_degree(slicing_system(config, seed), settings, seed=seed, debug_csv=debug_csv)


def degree_by_slicing(
    config: CameraConfig,
    seed: int = 0,
    settings: Optional[TrackerSettings] = None,
    debug_csv: Optional[str] = None,
) -> int:
    """Degree of the multiview variety, agreed on by slices ``seed .. seed+2``."""
    if config.N not in (2, 3):
        raise UnsupportedN(f"degree by slicing is limited to N in {{2, 3}}, got N={config.N}")
    counts = []
    for s in range(seed, seed + SLICE_SEEDS):
        run = slicing_run(config, s, settings, debug_csv if s == seed else None)
        if run.convergence_rate < MIN_CONVERGENCE:
            raise UnstableCount(
                f"slice seed {s}: only {run.convergence_rate:.1%} of paths converged (need {MIN_CONVERGENCE:.0%})"
            )
        counts.append(run.off_forbidden_locus)
    if len(set(counts)) != 1:
        raise UnstableCount(f"slice seeds {seed}..{seed + SLICE_SEEDS - 1} disagree: {counts}")
    return counts[0]


def critical_system_affine(config: CameraConfig, u: Sequence, seed: int = 0) -> CriticalSystem:
    """Critical equations of the reprojection error for image data ``u``, in a chart drawn from ``seed``."""
    data = [float(x) for x in u]
    if len(data) != 2 * config.N:
        raise ValueError(f"need {2 * config.N} image coordinates, got {len(data)}")
    return CriticalSystem(config, data, random_chart(np.random.default_rng(seed)))


@dataclass
class CriticalPoints:
    """Affine critical points pooled over one or more homotopy runs."""

    points: List[np.ndarray]
    errors: List[complex]
    runs: List[SolutionSet] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.points)


def critical_points(
    config: CameraConfig,
    u: Sequence,
    seed: int = 0,
    runs: int = 1,
    settings: Optional[TrackerSettings] = None,
    debug_csv: Optional[str] = None,
    best_effort: bool = False,
) -> CriticalPoints:
    """Track the critical system; with ``runs > 1`` the solutions of
    independent charts and start systems are merged (each one is verified
    individually, so the union only guards against lost paths)."""
    if config.N != 2 and not (config.N == 3 and best_effort):
        raise UnsupportedN(f"critical counts need N = 2 (N = 3 only best-effort), got N={config.N}")
    settings = settings or TrackerSettings()
    world: List[np.ndarray] = []
    done = []
    for r in range(runs):
        s = seed + 1000 * r
        system = critical_system_affine(config, u, s)
        result = track_total_degree(system, settings, seed=s, debug_csv=debug_csv if r == 0 else None)
        check_budget(result)
        done.append(result)
        for x in result.solutions:
            q = affine_point(system, x)
            if q is not None:
                world.append(q)
    points, _ = deduplicate(world, settings.dedup_tol)
    return CriticalPoints(points=points, errors=[reprojection_error(config, u, q) for q in points], runs=done)


def critical_count(config: CameraConfig, u: Sequence, seed: int = 0, runs: int = 2, **kwargs) -> int:
    return critical_points(config, u, seed, runs, **kwargs).count


def _genuine(system: CriticalSystem, runs) -> List[np.ndarray]:
    return [r.end for r in runs if r.status == CONVERGED and system.finite(r.end) and not system.forbidden(r.end)]


def _merge(known: List[np.ndarray], found: Sequence[np.ndarray], tol: float) -> int:
    added = 0
    for x in found:
        if all(np.linalg.norm(x - y) > tol * max(1.0, np.linalg.norm(y)) for y in known):
            known.append(x)
            added += 1
    return added


@dataclass
class MonodromyResult:
    critical: CriticalPoints
    generic_count: int
    loops: int


def monodromy_critical_points(
    config: CameraConfig,
    u: Sequence,
    seed: int = 0,
    stall: int = 5,
    max_loops: int = 100,
    settings: Optional[TrackerSettings] = None,
) -> MonodromyResult:
    """Critical points by monodromy in the space of image data.

    Complex data chosen as the exact image of a random point has that point as
    a zero-error critical point.  Known solutions are carried around random
    triangular loops of data; every loop may reveal new ones.  After ``stall``
    loops without news the solutions are carried to the real data ``u``.  The
    result is a lower bound that is exact when the loops act transitively.
    """
    settings = settings or TrackerSettings()
    rng = np.random.default_rng(seed)
    chart = random_chart(rng)
    N = config.N
    arr = config.as_array().astype(complex)

    q = rng.normal(size=3) + 1j * rng.normal(size=3)
    vals = arr @ np.append(q, 1.0)
    base_data = (vals[:, :2] / vals[:, 2:3]).ravel()
    base = CriticalSystem(config, base_data, chart)
    scale = 1.0 + np.abs(base_data).mean()

    def complex_data():
        # loops of random size around the base data enclose different branch points
        r = scale * np.exp(rng.uniform(np.log(0.2), np.log(20.0)))
        return base_data + r * (rng.normal(size=2 * N) + 1j * rng.normal(size=2 * N))

    known = [base.chart_coordinates(np.append(q, 1.0))]

    quiet = loops = 0
    while quiet < stall and loops < max_loops:
        loops += 1
        legs = [CriticalSystem(config, complex_data(), chart) for _ in range(2)]
        points = list(known)
        for src, dst in zip([base] + legs, legs + [base]):
            points = _genuine(dst, track_parameter_path(src, dst, points, settings))
        quiet = 0 if _merge(known, points, settings.dedup_tol) else quiet + 1

    target = critical_system_affine(config, u)
    target.chart = chart
    ends = _genuine(target, track_parameter_path(base, target, known, settings))
    world = [w for w in (affine_point(target, x) for x in ends) if w is not None]
    points, _ = deduplicate(world, settings.dedup_tol)
    critical = CriticalPoints(points=points, errors=[reprojection_error(config, u, p) for p in points])
    return MonodromyResult(critical=critical, generic_count=len(known), loops=loops)


def random_critical_instance(N: int, seed: int) -> Tuple[CameraConfig, List[int]]:
    """Seeded integer cameras and integer image data in [-10, 10]."""
    config = random_config(N, 100 + seed)
    rng = np.random.default_rng(seed)
    return config, [int(v) for v in rng.integers(-10, 11, size=2 * N)]


def exact_image(config: CameraConfig, q: Sequence[float]) -> List[float]:
    """Affine image points (f_i/h_i, g_i/h_i) of the world point q."""
    arr = config.as_array().astype(float)
    vals = arr @ np.append(np.asarray(q, dtype=float), 1.0)
    return [float(v) for v in (vals[:, :2] / vals[:, 2:3]).ravel()]


__all__ = [
    "CriticalPoints",
    "TrackerBudgetExceeded",
    "critical_count",
    "critical_points",
    "critical_system_affine",
    "monodromy_critical_points",
    "degree_by_slicing",
    "exact_image",
    "random_critical_instance",
    "slicing_run",
    "slicing_system",
]
