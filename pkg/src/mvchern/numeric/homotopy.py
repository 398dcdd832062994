"""Total-degree homotopy continuation for small square polynomial systems.

The homotopy is ``H(x, t) = (1 - t) * gamma * G(x) + t * F(x)`` with start
system ``G_i = x_i^{d_i} - c_i``; ``gamma`` and the ``c_i`` are random points
of the unit circle.  Paths are followed from t = 0 to t = 1 with an Euler
predictor and a Newton corrector, halving the step on corrector failure and
doubling it after five consecutive successes.
"""

from __future__ import annotations

import csv
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import TrackerBudgetExceeded

log = logging.getLogger(__name__)

CONVERGED = "converged"
DIVERGED = "diverged"
PATH_FAILURE = "path_failure"


class PolySystem:
    """Square polynomial system F: C^n -> C^n.

    Subclasses implement :meth:`evaluate` (one point, returning ``(F(x), dF(x))``)
    or the vectorized :meth:`evaluate_batch`; each default delegates to the other.
    ``forbidden`` and ``finite`` classify endpoints; the defaults accept
    everything.
    """

    n: int
    degrees: Tuple[int, ...]

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        F, J = self.evaluate_batch(np.asarray(x, dtype=complex)[None])
        return F[0], J[0]

    def evaluate_batch(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation at points ``X`` of shape (M, n)."""
        pairs = [self.evaluate(x) for x in X]
        return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])

    def forbidden(self, x: np.ndarray) -> bool:
        return False

    def finite(self, x: np.ndarray) -> bool:
        return True

    def residual(self, x: np.ndarray) -> float:
        """Max-norm of F(x) after dividing equation i by |coeffs_i| (1 + |x|)^{d_i}."""
        F, _ = self.evaluate(x)
        scale = self.coefficient_scale() * (1.0 + np.linalg.norm(x)) ** np.asarray(self.degrees)
        return float(np.max(np.abs(F) / scale))

    def coefficient_scale(self) -> np.ndarray:
        cached = getattr(self, "_coef_scale", None)
        if cached is None:
            # typical size of each equation on the unit sphere stands in for a coefficient norm
            rng = np.random.default_rng(12345)
            samples = []
            for _ in range(16):
                z = rng.normal(size=self.n) + 1j * rng.normal(size=self.n)
                samples.append(np.abs(self.evaluate(z / np.linalg.norm(z))[0]))
            cached = np.maximum(np.mean(samples, axis=0), 1e-300)
            self._coef_scale = cached
        return cached


class PolynomialCallableSystem(PolySystem):
    """Adapter for plain functions; ``jac`` defaults to central differences."""

    def __init__(self, func: Callable, degrees: Sequence[int], jac: Optional[Callable] = None):
        self.func = func
        self.jac = jac
        self.degrees = tuple(int(d) for d in degrees)
        self.n = len(self.degrees)

    def evaluate(self, x):
        F = np.asarray(self.func(x), dtype=complex)
        if self.jac is not None:
            return F, np.asarray(self.jac(x), dtype=complex)
        J = np.empty((self.n, self.n), dtype=complex)
        eps = 1e-7 * (1 + np.linalg.norm(x))
        for k in range(self.n):
            e = np.zeros(self.n, dtype=complex)
            e[k] = eps
            J[:, k] = (np.asarray(self.func(x + e)) - np.asarray(self.func(x - e))) / (2 * eps)
        return F, J


@dataclass(frozen=True)
class TrackerSettings:
    corrector_tol: float = 1e-10
    path_tol: float = 1e-7
    dedup_tol: float = 1e-6
    divergence: float = 1e8
    max_steps: int = 10_000
    initial_step: float = 0.01
    max_step: float = 0.1
    min_step: float = 1e-14
    newton_iters: int = 5
    final_newton_iters: int = 30
    success_streak: int = 5
    arrival_tol: float = 1e-3
    max_corrector_move: float = 0.1


@dataclass
class PathRun:
    index: int
    start: np.ndarray
    end: np.ndarray
    status: str
    residual: float
    steps: int
    t: float


@dataclass
class SolutionSet:
    paths: List[PathRun]
    solutions: List[np.ndarray] = field(default_factory=list)
    multiplicities: List[int] = field(default_factory=list)
    raw: int = 0
    finite: int = 0
    off_forbidden_locus: int = 0
    diverged: int = 0
    failures: int = 0

    @property
    def total_paths(self) -> int:
        return len(self.paths)

    @property
    def convergence_rate(self) -> float:
        return (self.raw + self.diverged) / max(1, self.total_paths)


class StartSystem:
    def __init__(self, degrees: Sequence[int], constants: np.ndarray, gamma: complex):
        self.degrees = np.asarray(degrees)
        self.constants = constants
        self.gamma = gamma

    def solutions(self) -> List[np.ndarray]:
        roots = []
        for d, c in zip(self.degrees, self.constants):
            r = abs(c) ** (1.0 / d)
            a = np.angle(c) / d
            roots.append([r * np.exp(1j * (a + 2 * np.pi * k / d)) for k in range(d)])
        return [np.array(p, dtype=complex) for p in itertools.product(*roots)]


def _unit_complex(rng: np.random.Generator, size=None):
    return np.exp(2j * np.pi * rng.random(size))


class _Homotopy:
    def __init__(self, target: PolySystem, start: StartSystem):
        self.target = target
        self.start = start

    def parts(self, X, t):
        """H, dH/dx, dH/dt at a batch of points X (M, n) and times t (M,)."""
        F, JF = self.target.evaluate_batch(X)
        d = self.start.degrees
        G = X**d - self.start.constants
        JG = np.zeros_like(JF)
        idx = np.arange(X.shape[1])
        JG[:, idx, idx] = d * X ** (d - 1)
        g = self.start.gamma
        s = (1 - t)[:, None]
        H = s * g * G + t[:, None] * F
        Hx = s[:, :, None] * g * JG + t[:, None, None] * JF
        Ht = F - g * G
        return H, Hx, Ht


class ParameterHomotopy:
    """Straight segment ``(1 - t) * F0 + t * F1`` between two members of a family.

    For families whose equations depend affinely on the parameters this is the
    same as moving the parameters along the segment.
    """

    def __init__(self, source: PolySystem, target: PolySystem):
        self.source = source
        self.target = target

    def parts(self, X, t):
        F0, J0 = self.source.evaluate_batch(X)
        F1, J1 = self.target.evaluate_batch(X)
        s = (1 - t)[:, None]
        return s * F0 + t[:, None] * F1, s[:, :, None] * J0 + t[:, None, None] * J1, F1 - F0


def track_parameter_path(
    source: PolySystem,
    target: PolySystem,
    points: Sequence[np.ndarray],
    settings: Optional[TrackerSettings] = None,
) -> List[PathRun]:
    """Carry solutions of ``source`` to solutions of ``target``."""
    settings = settings or TrackerSettings()
    return track_paths(ParameterHomotopy(source, target), list(enumerate(points)), settings)


def _lin_solve(A, b):
    """Batched solve of A x = b with a least-squares fallback for singular items."""
    try:
        sol = np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        sol = np.full(b.shape, np.nan, dtype=complex)
    bad = ~np.all(np.isfinite(sol), axis=-1)
    for k in np.flatnonzero(bad):
        with np.errstate(all="ignore"):
            sol[k] = np.linalg.lstsq(A[k], b[k], rcond=None)[0]
    return sol


def _newton(hom: _Homotopy, X, t, iters, tol):
    ok = np.zeros(len(X), dtype=bool)
    X = X.copy()
    for _ in range(iters):
        todo = ~ok
        if not todo.any():
            break
        H, Hx, _ = hom.parts(X[todo], t[todo])
        dx = _lin_solve(Hx, -H)
        X[todo] = X[todo] + dx
        size = np.linalg.norm(dx, axis=1)
        ok[todo] = size <= tol * (1 + np.linalg.norm(X[todo], axis=1))
    ok &= np.all(np.isfinite(X), axis=1)
    return ok, X


def _polish(system: PolySystem, X, settings: TrackerSettings):
    """Newton on the target system for a batch of endpoints; returns points and residuals."""
    X = np.array(X, dtype=complex)
    todo = np.ones(len(X), dtype=bool)
    for _ in range(settings.final_newton_iters):
        if not todo.any():
            break
        F, J = system.evaluate_batch(X[todo])
        with np.errstate(all="ignore"):
            dx = _lin_solve(J, -F)
            X[todo] = X[todo] + dx
            finite = np.all(np.isfinite(X[todo]), axis=1)
            small = np.linalg.norm(dx, axis=1) <= 1e-14 * (1 + np.linalg.norm(X[todo], axis=1))
        todo[np.flatnonzero(todo)[~finite | small]] = False
    res = np.full(len(X), np.inf)
    finite = np.all(np.isfinite(X), axis=1)
    if finite.any():
        F, _ = system.evaluate_batch(X[finite])
        scale = system.coefficient_scale() * (1.0 + np.linalg.norm(X[finite], axis=1))[:, None] ** np.asarray(system.degrees)
        res[finite] = np.max(np.abs(F) / scale, axis=1)
    return X, res


def track_paths(hom: _Homotopy, items: Sequence[Tuple[int, np.ndarray]], settings: TrackerSettings) -> List[PathRun]:
    """Follow a batch of paths in lockstep; each path keeps its own t and step size."""
    M = len(items)
    if M == 0:
        return []
    index = np.array([i for i, _ in items])
    starts = np.array([s for _, s in items], dtype=complex)
    X = starts.copy()
    t = np.zeros(M)
    dt = np.full(M, settings.initial_step)
    streak = np.zeros(M, dtype=int)
    steps = np.zeros(M, dtype=int)
    status = np.array([""] * M, dtype=object)
    active = np.ones(M, dtype=bool)
    while active.any():
        a = np.flatnonzero(active)
        over = steps[a] >= settings.max_steps
        status[a[over]] = PATH_FAILURE
        active[a[over]] = False
        a = a[~over]
        if len(a) == 0:
            break
        steps[a] += 1
        h = np.minimum(dt[a], 1.0 - t[a])
        _, Hx, Ht = hom.parts(X[a], t[a])
        Xp = X[a] + h[:, None] * _lin_solve(Hx, -Ht)
        tn = t[a] + h
        tn[1.0 - tn < 1e-15] = 1.0
        ok, Xc = _newton(hom, Xp, tn, settings.newton_iters, settings.path_tol)
        # a corrector that travels far has probably jumped to another path
        moved = np.linalg.norm(Xc - Xp, axis=1)
        ok &= moved <= settings.max_corrector_move * (1 + np.linalg.norm(Xp, axis=1))
        good, bad = a[ok], a[~ok]
        X[good] = Xc[ok]
        t[good] = tn[ok]
        streak[good] += 1
        grow = good[streak[good] >= settings.success_streak]
        dt[grow] = np.minimum(2 * dt[grow], settings.max_step)
        streak[grow] = 0
        dt[bad] /= 2
        streak[bad] = 0
        far = good[np.linalg.norm(X[good], axis=1) > settings.divergence]
        status[far] = DIVERGED
        active[far] = False
        done = a[(t[a] >= 1.0) | (dt[a] < settings.min_step)]
        active[done] = False
    finite = np.all(np.isfinite(X), axis=1)
    pending = np.flatnonzero((status == "") & finite & (np.linalg.norm(np.where(finite[:, None], X, 0), axis=1) <= settings.divergence))
    # no endgame: polish wherever the paths stopped and judge by residual
    polished, polish_res = _polish(hom.target, X[pending], settings)
    runs = []
    for k in range(M):
        x = X[k]
        st = status[k]
        if not st:
            hit = np.searchsorted(pending, k)
            if hit >= len(pending) or pending[hit] != k:
                st = DIVERGED
            else:
                xp, res = polished[hit], polish_res[hit]
                size = np.linalg.norm(x)
                if not np.all(np.isfinite(xp)) or np.linalg.norm(xp) > settings.divergence:
                    st = DIVERGED
                elif size > np.sqrt(settings.divergence) and np.linalg.norm(xp - x) > settings.arrival_tol * size:
                    # a far-out path that the polish dragged back in never arrived anywhere
                    st = DIVERGED
                else:
                    x = xp
                    st = CONVERGED if res < settings.corrector_tol else PATH_FAILURE
        res = hom.target.residual(x) if np.all(np.isfinite(x)) else float("inf")
        runs.append(PathRun(index=int(index[k]), start=starts[k], end=x, status=st,
                            residual=res, steps=int(steps[k]), t=float(t[k])))
    return runs


def _track_chunk(args):
    hom, items, settings = args
    return track_paths(hom, items, settings)


def deduplicate(points: Sequence[np.ndarray], tol: float) -> Tuple[List[np.ndarray], List[int]]:
    reps: List[np.ndarray] = []
    mult: List[int] = []
    for p in points:
        for k, r in enumerate(reps):
            if np.linalg.norm(p - r) <= tol * max(1.0, np.linalg.norm(r)):
                mult[k] += 1
                break
        else:
            reps.append(p)
            mult.append(1)
    return reps, mult


def summarize(system: PolySystem, paths: List[PathRun], settings: TrackerSettings) -> SolutionSet:
    paths = sorted(paths, key=lambda p: p.index)
    converged = [p for p in paths if p.status == CONVERGED]
    finite = [p for p in converged if system.finite(p.end)]
    good = [p.end for p in finite if not system.forbidden(p.end)]
    reps, mult = deduplicate(good, settings.dedup_tol)
    return SolutionSet(
        paths=paths,
        solutions=reps,
        multiplicities=mult,
        raw=len(converged),
        finite=len(finite),
        off_forbidden_locus=len(reps),
        diverged=sum(p.status == DIVERGED for p in paths),
        failures=sum(p.status == PATH_FAILURE for p in paths),
    )


def track_total_degree(
    system: PolySystem,
    settings: Optional[TrackerSettings] = None,
    seed: int = 0,
    workers: int = 1,
    debug_csv: Optional[str] = None,
) -> SolutionSet:
    """Track all prod(d_i) paths of the total-degree homotopy into ``system``.

    Results are deterministic for a given ``seed`` and independent of
    ``workers``.
    """
    settings = settings or TrackerSettings()
    rng = np.random.default_rng(seed)
    start = StartSystem(system.degrees, _unit_complex(rng, system.n), complex(_unit_complex(rng)))
    hom = _Homotopy(system, start)
    items = list(enumerate(start.solutions()))
    if workers > 1 and len(items) > 1:
        chunks = [items[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            paths = [p for chunk in pool.map(_track_chunk, [(hom, c, settings) for c in chunks]) for p in chunk]
    else:
        paths = _track_chunk((hom, items, settings))
    result = summarize(system, paths, settings)
    if debug_csv:
        write_path_csv(result.paths, debug_csv)
    log.debug(
        "tracked %d paths: %d converged, %d diverged, %d failed",
        len(paths), result.raw, result.diverged, result.failures,
    )
    return result


def write_path_csv(paths: Sequence[PathRun], filename: str) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "status", "residual", "steps", "t", "end"])
        for p in paths:
            writer.writerow([p.index, p.status, f"{p.residual:.3e}", p.steps, f"{p.t:.17g}",
                             " ".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in p.end)])


def check_budget(result: SolutionSet, max_failure_fraction: float = 0.2) -> None:
    if result.failures > max_failure_fraction * result.total_paths:
        raise TrackerBudgetExceeded(
            f"{result.failures} of {result.total_paths} paths failed (limit {max_failure_fraction:.0%})"
        )
