"""Exact camera configurations and the incidence geometry they induce.

A camera is a 3x4 matrix whose rows f, g, h act on homogeneous world
coordinates (x, y, z, w) by the dot product, so a row ``(a, b, c, d)`` is the
affine function ``a*x + b*y + c*z + d`` on the chart w = 1.  The camera plane
is {h = 0} and the center is {f = g = h = 0}.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigParseError, DegenerateConfig, UnsupportedN

Row = Tuple[Fraction, Fraction, Fraction, Fraction]
Matrix = Tuple[Row, Row, Row]

ROW_NAMES = ("f", "g", "h")


# -- exact linear algebra -------------------------------------------------------

def det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    out = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            out = -out
        out *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor:
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return out


def rank(rows: Sequence[Sequence]) -> int:
    a = [[Fraction(x) for x in r] for r in rows]
    rk = 0
    ncols = len(a[0]) if a else 0
    for col in range(ncols):
        pivot = next((r for r in range(rk, len(a)) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rk], a[pivot] = a[pivot], a[rk]
        for r in range(len(a)):
            if r != rk and a[r][col] != 0:
                factor = a[r][col] / a[rk][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[rk])]
        rk += 1
    return rk


def kernel_vector(rows: Sequence[Sequence]) -> Tuple[Fraction, ...]:
    """Generator of the kernel of a rank-3 matrix with 3 or more rows and 4 columns."""
    if rank(rows) != 3:
        raise DegenerateConfig("linear system does not cut out a single point")
    basis = list(itertools.combinations(range(len(rows)), 3))
    for idx in basis:
        sub = [rows[i] for i in idx]
        if rank(sub) == 3:
            # cofactor expansion: v_c = (-1)^c det(sub without column c)
            v = tuple(
                (-1) ** c * det([[r[k] for k in range(4) if k != c] for r in sub]) for c in range(4)
            )
            return normalize_exact(v)
    raise DegenerateConfig("linear system does not cut out a single point")


def normalize_exact(v: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """Scale so that the last nonzero coordinate is 1."""
    pivot = next(x for x in reversed(v) if x != 0)
    return tuple(Fraction(x) / pivot for x in v)


def dot(row: Sequence, x: Sequence):
    return sum(a * b for a, b in zip(row, x))


def to_fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


# -- points -----------------------------------------------------------------------

class ProjectivePoint:
    """A point of P^3 given by a nonzero 4-vector, compared up to scale."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(coords)
        if len(coords) != 4:
            raise ValueError("points of P^3 need four coordinates")
        if all(c == 0 for c in coords):
            raise ValueError("the zero vector is not a projective point")
        self.coords = coords

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        a, b = self.coords, other.coords
        return all(a[i] * b[j] == a[j] * b[i] for i in range(4) for j in range(i + 1, 4))

    def __hash__(self):
        if all(isinstance(c, (int, Fraction)) for c in self.coords):
            return hash(normalize_exact([Fraction(c) for c in self.coords]))
        return 0

    def is_close(self, other: "ProjectivePoint", tol: float = 1e-9) -> bool:
        a = np.asarray(self.coords, dtype=complex)
        b = np.asarray(other.coords, dtype=complex)
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        return abs(abs(np.vdot(a, b)) - 1.0) < tol

    def scaled(self, lam) -> "ProjectivePoint":
        return ProjectivePoint(lam * c for c in self.coords)

    def __repr__(self):
        return "[" + ":".join(str(c) for c in self.coords) + "]"


# -- configurations -----------------------------------------------------------------

@dataclass(frozen=True)
class CameraConfig:
    cameras: Tuple[Matrix, ...]

    def __post_init__(self):
        cams = tuple(
            tuple(tuple(to_fraction(x) for x in row) for row in cam) for cam in self.cameras
        )
        object.__setattr__(self, "cameras", cams)
        if len(cams) < 2:
            raise UnsupportedN(f"need at least 2 cameras, got {len(cams)}")
        for i, cam in enumerate(cams, start=1):
            if len(cam) != 3 or any(len(r) != 4 for r in cam):
                raise DegenerateConfig(f"camera {i} is not a 3x4 matrix")
            if rank(cam) != 3:
                raise DegenerateConfig(f"camera {i} has rank {rank(cam)} < 3")

    @property
    def N(self) -> int:
        return len(self.cameras)

    def row(self, name: str, i: int) -> Row:
        """Row ``f``, ``g`` or ``h`` of camera ``i`` (1-based)."""
        return self.cameras[i - 1][ROW_NAMES.index(name)]

    def planes(self) -> List[Row]:
        return [cam[2] for cam in self.cameras]

    def as_array(self) -> np.ndarray:
        return np.array([[[float(x) for x in r] for r in cam] for cam in self.cameras])

    def to_json(self) -> Dict:
        return {
            "N": self.N,
            "cameras": [[[_fraction_str(x) for x in r] for r in cam] for cam in self.cameras],
        }


def _fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def load_config(source: Union[str, Dict]) -> CameraConfig:
    """Parse the camera JSON format (a dict or JSON text)."""
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from exc
    else:
        data = source
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be an object", "$")
    if "cameras" not in data:
        raise ConfigParseError("missing key 'cameras'", "$")
    cams = data["cameras"]
    if not isinstance(cams, list):
        raise ConfigParseError("'cameras' must be a list", "cameras")
    parsed = []
    for i, cam in enumerate(cams):
        if not isinstance(cam, list) or len(cam) != 3:
            raise ConfigParseError("camera must be a list of 3 rows", f"cameras[{i}]")
        rows = []
        for r, row in enumerate(cam):
            if not isinstance(row, list) or len(row) != 4:
                raise ConfigParseError("row must have 4 entries", f"cameras[{i}][{r}]")
            entries = []
            for c, val in enumerate(row):
                if not isinstance(val, (str, int)) or isinstance(val, bool):
                    raise ConfigParseError("entry must be an integer or 'p/q' string", f"cameras[{i}][{r}][{c}]")
                try:
                    entries.append(to_fraction(val))
                except (ValueError, ZeroDivisionError):
                    raise ConfigParseError(f"malformed rational {val!r}", f"cameras[{i}][{r}][{c}]") from None
            rows.append(tuple(entries))
        if rank(rows) != 3:
            raise ConfigParseError("camera matrix is rank deficient", f"cameras[{i}]")
        parsed.append(tuple(rows))
    if "N" in data:
        n = data["N"]
        if not isinstance(n, int) or isinstance(n, bool) or n != len(parsed):
            raise ConfigParseError(f"'N' is {n!r} but {len(parsed)} cameras are listed", "N")
    if len(parsed) < 2:
        raise ConfigParseError("need at least 2 cameras", "cameras")
    return CameraConfig(tuple(parsed))


# -- general position -----------------------------------------------------------------

def _row_label(name: str, i: int) -> str:
    return f"{name}{i}"


def validate_general_position(config: CameraConfig, strict: bool = False) -> Tuple[bool, List[str]]:
    """Check the genericity the resolution relies on.

    The default test covers the minors that control the incidence geometry:
    any min(4, N) camera planes are independent, and no center lies on another
    camera's plane.  ``strict=True`` additionally requires every set of at most
    four of the 3N rows to be independent.
    """
    N = config.N
    violations: List[str] = []
    labelled = [(_row_label(n, i), config.row(n, i)) for i in range(1, N + 1) for n in ROW_NAMES]

    for (la, ra), (lb, rb) in itertools.combinations(labelled, 2):
        if rank([ra, rb]) < 2 and (strict or (la[0] == "h" and lb[0] == "h")):
            violations.append(f"duplicate rows {la}, {lb}")

    planes = config.planes()
    k = min(4, N)
    for idx in itertools.combinations(range(N), k):
        if rank([planes[i] for i in idx]) < k:
            violations.append("dependent planes " + ", ".join(f"h{i + 1}" for i in idx))

    for i in range(1, N + 1):
        cam = config.cameras[i - 1]
        for j in range(1, N + 1):
            if j != i and det(list(cam) + [config.row("h", j)]) == 0:
                violations.append(f"center q{i} lies on plane H{j} (f{i}, g{i}, h{i}, h{j} dependent)")

    if strict:
        for combo in itertools.combinations(labelled, 4):
            if det([r for _, r in combo]) == 0:
                violations.append("dependent rows " + ", ".join(l for l, _ in combo))

    if not violations:
        violations.extend(_geometry_violations(config))
    # keep first occurrence order, drop repeats
    return not violations, list(dict.fromkeys(violations))


def _geometry_violations(config: CameraConfig) -> List[str]:
    geo = derive_geometry(config, check=False)
    out = []
    planes = config.planes()
    for i, q in enumerate(geo.centers, start=1):
        on = [j for j, H in enumerate(planes, start=1) if dot(H, q.coords) == 0]
        if on != [i]:
            out.append(f"center q{i} lies on planes {on}")
        for key in geo.lines:
            if key[0] != i and key[1] != i and all(dot(planes[k - 1], q.coords) == 0 for k in key):
                out.append(f"center q{i} lies on line L{key[0]}{key[1]}")
    for key, p in geo.triple_points.items():
        on = tuple(j for j, H in enumerate(planes, start=1) if dot(H, p.coords) == 0)
        if on != key:
            out.append(f"triple point p{''.join(map(str, key))} lies on planes {list(on)}")
    pts = [(f"q{i}", q) for i, q in enumerate(geo.centers, start=1)]
    pts += [("p" + "".join(map(str, k)), p) for k, p in geo.triple_points.items()]
    for (la, a), (lb, b) in itertools.combinations(pts, 2):
        if a == b:
            out.append(f"points {la} and {lb} coincide")
    return out


@dataclass(frozen=True)
class DerivedGeometry:
    planes: Tuple[Row, ...]
    centers: Tuple[ProjectivePoint, ...]
    lines: Dict[Tuple[int, int], Tuple[Row, Row]]
    triple_points: Dict[Tuple[int, int, int], ProjectivePoint]


def derive_geometry(config: CameraConfig, check: bool = True) -> DerivedGeometry:
    if check:
        ok, violations = validate_general_position(config)
        if not ok:
            raise DegenerateConfig("configuration not in general position: " + "; ".join(violations))
    planes = tuple(config.planes())
    centers = tuple(ProjectivePoint(kernel_vector(cam)) for cam in config.cameras)
    idx = range(1, config.N + 1)
    lines = {(i, j): (planes[i - 1], planes[j - 1]) for i, j in itertools.combinations(idx, 2)}
    triples = {}
    for key in itertools.combinations(idx, 3):
        triples[key] = ProjectivePoint(kernel_vector([planes[k - 1] for k in key]))
    return DerivedGeometry(planes=planes, centers=centers, lines=lines, triple_points=triples)


# -- the camera map ---------------------------------------------------------------------

def phi_eval(config: CameraConfig, x) -> list:
    """The 2N+1 coordinates (f_i prod_{j!=i} h_j, g_i prod_{j!=i} h_j, ..., h_1...h_N).

    Works for any coordinate type supporting + and * (Fraction, complex,
    sympy symbols).  An all-zero result means ``x`` is in the base locus.
    """
    coords = x.coords if isinstance(x, ProjectivePoint) else tuple(x)
    vals = [[dot(row, coords) for row in cam] for cam in config.cameras]
    hs = [v[2] for v in vals]
    out = []
    for i, (f, g, _) in enumerate(vals):
        others = 1
        for j, hj in enumerate(hs):
            if j != i:
                others = others * hj
        out.append(f * others)
        out.append(g * others)
    prod = 1
    for hj in hs:
        prod = prod * hj
    out.append(prod)
    return out


def _is_zero(v, tol: float) -> bool:
    return v == 0 if tol == 0 else abs(v) <= tol


def base_locus_membership(config: CameraConfig, x, tol: float = 0.0) -> Tuple:
    """Classify ``x`` as ``("center", i)``, ``("triple_point", i, j, k)``,
    ``("line", i, j)`` or ``("not_in_B",)``.

    ``tol`` is an absolute threshold on the row values after normalizing
    ``x`` and the rows to unit length (0 means exact comparison).
    """
    coords = x.coords if isinstance(x, ProjectivePoint) else tuple(x)
    if tol:
        v = np.asarray(coords, dtype=complex)
        v = v / np.linalg.norm(v)
        arr = config.as_array()
        vals = np.einsum("nrc,c->nr", arr / np.linalg.norm(arr, axis=2, keepdims=True), v)
        vals = [list(r) for r in vals]
    else:
        vals = [[dot(row, coords) for row in cam] for cam in config.cameras]
    for i, (f, g, h) in enumerate(vals, start=1):
        if _is_zero(f, tol) and _is_zero(g, tol) and _is_zero(h, tol):
            return ("center", i)
    zero_planes = [i for i, v in enumerate(vals, start=1) if _is_zero(v[2], tol)]
    if len(zero_planes) >= 3:
        return ("triple_point",) + tuple(zero_planes[:3])
    if len(zero_planes) == 2:
        return ("line",) + tuple(zero_planes)
    return ("not_in_B",)


# -- construction ----------------------------------------------------------------------------

def translate_config(config: CameraConfig, v: Sequence) -> CameraConfig:
    """Cameras M_i P_i with M_i = [[1, 0, v_{2i-1}], [0, 1, v_{2i}], [0, 0, 1]].

    The image of camera i is shifted by (v_{2i-1}, v_{2i}); planes are unchanged.
    """
    v = [to_fraction(t) for t in v]
    if len(v) != 2 * config.N:
        raise ValueError(f"need {2 * config.N} translation entries, got {len(v)}")
    cams = []
    for i, (f, g, h) in enumerate(config.cameras):
        a, b = v[2 * i], v[2 * i + 1]
        cams.append(
            (
                tuple(x + a * z for x, z in zip(f, h)),
                tuple(y + b * z for y, z in zip(g, h)),
                h,
            )
        )
    return CameraConfig(tuple(cams))


def random_config(N: int, seed: int, low: int = -50, high: int = 50, strict: bool = True) -> CameraConfig:
    """Integer cameras drawn uniformly from [low, high], resampled until in general position."""
    if N < 2:
        raise UnsupportedN(f"need N >= 2 cameras, got {N}")
    rng = random.Random(seed)
    while True:
        cams = [[[rng.randint(low, high) for _ in range(4)] for _ in range(3)] for _ in range(N)]
        if any(rank(c) < 3 for c in cams):
            continue
        config = CameraConfig(tuple(tuple(tuple(r) for r in c) for c in cams))
        if validate_general_position(config, strict=strict)[0]:
            return config


def three_camera_example() -> CameraConfig:
    """The three cameras with planes y = 0, x = 0 and z = 0 used as the worked example."""
    return CameraConfig(
        (
            ((1, 0, 0, 1), (0, 0, 1, 1), (0, 1, 0, 0)),
            ((0, 1, 0, 1), (0, 0, 1, 1), (1, 0, 0, 0)),
            ((1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 0)),
        )
    )
