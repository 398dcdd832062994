"""Euler obstruction along the camera curves, Chern-Mather class, polar
degrees and the Euclidean distance degree of the multiview variety."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Dict, Optional, Tuple

from .chern import (
    ChernData,
    ClassVector,
    chern_total,
    printed_pushforward,
    pullback_hyperplane,
    pushforward_class,
)
from .chow import ChowPresentation, RingElement, TOP_DEGREE, build_presentation, curve_class_E, degree
from .errors import InconsistentResolution, NegativePolarDegree, UnsupportedN

# Euler characteristic of the exceptional curve E (a P^1).
_CHI_E = 2


def normal_bundle_pushforward(
    pres: ChowPresentation, chern: Optional[ChernData] = None, i: int = 1
) -> RingElement:
    """(ji)_* c(N_{E/P~^3}) = [E] * c(P~^3) - chi(E) * [pt], truncated at degree 3."""
    if chern is None:
        chern = chern_total(pres)
    E = curve_class_E(pres, i)
    ambient = pres.sum(E * chern.c(k) for k in range(2))
    return ambient - _CHI_E * pres.h**3


def self_intersection_E(
    pres: ChowPresentation, ell: Optional[RingElement] = None, chern: Optional[ChernData] = None, i: int = 1
) -> int:
    """Self-intersection of the exceptional curve over a general point of X_i
    inside the hyperplane-section surface.

    The surface is cut out by a section of the pulled-back O(1), so its normal
    bundle restricted to E is ell|_E and Whitney gives c(N_{E/S}) = c(N_{E/P~^3}) (1 - ell).
    """
    if ell is None:
        ell = pullback_hyperplane(pres)
    pushed = normal_bundle_pushforward(pres, chern, i)
    twisted = pushed * (pres.one() - ell)
    return degree(pres, twisted.homogeneous_part(TOP_DEGREE))


def euler_obstruction(N: int, pres: Optional[ChowPresentation] = None) -> int:
    """Eu of MV_N at a general point of a camera curve X_i.

    The transversal slice resolves with a single rational curve of
    self-intersection -n, i.e. it is the cone over a rational normal curve of
    degree n, whose Euler obstruction is 2 - n.
    """
    if pres is None:
        pres = build_presentation(N)
    s = self_intersection_E(pres)
    if s != -(N - 1):
        raise InconsistentResolution(f"exceptional curve has self-intersection {s}, expected {-(N - 1)}")
    n = -s
    return 2 - n


def mather_class(push: ClassVector, N: int, eu: Optional[int] = None) -> ClassVector:
    """Remove (2 - Eu) * c^M(P^1) = (2 - Eu) * ([P^1] + 2[P^0]) for each of the N curves X_i."""
    if eu is None:
        eu = 3 - N
    weight = (2 - eu) * N
    return ClassVector(a0=push.a0 - 2 * weight, a1=push.a1 - weight, a2=push.a2, a3=push.a3)


def printed_mather(N: int) -> ClassVector:
    pp = printed_pushforward(N)
    return ClassVector(
        a0=4 + 4 * N - 2 * N**2 + 2 * comb(N, 3) + 2 * comb(N, 2),
        a1=7 * N - N**2 + (N - 4) * comb(N, 2),
        a2=pp.a2,
        a3=pp.a3,
    )


def polar_degrees(m: ClassVector) -> Tuple[int, int, int, int]:
    """delta_k = sum_{i<=k} (-1)^i C(4-i, k-i) mu_i, mu_i the degree of the
    codimension-i Mather class (mu_i = a_{3-i})."""
    mu = [m.a3, m.a2, m.a1, m.a0]
    deltas = tuple(
        sum((-1) ** i * comb(TOP_DEGREE + 1 - i, k - i) * mu[i] for i in range(k + 1))
        for k in range(TOP_DEGREE + 1)
    )
    negative = [k for k, d in enumerate(deltas) if d < 0]
    if negative:
        raise NegativePolarDegree(f"polar degrees {deltas} negative at k={negative}")
    return deltas


def ed_polynomial(N: int) -> int:
    return 6 * N**3 - 15 * N**2 + 11 * N - 4


def affine_count_polynomial(N: int) -> int:
    """9/2 N^3 - 21/2 N^2 + 8N - 4 (an integer for every N)."""
    return (9 * N**3 - 21 * N**2) // 2 + 8 * N - 4


@dataclass
class MatherResult:
    N: int
    euObstruction: int
    selfIntersection: int
    pushforward: ClassVector
    matherClass: ClassVector
    polarDegrees: Tuple[int, int, int, int]
    edDegree: int
    extras: Dict[str, object] = field(default_factory=dict)


def run_pipeline(N: int) -> MatherResult:
    if not isinstance(N, int) or N < 2:
        raise UnsupportedN(f"need N >= 2 cameras, got {N!r}")
    pres = build_presentation(N)
    chern = chern_total(pres)
    ell = pullback_hyperplane(pres)
    push = pushforward_class(pres, chern, ell)
    s = self_intersection_E(pres, ell, chern)
    if s != -(N - 1):
        raise InconsistentResolution(f"exceptional curve has self-intersection {s}, expected {-(N - 1)}")
    eu = 2 + s
    m = mather_class(push, N, eu)
    deltas = polar_degrees(m)
    return MatherResult(
        N=N,
        euObstruction=eu,
        selfIntersection=s,
        pushforward=push,
        matherClass=m,
        polarDegrees=deltas,
        edDegree=sum(deltas),
    )


def ed_degree(N: int) -> Dict[str, object]:
    result = run_pipeline(N)
    p = ed_polynomial(N)
    return {
        "N": N,
        "edDegree": result.edDegree,
        "p": p,
        "q": affine_count_polynomial(N),
        "match": result.edDegree == p,
    }
