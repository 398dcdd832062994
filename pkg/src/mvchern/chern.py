"""Total Chern class of the resolution, pullback of the hyperplane class of
P^{2N}, and the pushforward of the Chern class as a vector of degrees."""

from __future__ import annotations

from dataclasses import astuple, dataclass
from math import comb
from typing import Dict, Tuple

from .chow import ChowPresentation, RingElement, TOP_DEGREE, degree


@dataclass(frozen=True)
class ClassVector:
    """Coefficients of [P^0] .. [P^3] of a class pushed into A(P^{2N})."""

    a0: int
    a1: int
    a2: int
    a3: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return astuple(self)

    def __getitem__(self, j: int) -> int:
        return self.as_tuple()[j]

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        return ClassVector(*(x - y for x, y in zip(self.as_tuple(), other.as_tuple())))

    def to_dict(self) -> Dict[str, int]:
        return {"a0": self.a0, "a1": self.a1, "a2": self.a2, "a3": self.a3}


@dataclass
class ChernData:
    alpha: Dict[int, RingElement]
    beta: Dict[Tuple[int, int], RingElement]
    gamma: Dict[Tuple[int, int, int], RingElement]
    total: RingElement

    def c(self, k: int) -> RingElement:
        return self.total.homogeneous_part(k)


def _point_contribution(pres: ChowPresentation, e: RingElement) -> RingElement:
    # blow-up of a point in a threefold: (1 - E)(1 + E)^3 - 1 with E the point generator
    one = pres.one()
    return (one - e) * (one + e) ** 3 - one


def _line_contribution(pres: ChowPresentation, t: RingElement) -> RingElement:
    # c(N) = 1 + c1 with c1 = -2(N-3)h; c(L) = (1+h)^2; exceptional class eta = -T
    one = pres.one()
    h = pres.h
    c1 = -2 * (pres.N - 3) * h
    bracket = (one - t) * ((one + t) * c1 + (one + t) ** 2) - (one + c1)
    return (one + h) ** 2 * bracket


def chern_total(pres: ChowPresentation) -> ChernData:
    one = pres.one()
    h = pres.h
    alpha = {g[1]: _point_contribution(pres, pres.gen(*g)) for g in pres.points_q}
    gamma = {g[1:]: _point_contribution(pres, pres.gen(*g)) for g in pres.points_p}
    beta = {g[1:]: _line_contribution(pres, pres.gen(*g)) for g in pres.lines}
    total = pres.sum(
        [(one + h) ** 4, *alpha.values(), *beta.values(), *gamma.values()]
    )
    return ChernData(alpha=alpha, beta=beta, gamma=gamma, total=total)


def pullback_hyperplane(pres: ChowPresentation) -> RingElement:
    """Pullback of c1(O(1)) from P^{2N}: N*h + 2*sum P + sum Q + sum T."""
    return pres.sum(
        [pres.N * pres.h]
        + [2 * pres.gen(*g) for g in pres.points_p]
        + [pres.gen(*g) for g in pres.points_q + pres.lines]
    )


def pushforward_class(pres: ChowPresentation, chern: ChernData, ell: RingElement) -> ClassVector:
    """a_j = deg(ell^j * c_{3-j}) for j = 0..3."""
    coeffs = []
    power = pres.one()
    for j in range(TOP_DEGREE + 1):
        coeffs.append(degree(pres, power * chern.c(TOP_DEGREE - j)))
        power = power * ell
    return ClassVector(*coeffs)


def euler_characteristic_formula(N: int) -> int:
    return 4 + 2 * N + 2 * comb(N, 3) + 2 * comb(N, 2)


def faithful_degree_formula(N: int) -> int:
    """Closed form of deg(ell^3) under the relations of the presentation."""
    return N**3 - N + 10 * comb(N, 3) - (5 * N - 6) * comb(N, 2)


def printed_pushforward(N: int) -> ClassVector:
    """The pushforward exactly as the published closed forms state it.

    Its [P^3] entry differs from :func:`pushforward_class` by 2*C(N, 2).
    """
    return ClassVector(
        a0=euler_characteristic_formula(N),
        a1=6 * N + (N - 4) * comb(N, 2),
        a2=4 * N**2 - 2 * comb(N, 3) - 6 * comb(N, 2) - 2 * N,
        a3=N**3 - (4 + N) * comb(N, 2) - N - 2 * comb(N, 3),
    )
