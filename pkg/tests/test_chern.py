from math import comb

import pytest

from mvchern.chern import (
    ClassVector,
    chern_total,
    euler_characteristic_formula,
    faithful_degree_formula,
    printed_pushforward,
    pullback_hyperplane,
    pushforward_class,
)
from mvchern.chow import build_presentation, degree, parse_element


def _push(N):
    pres = build_presentation(N)
    chern = chern_total(pres)
    return pushforward_class(pres, chern, pullback_hyperplane(pres))


def test_point_contribution_top_degree():
    pres = build_presentation(3)
    chern = chern_total(pres)
    for alpha in list(chern.alpha.values()) + list(chern.gamma.values()):
        assert degree(pres, alpha.homogeneous_part(3)) == 2


def test_total_starts_with_one():
    pres = build_presentation(4)
    total = chern_total(pres).total
    assert total.homogeneous_part(0) == pres.one()
    assert max(total.degrees()) <= 3


@pytest.mark.parametrize("N", range(2, 13))
def test_euler_characteristic(N):
    pres = build_presentation(N)
    chi = degree(pres, chern_total(pres).c(3))
    assert chi == euler_characteristic_formula(N) == 4 + 2 * N + 2 * comb(N, 3) + 2 * comb(N, 2)


def test_euler_characteristic_n4():
    assert euler_characteristic_formula(4) == 32


def test_pullback_hyperplane():
    p2 = build_presentation(2)
    assert pullback_hyperplane(p2) == parse_element(p2, "2*h + Q_1 + Q_2 + T_1_2")
    p3 = build_presentation(3)
    assert pullback_hyperplane(p3) == parse_element(
        p3, "3*h + 2*P_1_2_3 + Q_1 + Q_2 + Q_3 + T_1_2 + T_1_3 + T_2_3"
    )


def test_two_view_degree():
    pres = build_presentation(2)
    assert degree(pres, pullback_hyperplane(pres) ** 3) == 2


def test_pushforward_examples():
    assert _push(3) == ClassVector(18, 15, 10, 7)
    assert _push(2).a3 == 2
    assert printed_pushforward(2).a3 == 0


@pytest.mark.parametrize("N", range(2, 11))
def test_pushforward_against_closed_forms(N):
    push = _push(N)
    printed = printed_pushforward(N)
    assert push.a0 == printed.a0
    assert push.a3 == faithful_degree_formula(N)
    assert push.a3 - printed.a3 == 2 * comb(N, 2)
    if N >= 3:
        assert push.a1 == printed.a1 == 6 * N + (N - 4) * comb(N, 2)
        assert push.a2 == printed.a2 == 4 * N**2 - 2 * comb(N, 3) - 6 * comb(N, 2) - 2 * N


def test_class_vector_helpers():
    v = ClassVector(1, 2, 3, 4)
    assert v[2] == 3
    assert (v - ClassVector(1, 1, 1, 1)).as_tuple() == (0, 1, 2, 3)
    assert v.to_dict() == {"a0": 1, "a1": 2, "a2": 3, "a3": 4}
