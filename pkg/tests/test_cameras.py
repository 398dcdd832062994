import json
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from mvchern.cameras import (
    CameraConfig,
    ProjectivePoint,
    base_locus_membership,
    derive_geometry,
    dot,
    kernel_vector,
    load_config,
    phi_eval,
    random_config,
    three_camera_example,
    translate_config,
    validate_general_position,
)
from mvchern.errors import ConfigParseError, DegenerateConfig, UnsupportedN

CFG4 = random_config(4, 42)
CFG3 = random_config(3, 7)


def test_worked_example_general_position():
    ok, violations = validate_general_position(three_camera_example())
    assert ok, violations


def test_worked_example_fails_strict_check():
    # its f rows repeat (x + w appears in cameras 1 and 3), which the row-level check rejects
    ok, violations = validate_general_position(three_camera_example(), strict=True)
    assert not ok
    assert any("duplicate rows" in v for v in violations)


def test_worked_example_map_up_to_offset_sign():
    x, y, z, w = sp.symbols("x y z w")
    phi = phi_eval(three_camera_example(), (x, y, z, w))
    printed = [
        (x - w) * x * z, (z - w) * x * z, (y - w) * y * z, (z - w) * y * z,
        (x - w) * x * y, (y - w) * x * y, x * y * z,
    ]
    for ours, theirs in zip(phi, printed):
        assert sp.expand(ours - theirs.subs(w, -w)) == 0


def test_identical_cameras_rejected():
    cam = CFG4.cameras[0]
    ok, violations = validate_general_position(CameraConfig((cam, cam)))
    assert not ok
    assert any(v.startswith("duplicate rows h1, h2") for v in violations)


def test_random_config_seed_42():
    ok, violations = validate_general_position(CFG4, strict=True)
    assert ok, violations
    assert random_config(4, 42) == CFG4


def test_rescaled_rows_keep_verdict():
    rng = random.Random(3)
    for cfg in (CFG3, CFG4, three_camera_example()):
        scaled = CameraConfig(
            tuple(tuple(tuple(Fraction(rng.choice([-3, 2, 5]), 7) * x for x in r) for r in cam) for cam in cfg.cameras)
        )
        for strict in (False, True):
            assert validate_general_position(scaled, strict)[0] == validate_general_position(cfg, strict)[0]


def test_derive_geometry_counts():
    geo = derive_geometry(CFG3)
    assert len(geo.centers) == 3 and len(geo.lines) == 3 and len(geo.triple_points) == 1
    for i, q in enumerate(geo.centers):
        assert all(dot(r, q.coords) == 0 for r in CFG3.cameras[i])
    (key, p), = geo.triple_points.items()
    assert all(dot(CFG3.planes()[k - 1], p.coords) == 0 for k in key)


def test_coordinate_camera_center():
    cam = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0))
    other = ((0, 0, 0, 1), (1, 1, 0, 0), (1, 2, 3, 5))
    geo = derive_geometry(CameraConfig((cam, other)), check=False)
    assert geo.centers[0] == ProjectivePoint((0, 0, 0, 1))


def test_degenerate_geometry_raises():
    cam = CFG4.cameras[0]
    with pytest.raises(DegenerateConfig):
        derive_geometry(CameraConfig((cam, cam)))


def test_rank_deficient_camera():
    with pytest.raises(DegenerateConfig):
        CameraConfig((((1, 0, 0, 0), (2, 0, 0, 0), (0, 0, 1, 0)), CFG4.cameras[0]))
    with pytest.raises(UnsupportedN):
        CameraConfig((CFG4.cameras[0],))


def _point_on_line(cfg, i, j, rng):
    hi, hj = cfg.planes()[i - 1], cfg.planes()[j - 1]
    pts = [kernel_vector([hi, hj, [rng.randint(-9, 9) for _ in range(4)]]) for _ in range(2)]
    a, b = Fraction(rng.randint(1, 9)), Fraction(rng.randint(1, 9))
    return ProjectivePoint(tuple(a * u + b * v for u, v in zip(*pts)))


def test_membership_strata():
    rng = random.Random(5)
    geo = derive_geometry(CFG4)
    for i, q in enumerate(geo.centers, start=1):
        assert base_locus_membership(CFG4, q) == ("center", i)
        assert all(c == 0 for c in phi_eval(CFG4, q))
    for key, p in geo.triple_points.items():
        assert base_locus_membership(CFG4, p) == ("triple_point",) + key
        assert all(c == 0 for c in phi_eval(CFG4, p))
    for i, j in geo.lines:
        x = _point_on_line(CFG4, i, j, rng)
        assert base_locus_membership(CFG4, x) == ("line", i, j)
        assert all(c == 0 for c in phi_eval(CFG4, x))


def test_membership_random_points():
    rng = random.Random(9)
    for _ in range(100):
        x = [Fraction(rng.randint(-100, 100), rng.randint(1, 20)) for _ in range(4)]
        if not any(x):
            continue
        in_b = base_locus_membership(CFG4, x) != ("not_in_B",)
        assert in_b == all(c == 0 for c in phi_eval(CFG4, x))
        assert not in_b
        assert phi_eval(CFG4, x)[-1] != 0


_coords = st.fractions(min_value=-50, max_value=50, max_denominator=20)


@given(st.lists(_coords, min_size=4, max_size=4), _coords.filter(lambda v: v != 0))
@settings(max_examples=60, deadline=None)
def test_phi_homogeneous(x, lam):
    N = CFG3.N
    scaled = phi_eval(CFG3, [lam * c for c in x])
    assert scaled == [lam**N * c for c in phi_eval(CFG3, x)]


@given(st.lists(_coords, min_size=4, max_size=4).filter(any))
@settings(max_examples=60, deadline=None)
def test_membership_matches_phi(x):
    in_b = base_locus_membership(CFG3, x) != ("not_in_B",)
    assert in_b == all(c == 0 for c in phi_eval(CFG3, x))


def test_translate_identity_and_planes():
    assert translate_config(CFG4, [0] * 8) == CFG4
    moved = translate_config(CFG4, [Fraction(k, 3) for k in range(1, 9)])
    assert moved.planes() == CFG4.planes()
    geo, geo2 = derive_geometry(CFG4), derive_geometry(moved)
    assert geo.lines == geo2.lines and geo.triple_points == geo2.triple_points
    # M_i is invertible, so ker(M_i P_i) = ker(P_i): the centers stay put as well
    assert geo.centers == geo2.centers


def test_translate_keeps_verdict():
    rng = random.Random(11)
    for seed in range(1, 11):
        cfg = random_config(3, seed)
        v = [Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(6)]
        assert validate_general_position(translate_config(cfg, v))[0] == validate_general_position(cfg)[0]


def test_translate_shifts_image():
    cfg = CFG3
    v = [Fraction(k) for k in (1, -2, 3, 4, -5, 6)]
    x = (Fraction(3), Fraction(-1), Fraction(2), Fraction(1))
    before = phi_eval(cfg, x)
    after = phi_eval(translate_config(cfg, v), x)
    for i in range(3):
        assert after[2 * i] / after[-1] == before[2 * i] / before[-1] + v[2 * i]
        assert after[2 * i + 1] / after[-1] == before[2 * i + 1] / before[-1] + v[2 * i + 1]


def test_projective_point_equality():
    p = ProjectivePoint((1, 2, 3, 4))
    assert p == p.scaled(Fraction(-5, 3))
    assert p != ProjectivePoint((1, 2, 3, 5))
    assert p.is_close(ProjectivePoint((2.0, 4.0, 6.0, 8.0000000001)), tol=1e-9)
    with pytest.raises(ValueError):
        ProjectivePoint((0, 0, 0, 0))


# -- JSON ---------------------------------------------------------------------------------


def test_json_round_trip():
    data = CFG4.to_json()
    assert load_config(json.dumps(data)) == CFG4
    half = CameraConfig(tuple(tuple(tuple(Fraction(x, 2) for x in r) for r in cam) for cam in CFG3.cameras))
    assert "/" in json.dumps(half.to_json())
    assert load_config(half.to_json()) == half


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda d: d["cameras"][1][2].__setitem__(3, "1/0"), "cameras[1][2][3]"),
        (lambda d: d["cameras"][0][1].__setitem__(0, "abc"), "cameras[0][1][0]"),
        (lambda d: d["cameras"][0][1].__setitem__(0, 1.5), "cameras[0][1][0]"),
        (lambda d: d["cameras"][2].pop(), "cameras[2]"),
        (lambda d: d["cameras"][0][0].pop(), "cameras[0][0]"),
        (lambda d: d["cameras"][1].__setitem__(1, list(d["cameras"][1][0])), "cameras[1]"),
        (lambda d: d.__setitem__("N", 7), "N"),
        (lambda d: d.pop("cameras"), "$"),
    ],
)
def test_json_errors_are_positioned(mutate, path):
    data = CFG3.to_json()
    mutate(data)
    with pytest.raises(ConfigParseError) as exc:
        load_config(data)
    assert exc.value.path == path


def test_json_syntax_error():
    with pytest.raises(ConfigParseError) as exc:
        load_config('{"cameras": [}')
    assert "line 1" in exc.value.path
