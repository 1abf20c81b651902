import json
import math

import pytest

import arakelov_lab as al


def test_rational_height():
    assert al.height({"kind": "rational", "coords": [3, 4]}) == pytest.approx(math.log(4), abs=1e-15)


def test_big_integers_survive():
    big = 10**40 + 7
    assert al.height({"kind": "rational", "coords": [1, big]}) == pytest.approx(math.log(big), rel=1e-15)


def test_minpoly_height():
    assert al.height({"kind": "minpoly", "coeffs": [-2, 0, 1]}) == pytest.approx(0.5 * math.log(2), abs=1e-14)


def test_power_map_exact():
    value, bound, _ = al.canonical_height({"kind": "power", "q": 2}, {"kind": "rational", "coords": [1, 2]})
    assert value == pytest.approx(math.log(2), abs=1e-15)
    assert bound == 0.0


def test_functional_equation():
    phi = {"forms": [[1, 0, 0], [1, 0, 1]]}
    h1, e1, _ = al.canonical_height(phi, {"kind": "rational", "coords": [3, 5]})
    h2, e2, _ = al.canonical_height(phi, {"kind": "rational", "coords": [9, 34]})
    assert abs(h2 - 2 * h1) <= 2 * e1 + e2


def test_covolume_exact():
    from fractions import Fraction

    with pytest.raises(al.ArakelovError):
        al.covolume([[2, 1], [1, "1/2"]])
    assert al.covolume([[2, 1], [1, 2]], torsion=3) == Fraction(1, 3)
    assert al.chi([[1, 0], [0, 1]]) == pytest.approx(math.log(math.pi), abs=1e-14)


def test_bilu_report():
    rep = al.bilu([5, 101], 8)
    assert len(rep["rows"]) == 2


def test_intersections():
    for c in (0.5, 1.0, 2.0):
        assert al.self_intersection_c(c) == pytest.approx(0.5 * (1 + math.log(c)), abs=1e-10)
    assert al.mixed_intersection({"kind": "c", "c": 1}, {"kind": "c", "c": 1}) == pytest.approx(0.5, abs=1e-9)


def test_fubini_study_distortion():
    sup = al.distortion_sup({"kind": "fs", "exponent": 5}, {"kind": "fs"})
    assert sup == pytest.approx(6.0, abs=1e-9)


def test_errors_carry_kind():
    with pytest.raises(al.ArakelovError) as info:
        al.distortion_sup({"kind": "fs"}, {"diff": [{"kind": "c", "c": 1}, {"kind": "c", "c": 0.5}]})
    assert info.value.kind == "NonPositiveCurvature"


def test_cli_in_process():
    code, out, _ = al.run_cli("intersect", "--c", "1")
    assert code == 0
    assert json.loads(out)["results"]["value"] == pytest.approx(0.5, abs=1e-12)
