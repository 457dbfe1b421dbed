import pytest
from shapely.geometry import Point as ShapelyPoint

from conftest import NAMES, system
from necklace import (AffineMap, NecklaceSystem, PolygonWitness, Status, bounded_ramification,
                      build_osc_witness_from_component, check_osc_witness, check_property_I,
                      classify, complement_components, is_good, is_stable)
from oracles import SQ3, brute_counts, gasket_vertices

TRIANGLE = PolygonWitness(tuple(map(tuple, gasket_vertices())))
HOLE_CENTRE = (0.5, SQ3 / 6)
HOLE_AREA = SQ3 / 16  # middle triangle of side 1/2


def test_gasket_is_good_and_stable():
    s = system("fig1a")
    assert is_good(s).status is Status.VERIFIED
    v = is_stable(s)
    assert v.status is Status.VERIFIED
    assert all(d["count"] == 2 for d in v.details.values())


def test_gasket_boundary_nodes_in_distinct_children():
    # z_3 (left edge midpoint) lies in F_13, z_1 (bottom midpoint) in F_12
    d = is_good(system("fig1a")).details["1"]
    assert d["z_prev_children"] == [3]
    assert d["z_next_children"] == [2]


def test_ex23L_good_refuted_with_witness_1_3():
    v = is_good(system("ex23L"))
    assert v.status is Status.REFUTED
    assert {"k": 1, "j": 3} in v.witnesses


def test_ex23L_stable_with_count_two():
    v = is_stable(system("ex23L"))
    assert v.status is Status.VERIFIED
    assert [d["count"] for d in v.details.values()] == [2, 2, 2]


def test_ex23R_good_but_unbounded():
    s = system("ex23R")
    assert is_good(s).status is Status.VERIFIED
    v = bounded_ramification(s, 8)
    assert v.status is Status.REFUTED
    for k in range(1, s.n + 1):
        assert v.details[str(k)]["counts"] == [2 ** m for m in range(1, 9)]
        assert v.details[str(k)]["growth"] == "exponential"


def test_ex21_not_stable_only_f_1_13():
    v = is_stable(system("ex21"))
    assert v.status is Status.REFUTED
    first = [w for w in v.witnesses if w["k"] == 1]
    assert first == [{"k": 1, "children": [13]}]


def test_ex21_bounded_with_value_two():
    v = bounded_ramification(system("ex21"), 8)
    assert v.status is Status.VERIFIED
    for d in v.details.values():
        assert d["counts"] == [2] * 8 and d["value"] == 2


def test_ex23L_bounded_values():
    v = bounded_ramification(system("ex23L"), 10)
    assert v.status is Status.VERIFIED
    assert [v.details[k]["value"] for k in "123"] == [3, 3, 2]


def test_property_I_examples():
    assert check_property_I(system("ex21")).status is Status.REFUTED
    assert check_property_I(system("ex23L")).status is Status.VERIFIED


@pytest.mark.parametrize("name", NAMES)
def test_good_implies_stable_and_property_I(name):
    s = system(name)
    if is_good(s).status is Status.VERIFIED:
        assert is_stable(s).status is Status.VERIFIED
        assert check_property_I(s).status is Status.VERIFIED


@pytest.mark.parametrize("name", ["fig1a", "ex23L", "ex23R"])
def test_bounded_verdict_agrees_with_brute_force(name):
    s = system(name)
    v = bounded_ramification(s, 4)
    for k in range(1, s.n + 1):
        assert v.details[str(k)]["counts"] == brute_counts(s, tuple(s.node(k)), 4)


def test_classify_report_shape():
    r = classify(system("ex23L"))
    assert r.status is Status.REFUTED
    d = r.to_dict()
    assert set(d) == {"system", "status", "good", "stable", "bounded_ramification",
                      "property_I", "osc"}
    assert d["osc"]["status"] == "Unknown"


def test_classify_jobs_identical():
    a = classify(system("fig1b"), jobs=1).to_dict()
    b = classify(system("fig1b"), jobs=3).to_dict()
    assert a == b


# --------------------------------------------------------------------------
# open set condition

def test_triangle_witness_verified():
    s = system("fig1a")
    assert check_osc_witness(s, TRIANGLE).status is Status.VERIFIED
    assert check_osc_witness(s, TRIANGLE, depth=2).status is Status.VERIFIED


def test_translated_witness_refuted():
    v = check_osc_witness(system("fig1a"), TRIANGLE.translated(0.1, 0.0))
    assert v.status is Status.REFUTED
    assert any(w["kind"] == "not contained" for w in v.witnesses)


def test_far_tiny_polygon_refuted():
    tiny = PolygonWitness(((10, 10), (10.01, 10), (10.01, 10.01), (10, 10.01)))
    assert check_osc_witness(system("fig1a"), tiny).status is Status.REFUTED


def test_shrunken_triangle_is_not_a_witness():
    # A 1% homothetic shrink moves each corner inward, and f_k then maps the
    # corner near v_k onto a point between v_k and the new corner, outside.
    small = TRIANGLE.scaled(0.99)
    v = check_osc_witness(system("fig1a"), small)
    assert v.status is Status.REFUTED
    assert {tuple(w["word"]) for w in v.witnesses if w["kind"] == "not contained"} == \
        {(1,), (2,), (3,)}
    f1 = system("fig1a").maps[0]
    corner = small.vertices[0]
    assert not small.polygon.contains(ShapelyPoint(f1(corner)))


def test_enlarged_triangle_overlaps():
    v = check_osc_witness(system("fig1a"), TRIANGLE.scaled(1.01))
    assert v.status is Status.REFUTED
    assert all(w["kind"] == "overlap" for w in v.witnesses)


def test_witness_rejects_degenerate_polygons():
    with pytest.raises(ValueError):
        PolygonWitness(((0, 0), (1, 0), (2, 0)))
    with pytest.raises(ValueError):
        PolygonWitness(((0, 0), (1, 1), (1, 0), (0, 1)))


def test_witness_orientation_normalised():
    cw = PolygonWitness(((0, 0), (0, 1), (1, 0)))
    assert cw.polygon.exterior.is_ccw


# --------------------------------------------------------------------------
# complement components

def test_gasket_has_bounded_components():
    r = complement_components(system("fig1a"), 1024)
    assert r.bounded >= 1
    assert r.heuristic
    assert max(r.areas) == pytest.approx(HOLE_AREA, rel=0.05)


def test_ex23R_has_bounded_components():
    assert complement_components(system("ex23R"), 1024).bounded >= 1


def test_solid_square_has_none():
    square = NecklaceSystem([AffineMap.from_complex(0.5, c) for c in (0, 0.5, 0.5 + 0.5j, 0.5j)])
    assert complement_components(square, 256).bounded == 0


def test_hole_outline_area():
    w = build_osc_witness_from_component(system("fig1a"), HOLE_CENTRE, resolution=2048)
    assert w.polygon.area == pytest.approx(HOLE_AREA, rel=0.05)
    assert w.polygon.contains(ShapelyPoint(HOLE_CENTRE))
    assert "heuristic" in w.note


def test_hole_outline_alone_is_refuted():
    w = build_osc_witness_from_component(system("fig1a"), HOLE_CENTRE, resolution=512)
    assert check_osc_witness(system("fig1a"), w).status is Status.REFUTED


@pytest.mark.parametrize("seed", [(5.0, 5.0), (0.5, 0.0), (-0.3, 0.2)])
def test_bad_seeds_raise(seed):
    # outside the frame, on F, in the unbounded component
    with pytest.raises(ValueError):
        build_osc_witness_from_component(system("fig1a"), seed, resolution=256)

