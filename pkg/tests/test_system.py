import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import NAMES, system
from oracles import gasket_nodes
from necklace import (AffineMap, BudgetExceeded, NecklaceSystem, NodeAmbiguityError, Status,
                      SystemSpecError, attractor_enclosure, contains_point, main_nodes,
                      sample_attractor, validate_necklace)
from necklace.library import fig1b
from necklace.system import copy_enclosure, format_word, locate, parse_word


def shifted_hexagasket():
    maps = list(fig1b().maps)
    f = maps[1]
    maps[1] = AffineMap(f.a, f.b, f.c, f.d, f.tx + 3.0, f.ty)
    return NecklaceSystem(maps, name="broken")


def test_enclosure_formula_two_halvings():
    ball = attractor_enclosure([AffineMap.from_complex(0.5), AffineMap.from_complex(0.5, 0.5)],
                               center=(0, 0))
    assert ball.center == (0, 0)
    assert ball.radius == pytest.approx(1.0)


@pytest.mark.parametrize("name", NAMES)
def test_enclosure_forward_invariant(name):
    s = system(name)
    ball = copy_enclosure(s, ())
    for f in s.maps:
        assert ball.contains_ball(ball.image(f), slack=1e-12)


def test_ex23L_enclosure_contains_copies():
    s = system("ex23L")
    outer = copy_enclosure(s, ())
    for k in (1, 2, 3):
        assert outer.contains_ball(copy_enclosure(s, (k,)), slack=1e-12)


def test_copy_enclosure_examples():
    s = system("ex21")
    assert copy_enclosure(s, ()).radius == pytest.approx(s.r0)
    assert copy_enclosure(s, (1, 13)).radius == pytest.approx(s.r0 / 9)


@pytest.mark.parametrize("name", NAMES)
@given(data=st.data())
def test_enclosure_nesting(name, data):
    s = system(name)
    word = tuple(data.draw(st.lists(st.integers(1, s.n), max_size=6)))
    j = data.draw(st.integers(1, s.n))
    parent, child = copy_enclosure(s, word), copy_enclosure(s, word + (j,))
    assert parent.contains_ball(child, slack=1e-12)
    assert child.radius <= parent.radius * s.cmax * (1 + 1e-12)


def test_gasket_validates():
    v = validate_necklace(system("fig1a"), depth=6, tol=1e-6)
    assert v.status is Status.VERIFIED
    assert len(v.pairs) == 3


def test_shifted_map_refuted():
    v = validate_necklace(shifted_hexagasket(), depth=6, tol=1e-6)
    assert v.status is Status.REFUTED
    assert any(w["adjacent"] and w["status"] == "Refuted" for w in v.witnesses)


def test_overlapping_tiles_refuted():
    square = NecklaceSystem([AffineMap.from_complex(0.5, c) for c in (0, 0.5, 0.5 + 0.5j, 0.5j)])
    v = validate_necklace(square, depth=5, tol=1e-6)
    assert v.status is Status.REFUTED
    assert v.witnesses


def test_ex23R_validates():
    assert validate_necklace(system("ex23R"), depth=6).status is Status.VERIFIED


@pytest.mark.parametrize("name", ["fig1a", "ex23L"])
def test_validation_monotone_in_depth(name):
    s = system(name)
    assert [validate_necklace(s, d).status for d in (4, 6, 8)] == [Status.VERIFIED] * 3


def test_jobs_do_not_change_the_verdict():
    s = system("ex23L")
    assert validate_necklace(s, 6, jobs=1).to_dict() == validate_necklace(s, 6, jobs=3).to_dict()


def test_gasket_nodes_are_midpoints():
    got = system("fig1a").nodes
    for p, q in zip(got, gasket_nodes()):
        assert p == pytest.approx(tuple(q), abs=1e-12)


def test_ex21_node_matches_gluing_constraint():
    s = system("ex21")
    f = s.maps
    glue = f[23](( 1.0, 0.0))
    other = f[0](f[12]((0.0, 1.0)))
    assert glue == pytest.approx(other, abs=1e-12)
    assert s.node(24) == pytest.approx(glue, abs=1e-12)
    assert s.node(0) == s.node(24)


@pytest.mark.parametrize("name", NAMES)
def test_nodes_lie_in_both_copies(name):
    s = system(name)
    for k in range(1, s.n + 1):
        z = s.node(k)
        for copy in (k, s.succ(k)):
            assert contains_point(s, (copy,), z, tol=1e-9) is Status.VERIFIED


@pytest.mark.parametrize("name", ["fig1a", "ex23L", "ex23R"])
def test_nodes_near_copy_samples(name):
    s = system(name)
    depth = 7
    pts = sample_attractor(s, depth)
    block = s.n ** (depth - 1)
    bound = s.r0 * s.cmax ** depth + 1e-9
    for k in range(1, s.n + 1):
        z = np.array(s.node(k))
        for copy in (k, s.succ(k)):
            sub = pts[(copy - 1) * block: copy * block]
            assert np.linalg.norm(sub - z, axis=1).min() <= bound


def test_main_nodes_raw_agrees_with_polished():
    s = system("ex23L")
    for p, q in zip(main_nodes(s), s.nodes):
        assert p.dist(q) <= s.node_tolerance


def test_ambiguous_contact_raises():
    with pytest.raises(NodeAmbiguityError):
        main_nodes(shifted_hexagasket())


def test_sample_sizes_and_budget():
    s = system("fig1a")
    assert sample_attractor(s, 0).tolist() == [[s.c0.x, s.c0.y]]
    assert sample_attractor(s, 5).shape == (3 ** 5, 2)
    with pytest.raises(BudgetExceeded):
        sample_attractor(s, 12, budget=1000)


def test_sample_lies_on_attractor():
    s = system("fig1a")
    # every sample point is f_w(0), a point of the gasket: inside the triangle
    pts = sample_attractor(s, 6)
    assert (pts[:, 1] >= -1e-12).all()
    assert (pts[:, 1] <= math.sqrt(3) * pts[:, 0] + 1e-12).all()
    assert (pts[:, 1] <= math.sqrt(3) * (1 - pts[:, 0]) + 1e-12).all()


def test_constructor_errors_name_the_map():
    half = AffineMap.from_complex(0.5)
    with pytest.raises(SystemSpecError, match="n >= 3"):
        NecklaceSystem([half, half])
    with pytest.raises(SystemSpecError) as exc:
        NecklaceSystem([half, AffineMap.similitude(1.0, 0.4), half])
    assert exc.value.map_index == 2
    with pytest.raises(SystemSpecError) as exc:
        NecklaceSystem([AffineMap(0.5, 0.5, 0.25, 0.25), half, half])
    assert exc.value.map_index == 1


def test_cyclic_helpers():
    s = system("fig1b")
    assert s.succ(6) == 1 and s.pred(1) == 6
    assert s.adjacent(1, 6) and not s.adjacent(1, 3)
    assert s.node_between(6, 1) == 6


def test_word_syntax():
    assert parse_word("1,13") == (1, 13)
    assert parse_word("") == ()
    assert format_word(()) == "∅"
    with pytest.raises(ValueError):
        system("fig1a").check_word((4,))


def test_locate_and_contains():
    s = system("fig1a")
    z1 = s.node(1)
    assert set(locate(s, z1)) == {1, 2}
    assert contains_point(s, (3,), z1, tol=1e-9) is Status.REFUTED
