import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import NAMES, system
from necklace import (CutStatus, NodeRef, PointAddress, Status, address_set, approximate_arc,
                      bounded_ramification, build_chain, check_chain, copy_graph, cut_point_scan,
                      global_cut_point_search, is_good, is_stable)
from necklace.topology import Chain, candidate_nodes
from oracles import gasket_vertices, hausdorff, level_maps, raw_maps


def random_node(rng, s, depth=2):
    base = tuple(rng.randint(1, s.n) for _ in range(rng.randint(0, depth)))
    return NodeRef(base, rng.randint(1, s.n))


# --------------------------------------------------------------------------
# chains

def test_first_level_chain_shorter_side():
    s = system("fig1b")
    c = build_chain(s, NodeRef((1,), 3), NodeRef((3,), 6), 1)
    assert c.words == [(1,), (2,), (3,)]
    assert [tuple(p) for p in c.connections] == [tuple(s.node(1)), tuple(s.node(2))]


def test_chain_from_point_to_itself():
    s = system("fig1b")
    c = build_chain(s, NodeRef((2,), 4), NodeRef((2,), 4), 3)
    assert len(c) == 1 and c.connections == []
    assert check_chain(s, c) == []


def test_chain_between_adjacent_nodes():
    s = system("fig1a")
    c = build_chain(s, NodeRef((), 3), NodeRef((), 1), 1)
    assert c.words == [(1,)]
    arc = approximate_arc(s, NodeRef((1,), 2), NodeRef((2,), 3), 1)
    assert len(arc) == 3
    assert np.allclose(arc[1], tuple(s.node(1)))


def test_chain_level_must_be_positive():
    with pytest.raises(ValueError):
        build_chain(system("fig1a"), NodeRef((), 1), NodeRef((), 2), 0)


@settings(max_examples=25)
@given(st.sampled_from(NAMES), st.integers(0, 10 ** 6), st.integers(1, 4))
def test_chain_invariants(name, seed, k):
    s = system(name)
    rng = random.Random(seed)
    c = build_chain(s, random_node(rng, s), random_node(rng, s), k)
    assert check_chain(s, c) == []
    assert len(c.connections) == len(c) - 1
    assert all(len(w) == k for w in c.words)


def test_check_chain_detects_broken_chains():
    s = system("fig1b")
    c = build_chain(s, NodeRef((1,), 3), NodeRef((4,), 6), 2)
    assert check_chain(s, c) == []
    gap = Chain(c.level, c.words[:2] + c.words[3:], c.connections, c.refs, c.start, c.end,
                c.automaton)
    assert any(p[0] == "consecutive copies do not meet" for p in check_chain(s, gap))
    loop = Chain(c.level, c.words + c.words[:1], c.connections, c.refs, c.start, c.end,
                 c.automaton)
    kinds = {p[0] for p in check_chain(s, loop)}
    assert "copies nested or repeated" in kinds
    assert "start point in a later copy" in kinds


@pytest.mark.parametrize("name", NAMES)
def test_connections_persist_under_refinement(name):
    s = system(name)
    rng = random.Random(7)
    for _ in range(5):
        x, u = random_node(rng, s), random_node(rng, s)
        prev = None
        for k in range(1, 6):
            keys = set(build_chain(s, x, u, k).connection_keys())
            if prev is not None:
                assert prev <= keys
            prev = keys


@pytest.mark.parametrize("name", NAMES)
def test_connection_points_match_anchors(name):
    s = system(name)
    c = build_chain(s, NodeRef((), s.n), NodeRef((), 2), 3)
    for p, a in zip(c.connections, c.anchors):
        assert p.dist(a.point) < 1e-12


@pytest.mark.parametrize("name", NAMES)
def test_arc_convergence_rate(name):
    s = system(name)
    x, u = NodeRef((), s.n), NodeRef((), 1)
    prev = approximate_arc(s, x, u, 1)
    for d in range(1, 9):
        cur = approximate_arc(s, x, u, d + 1, budget=10 ** 7)
        samples = 2 if len(cur) > 10 ** 5 else 8
        assert hausdorff(prev, cur, samples) <= 2 * s.r0 * s.cmax ** d
        prev = cur


@pytest.mark.parametrize("name", NAMES)
def test_arc_matches_chain_connections(name):
    s = system(name)
    rng = random.Random(11)
    for _ in range(5):
        x, u = random_node(rng, s), random_node(rng, s)
        c = build_chain(s, x, u, 3)
        ref = [tuple(c.start.point)] + [tuple(p) for p in c.connections] + [tuple(c.end.point)]
        assert np.abs(approximate_arc(s, x, u, 3) - np.array(ref)).max() < 1e-12


def test_gasket_edge_arc():
    s = system("fig1a")
    v1, v2 = PointAddress((), (1,)), PointAddress((), (2,))
    arc = approximate_arc(s, v1, v2, 8)
    assert len(arc) - 1 >= 2 ** 8
    assert np.allclose(arc[0], gasket_vertices()[0]) and np.allclose(arc[-1], gasket_vertices()[1])
    # the path through connections of the bottom edge stays on it
    assert np.allclose(arc[:, 1], 0.0, atol=1e-12)
    assert np.all(np.diff(arc[:, 0]) > 0)


# --------------------------------------------------------------------------
# cut points

def test_ex21_cut_point_certified():
    v = cut_point_scan(system("ex21"), PointAddress((), (1, 13)), 6)
    assert v.status is CutStatus.CERTIFIED
    assert v.component_history[1:] == [2] * 5
    assert v.certificate["period"] == 2
    assert v.certificate["conjugating_word"] == [1, 13]
    assert v.point.dist((0.25, 0.25)) < 1e-12


def test_ex21_non_cut_node():
    v = cut_point_scan(system("ex21"), NodeRef((), 5), 5)
    assert v.status is CutStatus.NO_CUT


@pytest.mark.parametrize("k", [1, 2, 3])
def test_gasket_nodes_no_cut(k):
    v = cut_point_scan(system("fig1a"), NodeRef((), k), 6)
    assert v.status is CutStatus.NO_CUT
    assert len(v.component_history) == 6


def test_point_off_main_nodes_no_cut():
    # f_1(v_1) = v_1 is a vertex of the gasket, in one copy at every level
    v = cut_point_scan(system("fig1a"), PointAddress((), (1,)), 6)
    assert v.status is CutStatus.NO_CUT
    assert v.component_history == [1] * 6


def test_scan_history_is_literal_copy_graph():
    s = system("ex23L")
    node = NodeRef((), 1)
    v = cut_point_scan(s, node, 5)
    literal = [copy_graph(s, m, exclude=address_set(s, node, m).words).components
               for m in range(1, 6)]
    assert v.component_history == literal


@pytest.mark.parametrize("name,node", [("ex21", PointAddress((), (1, 13))),
                                       ("ex23L", NodeRef((), 1)), ("fig1a", NodeRef((1,), 2))])
def test_components_nest_across_levels(name, node):
    s = system(name)
    top = 3 if name == "ex21" else 5
    graphs = [copy_graph(s, m, exclude=address_set(s, node, m).words) for m in range(1, top + 1)]
    for g, h in zip(graphs, graphs[1:]):
        label = dict(zip(h.words, h.labels.tolist()))
        for part in g.component_sets():
            kids = {label[w + (d,)] for w in part for d in range(1, s.n + 1)}
            assert len(kids) == 1


def test_global_search_gasket():
    r = global_cut_point_search(system("fig1a"), 2, 6)
    assert r.caveat == ""
    assert r.verdicts and all(v.status is CutStatus.NO_CUT for v in r.verdicts)


def test_global_search_ex21_caveat_and_seed():
    s = system("ex21")
    r = global_cut_point_search(s, 0, 4, seeds=[PointAddress((), (1, 13))])
    assert "not verified stable" in r.caveat
    certified = [v for v in r.verdicts if v.status is CutStatus.CERTIFIED]
    assert len(certified) == 1 and certified[0].point.dist((0.25, 0.25)) < 1e-12


def test_candidate_nodes_are_distinct():
    s = system("fig1b")
    cands = candidate_nodes(s, 2)
    pts = np.array([tuple(s.automaton.node_anchor(r).point) for r in cands])
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2) + np.eye(len(pts))
    assert d.min() > s.node_tolerance
    # independent count: distinct points f_sigma(z_k), |sigma| <= 2, by rounding
    L, T = raw_maps(s)
    z = np.array([tuple(s.node(k)) for k in range(1, s.n + 1)])
    seen = set()
    for m in range(3):
        A, t = level_maps(L, T, m)
        imgs = np.einsum("wab,kb->wka", A, z) + t[:, None, :]
        seen |= {(round(x * 1e8), round(y * 1e8)) for x, y in imgs.reshape(-1, 2)}
    assert len(cands) == len(seen)


@pytest.mark.parametrize("name", NAMES)
def test_no_cut_point_regressions(name):
    s = system(name)
    good = is_good(s).status is Status.VERIFIED
    stable_bounded = (is_stable(s).status is Status.VERIFIED
                      and bounded_ramification(s).status is Status.VERIFIED)
    if not (good or stable_bounded):
        pytest.skip("neither good nor stable with bounded ramification")
    r = global_cut_point_search(s, 1, 5)
    assert all(v.status is CutStatus.NO_CUT for v in r.verdicts)
