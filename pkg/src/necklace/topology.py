"""Chains, arcs and cut points.

A k-level chain from x to u is a sequence of k-level copies A_1..A_N with
consecutive copies meeting in one point (a connection), the others
disjoint, x only in A_1 and u only in A_N.  Refining every copy by a chain
inside it gives a chain one level down; the connections converge to an arc.

A point z cuts F when F minus z is disconnected.  F minus z is the
increasing union of the sets U_m (union of the m-level copies missing z), so
the component structure of U_m for growing m is the evidence collected here.
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .addresses import (Anchor, NodeRef, PointAddress, SharedNode, UnresolvedMembership,
                        _all_words, address_set, copy_graph, copy_intersection, resolve)
from .geometry import Point
from .system import NecklaceSystem, format_word, point_budget, BudgetExceeded


class ChainError(RuntimeError):
    pass


@dataclass
class Chain:
    level: int
    words: list                  # A_1..A_N as digit tuples
    connections: list            # x_1..x_{N-1} as Points
    refs: list = field(default_factory=list, repr=False)      # connections as NodeRefs
    start: Anchor | None = field(default=None, repr=False)
    end: Anchor | None = field(default=None, repr=False)
    automaton: object = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.words)

    @property
    def anchors(self) -> list:
        return [self.automaton.node_anchor(r) for r in self.refs]

    def connection_keys(self) -> list:
        """Canonical (prefix, state) of each connection, comparable across levels."""
        return [(a.prefix, a.state) for a in self.anchors]

    def to_dict(self) -> dict:
        return {"level": self.level, "words": [list(w) for w in self.words],
                "connections": [[p.x, p.y] for p in self.connections]}


def _digits(anchor: Anchor) -> list:
    """1-level copies containing the anchored point."""
    if anchor.prefix:
        return [anchor.prefix[0]]
    auto = anchor.automaton
    if not auto.resolved[anchor.state]:
        raise UnresolvedMembership(f"state {anchor.state} unresolved")
    return sorted(auto.transitions[anchor.state])


def _local(anchor: Anchor, word: Sequence[int]) -> Anchor:
    """Anchor of f_word^{-1}(point); the point must lie in F_word."""
    auto = anchor.automaton
    word = tuple(word)
    pre = anchor.prefix
    if len(word) <= len(pre):
        if pre[:len(word)] != word:
            raise ChainError(f"point not in copy {format_word(word)}")
        return auto.anchor(pre[len(word):], anchor.state)
    if word[:len(pre)] != pre:
        raise ChainError(f"point not in copy {format_word(word)}")
    s = auto.follow(anchor.state, word[len(pre):])
    if s is None:
        raise ChainError(f"point not in copy {format_word(word)}")
    return auto.anchor((), s)


def _cyclic(n: int, start: int, end: int, step: int) -> list:
    out = [start]
    while out[-1] != end:
        out.append((out[-1] - 1 + step) % n + 1)
    return out


def first_level_chain(system: NecklaceSystem, x: Anchor, u: Anchor) -> list:
    """Copy indices of the 1-level chain from x to u.

    Among the arcs of the n-cycle from a copy containing x to one containing
    u, only those with x in no later copy and u in no earlier copy qualify
    (an arc through all n copies never does).  The shortest wins, then the
    lower starting index, then the increasing direction.
    """
    n = system.n
    dx, du = _digits(x), _digits(u)
    if (x.prefix, x.state) == (u.prefix, u.state):
        return [dx[0]]
    best = None
    for s in dx:
        for e in du:
            for step in (1, -1):
                seq = _cyclic(n, s, e, step)
                if len(seq) == n:
                    continue
                if set(dx) & set(seq[1:]) or set(du) & set(seq[:-1]):
                    continue
                key = (len(seq), s, -step)
                if best is None or key < best[0]:
                    best = (key, seq)
    if best is None:
        raise ChainError("no 1-level chain between the points")
    return best[1]


class _Patterns:
    """Refinement of one copy from the positions of its entry and exit points.

    Positions are local anchors (relative to the copy).  Each distinct pair
    gets an integer id, and its pattern lists the children in chain order
    with their own position ids plus the main nodes joining them.
    """

    def __init__(self, system: NecklaceSystem):
        self.system = system
        self.auto = system.automaton
        self.ids: dict = {}
        self.pairs: list = []
        self.table: list = []        # id -> (children [(digit, child id)], joints)
        self._node_local: dict = {}

    def id_of(self, la: Anchor, lb: Anchor) -> int:
        key = (la.prefix, la.state, lb.prefix, lb.state)
        if key not in self.ids:
            self.ids[key] = len(self.pairs)
            self.pairs.append((la, lb))
            self.table.append(None)
        return self.ids[key]

    def _inside(self, j: int, c: int) -> Anchor:
        """Anchor of f_c^{-1}(z_j)."""
        if (j, c) not in self._node_local:
            auto = self.auto
            s = auto.transitions[auto.node_states[j - 1]][c]
            self._node_local[(j, c)] = auto.anchor((), s)
        return self._node_local[(j, c)]

    def pattern(self, pid: int):
        if self.table[pid] is None:
            la, lb = self.pairs[pid]
            seq = first_level_chain(self.system, la, lb)
            joints = [self.system.node_between(c, d) for c, d in zip(seq, seq[1:])]
            kids = []
            for i, c in enumerate(seq):
                entry = _local(la, (c,)) if i == 0 else self._inside(joints[i - 1], c)
                leave = _local(lb, (c,)) if i == len(seq) - 1 else self._inside(joints[i], c)
                kids.append((c, self.id_of(entry, leave)))
            self.table[pid] = (kids, joints)
        return self.table[pid]


def build_chain(system: NecklaceSystem, x, u, k: int, budget: int | None = None) -> Chain:
    """k-level chain from x to u, refined level by level inside each copy.

    Each copy is refined from the positions of its entry and exit points
    inside it, so the refinement pattern is computed once per position pair
    and reused for every copy where it recurs.
    """
    if k < 1:
        raise ValueError("level must be >= 1")
    cap = point_budget(budget)
    ax, au = resolve(system, x), resolve(system, u)
    pat = _Patterns(system)
    pieces = [((), pat.id_of(ax, au))]
    conn: list[NodeRef] = []
    for _ in range(k):
        new_pieces, new_conn = [], []
        for idx, (w, pid) in enumerate(pieces):
            kids, joints = pat.pattern(pid)
            new_pieces.extend((w + (c,), cid) for c, cid in kids)
            new_conn.extend(NodeRef(w, j) for j in joints)
            if idx < len(pieces) - 1:
                new_conn.append(conn[idx])
            if len(new_pieces) > cap:
                raise BudgetExceeded(f"chain longer than {cap} copies")
        pieces, conn = new_pieces, new_conn
    words = [p[0] for p in pieces]
    return Chain(k, words, _node_points(system, conn), conn, ax, au, system.automaton)


def _word_maps(system: NecklaceSystem, words: Sequence[tuple]):
    """Linear parts (k, 2, 2) and translations (k, 2) of equal-length words."""
    digits = np.array(words, dtype=np.intp).reshape(len(words), -1) - 1
    ML = system.ML.reshape(-1, 2, 2)
    A = np.broadcast_to(np.eye(2), (len(words), 2, 2))
    t = np.zeros((len(words), 2))
    for col in digits.T:
        t = np.einsum("kab,kb->ka", A, system.MT[col]) + t
        A = np.einsum("kab,kbc->kac", A, ML[col])
    return A, t


def _node_points(system: NecklaceSystem, refs: Sequence[NodeRef]) -> list:
    """Coordinates f_base(z_index) of many node references, grouped by depth."""
    out: list = [None] * len(refs)
    groups: dict = {}
    for i, r in enumerate(refs):
        groups.setdefault(len(r.base), []).append(i)
    nodes = np.array([tuple(system.node(j)) for j in range(1, system.n + 1)])
    for idx in groups.values():
        A, t = _word_maps(system, [refs[i].base for i in idx])
        base = nodes[[refs[i].index - 1 for i in idx]]
        pts = np.einsum("kab,kb->ka", A, base) + t
        for i, (x, y) in zip(idx, pts.tolist()):
            out[i] = Point(x, y)
    return out


def _copy_balls(system: NecklaceSystem, words: Sequence[tuple]):
    """Enclosure centres and radii of equal-length copies, vectorized."""
    A, t = _word_maps(system, words)
    centers = np.einsum("kab,b->ka", A, np.asarray(system.c0)) + t
    return centers, system.r0 * np.linalg.norm(A, ord=2, axis=(1, 2))


def _meeting_balls(centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Sorted index pairs (i < j) of balls that meet.

    Copies of very different sizes are grouped by radius (within a factor
    of two) so each tree query uses a radius fitted to the two groups.
    """
    group = np.floor(np.log2(radii / radii.max()) - 1e-12).astype(int)
    members = {g: np.flatnonzero(group == g) for g in np.unique(group)}
    trees = {g: cKDTree(centers[idx]) for g, idx in members.items()}
    found = []
    keys = sorted(members)
    for a, ga in enumerate(keys):
        for gb in keys[a:]:
            ia, ib = members[ga], members[gb]
            reach = radii[ia].max() + radii[ib].max()
            if ga == gb:
                pairs = trees[ga].query_pairs(reach * (1 + 1e-9), output_type="ndarray")
                pairs = np.column_stack([ia[pairs[:, 0]], ia[pairs[:, 1]]]) if len(pairs) else \
                    np.empty((0, 2), dtype=np.intp)
            else:
                hits = trees[ga].query_ball_tree(trees[gb], reach * (1 + 1e-9))
                pairs = np.array([(ia[x], ib[y]) for x, ys in enumerate(hits) for y in ys],
                                 dtype=np.intp).reshape(-1, 2)
            found.append(pairs)
    near = np.sort(np.concatenate(found), axis=1)
    gap = np.linalg.norm(centers[near[:, 0]] - centers[near[:, 1]], axis=1)
    near = near[gap <= radii[near[:, 0]] + radii[near[:, 1]]]
    return near[np.lexsort((near[:, 1], near[:, 0]))]


def check_chain(system: NecklaceSystem, chain: Chain) -> list:
    """Violations of the chain axioms (empty when the chain is valid)."""
    problems = []
    words = chain.words

    def nested(i: int, j: int) -> bool:
        a, b = words[i], words[j]
        k = min(len(a), len(b))
        return a[:k] == b[:k]

    for i in range(len(words) - 1):
        if nested(i, i + 1):
            problems.append(("copies nested or repeated", i, i + 1))
            continue
        r = copy_intersection(system, words[i], words[i + 1])
        if not isinstance(r, SharedNode):
            problems.append(("consecutive copies do not meet", i))
    # non-consecutive pairs: only those with meeting enclosures need the symbolic test
    if len(words) > 2:
        centers, radii = _copy_balls(system, words)
        near = _meeting_balls(centers, radii)
        for i, j in near[near[:, 1] - near[:, 0] >= 2].tolist():
            if nested(i, j):
                problems.append(("copies nested or repeated", i, j))
            elif isinstance(copy_intersection(system, words[i], words[j]), SharedNode):
                problems.append(("non-consecutive copies meet", i, j))
    if chain.start is not None:
        if not chain.start.contains(words[0]):
            problems.append(("start point not in first copy",))
        for i in range(1, len(words)):
            if chain.start.contains(words[i]):
                problems.append(("start point in a later copy", i))
                break
    if chain.end is not None:
        if not chain.end.contains(words[-1]):
            problems.append(("end point not in last copy",))
        for i in range(len(words) - 1):
            if chain.end.contains(words[i]):
                problems.append(("end point in an earlier copy", i))
                break
    return problems


def approximate_arc(system: NecklaceSystem, x, u, depth: int,
                    budget: int | None = None) -> np.ndarray:
    """Polyline x, connections of the depth-level chain, u, as an (N+1, 2) array.

    Each segment and its refinement lie in the enclosure of one depth-level
    copy, so consecutive depths differ by at most 2 r0 cmax^depth in the
    Hausdorff metric.  Only the connection points are produced: each copy is
    carried as its affine map and pattern id, level by level in numpy.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cap = point_budget(budget)
    ax, au = resolve(system, x), resolve(system, u)
    pat = _Patterns(system)
    ML, MT = system.ML.reshape(-1, 2, 2), system.MT
    nodes = np.array([tuple(system.node(j)) for j in range(1, system.n + 1)])
    ids = np.array([pat.id_of(ax, au)])
    A = np.eye(2)[None]
    t = np.zeros((1, 2))
    conn = np.zeros((0, 2))
    for _ in range(depth):
        used = np.unique(ids).tolist()
        rows = {}                # pattern id -> (digits, child ids, joints padded by 0)
        for p in used:
            kids, joints = pat.pattern(p)
            rows[p] = (np.array([c for c, _ in kids]), np.array([q for _, q in kids]),
                       np.array(joints + [0], dtype=np.intp))
        count = np.zeros(len(ids), dtype=np.intp)
        for p in used:
            count[ids == p] = len(rows[p][0])
        total = int(count.sum())
        if total > cap:
            raise BudgetExceeded(f"chain longer than {cap} copies")
        # children in chain order: parent index and rank inside the parent
        parent = np.repeat(np.arange(len(ids)), count)
        rank = np.arange(total) - np.repeat(np.cumsum(count) - count, count)
        pids = ids[parent]
        digit = np.empty(total, dtype=np.intp)
        kid = np.empty(total, dtype=np.intp)
        joint = np.empty(total, dtype=np.intp)
        for p in used:
            sel = pids == p
            digit[sel] = rows[p][0][rank[sel]]
            kid[sel] = rows[p][1][rank[sel]]
            joint[sel] = rows[p][2][rank[sel]]
        # after child r of a parent comes a joint of that parent, or after its
        # last child the old connection to the next parent
        inner = (rank < count[parent] - 1)[:-1]
        P = parent[:-1][inner]
        new_conn = np.empty((total - 1, 2))
        new_conn[inner] = np.einsum("kab,kb->ka", A[P], nodes[joint[:-1][inner] - 1]) + t[P]
        new_conn[~inner] = conn
        t = np.einsum("kab,kb->ka", A[parent], MT[digit - 1]) + t[parent]
        A = np.einsum("kab,kbc->kac", A[parent], ML[digit - 1])
        ids, conn = kid, new_conn
    return np.vstack([[tuple(ax.point)], conn, [tuple(au.point)]])


# --------------------------------------------------------------------------
# cut points

class CutStatus(str, enum.Enum):
    NO_CUT = "NoCutUpToDepth"
    CERTIFIED = "CutCertified"
    CANDIDATE = "CutCandidate"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class CutVerdict:
    node: object
    status: CutStatus
    depth_scanned: int
    component_history: list
    certificate: dict | None = None
    point: Point | None = None
    note: str = ""

    def to_dict(self) -> dict:
        out = {"node": str(self.node), "status": str(self.status),
               "depth_scanned": self.depth_scanned,
               "component_history": self.component_history,
               "certificate": self.certificate}
        if self.point is not None:
            out["point"] = [self.point.x, self.point.y]
        if self.note:
            out["note"] = self.note
        return out


def excluded_pieces(anchor: Anchor, m: int, budget: int | None = None) -> list:
    """Maximal copies of level <= m missing the point; their union is U_m.

    A word A·d is a piece when A is an address of the point and A·d is not.
    """
    system = anchor.automaton.system
    cap = point_budget(budget)
    out = []
    for j in range(1, m + 1):
        inside = anchor.addresses(j - 1)
        if inside.unknown:
            raise UnresolvedMembership("addresses of the point are unresolved")
        for A in inside.words:
            for d in range(1, system.n + 1):
                if not anchor.contains(A + (d,)):
                    out.append(A + (d,))
        if len(out) > cap:
            raise BudgetExceeded(f"more than {cap} pieces")
    return sorted(out)


def pieces_components(system: NecklaceSystem, pieces: Sequence[tuple]) -> np.ndarray:
    """Component label per piece of the union of pairwise non-nested copies.

    Two such copies meet only at f_rho(z_j) where rho is their common prefix
    and z_j is the node between their next digits; every piece through such
    a point is found by following its remaining digits from the state of z_j.
    """
    auto = system.automaton
    n = system.n
    keys: dict = {}
    edges = []
    for idx, w in enumerate(pieces):
        for t in range(len(w)):
            i = w[t]
            for j in {i, (i - 2) % n + 1}:
                if auto.follow(auto.node_states[j - 1], w[t:]) is not None:
                    key = (w[:t], j)
                    if key in keys:
                        edges.append((keys[key], idx))
                    else:
                        keys[key] = idx
    return kernels.union_find(len(pieces), np.array(edges, dtype=np.int64).reshape(-1, 2))


def _count(labels: np.ndarray) -> int:
    return int(labels.max()) + 1 if len(labels) else 0


def _persists(old: list, old_labels, new: list, new_labels) -> bool:
    """Each component of the smaller union lands in its own component of the larger."""
    pos = {w: i for i, w in enumerate(new)}
    image = {}
    for w, lab in zip(old, old_labels.tolist()):
        tgt = int(new_labels[pos[w]])
        if image.setdefault(lab, tgt) != tgt:
            return False
    return len(set(image.values())) == len(image)


def _local_pieces(anchor: Anchor, pieces: list) -> set:
    return {w[len(anchor.prefix):] for w in pieces
            if len(w) > len(anchor.prefix) and w[:len(anchor.prefix)] == anchor.prefix}


def _periodic_certificate(anchor: Anchor, history: dict, max_period: int) -> dict | None:
    """Self-similar zoom around the point.

    Needs a period word w with exactly one length-p path from the point's
    state back to itself, the piece sets related word for word by
    pieces(U_{m+p}) = pieces(U_p) ∪ π·w·(local pieces of U_m), and the same
    number (>= 2) of components in U_m and U_{m+p} with the partition of
    U_m carried along.
    """
    auto = anchor.automaton
    L = len(anchor.prefix)
    ms = sorted(history)
    for p in range(1, max_period + 1):
        words, unknown = auto.paths(anchor.state, p)
        loops = [w for w in words if auto.follow(anchor.state, w) == anchor.state]
        if unknown or len(loops) != 1:
            continue
        w = loops[0]
        for m in ms:
            if m + p not in history or m <= L or history[m][2] < 2:
                continue
            base = history.get(L + p)
            if base is None:
                continue
            pm, lm, cm = history[m]
            pmp, lmp, cmp_ = history[m + p]
            expected = set(base[0]) | {anchor.prefix + w + t for t in _local_pieces(anchor, pm)}
            if expected != set(pmp) or cm != cmp_:
                continue
            if not _persists(pm, lm, pmp, lmp):
                continue
            return {"period": p, "conjugating_word": list(anchor.prefix + w),
                    "base_level": m, "components": cm}
    return None


def cut_point_scan(system: NecklaceSystem, node, M: int, method: str = "pieces",
                   max_period: int = 4) -> CutVerdict:
    """Component counts of U_1..U_M for the point, and what they suggest.

    NoCutUpToDepth: every U_m is connected.  CutCandidate: from some level on
    U_m has >= 2 components and no two ever merge.  CutCertified: moreover
    the configuration repeats under the point's period map.  Unknown:
    components merged after separating.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    anchor = resolve(system, node)
    if anchor.state in anchor.automaton.node_states:
        local = _ramified_scan(anchor, M, method, max_period)
        if local is not None:
            counts = _scan(system, anchor, M, method, max_period).component_history
            return CutVerdict(node, CutStatus.NO_CUT, M, counts, point=anchor.point,
                              note=local)
    verdict = _scan(system, anchor, M, method, max_period)
    verdict.node = node
    return verdict


def _single_forever(auto, state: int) -> bool:
    """Every state reachable from ``state`` is resolved with one transition,
    so the point lies in exactly one copy of each level."""
    return all(auto.resolved[t] and len(auto.transitions[t]) == 1
               for t in auto.reachable(state))


def _ramified_scan(anchor: Anchor, M: int, method: str, max_period: int) -> str | None:
    """No-cut evidence for a node image through the copies where it stops ramifying.

    Let E = F_prefix, the biggest copy with z as a main node; z is interior to
    E, so E minus z connected is enough.  Inside any copy B the children form
    an n-cycle of copies meeting in single points, and z removes at most one
    of those contact points, so B minus z is connected as soon as every child
    containing z is connected after removing z.  Descending, each branch ends
    at a copy A where z lies in a single copy of every deeper level; there
    A minus z is scanned through its own U_m.  Returns a description when
    every leaf scan stays connected, None otherwise (including branches still
    splitting at depth M).
    """
    auto = anchor.automaton
    system = auto.system
    stack = [((), anchor.state)]
    leaves, deepest, cache = 0, 0, {}
    while stack:
        word, st = stack.pop()
        if len(word) >= M or not auto.resolved[st]:
            return None
        if _single_forever(auto, st):
            key = (st, M - len(word))
            if key not in cache:
                v = _scan(system, Anchor((), st, auto), M - len(word), method, max_period)
                cache[key] = v.status is CutStatus.NO_CUT
            if not cache[key]:
                return None
            leaves += 1
            deepest = max(deepest, len(word))
            continue
        for d, t in auto.transitions[st].items():
            stack.append((word + (d,), t))
    where = f"F_{format_word(anchor.prefix)}" if anchor.prefix else "F"
    return (f"localized in {where}: {leaves} branch copies up to level {deepest} "
            f"each stay connected without the point")


def _scan(system: NecklaceSystem, anchor: Anchor, M: int, method: str,
          max_period: int) -> CutVerdict:
    node = anchor
    history = {}
    counts = []
    for m in range(1, M + 1):
        if method == "graph":
            g = copy_graph(system, m, exclude=address_set(system, anchor, m).words)
            # group level-m copies into the maximal pieces for uniform bookkeeping
            pieces, labels = g.words, g.labels
        elif method == "pieces":
            pieces = excluded_pieces(anchor, m)
            labels = pieces_components(system, pieces)
        else:
            raise ValueError(f"unknown method {method!r}")
        history[m] = (pieces, labels, _count(labels))
        counts.append(_count(labels))
    point = anchor.point
    if all(c == 1 for c in counts):
        return CutVerdict(node, CutStatus.NO_CUT, M, counts, point=point)
    first = next(m for m in range(1, M + 1) if counts[m - 1] >= 2)
    persistent = True
    for m in range(first, M):
        old_p, old_l, _ = history[m]
        new_p, new_l, _ = history[m + 1]
        if method == "graph":
            # an excluded level-m copy is the union of its children, all excluded
            # at level m+1 and joined in a cycle; follow its first child
            pos = {w: i for i, w in enumerate(new_p)}
            image = {}
            for w, lab in zip(old_p, old_l.tolist()):
                tgt = int(new_l[pos[w + (1,)]])
                if image.setdefault(lab, tgt) != tgt:
                    persistent = False
            if len(set(image.values())) != len(image):
                persistent = False
        elif not _persists(old_p, old_l, new_p, new_l):
            persistent = False
        if counts[m] < 2:
            persistent = False
    if not persistent:
        return CutVerdict(node, CutStatus.UNKNOWN, M, counts, point=point,
                          note="components of U_m merged after separating")
    cert = None
    if method == "pieces":
        cert = _periodic_certificate(anchor, history, max_period)
    status = CutStatus.CERTIFIED if cert else CutStatus.CANDIDATE
    return CutVerdict(node, status, M, counts, cert, point)


@dataclass
class CutSearchReport:
    verdicts: list
    caveat: str = ""

    def to_dict(self) -> dict:
        out = {"verdicts": [v.to_dict() for v in self.verdicts]}
        if self.caveat:
            out["caveat"] = self.caveat
        return out


def candidate_nodes(system: NecklaceSystem, level: int) -> list:
    """Node images f_sigma(z_k), |sigma| <= level, one per distinct point.

    Duplicates are detected through the canonical anchor and then by
    distance; the shallowest reference of each point is kept.
    """
    auto = system.automaton
    seen_keys, kept, pts = set(), [], []
    for t in range(level + 1):
        for sigma in _all_words(system.n, t):
            for k in range(1, system.n + 1):
                ref = NodeRef(sigma, k)
                a = auto.node_anchor(ref)
                key = (a.prefix, a.state)
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                p = a.point
                if any(p.dist(q) <= system.node_tolerance for q in pts):
                    continue
                kept.append(ref)
                pts.append(p)
    return kept


def global_cut_point_search(system: NecklaceSystem, candidate_level: int, M: int,
                            seeds: Sequence = (), jobs: int = 1) -> CutSearchReport:
    """Scan every node image up to ``candidate_level`` plus any extra seeds."""
    from .classify import is_stable
    caveat = ""
    if is_stable(system).status.value != "Verified":
        caveat = ("system is not verified stable: cut points outside the node images "
                  "f_sigma(z_k) are not excluded by this search")
    cands = candidate_nodes(system, candidate_level) + list(seeds)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(lambda c: cut_point_scan(system, c, M), cands))
    else:
        verdicts = [cut_point_scan(system, c, M) for c in cands]
    return CutSearchReport(verdicts, caveat)
