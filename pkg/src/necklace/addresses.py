"""Symbolic addresses: which copies contain a point, and how many.

A point x of F lies in one 1-level copy, or in two when it is a main node.
Preimages ``f_i^{-1}(x)`` for the copies F_i containing x are again points
of F, and for the node orbits of the examples this process visits finitely
many points.  Those points are the states of the incidence automaton; a word
w is an address prefix of x (x in F_w) exactly when w spells a path from the
state of x.  Counting paths gives c_m(x).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .geometry import AffineMap, Point, as_point
from .system import (NecklaceSystem, PointNotInAttractor, Status, Word, contains_point,
                     format_word, locate, point_budget, BudgetExceeded)

DEFAULT_MAX_STATES = 2000


class StateBudgetExceeded(RuntimeError):
    pass


class UnresolvedMembership(RuntimeError):
    """A query reached an automaton state whose transitions are unknown."""


@dataclass(frozen=True)
class NodeRef:
    """The point f_base(z_index): a main node of the copy F_base."""
    base: Word
    index: int

    def __str__(self) -> str:
        return f"{format_word(self.base)}:{self.index}"


@dataclass(frozen=True)
class PointAddress:
    """The point f_prefix(fix f_period), whose address is prefix·period^∞."""
    prefix: Word
    period: Word

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be a nonempty word")

    def __str__(self) -> str:
        head = format_word(self.prefix) + "|" if self.prefix else ""
        return head + format_word(self.period) + "*"


def parse_node_ref(text: str) -> NodeRef:
    """``"1,3:2"`` is f_13(z_2); ``":2"``, ``"∅:2"`` and ``"-:2"`` mean z_2."""
    if ":" not in text:
        raise ValueError(f"node reference {text!r} must look like 'word:k'")
    word, _, idx = text.rpartition(":")
    word = word.strip()
    base = () if word in ("", "-", "∅") else tuple(int(t) for t in word.split(",") if t.strip())
    return NodeRef(base, int(idx))


def parse_point_address(text: str) -> PointAddress:
    """``"1,13*"`` is fix(f_1 f_13); ``"5|1,13*"`` is f_5 of that point."""
    text = text.strip()
    if not text.endswith("*"):
        raise ValueError(f"point address {text!r} must end with '*'")
    prefix, _, period = text[:-1].rpartition("|")
    pre = tuple(int(t) for t in prefix.split(",") if t.strip())
    per = tuple(int(t) for t in period.split(",") if t.strip())
    return PointAddress(pre, per)


class CountInterval(NamedTuple):
    """Bounds on c_m when the automaton is not closed."""
    lower: int
    upper: int


@dataclass(frozen=True)
class AddressSet:
    """Words of one length whose copies contain a point (C_m(F, z))."""
    level: int
    words: tuple
    unknown: tuple = ()

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word) -> bool:
        return tuple(word) in set(self.words)

    @property
    def count(self):
        if self.unknown:
            return CountInterval(len(self.words), len(self.words) + len(self.unknown))
        return len(self.words)


# --------------------------------------------------------------------------
# the automaton

@dataclass
class Anchor:
    """Canonical description of a point: its addresses are prefix·paths(state)."""
    prefix: Word
    state: int
    automaton: "IncidenceAutomaton" = field(repr=False, compare=False)

    @property
    def point(self) -> Point:
        return self.automaton.system.copy_map(self.prefix)(self.automaton.points[self.state])

    def addresses(self, m: int) -> AddressSet:
        if m <= len(self.prefix):
            return AddressSet(m, (self.prefix[:m],))
        words, unknown = self.automaton.paths(self.state, m - len(self.prefix))
        return AddressSet(m, tuple(self.prefix + w for w in words),
                          tuple(self.prefix + w for w in unknown))

    def count(self, m: int):
        if m <= len(self.prefix):
            return 1
        return self.automaton.count_paths(self.state, m - len(self.prefix))[-1]

    def contains(self, word: Sequence[int]):
        """True/False for ``point in F_word``; None when unresolved."""
        word = tuple(word)
        k = min(len(word), len(self.prefix))
        if word[:k] != self.prefix[:k]:
            return False
        if len(word) <= len(self.prefix):
            return True
        return self.automaton.follow(self.state, word[len(self.prefix):]) is not None

    def is_main_node(self) -> bool:
        return not self.prefix and self.state in self.automaton.node_states


class IncidenceAutomaton:
    """Finite presentation of the addresses of the node orbit.

    State ``s`` is a point ``points[s]`` of F; ``transitions[s]`` maps each
    digit i with the point in F_i to the state of ``f_i^{-1}(points[s])``.
    States ``0..n-1`` are the main nodes z_1..z_n.
    """

    def __init__(self, system: NecklaceSystem, merge_tolerance: float | None = None,
                 max_states: int = DEFAULT_MAX_STATES):
        self.system = system
        self.merge_tolerance = (system.node_tolerance if merge_tolerance is None
                                else float(merge_tolerance))
        self.max_states = max_states
        self.points: list[Point] = []
        self.errors: list[float] = []
        self.digits: list[tuple] = []
        self.transitions: list[dict] = []
        self.resolved: list[bool] = []
        self.node_states = list(range(system.n))
        self.closed = False
        self.polished = False
        self.residual = math.inf
        self.min_gap = math.inf
        self._lock = threading.RLock()
        self._inv = [m.inverse() for m in system.maps]
        self._inv_norm = [m.norm for m in self._inv]

    # construction ---------------------------------------------------------
    def _find(self, p: Point, err: float) -> int | None:
        if not self.points:
            return None
        pts = np.array(self.points)
        d = np.hypot(pts[:, 0] - p.x, pts[:, 1] - p.y)
        slack = self.merge_tolerance + err + np.array(self.errors)
        hits = np.nonzero(d <= slack)[0]
        if hits.size == 0:
            return None
        return int(hits[np.argmin(d[hits])])

    def _add(self, p: Point, err: float, digits: tuple | None) -> int:
        self.points.append(p)
        self.errors.append(err)
        self.digits.append(digits or ())
        self.transitions.append({})
        self.resolved.append(False)
        return len(self.points) - 1

    def _expand(self, queue: list) -> None:
        """Breadth-first closure from the states in ``queue``."""
        sys_ = self.system
        head = 0
        while head < len(queue):
            s = queue[head]
            head += 1
            if self.resolved[s]:
                continue
            p, err = self.points[s], self.errors[s]
            if not self.digits[s]:
                try:
                    digs = locate(sys_, p, tol=self.merge_tolerance + err)
                except (PointNotInAttractor, RuntimeError):
                    self.closed = False
                    continue
                if len(digs) != 1:
                    # a point in two 1-level copies must be a main node
                    self.closed = False
                    continue
                self.digits[s] = digs
            trans = {}
            for i in self.digits[s]:
                q = self._inv[i - 1](p)
                qerr = err * self._inv_norm[i - 1] + 8 * np.finfo(float).eps * (
                    abs(q.x) + abs(q.y) + sys_.scale())
                t = self._find(q, qerr)
                if t is None:
                    if len(self.points) >= self.max_states:
                        self.closed = False
                        return
                    t = self._add(q, qerr, None)
                    queue.append(t)
                trans[i] = t
            self.transitions[s] = trans
            self.resolved[s] = True
        self.closed = all(self.resolved)

    def build(self, nodes: Sequence[Point]) -> "IncidenceAutomaton":
        sys_ = self.system
        err0 = 1e-12 * sys_.scale()
        for k, z in enumerate(nodes, start=1):
            self._add(as_point(z), err0, tuple(sorted((k, sys_.succ(k)))))
        with self._lock:
            self._expand(list(range(len(self.points))))
            self.polish()
        return self

    def extend(self, point, err: float | None = None) -> int:
        """State for an extra point of F, adding states as needed."""
        p = as_point(point)
        err = 1e-12 * self.system.scale() if err is None else err
        with self._lock:
            s = self._find(p, err)
            if s is not None:
                return s
            s = self._add(p, err, None)
            self._expand([s])
            self.polish()
            return s

    # polishing --------------------------------------------------------------
    def polish(self) -> None:
        """Replace state points by exact fixed points and forward images.

        Every state follows its lowest-digit transition; on the resulting
        functional graph, cycle states are fixed points of the composed cycle
        map and the other states are images of their successors.  The result
        is kept only if every transition then holds to ``merge_tolerance``.
        """
        if not self.closed:
            self._measure()
            return
        maps = self.system.maps
        succ = {s: (min(t), t[min(t)]) for s, t in enumerate(self.transitions)}
        new: dict[int, Point] = {}
        for start in range(len(self.points)):
            path, seen = [], {}
            s = start
            while s not in new and s not in seen:
                seen[s] = len(path)
                path.append(s)
                s = succ[s][1]
            if s not in new:
                cyc = path[seen[s]:]
                f = AffineMap.identity()
                for c in cyc:
                    f = f @ maps[succ[c][0] - 1]
                new[cyc[0]] = f.fixed_point()
                for c in reversed(cyc[1:]):
                    new[c] = maps[succ[c][0] - 1](new[succ[c][1]])
                path = path[:seen[s]]
            for c in reversed(path):
                new[c] = maps[succ[c][0] - 1](new[succ[c][1]])
        cand = [new[s] for s in range(len(self.points))]
        res = 0.0
        for s, trans in enumerate(self.transitions):
            for i, t in trans.items():
                res = max(res, maps[i - 1](cand[t]).dist(cand[s]))
        if res <= self.merge_tolerance:
            self.points = cand
            self.errors = [res] * len(cand)
            self.polished = True
        self._measure()

    def _measure(self) -> None:
        maps = self.system.maps
        res = 0.0
        for s, trans in enumerate(self.transitions):
            for i, t in trans.items():
                res = max(res, maps[i - 1](self.points[t]).dist(self.points[s]))
        self.residual = res
        if len(self.points) > 1:
            pts = np.array(self.points)
            d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
            np.fill_diagonal(d, np.inf)
            self.min_gap = float(d.min())

    # queries ----------------------------------------------------------------
    @property
    def start_states(self) -> dict:
        return {k: s for k, s in enumerate(self.node_states, start=1)}

    def __len__(self) -> int:
        return len(self.points)

    def follow(self, state: int, word: Sequence[int]):
        """State reached by spelling ``word``, or None if the point is not in F_word.

        Raises UnresolvedMembership when the walk reaches an unexpanded state.
        """
        s = state
        for d in word:
            if not self.resolved[s]:
                raise UnresolvedMembership(f"state {s} has no computed transitions")
            s = self.transitions[s].get(d)
            if s is None:
                return None
        return s

    def paths(self, state: int, m: int, budget: int | None = None) -> tuple[list, list]:
        """Length-m words readable from ``state`` (lexicographic), plus words
        whose continuation passes an unresolved state."""
        cap = point_budget(budget)
        done, unknown = [], []
        stack = [(state, ())]
        while stack:
            s, w = stack.pop()
            if len(w) == m:
                done.append(w)
                continue
            if not self.resolved[s]:
                unknown.append(w)
                continue
            for d in sorted(self.transitions[s], reverse=True):
                stack.append((self.transitions[s][d], w + (d,)))
            if len(stack) + len(done) > cap:
                raise BudgetExceeded(f"more than {cap} address words")
        return done, unknown

    def count_paths(self, state: int, M: int) -> list:
        """c_1..c_M for paths from ``state``; CountInterval entries if unresolved."""
        n_states = len(self.points)
        lo = [1] * n_states
        hi = [1] * n_states
        out = []
        for _ in range(M):
            nlo, nhi = [0] * n_states, [0] * n_states
            for s in range(n_states):
                if self.resolved[s]:
                    for t in self.transitions[s].values():
                        nlo[s] += lo[t]
                        nhi[s] += hi[t]
                else:
                    nlo[s], nhi[s] = 1, 2 * hi[s]
            lo, hi = nlo, nhi
            out.append(lo[state] if lo[state] == hi[state] else CountInterval(lo[state], hi[state]))
        return out

    def reachable(self, state: int) -> list:
        seen, stack = {state}, [state]
        while stack:
            s = stack.pop()
            for t in self.transitions[s].values():
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return sorted(seen)

    def growth(self, state: int) -> tuple[str, int | None]:
        """Growth class of c_m from ``state``: constant, polynomial or exponential.

        Counts are bounded iff every reachable strongly connected component
        with an internal edge is a simple cycle and no such component reaches
        another one.  For polynomial growth the degree is returned.
        """
        if not all(self.resolved[s] for s in self.reachable(state)):
            raise UnresolvedMembership("automaton not closed below this state")
        nodes = self.reachable(state)
        index = {s: i for i, s in enumerate(nodes)}
        rows, cols = [], []
        for s in nodes:
            for t in self.transitions[s].values():
                rows.append(index[s])
                cols.append(index[t])
        g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
        ncomp, comp = connected_components(g, directed=True, connection="strong")
        internal = np.zeros(ncomp, dtype=int)
        size = np.bincount(comp, minlength=ncomp)
        for r, c in zip(rows, cols):
            if comp[r] == comp[c]:
                internal[comp[r]] += 1
        nontrivial = internal > 0
        if np.any(internal[nontrivial] > size[nontrivial]):
            return "exponential", None
        # longest chain of cycles along the condensation DAG
        succ = {c: set() for c in range(ncomp)}
        for r, c in zip(rows, cols):
            if comp[r] != comp[c]:
                succ[comp[r]].add(comp[c])
        memo: dict[int, int] = {}

        def chain(c: int) -> int:
            if c not in memo:
                best = max((chain(d) for d in succ[c]), default=0)
                memo[c] = best + (1 if nontrivial[c] else 0)
            return memo[c]

        depth = chain(int(comp[index[state]]))
        return ("constant", 0) if depth <= 1 else ("polynomial", depth - 1)

    def is_bounded(self, state: int) -> bool:
        return self.growth(state)[0] == "constant"

    # anchors ----------------------------------------------------------------
    def node_index(self, p: Point, tol: float | None = None) -> int | None:
        """k when p is within ``tol`` of the main node z_k."""
        tol = self.merge_tolerance if tol is None else tol
        for k, s in enumerate(self.node_states, start=1):
            if self.points[s].dist(p) <= tol:
                return k
        return None

    def anchor(self, word: Sequence[int], state: int) -> Anchor:
        """Canonical form of f_word(points[state]).

        While the partial image f_{w[t:]}(p) is not a main node it lies in the
        single 1-level copy F_{w[t]}, so its addresses all begin with that
        digit.  The first partial image that is a main node z_j takes over,
        because z_j may also be reached through the neighbouring copy.
        """
        word = self.system.check_word(word)
        maps = self.system.maps
        images = [self.points[state]]
        for d in reversed(word):
            images.append(maps[d - 1](images[-1]))
        images.reverse()  # images[t] = f_{w[t:]}(p)
        if word:
            nodes = np.array([self.points[s] for s in self.node_states])
            gaps = np.hypot(*(np.array(images[:len(word)])[:, None, :] - nodes[None]).T).T
            hits = np.argwhere(gaps <= self.merge_tolerance * 4)
            if len(hits):
                t, k = hits[0]
                return Anchor(word[:t], self.node_states[k], self)
        return Anchor(word, state, self)

    def node_anchor(self, ref: NodeRef) -> Anchor:
        if not 1 <= ref.index <= self.system.n:
            raise ValueError(f"node index {ref.index} outside 1..{self.system.n}")
        return self.anchor(ref.base, self.node_states[ref.index - 1])

    def point_anchor(self, addr: PointAddress) -> Anchor:
        period = self.system.check_word(addr.period)
        fixed = self.system.copy_map(period).fixed_point()
        return self.anchor(addr.prefix, self.extend(fixed))


def build_incidence_automaton(system: NecklaceSystem, merge_tol: float | None = None,
                              max_states: int = DEFAULT_MAX_STATES) -> IncidenceAutomaton:
    """BFS closure of the main nodes under the inverse maps of their copies."""
    return IncidenceAutomaton(system, merge_tol, max_states).build(system.raw_nodes)


# --------------------------------------------------------------------------
# functional interface

def resolve(system: NecklaceSystem, target) -> Anchor:
    """Anchor for a NodeRef, PointAddress, Anchor or plain point of F."""
    auto = system.automaton
    if isinstance(target, Anchor):
        return target
    if isinstance(target, NodeRef):
        return auto.node_anchor(target)
    if isinstance(target, PointAddress):
        return auto.point_anchor(target)
    return auto.anchor((), auto.extend(as_point(target)))


def address_set(system: NecklaceSystem, node, m: int) -> AddressSet:
    """C_m(F, x) as words of length m."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return resolve(system, node).addresses(m)


def ramification_sequence(system: NecklaceSystem, node, M: int) -> list:
    """c_1..c_M of the point; CountInterval entries where the automaton is open."""
    if M < 1:
        raise ValueError("M must be >= 1")
    a = resolve(system, node)
    out = []
    tail = a.automaton.count_paths(a.state, max(M - len(a.prefix), 0))
    for m in range(1, M + 1):
        out.append(1 if m <= len(a.prefix) else tail[m - len(a.prefix) - 1])
    return out


def metric_address_set(system: NecklaceSystem, point, m: int, tol: float | None = None,
                       budget: int | None = None) -> AddressSet:
    """Depth-limited fallback: level-m words whose copy contains the point.

    Candidates are found by pruned descent; each is then confirmed by a
    membership test and reported as unknown when that is inconclusive.
    """
    p = as_point(point)
    tol = system.node_tolerance if tol is None else tol
    cap = point_budget(budget)
    words = [()]
    for _ in range(m):
        nxt = []
        for w in words:
            for d in range(1, system.n + 1):
                ww = w + (d,)
                f = system.copy_map(ww)
                if f(system.c0).dist(p) <= system.r0 * f.norm + tol:
                    nxt.append(ww)
        if len(nxt) > cap:
            raise BudgetExceeded(f"more than {cap} candidate words")
        words = nxt
    yes, unknown = [], []
    for w in words:
        st = contains_point(system, w, p, tol)
        if st is Status.VERIFIED:
            yes.append(w)
        elif st is Status.UNKNOWN:
            unknown.append(w)
    return AddressSet(m, tuple(yes), tuple(unknown))


# --------------------------------------------------------------------------
# copy intersections

class Disjoint:
    def __repr__(self) -> str:
        return "Disjoint"

    def __bool__(self) -> bool:
        return False


DISJOINT = Disjoint()


@dataclass(frozen=True)
class SharedNode:
    node: NodeRef

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class UnknownIntersection:
    reason: str

    def __bool__(self) -> bool:
        return False


def copy_intersection(system: NecklaceSystem, sigma: Sequence[int], tau: Sequence[int]):
    """F_sigma ∩ F_tau for copies neither of which contains the other.

    With sigma = rho·i·alpha and tau = rho·j·beta, the copies can only meet
    at f_rho(z) for the node z shared by F_i and F_j, and they do exactly
    when i·alpha and j·beta are both address prefixes of z.
    """
    sigma, tau = system.check_word(sigma), system.check_word(tau)
    t = 0
    while t < min(len(sigma), len(tau)) and sigma[t] == tau[t]:
        t += 1
    if t == len(sigma) or t == len(tau):
        raise ValueError(f"copy {format_word(sigma)} and {format_word(tau)} are nested")
    i, j = sigma[t], tau[t]
    if not system.adjacent(i, j):
        return DISJOINT
    k = system.node_between(i, j)
    auto = system.automaton
    s = auto.node_states[k - 1]
    try:
        if auto.follow(s, sigma[t:]) is None or auto.follow(s, tau[t:]) is None:
            return DISJOINT
    except UnresolvedMembership as exc:
        return UnknownIntersection(str(exc))
    return SharedNode(NodeRef(sigma[:t], k))


@dataclass
class CopyGraph:
    level: int
    words: list
    edges: np.ndarray            # (E, 2) vertex indices, sorted pairs
    labels: np.ndarray           # component label per vertex

    @property
    def components(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def component_sets(self) -> list:
        groups: dict[int, list] = {}
        for w, lab in zip(self.words, self.labels.tolist()):
            groups.setdefault(lab, []).append(w)
        return [groups[k] for k in sorted(groups)]


def _all_words(n: int, m: int) -> list:
    words = [()]
    for _ in range(m):
        words = [w + (d,) for w in words for d in range(1, n + 1)]
    return words


def copy_graph(system: NecklaceSystem, m: int, exclude=(), budget: int | None = None) -> CopyGraph:
    """Level-m copies (minus ``exclude``) joined when they share a node.

    Two copies with longest common prefix rho meet only at a point
    f_rho(z_k), and every level-m copy through that point is
    rho·(a length m-|rho| path from the state of z_k).  Enumerating those
    groups gives all edges without testing every pair.
    """
    cap = point_budget(budget)
    if system.n ** m > cap:
        raise BudgetExceeded(f"{system.n}^{m} copies exceed the budget of {cap}")
    auto = system.automaton
    words = _all_words(system.n, m)
    excluded = {tuple(w) for w in exclude}
    words = [w for w in words if w not in excluded]
    index = {w: i for i, w in enumerate(words)}
    edges = set()
    for t in range(m):
        for rho in _all_words(system.n, t):
            for k in range(1, system.n + 1):
                group, unknown = auto.paths(auto.node_states[k - 1], m - t)
                if unknown:
                    raise UnresolvedMembership(f"node {k} has unresolved addresses")
                ids = sorted(index[rho + w] for w in group if rho + w in index)
                for a in range(len(ids)):
                    for b in range(a + 1, len(ids)):
                        edges.add((ids[a], ids[b]))
    edge_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    labels = kernels.union_find(len(words), edge_arr)
    return CopyGraph(m, words, edge_arr, labels)
