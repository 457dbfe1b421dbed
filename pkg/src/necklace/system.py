"""Necklace systems: enclosures, axiom validation, main nodes and sampling.

Enclosures are balls.  The attractor sits inside ``Ball(c0, r0)`` and the
copy ``F_w`` inside ``Ball(f_w(c0), r0 * ||A_w||)`` where ``A_w`` is the linear
part of ``f_w``.  The default centre ``c0`` is the fixed point of ``f_1`` so
every ball centre ``f_w(c0)`` is itself a point of the attractor; the
validation code uses that to exhibit near-coincidences.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .geometry import AffineMap, Ball, NotContractive, Point, SingularMap, as_point, compose_word

Word = tuple  # tuple[int, ...] of 1-based digits

DEFAULT_BUDGET = 2_000_000
MAX_DESCENT_STEPS = 600


class Status(str, enum.Enum):
    VERIFIED = "Verified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


class SystemSpecError(ValueError):
    """A system definition that cannot describe a necklace IFS."""

    def __init__(self, reason: str, map_index: int | None = None, field: str | None = None):
        self.reason = reason
        self.map_index = map_index
        self.field = field
        where = ""
        if map_index is not None:
            where = f"map {map_index}"
            if field:
                where += f" ({field})"
            where += ": "
        super().__init__(where + reason)


class MapNotContractive(SystemSpecError, NotContractive):
    """A map of the system with operator norm >= 1."""


class MapSingular(SystemSpecError, SingularMap):
    """A map of the system with zero determinant."""


class NodeAmbiguityError(RuntimeError):
    """Adjacent copies keep several separated contact regions."""


class PointNotInAttractor(ValueError):
    pass


class BudgetExceeded(MemoryError):
    pass


def point_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("NECKLACE_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "-", "∅", "()", "e"):
        return ()
    return tuple(int(tok) for tok in text.replace(" ", "").strip("()").split(",") if tok)


def format_word(word: Sequence[int]) -> str:
    return ",".join(str(d) for d in word) if word else "∅"


def attractor_enclosure(maps: Sequence[AffineMap], center=None) -> Ball:
    """Ball mapped into itself by every map, hence containing the attractor."""
    c0 = maps[0].fixed_point() if center is None else as_point(center)
    cmax = max(m.contraction_factor() for m in maps)
    reach = max(m(c0).dist(c0) for m in maps)
    return Ball(c0, reach / (1.0 - cmax))


@dataclass
class NecklaceVerdict:
    status: Status
    depth: int
    tolerance: float
    witnesses: list = field(default_factory=list)
    pairs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": str(self.status), "depth": self.depth, "tolerance": self.tolerance,
                "witnesses": self.witnesses, "pairs": self.pairs}


class NecklaceSystem:
    """An ordered family of n >= 3 planar affine contractions.

    Main nodes and the incidence automaton are computed on first use, so a
    system that is not a necklace can still be built and handed to
    ``validate_necklace``.
    """

    def __init__(self, maps: Iterable[AffineMap], name: str = "", description: str = "",
                 parameters: dict | None = None, center=None,
                 node_tolerance: float | None = None):
        maps = tuple(maps)
        if len(maps) < 3:
            raise SystemSpecError(f"a necklace needs n >= 3 maps, got {len(maps)}")
        for i, m in enumerate(maps, start=1):
            if not isinstance(m, AffineMap):
                raise SystemSpecError(f"expected AffineMap, got {type(m).__name__}", i)
            try:
                m.inverse()
            except SingularMap as exc:
                raise MapSingular(str(exc), i, "matrix") from None
            try:
                m.contraction_factor()
            except NotContractive as exc:
                raise MapNotContractive(f"not contractive: {exc}", i, "matrix") from None
        self.maps = maps
        self.n = len(maps)
        self.name = name
        self.description = description
        self.parameters = dict(parameters or {})
        self.enclosure = attractor_enclosure(maps, center)
        self.node_tolerance = (1e-9 * max(self.enclosure.radius, 1e-300)
                               if node_tolerance is None else float(node_tolerance))
        self.ML = np.array([[m.a, m.b, m.c, m.d] for m in maps], dtype=np.float64)
        self.MT = np.array([[m.tx, m.ty] for m in maps], dtype=np.float64)
        self.cmax = max(m.norm for m in maps)

    def __repr__(self) -> str:
        return f"NecklaceSystem(name={self.name!r}, n={self.n})"

    # basic geometry -------------------------------------------------------
    @property
    def c0(self) -> Point:
        return self.enclosure.center

    @property
    def r0(self) -> float:
        return self.enclosure.radius

    def copy_map(self, word: Sequence[int]) -> AffineMap:
        return compose_word(self.maps, word)

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(int(d) for d in word)
        for d in word:
            if not 1 <= d <= self.n:
                raise ValueError(f"digit {d} outside 1..{self.n}")
        return word

    def succ(self, k: int) -> int:
        return k % self.n + 1

    def pred(self, k: int) -> int:
        return (k - 2) % self.n + 1

    def adjacent(self, i: int, j: int) -> bool:
        return i != j and (abs(i - j) == 1 or abs(i - j) == self.n - 1)

    def node_between(self, i: int, j: int) -> int:
        """Index k of the main node z_k shared by adjacent copies i and j."""
        if j == self.succ(i):
            return i
        if i == self.succ(j):
            return j
        raise ValueError(f"copies {i} and {j} are not adjacent")

    def scale(self) -> float:
        return max(self.r0, 1e-300)

    # lazily computed structure -----------------------------------------------
    @cached_property
    def raw_nodes(self) -> tuple[Point, ...]:
        return tuple(main_nodes(self, tol=1e-13 * self.scale()))

    @cached_property
    def automaton(self):
        from .addresses import build_incidence_automaton
        return build_incidence_automaton(self)

    @property
    def nodes(self) -> tuple[Point, ...]:
        """Main nodes z_1..z_n (z_k = F_k ∩ F_{k+1}), polished when possible."""
        auto = self.automaton
        return tuple(auto.points[s] for s in auto.node_states)

    def node(self, k: int) -> Point:
        """z_k with the cyclic convention z_0 = z_n."""
        return self.nodes[(k - 1) % self.n]

    def to_dict(self) -> dict:
        out = {"dimension": 2, "name": self.name,
               "maps": [{"matrix": [[m.a, m.b], [m.c, m.d]], "translation": [m.tx, m.ty]}
                        for m in self.maps]}
        if self.description:
            out["description"] = self.description
        if self.parameters:
            out["parameters"] = self.parameters
        return out


# --------------------------------------------------------------------------
# enclosures and sampling

def copy_enclosure(system: NecklaceSystem, word: Sequence[int]) -> Ball:
    """Ball containing the copy F_word."""
    m = system.copy_map(system.check_word(word))
    return Ball(m(system.c0), system.r0 * m.norm)


def sample_attractor(system: NecklaceSystem, depth: int, budget: int | None = None) -> np.ndarray:
    """Points f_w(c0) for all words w of the given length, in lexicographic order.

    Every point lies within ``r0 * cmax**depth`` of the attractor and, with
    the default centre, on it.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    cap = point_budget(budget)
    if system.n ** depth > cap:
        raise BudgetExceeded(f"{system.n}^{depth} points exceed the budget of {cap}; "
                             "lower the depth or raise NECKLACE_BUDGET")
    pts = np.array([[system.c0.x, system.c0.y]])
    for _ in range(depth):
        pts = np.concatenate([m.apply_array(pts) for m in system.maps])
    return pts


def _identity_frontier(words: Sequence[Word], system: NecklaceSystem):
    L = np.empty((len(words), 4))
    T = np.empty((len(words), 2))
    for i, w in enumerate(words):
        m = system.copy_map(w)
        L[i] = (m.a, m.b, m.c, m.d)
        T[i] = (m.tx, m.ty)
    return L, T


def _centers(L, T, c0):
    return np.stack([L[:, 0] * c0[0] + L[:, 1] * c0[1] + T[:, 0],
                     L[:, 2] * c0[0] + L[:, 3] * c0[1] + T[:, 1]], axis=-1)


def _radii(L, r0):
    return r0 * kernels._pykernels._norms(L)


# --------------------------------------------------------------------------
# point location

def locate(system: NecklaceSystem, point, tol: float | None = None,
           max_steps: int = MAX_DESCENT_STEPS) -> tuple[int, ...]:
    """Digits k with the point in F_k (within ``tol``), assuming it lies on F.

    Descends the copy tree, discarding every copy whose enclosure misses the
    point.  Stops as soon as a single first digit survives, or once all
    surviving enclosures are smaller than ``tol``.
    """
    p = as_point(point)
    tol = system.node_tolerance if tol is None else tol
    words = [(k,) for k in range(1, system.n + 1)]
    L, T = _identity_frontier(words, system)
    keep = np.linalg.norm(_centers(L, T, system.c0) - np.array(p), axis=1) <= _radii(L, system.r0) + tol
    first = np.array([w[0] for w in words])[keep]
    L, T = L[keep], T[keep]
    for _ in range(max_steps):
        digits = np.unique(first)
        if digits.size == 0:
            raise PointNotInAttractor(f"point {tuple(p)} is not within {tol:g} of the attractor")
        if digits.size == 1:
            return (int(digits[0]),)
        R = _radii(L, system.r0)
        big = R > tol
        if not big.any():
            return tuple(int(d) for d in digits)
        parent, _, L2, T2 = kernels.refine_point(L[big], T[big], system.ML, system.MT,
                                                 system.c0, system.r0, p.x, p.y, tol)
        first = np.concatenate([first[~big], first[big][parent]])
        L = np.concatenate([L[~big], L2])
        T = np.concatenate([T[~big], T2])
    raise RuntimeError("point location did not converge")


def contains_point(system: NecklaceSystem, word: Sequence[int], point, tol: float,
                   max_steps: int = MAX_DESCENT_STEPS) -> Status:
    """Metric membership test for ``point in F_word``.

    Verified when a point of the copy (an enclosure centre) lies within
    ``tol``; Refuted when every enclosure below the copy misses the point.
    """
    p = as_point(point)
    L, T = _identity_frontier([tuple(word)], system)
    for _ in range(max_steps):
        C = _centers(L, T, system.c0)
        R = _radii(L, system.r0)
        d = np.linalg.norm(C - np.array(p), axis=1)
        live = d <= R + tol
        if not live.any():
            return Status.REFUTED
        if (d[live] <= tol).any():
            return Status.VERIFIED
        L, T = L[live], T[live]
        _, _, L, T = kernels.refine_point(L, T, system.ML, system.MT, system.c0, system.r0,
                                          p.x, p.y, tol)
    return Status.UNKNOWN


# --------------------------------------------------------------------------
# pair descent

@dataclass
class PairState:
    words_a: list
    words_b: list
    LA: np.ndarray
    TA: np.ndarray
    LB: np.ndarray
    TB: np.ndarray

    def __len__(self):
        return len(self.words_a)

    def radii(self, r0):
        return _radii(self.LA, r0), _radii(self.LB, r0)

    def centers(self, c0):
        return _centers(self.LA, self.TA, c0), _centers(self.LB, self.TB, c0)

    def take(self, idx) -> "PairState":
        idx = np.asarray(idx, dtype=np.int64)
        return PairState([self.words_a[i] for i in idx], [self.words_b[i] for i in idx],
                         self.LA[idx], self.TA[idx], self.LB[idx], self.TB[idx])

    @staticmethod
    def concat(parts: list["PairState"]) -> "PairState":
        parts = [p for p in parts if len(p)]
        if not parts:
            z4, z2 = np.zeros((0, 4)), np.zeros((0, 2))
            return PairState([], [], z4, z2, z4.copy(), z2.copy())
        return PairState(sum((p.words_a for p in parts), []), sum((p.words_b for p in parts), []),
                         np.concatenate([p.LA for p in parts]), np.concatenate([p.TA for p in parts]),
                         np.concatenate([p.LB for p in parts]), np.concatenate([p.TB for p in parts]))


def start_pairs(system: NecklaceSystem, wa: Word, wb: Word) -> PairState:
    LA, TA = _identity_frontier([wa], system)
    LB, TB = _identity_frontier([wb], system)
    return PairState([tuple(wa)], [tuple(wb)], LA, TA, LB, TB)


def refine_step(system: NecklaceSystem, pairs: PairState, stop_radius: float,
                slack: float = 0.0) -> tuple[PairState, PairState]:
    """One subdivision step.

    Pairs whose enclosures are both below ``stop_radius`` are returned as
    ``done``; every other pair has its larger side split and the child
    pairs whose enclosures still meet are returned as ``live``.
    """
    ra, rb = pairs.radii(system.r0)
    active = np.maximum(ra, rb) > stop_radius
    done = pairs.take(np.nonzero(~active)[0])
    act = pairs.take(np.nonzero(active)[0])
    if not len(act):
        return PairState.concat([]), done
    split_a = ra[active] >= rb[active]
    parent, digit, LA, TA, LB, TB = kernels.refine_pairs(
        act.LA, act.TA, act.LB, act.TB, split_a, system.ML, system.MT,
        system.c0, system.r0, slack)
    wa, wb = [], []
    for p, d in zip(parent.tolist(), digit.tolist()):
        if split_a[p]:
            wa.append(act.words_a[p] + (d,))
            wb.append(act.words_b[p])
        else:
            wa.append(act.words_a[p])
            wb.append(act.words_b[p] + (d,))
    return PairState(wa, wb, LA, TA, LB, TB), done


def cluster_labels(points: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage clusters of points closer than ``radius``.

    Points sharing a grid cell of side ``radius / 2`` are always linked, so
    dense clouds reduce to one representative per cell first.  Cells whose
    representatives are within ``radius`` plus a cell diagonal are merged,
    which may join clusters slightly farther apart than ``radius``.
    """
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    cell = max(radius / 2.0, 1e-300)
    keys = np.floor((points - points.min(axis=0)) / cell).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    reps = points[first]
    pairs = cKDTree(reps).query_pairs(radius + 2.0 * cell, output_type="ndarray")
    rep_labels = kernels.union_find(len(reps), pairs)
    labels = rep_labels[inverse.ravel()]
    # renumber by first appearance in the original order
    _, idx, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(idx))
    return order[inv].astype(np.int64)


@dataclass
class ContactResult:
    """Outcome of subdividing one pair of copies around their contact."""
    pairs: PairState
    clusters: list          # separated clusters per level
    diameters: list         # diameter of the contact region per level
    capped: bool            # stopped because the frontier hit the cap

    @property
    def final_clusters(self) -> int:
        return self.clusters[-1] if self.clusters else 0


def _region_diameter(system: NecklaceSystem, pairs: PairState) -> float:
    ca, cb = pairs.centers(system.c0)
    ra, rb = pairs.radii(system.r0)
    pts = np.concatenate([ca, cb])
    rad = np.concatenate([ra, rb])
    lo, hi = (pts - rad[:, None]).min(axis=0), (pts + rad[:, None]).max(axis=0)
    return float(np.hypot(*(hi - lo)))


def _count_clusters(system: NecklaceSystem, pairs: PairState, slack: float = 0.0) -> int:
    ca, cb = pairs.centers(system.c0)
    ra, rb = pairs.radii(system.r0)
    labels = cluster_labels(np.concatenate([ca, cb]), 2.0 * (ra.max() + rb.max()) + slack)
    return int(labels.max()) + 1


def contact_descent(system: NecklaceSystem, wa: Word, wb: Word, stop_radius: float,
                    lookahead: int = 3, cap: int = 20000,
                    max_steps: int = MAX_DESCENT_STEPS) -> ContactResult:
    """Subdivide the pair (F_wa, F_wb) until every enclosure is below ``stop_radius``.

    Stops early when the live frontier would exceed ``cap`` pairs (this
    happens around nodes lying in exponentially many copies), or when
    several separated clusters persist for more than ``lookahead`` levels.
    """
    live = start_pairs(system, wa, wb)
    finished = []
    clusters, diameters = [], []
    ra, rb = live.radii(system.r0)
    level_radius = max(ra.max(), rb.max())
    capped = False
    for _ in range(max_steps):
        if not len(live):
            break
        if len(live) * system.n > cap:
            capped = True
            break
        live, done = refine_step(system, live, stop_radius)
        finished.append(done)
        cur = PairState.concat([live] + finished)
        if not len(cur):
            clusters.append(0)
            diameters.append(0.0)
            break
        ra, rb = cur.radii(system.r0)
        rmax = max(ra.max(), rb.max())
        if rmax <= level_radius * system.cmax or not len(live):
            level_radius = rmax
            clusters.append(_count_clusters(system, cur))
            diameters.append(_region_diameter(system, cur))
            if (len(clusters) > lookahead and min(clusters[-(lookahead + 1):]) > 1
                    and rmax < 0.01 * system.r0):
                break
    else:
        raise RuntimeError("contact descent did not converge")
    return ContactResult(PairState.concat([live] + finished), clusters, diameters, capped)


def _periodic_candidates(system: NecklaceSystem, word: Word, target: np.ndarray,
                         radius: float, max_prefix: int = 12, max_period: int = 12) -> list:
    """Points f_{w[:a]}(fix f_{w[a:b]}) within ``radius`` of ``target``, tagged with b.

    Such points lie on the copy F_{w[:a]}; a node with an eventually periodic
    address is hit once ``word`` is long enough.
    """
    out = []
    prefix = AffineMap.identity()
    for a in range(min(len(word), max_prefix + 1)):
        seg = AffineMap.identity()
        for b in range(a + 1, min(len(word), a + max_period) + 1):
            seg = seg @ system.maps[word[b - 1] - 1]
            try:
                q = prefix(seg.fixed_point())
            except SingularMap:
                continue
            if math.hypot(q.x - target[0], q.y - target[1]) <= radius:
                out.append((q.x, q.y, b))
        prefix = prefix @ system.maps[word[a] - 1]
    return out


def snap_contact(system: NecklaceSystem, pairs: PairState, approx, err: float,
                 max_words: int = 48, match_tol: float | None = None) -> Point | None:
    """Exact common point of both sides of a contact frontier, if one is found.

    Candidates with eventually periodic addresses are generated from the
    words on each side; a candidate of side A that coincides with one of
    side B (within ``match_tol``) is a point of both copies.
    """
    match_tol = 1e-11 * system.scale() if match_tol is None else match_tol
    target = np.array([approx[0], approx[1]])
    sides = []
    for words in (pairs.words_a, pairs.words_b):
        uniq = sorted(set(words), key=lambda w: (-len(w), w))[:max_words]
        cands = []
        for w in uniq:
            cands.extend(_periodic_candidates(system, w, target, err + match_tol))
        if not cands:
            return None
        sides.append(np.unique(np.array(cands), axis=0))
    # several coincidences can occur (deep copies of both sides come close);
    # the node is the one with the shortest eventually periodic description
    tree = cKDTree(sides[1][:, :2])
    best = None
    for i, hits in enumerate(tree.query_ball_point(sides[0][:, :2], match_tol)):
        for j in hits:
            key = (max(sides[0][i, 2], sides[1][j, 2]),
                   float(np.hypot(*(sides[0][i, :2] - sides[1][j, :2]))), i)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    x, y = sides[0][best[2], :2]
    return Point(float(x), float(y))


def _contact_point(system: NecklaceSystem, pairs: PairState) -> tuple[Point, float]:
    ca, cb = pairs.centers(system.c0)
    pts = np.concatenate([ca, cb])
    center = pts.mean(axis=0)
    ra, rb = pairs.radii(system.r0)
    spread = float(np.max(np.linalg.norm(pts - center, axis=1))) + float(max(ra.max(), rb.max()))
    return Point(float(center[0]), float(center[1])), spread


def main_nodes(system: NecklaceSystem, tol: float | None = None, lookahead: int = 3) -> list[Point]:
    """Contact points z_k of F_k and F_{k+1}.

    Pair subdivision narrows each contact down; the result is then snapped
    to an exact point with an eventually periodic address on both sides
    when one exists within the remaining uncertainty.  Raises
    NodeAmbiguityError when a pair keeps several separated contact clusters
    for more than ``lookahead`` levels.
    """
    tol = system.node_tolerance if tol is None else tol
    out = []
    for k in range(1, system.n + 1):
        j = system.succ(k)
        res = contact_descent(system, (k,), (j,), tol / 4.0, lookahead)
        if not len(res.pairs):
            raise NodeAmbiguityError(f"copies {k} and {j} do not touch")
        nclus = _count_clusters(system, res.pairs, tol)
        if nclus > 1:
            raise NodeAmbiguityError(
                f"copies {k} and {j} keep {nclus} separated contact regions "
                f"(cluster history {res.clusters[-(lookahead + 1):]})")
        approx, spread = _contact_point(system, res.pairs)
        snapped = snap_contact(system, res.pairs, approx, spread)
        if snapped is not None:
            out.append(snapped)
        elif spread <= tol:
            out.append(approx)
        else:
            raise NodeAmbiguityError(
                f"contact of copies {k} and {j} only located to {spread:.3g}")
    return out


# --------------------------------------------------------------------------
# necklace axioms

def _separate(system: NecklaceSystem, m: int, k: int, depth: int, tol: float) -> dict:
    rec = {"pair": [m, k], "adjacent": False}
    stop = system.r0 * system.cmax ** depth
    live = start_pairs(system, (m,), (k,))
    finished = []
    for _ in range(MAX_DESCENT_STEPS):
        if not len(live):
            break
        live, done = refine_step(system, live, stop)
        finished.append(done)
    left = PairState.concat([live] + finished)
    if not len(left):
        rec.update(status=Status.VERIFIED, evidence="enclosures separated")
        return rec
    # still overlapping at this depth: follow the overlap down to the tolerance
    try:
        left = contact_descent(system, (m,), (k,), tol / 4.0, cap=200000).pairs
    except RuntimeError:
        pass
    if not len(left):
        rec.update(status=Status.VERIFIED, evidence="enclosures separated below the depth")
        return rec
    ca, cb = left.centers(system.c0)
    d = np.linalg.norm(ca - cb, axis=1)
    i = int(np.argmin(d))
    if d[i] <= tol:
        rec.update(status=Status.REFUTED, evidence="points of both copies coincide",
                   distance=float(d[i]), point=[float(ca[i, 0]), float(ca[i, 1])],
                   words=[list(left.words_a[i]), list(left.words_b[i])])
    else:
        rec.update(status=Status.UNKNOWN, evidence="enclosures still overlap",
                   distance=float(d[i]), overlapping_pairs=len(left))
    return rec


def _touch(system: NecklaceSystem, m: int, k: int, tol: float, lookahead: int = 3) -> dict:
    rec = {"pair": [m, k], "adjacent": True}
    stop = tol / 4.0
    for _ in range(5):
        try:
            res = contact_descent(system, (m,), (k,), stop, lookahead, cap=400000)
        except RuntimeError:
            rec.update(status=Status.UNKNOWN, evidence="contact descent did not converge")
            return rec
        if not len(res.pairs):
            rec.update(status=Status.REFUTED, evidence="adjacent copies are disjoint")
            return rec
        nclus = _count_clusters(system, res.pairs, tol)
        point, spread = _contact_point(system, res.pairs)
        # elongated copies leave a cluster several radii wide: go finer
        if nclus > 1 or spread <= tol or res.capped:
            break
        stop /= 8.0
    if nclus > 1:
        if res.capped and min(res.clusters[-(lookahead + 1):]) <= 1:
            rec.update(status=Status.UNKNOWN, evidence="contact clusters unresolved at cap",
                       clusters=nclus)
        else:
            rec.update(status=Status.REFUTED, evidence=f"{nclus} separated contact clusters",
                       clusters=nclus)
        return rec
    if spread <= tol:
        rec.update(status=Status.VERIFIED, evidence="single contact cluster",
                   point=[point.x, point.y], diameter=spread)
        return rec
    # Frontier cap reached: the contact lies in exponentially many copies.
    # Accept a single cluster that kept shrinking by the contraction factor
    # over the last levels and contains an exactly computed common point.
    diam = res.diameters[-(lookahead + 1):]
    shrinking = (len(diam) > lookahead and min(res.clusters[-(lookahead + 1):]) == 1
                 and diam[-1] <= diam[0] * (1.1 * system.cmax) ** lookahead)
    snapped = snap_contact(system, res.pairs, point, spread)
    if res.capped and shrinking and snapped is not None:
        rec.update(status=Status.VERIFIED,
                   evidence="single contact cluster shrinking geometrically; "
                            "common point computed exactly",
                   point=[snapped.x, snapped.y], diameter=spread)
    else:
        rec.update(status=Status.UNKNOWN, evidence="contact cluster not below tolerance",
                   diameter=spread)
    return rec


def _check_pair(system: NecklaceSystem, m: int, k: int, depth: int, tol: float) -> dict:
    if system.adjacent(m, k):
        return _touch(system, m, k, tol)
    return _separate(system, m, k, depth, tol)


def validate_necklace(system: NecklaceSystem, depth: int = 6, tol: float = 1e-6,
                      jobs: int = 1) -> NecklaceVerdict:
    """Check the intersection pattern of the 1-level copies.

    Non-adjacent pairs must have separated enclosures once every enclosure
    is below ``r0 * cmax**depth``.  Adjacent pairs are subdivided until the
    contact region is smaller than ``tol`` and must shrink to one cluster.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    pairs = [(m, k) for m in range(1, system.n + 1) for k in range(m + 1, system.n + 1)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda mk: _check_pair(system, *mk, depth, tol), pairs))
    else:
        results = [_check_pair(system, m, k, depth, tol) for m, k in pairs]
    statuses = [r["status"] for r in results]
    if Status.REFUTED in statuses:
        status = Status.REFUTED
    elif Status.UNKNOWN in statuses:
        status = Status.UNKNOWN
    else:
        status = Status.VERIFIED
    witnesses = [{k: (str(v) if isinstance(v, Status) else v) for k, v in r.items()}
                 for r in results if r["status"] is not Status.VERIFIED]
    summary = [{"pair": r["pair"], "status": str(r["status"])} for r in results]
    return NecklaceVerdict(status, depth, tol, witnesses, summary)
