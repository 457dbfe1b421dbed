"""Structural classification: good, stable, bounded ramification, Property I,
open set condition witnesses and complement components.

The boundary of F_k inside F is the node pair {z_{k-1}, z_k}, so the first
three properties reduce to address questions about main nodes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import Polygon
from skimage import measure

from . import kernels
from .addresses import UnresolvedMembership
from .geometry import AffineMap, Point, as_point
from .system import NecklaceSystem, Status, point_budget


@dataclass
class Verdict:
    status: Status
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        out = {"status": str(self.status), "witnesses": self.witnesses, "details": self.details}
        if self.note:
            out["note"] = self.note
        return out


def _local_state(system: NecklaceSystem, k: int, node: int) -> int:
    """State of f_k^{-1}(z_node); z_node must lie in F_k."""
    auto = system.automaton
    s = auto.transitions[auto.node_states[(node - 1) % system.n]].get(k)
    if s is None:
        raise UnresolvedMembership(f"z_{node} is not a point of F_{k}")
    return s


def boundary_children(system: NecklaceSystem, k: int) -> tuple[set, set]:
    """D_k(z) = {j : z in F_kj} for the two boundary nodes z_{k-1}, z_k of F_k."""
    auto = system.automaton
    out = []
    for node in (k - 1, k):
        s = _local_state(system, k, node)
        if not auto.resolved[s]:
            raise UnresolvedMembership(f"addresses of z_{node} unresolved")
        out.append(set(auto.transitions[s]))
    return out[0], out[1]


def is_good(system: NecklaceSystem) -> Verdict:
    """No child F_kj contains both boundary nodes of F_k."""
    try:
        witnesses, details = [], {}
        for k in range(1, system.n + 1):
            left, right = boundary_children(system, k)
            both = sorted(left & right)
            details[str(k)] = {"z_prev_children": sorted(left), "z_next_children": sorted(right)}
            witnesses.extend({"k": k, "j": j} for j in both)
    except UnresolvedMembership as exc:
        return Verdict(Status.UNKNOWN, note=str(exc))
    return Verdict(Status.REFUTED if witnesses else Status.VERIFIED, witnesses, details)


def is_stable(system: NecklaceSystem) -> Verdict:
    """At least two children of each F_k touch its boundary."""
    try:
        witnesses, details = [], {}
        for k in range(1, system.n + 1):
            left, right = boundary_children(system, k)
            touching = sorted(left | right)
            details[str(k)] = {"count": len(touching), "children": touching}
            if len(touching) < 2:
                witnesses.append({"k": k, "children": touching})
    except UnresolvedMembership as exc:
        return Verdict(Status.UNKNOWN, note=str(exc))
    return Verdict(Status.REFUTED if witnesses else Status.VERIFIED, witnesses, details)


def bounded_ramification(system: NecklaceSystem, M: int = 8) -> Verdict:
    """Whether c_m(z_k) stays bounded for every main node.

    With a closed automaton the strongly connected component criterion
    decides it exactly.  Otherwise only window evidence on c_1..c_M is given.
    """
    auto = system.automaton
    details, witnesses = {}, []
    if auto.closed:
        for k, s in enumerate(auto.node_states, start=1):
            counts = auto.count_paths(s, M)
            growth, degree = auto.growth(s)
            entry = {"counts": counts, "growth": growth}
            if growth == "constant":
                entry["value"] = auto.count_paths(s, M + len(auto))[-1]
            else:
                witnesses.append({"node": k, "growth": growth})
                if degree is not None:
                    entry["degree"] = degree
            details[str(k)] = entry
        return Verdict(Status.REFUTED if witnesses else Status.VERIFIED, witnesses, details)
    bounded = True
    for k, s in enumerate(auto.node_states, start=1):
        counts = auto.count_paths(s, M)
        details[str(k)] = {"counts": [list(c) if isinstance(c, tuple) else c for c in counts]}
        tail = counts[M // 2:]
        if any(isinstance(c, tuple) for c in tail) or len(set(tail)) > 1:
            bounded = False
    return Verdict(Status.UNKNOWN, [], details,
                   note="bounded-evidence" if bounded else "unbounded-evidence")


# --------------------------------------------------------------------------
# Property I

def _cyclic_interval(n: int, start: int, end: int, step: int) -> list:
    out = [start]
    while out[-1] != end:
        out.append((out[-1] - 1 + step) % n + 1)
    return out


def _avoiding_chain(system: NecklaceSystem, u: int, v: int, forbidden: int) -> list | None:
    """1-level chain from state u to state v whose copies all miss ``forbidden``.

    Returns the copy indices of the shortest such chain, or None.
    """
    auto = system.automaton
    n = system.n
    du, dv, dq = set(auto.digits[u]), set(auto.digits[v]), set(auto.digits[forbidden])
    if u == forbidden or v == forbidden:
        return None
    best = None
    for s in sorted(du):
        for e in sorted(dv):
            for step in (1, -1):
                seq = _cyclic_interval(n, s, e, step)
                if len(seq) == n or dq & set(seq):
                    continue
                if du & set(seq[1:]) or dv & set(seq[:-1]):
                    continue
                if best is None or len(seq) < len(best):
                    best = seq
    return best


def _property_I_for(system: NecklaceSystem, k: int) -> dict:
    auto = system.automaton
    n = system.n
    a = _local_state(system, k, k - 1)
    b = _local_state(system, k, k)
    nodes = set(auto.node_states)
    a_main, b_main = a in nodes, b in nodes
    da, db = set(auto.digits[a]), set(auto.digits[b])
    if a_main or b_main:
        case = "case1"
    elif da & db:
        case = "case2-same-child"
    elif any(system.adjacent(i, j) for i in da for j in db):
        case = "case2-touching"
    else:
        case = "case2-separated"
    best = None
    for s in sorted(da):
        for e in sorted(db):
            for step in (1, -1):
                seq = _cyclic_interval(n, s, e, step)
                N = len(seq)
                if (da & set(seq[1:])) - ({seq[-1]} if N == n else set()):
                    continue
                if (db & set(seq[:-1])) - ({seq[0]} if N == n else set()):
                    continue
                connections = [auto.node_states[system.node_between(x, y) - 1]
                               for x, y in zip(seq, seq[1:])]
                avoid = None
                if N == n and n > 1:
                    wrap = auto.node_states[system.node_between(seq[-1], seq[0]) - 1]
                    # one end piece must miss the wrap node shared by A_1 and A_N
                    options = []
                    if a != wrap:
                        first_exit = connections[0] if connections else b
                        options.append(("first", seq[0], a, first_exit))
                    if b != wrap:
                        last_entry = connections[-1] if connections else a
                        options.append(("last", seq[-1], last_entry, b))
                    for label, c, u, v in options:
                        loc = [auto.transitions[x].get(c) for x in (u, v, wrap)]
                        if None in loc:
                            continue
                        sub = _avoiding_chain(system, *loc)
                        if sub is not None:
                            avoid = {"piece": label, "copy": c, "chain": sub}
                            break
                    if avoid is None:
                        continue
                count = (N - 1) + int(a_main) + int(b_main)
                cand = {"chain": [[k, c] for c in seq], "main_nodes": count}
                if avoid:
                    cand["avoidance"] = avoid
                key = (count < 2, N, seq[0], -step)
                if best is None or key < best[0]:
                    best = (key, cand)
    rec = {"k": k, "case": case, "a_is_main_node": a_main, "b_is_main_node": b_main}
    if best is not None and best[1]["main_nodes"] >= 2:
        rec.update(found=True, **best[1])
    else:
        rec.update(found=False, best=None if best is None else best[1])
    return rec


def check_property_I(system: NecklaceSystem, jobs: int = 1) -> Verdict:
    """Search each F_k for a 1-level chain whose arc meets >= 2 main nodes of F_k.

    Chains run along the cycle of children of F_k from a child containing
    z_{k-1} to one containing z_k.  When the chain uses every child, one end
    piece must avoid the node shared by its first and last copies, which
    is certified by a chain inside that piece.  Refuted means no such 1-level
    construction exists for some k.
    """
    try:
        ks = range(1, system.n + 1)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                recs = list(pool.map(lambda k: _property_I_for(system, k), ks))
        else:
            recs = [_property_I_for(system, k) for k in ks]
    except UnresolvedMembership as exc:
        return Verdict(Status.UNKNOWN, note=str(exc))
    failed = [{"k": r["k"], "case": r["case"]} for r in recs if not r["found"]]
    return Verdict(Status.REFUTED if failed else Status.VERIFIED, failed,
                   {str(r["k"]): r for r in recs},
                   note="search limited to 1-level chains inside each F_k")


# --------------------------------------------------------------------------
# open set condition

@dataclass(frozen=True)
class PolygonWitness:
    """Simple polygon whose interior is the candidate open set V."""
    vertices: tuple
    note: str = ""

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        if len(verts) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        poly = Polygon(verts)
        if not poly.is_valid or poly.area <= 0 or not poly.exterior.is_simple:
            raise ValueError("polygon is degenerate or self-intersecting")
        if not poly.exterior.is_ccw:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    @property
    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    def image(self, m: AffineMap) -> Polygon:
        return Polygon([m(v) for v in self.vertices])

    def translated(self, dx: float, dy: float) -> "PolygonWitness":
        return PolygonWitness(tuple(Point(v.x + dx, v.y + dy) for v in self.vertices), self.note)

    def scaled(self, factor: float, center=None) -> "PolygonWitness":
        c = self.polygon.centroid if center is None else as_point(center)
        cx, cy = (c.x, c.y)
        return PolygonWitness(tuple(Point(cx + factor * (v.x - cx), cy + factor * (v.y - cy))
                                    for v in self.vertices), self.note)


def check_osc_witness(system: NecklaceSystem, witness: PolygonWitness, depth: int = 1,
                      tol: float = 1e-9) -> Verdict:
    """Test f_w(V) ⊆ V and pairwise disjoint interiors for the maps of level ``depth``.

    Areas of violation up to ``tol`` times the perimeter count as zero;
    up to ten times that the answer is Unknown.
    """
    from .addresses import _all_words
    V = witness.polygon
    band = tol * V.length
    images = {w: witness.image(system.copy_map(w)) for w in _all_words(system.n, depth)}
    worst, witnesses = 0.0, []
    for w, P in images.items():
        excess = P.difference(V).area
        worst = max(worst, excess / band if band else math.inf)
        if excess > band:
            witnesses.append({"kind": "not contained", "word": list(w), "area": excess})
    keys = sorted(images)
    for i, wi in enumerate(keys):
        for wj in keys[i + 1:]:
            over = images[wi].intersection(images[wj]).area
            worst = max(worst, over / band if band else math.inf)
            if over > band:
                witnesses.append({"kind": "overlap", "words": [list(wi), list(wj)], "area": over})
    details = {"depth": depth, "tolerance": tol, "worst_ratio": worst}
    if not witnesses:
        return Verdict(Status.VERIFIED, [], details)
    if worst <= 10.0:
        return Verdict(Status.UNKNOWN, witnesses, details, note="violations within tolerance band")
    return Verdict(Status.REFUTED, witnesses, details)


# --------------------------------------------------------------------------
# complement components (raster heuristic)

@dataclass
class Raster:
    grid: np.ndarray          # 1 where a pixel may meet F
    labels: np.ndarray        # complement labels, 0 on F
    x0: float
    y0: float
    pixel: float

    def pixel_of(self, p) -> tuple[int, int]:
        p = as_point(p)
        return int(math.floor((p.y - self.y0) / self.pixel)), int(math.floor((p.x - self.x0) / self.pixel))

    def center_of(self, row: int, col: int) -> Point:
        return Point(self.x0 + (col + 0.5) * self.pixel, self.y0 + (row + 0.5) * self.pixel)


@dataclass
class ComplementReport:
    bounded: int
    seeds: list
    areas: list
    unbounded: int
    resolution: int
    pixel: float
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {"bounded_components": self.bounded, "unbounded_components": self.unbounded,
                "seeds": [[p.x, p.y] for p in self.seeds], "areas": self.areas,
                "resolution": self.resolution, "pixel": self.pixel,
                "heuristic": self.heuristic}


def _bbox(system: NecklaceSystem) -> tuple[float, float, float, float]:
    from .system import sample_attractor
    d = 0
    while system.n ** (d + 1) <= 20000:
        d += 1
    pts = sample_attractor(system, d)
    pad = system.r0 * system.cmax ** d
    lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def rasterize_attractor(system: NecklaceSystem, resolution: int,
                        budget: int | None = None) -> Raster:
    """Cover F by pixels and label the 4-connected pieces of the rest."""
    x0, y0, x1, y1 = _bbox(system)
    side = max(x1 - x0, y1 - y0)
    pixel = side / (resolution - 4)
    x0 -= 2 * pixel
    y0 -= 2 * pixel
    grid, _ = kernels.rasterize(system.ML, system.MT, np.array(system.c0), system.r0,
                                x0, y0, pixel, resolution, resolution,
                                point_budget(budget) * system.n)
    labels = kernels.label_components((grid == 0).astype(np.uint8))
    return Raster(grid, labels, x0, y0, pixel)


def complement_components(system: NecklaceSystem, resolution: int = 1024, min_area: int = 4,
                          budget: int | None = None) -> ComplementReport:
    """Bounded components of the plane minus F, as seen at the given resolution.

    Components touching the frame are unbounded.  Bounded ones smaller than
    ``min_area`` pixels are ignored.  This is a resolution-limited heuristic.
    """
    r = rasterize_attractor(system, resolution, budget)
    lab = r.labels
    border = set(np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]])).tolist())
    border.discard(0)
    counts = np.bincount(lab.ravel())
    seeds, areas = [], []
    rows, cols = np.indices(lab.shape)
    for c in range(1, len(counts)):
        if c in border or counts[c] < min_area:
            continue
        mask = lab == c
        rr, cc = rows[mask], cols[mask]
        cy, cx = rr.mean(), cc.mean()
        i = int(np.argmin((rr - cy) ** 2 + (cc - cx) ** 2))
        seeds.append(r.center_of(int(rr[i]), int(cc[i])))
        areas.append(float(counts[c]) * r.pixel ** 2)
    return ComplementReport(len(seeds), seeds, areas, len(border), resolution, r.pixel)


def build_osc_witness_from_component(system: NecklaceSystem, seed, resolution: int = 1024,
                                     budget: int | None = None) -> PolygonWitness:
    """Outline of the raster complement component containing ``seed``.

    The open set behind the theory is the union of all images f_w(U) of a
    bounded component U; this returns U's outline alone, which is a
    heuristic candidate and usually fails the containment test on its own.
    """
    r = rasterize_attractor(system, resolution, budget)
    row, col = r.pixel_of(seed)
    if not (0 <= row < resolution and 0 <= col < resolution):
        raise ValueError("seed lies outside the raster frame")
    c = int(r.labels[row, col])
    if c == 0:
        raise ValueError("seed lies on the attractor (at this resolution)")
    lab = r.labels
    if c in set(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]).tolist()):
        raise ValueError("seed lies in the unbounded complement component")
    mask = np.pad((lab == c).astype(float), 1)
    contours = measure.find_contours(mask, 0.5)
    outline = max(contours, key=len)
    # contour coordinates are (row, col) in the padded array
    pts = [Point(r.x0 + (cc - 1 + 0.5) * r.pixel, r.y0 + (rr - 1 + 0.5) * r.pixel)
           for rr, cc in outline]
    poly = shapely.make_valid(Polygon(pts)).buffer(0)
    if poly.geom_type != "Polygon":
        poly = max(poly.geoms, key=lambda g: g.area)
    return PolygonWitness(tuple(Point(x, y) for x, y in list(poly.exterior.coords)[:-1]),
                          note="raster outline of one bounded complement component (heuristic)")


# --------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    system: str
    good: Verdict
    stable: Verdict
    bounded_ramification: Verdict
    property_I: Verdict
    osc: Verdict

    @property
    def status(self) -> Status:
        parts = [self.good.status, self.stable.status, self.bounded_ramification.status,
                 self.property_I.status]
        if Status.UNKNOWN in parts:
            return Status.UNKNOWN
        return Status.VERIFIED if all(p is Status.VERIFIED for p in parts) else Status.REFUTED

    def to_dict(self) -> dict:
        return {"system": self.system, "status": str(self.status),
                "good": self.good.to_dict(), "stable": self.stable.to_dict(),
                "bounded_ramification": self.bounded_ramification.to_dict(),
                "property_I": self.property_I.to_dict(), "osc": self.osc.to_dict()}


def classify(system: NecklaceSystem, ramify_depth: int = 8, witness: PolygonWitness | None = None,
             jobs: int = 1, osc_depth: int = 1) -> ClassificationReport:
    osc = (check_osc_witness(system, witness, depth=osc_depth) if witness is not None
           else Verdict(Status.UNKNOWN, note="no witness supplied"))
    return ClassificationReport(system.name, is_good(system), is_stable(system),
                                bounded_ramification(system, ramify_depth),
                                check_property_I(system, jobs), osc)
