"""Deterministic SVG pictures of attractor approximations.

Each copy F_w of the chosen level is drawn as f_w(H), where H is the convex
hull of a fine sample of F (a polygon slightly inside conv F).  Depth 0 draws
the enclosure ball instead.  Numbers are written with a fixed number of
decimals, so identical inputs give byte-identical documents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np
from scipy.spatial import ConvexHull

from .system import BudgetExceeded, NecklaceSystem, point_budget, sample_attractor

HULL_SAMPLE = 20000


@dataclass
class RenderOptions:
    depth: int = 5
    width: int = 800
    height: int = 800
    margin: int = 16
    style: str = "polygons"           # or "points": one dot per copy centre
    fill: str = "#2b2b2b"
    stroke: str = "none"
    stroke_width: float = 0.5
    accent: str = "#d62728"
    background: str = "#ffffff"
    node_markers: bool = False
    node_color: str = "#1f77b4"
    highlight: Sequence[Sequence[int]] = field(default_factory=tuple)
    decimals: int = 2


def _fmt(v: float, decimals: int) -> str:
    s = f"{v:.{decimals}f}"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def hull_polygon(system: NecklaceSystem, budget: int | None = None) -> np.ndarray:
    """Convex hull vertices (counter-clockwise) of a sample of F."""
    level = max(1, int(math.log(HULL_SAMPLE) / math.log(system.n)))
    pts = sample_attractor(system, level, budget)
    try:
        hull = ConvexHull(pts)
    except Exception:  # degenerate (collinear) sample: keep the extreme points
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        return pts[[order[0], order[-1]]]
    return pts[hull.vertices]


def copy_transforms(system: NecklaceSystem, depth: int, budget: int | None = None):
    """Linear parts (k, 2, 2) and translations (k, 2) of f_w for |w| = depth,
    words in lexicographic order."""
    cap = point_budget(budget)
    if system.n ** depth > cap:
        raise BudgetExceeded(f"{system.n}^{depth} copies exceed the budget of {cap}; "
                             "lower --depth or raise NECKLACE_BUDGET")
    L = np.eye(2)[None]
    T = np.zeros((1, 2))
    ML = np.array([m.linear for m in system.maps])
    MT = np.array([m.translation for m in system.maps])
    for _ in range(depth):
        # f_w o f_i for every current w, children grouped under their parent
        T = (np.einsum("kab,ib->kia", L, MT) + T[:, None, :]).reshape(-1, 2)
        L = np.einsum("kab,ibc->kiac", L, ML).reshape(-1, 2, 2)
    return L, T


def _word_index(word: Sequence[int], n: int) -> int:
    idx = 0
    for d in word:
        idx = idx * n + (d - 1)
    return idx


def render_svg(system: NecklaceSystem, options: RenderOptions | None = None,
               budget: int | None = None) -> str:
    opt = options or RenderOptions()
    if opt.depth < 0:
        raise ValueError("depth must be >= 0")
    if opt.style not in ("polygons", "points"):
        raise ValueError(f"unknown style {opt.style!r}")
    cap = point_budget(budget)
    highlight = [system.check_word(w) for w in opt.highlight]

    shapes = []      # (accent?, polygon array or circle tuple)
    if opt.depth == 0:
        c, r = system.c0, system.r0
        shapes.append((False, ("circle", c.x, c.y, r)))
    else:
        L, T = copy_transforms(system, opt.depth, cap)
        accent = np.zeros(len(L), dtype=bool)
        extra = []
        for w in highlight:
            if len(w) <= opt.depth:
                span = system.n ** (opt.depth - len(w))
                start = _word_index(w, system.n) * span
                accent[start:start + span] = True
            else:
                extra.append(w)
        if opt.style == "polygons":
            H = hull_polygon(system, cap)
            if len(L) * len(H) > cap:
                raise BudgetExceeded(f"{len(L) * len(H)} polygon vertices exceed the budget "
                                     f"of {cap}; lower --depth or raise NECKLACE_BUDGET")
            polys = np.einsum("kab,vb->kva", L, H) + T[:, None, :]
            for k in range(len(L)):
                shapes.append((bool(accent[k]), polys[k]))
            for w in extra:
                m = system.copy_map(w)
                shapes.append((True, m.apply_array(H)))
        else:
            c0 = np.array([system.c0.x, system.c0.y])
            centers = np.einsum("kab,b->ka", L, c0) + T
            for k in range(len(L)):
                shapes.append((bool(accent[k]), ("dot",) + tuple(centers[k])))
            for w in extra:
                p = system.copy_map(w)(system.c0)
                shapes.append((True, ("dot", p.x, p.y)))

    nodes = [(p.x, p.y) for p in system.nodes] if opt.node_markers else []

    # world bounding box
    xs, ys = [], []
    for _, s in shapes:
        if isinstance(s, tuple) and s[0] == "circle":
            xs += [s[1] - s[3], s[1] + s[3]]
            ys += [s[2] - s[3], s[2] + s[3]]
        elif isinstance(s, tuple):
            xs.append(s[1])
            ys.append(s[2])
        else:
            xs += [s[:, 0].min(), s[:, 0].max()]
            ys += [s[:, 1].min(), s[:, 1].max()]
    for x, y in nodes:
        xs.append(x)
        ys.append(y)
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    scale = min(opt.width - 2 * opt.margin, opt.height - 2 * opt.margin) / span
    ox = opt.margin + (opt.width - 2 * opt.margin - scale * (x1 - x0)) / 2
    oy = opt.margin + (opt.height - 2 * opt.margin - scale * (y1 - y0)) / 2
    f = lambda v: _fmt(v, opt.decimals)

    def px(x: float, y: float) -> tuple[str, str]:
        return f(ox + (x - x0) * scale), f(opt.height - oy - (y - y0) * scale)

    def path_of(poly) -> str:
        pts = [px(x, y) for x, y in poly]
        return "M" + " L".join(f"{a} {b}" for a, b in pts) + " Z"

    dot = max(0.5, 1.0 * scale * system.r0 * system.cmax ** opt.depth)

    def element(s, color) -> str:
        if isinstance(s, tuple) and s[0] == "circle":
            cx, cy = px(s[1], s[2])
            return (f'<circle cx="{cx}" cy="{cy}" r="{f(s[3] * scale)}" fill="none" '
                    f'stroke="{color}" stroke-width="{f(max(opt.stroke_width, 1.0))}"/>')
        cx, cy = px(s[1], s[2])
        return f'<circle cx="{cx}" cy="{cy}" r="{f(dot)}"/>'

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{opt.width}" '
           f'height="{opt.height}" viewBox="0 0 {opt.width} {opt.height}">',
           f"<title>{escape(system.name or 'necklace')} depth {opt.depth}</title>",
           f'<rect x="0" y="0" width="{opt.width}" height="{opt.height}" '
           f'fill="{opt.background}"/>']
    for is_accent, color in ((False, opt.fill), (True, opt.accent)):
        group = [s for a, s in shapes if a == is_accent]
        if not group:
            continue
        polys = [s for s in group if not isinstance(s, tuple)]
        others = [s for s in group if isinstance(s, tuple)]
        cls = "accent" if is_accent else "copies"
        out.append(f'<g class="{cls}" fill="{color}" stroke="{opt.stroke}" '
                   f'stroke-width="{f(opt.stroke_width)}" stroke-linejoin="round">')
        if polys:
            out.append(f'<path fill-rule="nonzero" d="{" ".join(path_of(p) for p in polys)}"/>')
        out += [element(s, color) for s in others]
        out.append("</g>")
    if nodes:
        r = f(max(2.0, opt.width / 200))
        out.append(f'<g class="nodes" fill="{opt.node_color}">')
        for k, (x, y) in enumerate(nodes, start=1):
            cx, cy = px(x, y)
            out.append(f'<circle cx="{cx}" cy="{cy}" r="{r}"><title>z{k}</title></circle>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
