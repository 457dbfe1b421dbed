"""Pure numpy implementations of the hot kernels.

Each function here has a twin in ``_kernels.pyx`` with the same signature and
bit-for-bit identical results; ``necklace.kernels`` picks one at import.

Copies are carried as affine maps packed into arrays: ``L`` is ``(N, 4)``
holding ``[a, b, c, d]`` and ``T`` is ``(N, 2)``.  The enclosure of the copy
is the ball centred at ``L c0 + T`` with radius ``r0 * ||L||``.
"""
from __future__ import annotations

from collections import deque

import numpy as np


def _norms(L):
    a, b, c, d = L[:, 0], L[:, 1], L[:, 2], L[:, 3]
    # conformal plus anticonformal parts: no cancellation for similitudes
    return 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b))


def _children(L, T, ML, MT):
    """All children of every copy, parent-major: shape (N*n, 4) and (N*n, 2)."""
    a, b, c, d = (L[:, None, k] for k in range(4))
    ma, mb, mc, md = (ML[None, :, k] for k in range(4))
    CL = np.stack([a * ma + b * mc, a * mb + b * md, c * ma + d * mc, c * mb + d * md], axis=-1)
    tx, ty = MT[None, :, 0], MT[None, :, 1]
    CT = np.stack([a * tx + b * ty + T[:, None, 0], c * tx + d * ty + T[:, None, 1]], axis=-1)
    n = ML.shape[0]
    return CL.reshape(-1, 4), CT.reshape(-1, 2), n


def _centers(L, T, c0):
    return np.stack([L[:, 0] * c0[0] + L[:, 1] * c0[1] + T[:, 0],
                     L[:, 2] * c0[0] + L[:, 3] * c0[1] + T[:, 1]], axis=-1)


def refine_point(L, T, ML, MT, c0, r0, px, py, slack):
    """Children of each copy whose enclosure contains (px, py) within ``slack``.

    Returns ``(parent, digit, L2, T2)``; digits are 1-based.
    """
    L = np.ascontiguousarray(L, dtype=np.float64).reshape(-1, 4)
    T = np.ascontiguousarray(T, dtype=np.float64).reshape(-1, 2)
    CL, CT, n = _children(L, T, ML, MT)
    C = _centers(CL, CT, c0)
    R = r0 * _norms(CL)
    dx, dy = C[:, 0] - px, C[:, 1] - py
    dist = np.sqrt(dx * dx + dy * dy)
    keep = np.nonzero(dist <= R + slack)[0]
    return (keep // n).astype(np.int64), (keep % n + 1).astype(np.int64), CL[keep], CT[keep]


def refine_pairs(LA, TA, LB, TB, split_a, ML, MT, c0, r0, slack):
    """Split one side of each pair and keep child pairs whose enclosures meet.

    ``split_a[i]`` selects which side of pair ``i`` is replaced by its
    children.  Returns ``(parent, digit, LA2, TA2, LB2, TB2)``.
    """
    n = ML.shape[0]
    split_a = np.asarray(split_a, dtype=bool)
    out = []
    for side_a in (True, False):
        idx = np.nonzero(split_a == side_a)[0]
        if idx.size == 0:
            continue
        if side_a:
            CL, CT, _ = _children(LA[idx], TA[idx], ML, MT)
            OL, OT = np.repeat(LB[idx], n, axis=0), np.repeat(TB[idx], n, axis=0)
        else:
            CL, CT, _ = _children(LB[idx], TB[idx], ML, MT)
            OL, OT = np.repeat(LA[idx], n, axis=0), np.repeat(TA[idx], n, axis=0)
        D = _centers(CL, CT, c0) - _centers(OL, OT, c0)
        gap = np.sqrt(D[:, 0] * D[:, 0] + D[:, 1] * D[:, 1]) - r0 * _norms(CL) - r0 * _norms(OL)
        keep = np.nonzero(gap <= slack)[0]
        parent = idx[keep // n]
        digit = keep % n + 1
        if side_a:
            out.append((parent, digit, CL[keep], CT[keep], OL[keep], OT[keep]))
        else:
            out.append((parent, digit, OL[keep], OT[keep], CL[keep], CT[keep]))
    if not out:
        z4, z2 = np.zeros((0, 4)), np.zeros((0, 2))
        return np.zeros(0, np.int64), np.zeros(0, np.int64), z4, z2, z4, z2
    # restore pair order: parent-major, digits ascending
    parent = np.concatenate([o[0] for o in out])
    digit = np.concatenate([o[1] for o in out])
    order = np.lexsort((digit, parent))
    cols = [np.concatenate([o[k] for o in out])[order] for k in range(2, 6)]
    return (parent[order].astype(np.int64), digit[order].astype(np.int64), *cols)


def rasterize(ML, MT, c0, r0, x0, y0, pixel, width, height, budget):
    """Mark every pixel that may meet the attractor.

    Copies are subdivided until their enclosure radius drops below half a
    pixel, then the pixels under the enclosure's bounding box are set.
    Returns ``(grid, stamps)`` where ``grid`` is uint8 of shape
    ``(height, width)`` with row 0 at ``y0``.
    """
    grid = np.zeros((height, width), dtype=np.uint8)
    L = np.array([[1.0, 0.0, 0.0, 1.0]])
    T = np.zeros((1, 2))
    half = 0.5 * pixel
    x1, y1 = x0 + width * pixel, y0 + height * pixel
    stamps = 0
    while L.shape[0]:
        C = _centers(L, T, c0)
        R = r0 * _norms(L)
        inside = ((C[:, 0] + R >= x0) & (C[:, 0] - R <= x1)
                  & (C[:, 1] + R >= y0) & (C[:, 1] - R <= y1))
        small = inside & (R < half)
        if small.any():
            cs, rs = C[small], R[small]
            i0 = np.clip(np.floor((cs[:, 0] - rs - x0) / pixel).astype(np.int64), 0, width - 1)
            i1 = np.clip(np.floor((cs[:, 0] + rs - x0) / pixel).astype(np.int64), 0, width - 1)
            j0 = np.clip(np.floor((cs[:, 1] - rs - y0) / pixel).astype(np.int64), 0, height - 1)
            j1 = np.clip(np.floor((cs[:, 1] + rs - y0) / pixel).astype(np.int64), 0, height - 1)
            for di in (0, 1):
                for dj in (0, 1):
                    ii = np.minimum(i0 + di, i1)
                    jj = np.minimum(j0 + dj, j1)
                    grid[jj, ii] = 1
            stamps += int(small.sum())
        big = inside & ~small
        if not big.any():
            break
        if big.sum() * ML.shape[0] > budget:
            raise MemoryError(f"rasterization frontier exceeds budget {budget}")
        L, T, _ = _children(L[big], T[big], ML, MT)
    return grid, stamps


def label_components(free):
    """4-connected labelling of nonzero cells, labels 1.. in raster order."""
    free = np.asarray(free, dtype=np.uint8)
    h, w = free.shape
    labels = np.zeros((h, w), dtype=np.int32)
    flat_free = free.ravel()
    flat = labels.ravel()
    nxt = 0
    for start in np.flatnonzero(flat_free):
        if flat[start]:
            continue
        nxt += 1
        flat[start] = nxt
        queue = deque([start])
        while queue:
            p = queue.popleft()
            r, c = divmod(p, w)
            for q, ok in ((p - w, r > 0), (p + w, r < h - 1), (p - 1, c > 0), (p + 1, c < w - 1)):
                if ok and flat_free[q] and not flat[q]:
                    flat[q] = nxt
                    queue.append(q)
    return labels


def union_find(n, edges):
    """Component label per vertex, numbered by first appearance."""
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv
    out = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for i in range(n):
        out[i] = seen.setdefault(find(i), len(seen))
    return out
