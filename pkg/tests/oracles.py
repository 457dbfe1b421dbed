"""Independent reference computations for the tests.

Nothing here goes through the package's automaton, descent or kernels: maps
are read as raw 2x2 matrices and everything else is recomputed with numpy.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def raw_maps(system):
    """(n, 2, 2) linear parts and (n, 2) translations as plain arrays."""
    L = np.array([[[m.a, m.b], [m.c, m.d]] for m in system.maps])
    T = np.array([[m.tx, m.ty] for m in system.maps])
    return L, T


def enclosure(L, T):
    """Invariant ball around the fixed point of the first map."""
    c0 = np.linalg.solve(np.eye(2) - L[0], T[0])
    norms = np.linalg.norm(L, ord=2, axis=(1, 2))
    moves = np.linalg.norm(np.einsum("kab,b->ka", L, c0) + T - c0, axis=1)
    return c0, float(moves.max() / (1.0 - norms.max()))


def all_words(n: int, m: int) -> list:
    return list(itertools.product(range(1, n + 1), repeat=m))


def level_maps(L, T, m: int):
    """Linear parts and translations of f_w for all words of length m, in
    the order of ``all_words``."""
    A = np.eye(2)[None]
    t = np.zeros((1, 2))
    for _ in range(m):
        t = (np.einsum("kab,ib->kia", A, T) + t[:, None, :]).reshape(-1, 2)
        A = np.einsum("kab,ibc->kiac", A, L).reshape(-1, 2, 2)
    return A, t


def word_maps(L, T, words):
    """Stacked linear parts and translations of f_w for each word."""
    A = np.repeat(np.eye(2)[None], len(words), axis=0)
    t = np.zeros((len(words), 2))
    for i, w in enumerate(words):
        for d in w:
            t[i] = A[i] @ T[d - 1] + t[i]
            A[i] = A[i] @ L[d - 1]
    return A, t


def member_words(system, point, m: int, rel_radius: float = 1e-9, keep: int = 256) -> set:
    """Brute force: every word of length m whose copy contains ``point``.

    For each of the n^m words the copy is subdivided while its sub-copy balls
    still contain the point; a word counts as a member when some sub-copy of
    radius below ``rel_radius * r0`` survives.  At most ``keep`` survivors per
    word (nearest centres first) are carried down, since one chain suffices.
    """
    L, T = raw_maps(system)
    n = len(L)
    c0, r0 = enclosure(L, T)
    p = np.asarray(point, dtype=float)
    words = all_words(n, m)
    A, t = level_maps(L, T, m)
    owner = np.arange(len(words))
    limit = rel_radius * r0
    while True:
        centers = np.einsum("kab,b->ka", A, c0) + t
        radii = r0 * np.linalg.norm(A, ord=2, axis=(1, 2))
        dist = np.linalg.norm(centers - p, axis=1)
        alive = dist <= radii * (1 + 1e-12) + 1e-15
        A, t, owner, radii, dist = A[alive], t[alive], owner[alive], radii[alive], dist[alive]
        if len(owner) == 0:
            return set()
        if radii.max() <= limit:
            return {words[i] for i in np.unique(owner)}
        order = np.lexsort((dist, owner))
        A, t, owner = A[order], t[order], owner[order]
        first = np.r_[True, owner[1:] != owner[:-1]]
        rank = np.arange(len(owner)) - np.maximum.accumulate(np.where(first, np.arange(len(owner)), 0))
        sel = rank < keep
        A, t, owner = A[sel], t[sel], owner[sel]
        # children f_w o f_i
        t = (np.einsum("kab,ib->kia", A, T) + t[:, None, :]).reshape(-1, 2)
        A = np.einsum("kab,ibc->kiac", A, L).reshape(-1, 2, 2)
        owner = np.repeat(owner, n)


def brute_counts(system, point, M: int, **kw) -> list:
    return [len(member_words(system, point, m, **kw)) for m in range(1, M + 1)]


# --------------------------------------------------------------------------
# closed-form values

SQ3 = math.sqrt(3.0)


def gasket_vertices():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQ3 / 2]])


def gasket_nodes():
    """Midpoints of the triangle edges: z_k is shared by F_k and F_{k+1}."""
    v = gasket_vertices()
    return [(v[0] + v[1]) / 2, (v[1] + v[2]) / 2, (v[2] + v[0]) / 2]


def vertex_contact_components(system, polygon, words):
    """Components of the union of f_w(polygon) for the given words, where two
    copies touch iff a vertex of one coincides with a vertex of the other.

    Valid when every vertex of the polygon lies in F, F lies in the polygon,
    and the copies can only meet at images of those vertices.
    """
    L, T = raw_maps(system)
    A, t = word_maps(L, T, words)
    verts = np.einsum("kab,vb->kva", A, polygon) + t[:, None, :]
    parent = list(range(len(words)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    keys = {}
    for i in range(len(words)):
        for v in verts[i]:
            key = (round(v[0] * 1e9), round(v[1] * 1e9))
            if key in keys:
                a, b = find(keys[key]), find(i)
                if a != b:
                    parent[a] = b
            else:
                keys[key] = i
    return len({find(i) for i in range(len(words))})


def hausdorff(P: np.ndarray, Q: np.ndarray, samples: int = 8) -> float:
    """Hausdorff distance between polylines, sampling each segment."""
    def dense(X):
        if len(X) == 1:
            return X
        s = np.linspace(0.0, 1.0, samples, endpoint=False)
        pts = (X[:-1, None, :] * (1 - s)[None, :, None] + X[1:, None, :] * s[None, :, None])
        return np.vstack([pts.reshape(-1, 2), X[-1:]])

    from scipy.spatial import cKDTree
    dp, dq = dense(P), dense(Q)
    return max(cKDTree(dq).query(dp)[0].max(), cKDTree(dp).query(dq)[0].max())


def necklace_contact_components(system, nodes, words):
    """Components of the level-2 copies in ``words`` under the necklace
    contact rule: F_ui and F_uj touch iff i, j are cyclic neighbours, and
    F_ui, F_vj with u != v touch iff both contain the node shared by F_u
    and F_v.  ``nodes`` are the main node coordinates; membership is decided
    by ``member_words``."""
    n = len(system.maps)
    holders = [member_words(system, z, 2) for z in nodes]
    index = {w: i for i, w in enumerate(words)}
    parent = list(range(len(words)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def join(a, b):
        if a in index and b in index:
            parent[find(index[a])] = find(index[b])

    for u in range(1, n + 1):
        for i in range(1, n + 1):
            join((u, i), (u, i % n + 1))
        v = u % n + 1
        shared = holders[u - 1]
        for a in shared:
            for b in shared:
                if a[0] == u and b[0] == v:
                    join(a, b)
    return len({find(i) for i in range(len(words))})
