# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``necklace._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, hypot, sqrt
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()


cdef inline double _norm(double a, double b, double c, double d) nogil:
    # conformal plus anticonformal parts: no cancellation for similitudes
    return 0.5 * (hypot(a + d, c - b) + hypot(a - d, c + b))


def refine_point(L, T, ML, MT, c0, double r0, double px, double py, double slack):
    cdef double[:, ::1] Lv = np.ascontiguousarray(L, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] Tv = np.ascontiguousarray(T, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] M = np.ascontiguousarray(ML, dtype=np.float64)
    cdef double[:, ::1] Mt = np.ascontiguousarray(MT, dtype=np.float64)
    cdef double cx = c0[0], cy = c0[1]
    cdef Py_ssize_t N = Lv.shape[0], n = M.shape[0], i, k, m = 0
    cdef cnp.ndarray[cnp.int64_t] parent = np.empty(N * n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t] digit = np.empty(N * n, dtype=np.int64)
    cdef double[:, ::1] OL = np.empty((N * n, 4))
    cdef double[:, ::1] OT = np.empty((N * n, 2))
    cdef double a, b, c, d, na, nb, nc, nd, tx, ty, ex, ey, dx, dy, r
    for i in range(N):
        a = Lv[i, 0]; b = Lv[i, 1]; c = Lv[i, 2]; d = Lv[i, 3]
        for k in range(n):
            na = a * M[k, 0] + b * M[k, 2]
            nb = a * M[k, 1] + b * M[k, 3]
            nc = c * M[k, 0] + d * M[k, 2]
            nd = c * M[k, 1] + d * M[k, 3]
            tx = a * Mt[k, 0] + b * Mt[k, 1] + Tv[i, 0]
            ty = c * Mt[k, 0] + d * Mt[k, 1] + Tv[i, 1]
            ex = na * cx + nb * cy + tx
            ey = nc * cx + nd * cy + ty
            r = r0 * _norm(na, nb, nc, nd)
            dx = ex - px
            dy = ey - py
            if sqrt(dx * dx + dy * dy) <= r + slack:
                parent[m] = i
                digit[m] = k + 1
                OL[m, 0] = na; OL[m, 1] = nb; OL[m, 2] = nc; OL[m, 3] = nd
                OT[m, 0] = tx; OT[m, 1] = ty
                m += 1
    return parent[:m], digit[:m], np.asarray(OL[:m]), np.asarray(OT[:m])


def refine_pairs(LA, TA, LB, TB, split_a, ML, MT, c0, double r0, double slack):
    cdef double[:, ::1] la = np.ascontiguousarray(LA, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] ta = np.ascontiguousarray(TA, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] lb = np.ascontiguousarray(LB, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] tb = np.ascontiguousarray(TB, dtype=np.float64).reshape(-1, 2)
    cdef cnp.uint8_t[::1] sa = np.ascontiguousarray(split_a, dtype=np.uint8)
    cdef double[:, ::1] M = np.ascontiguousarray(ML, dtype=np.float64)
    cdef double[:, ::1] Mt = np.ascontiguousarray(MT, dtype=np.float64)
    cdef double cx = c0[0], cy = c0[1]
    cdef Py_ssize_t N = la.shape[0], n = M.shape[0], i, k, m = 0
    cdef cnp.ndarray[cnp.int64_t] parent = np.empty(N * n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t] digit = np.empty(N * n, dtype=np.int64)
    cdef double[:, ::1] OLA = np.empty((N * n, 4))
    cdef double[:, ::1] OTA = np.empty((N * n, 2))
    cdef double[:, ::1] OLB = np.empty((N * n, 4))
    cdef double[:, ::1] OTB = np.empty((N * n, 2))
    cdef double a, b, c, d, t0, t1, na, nb, nc, nd, tx, ty
    cdef double oa, ob, oc, od, ox, oy, ex, ey, fx, fy, dx, dy, gap
    cdef bint side
    for i in range(N):
        side = sa[i] != 0
        if side:
            a = la[i, 0]; b = la[i, 1]; c = la[i, 2]; d = la[i, 3]; t0 = ta[i, 0]; t1 = ta[i, 1]
            oa = lb[i, 0]; ob = lb[i, 1]; oc = lb[i, 2]; od = lb[i, 3]; ox = tb[i, 0]; oy = tb[i, 1]
        else:
            a = lb[i, 0]; b = lb[i, 1]; c = lb[i, 2]; d = lb[i, 3]; t0 = tb[i, 0]; t1 = tb[i, 1]
            oa = la[i, 0]; ob = la[i, 1]; oc = la[i, 2]; od = la[i, 3]; ox = ta[i, 0]; oy = ta[i, 1]
        fx = oa * cx + ob * cy + ox
        fy = oc * cx + od * cy + oy
        for k in range(n):
            na = a * M[k, 0] + b * M[k, 2]
            nb = a * M[k, 1] + b * M[k, 3]
            nc = c * M[k, 0] + d * M[k, 2]
            nd = c * M[k, 1] + d * M[k, 3]
            tx = a * Mt[k, 0] + b * Mt[k, 1] + t0
            ty = c * Mt[k, 0] + d * Mt[k, 1] + t1
            ex = na * cx + nb * cy + tx
            ey = nc * cx + nd * cy + ty
            dx = ex - fx
            dy = ey - fy
            gap = sqrt(dx * dx + dy * dy) - r0 * _norm(na, nb, nc, nd) - r0 * _norm(oa, ob, oc, od)
            if gap <= slack:
                parent[m] = i
                digit[m] = k + 1
                if side:
                    OLA[m, 0] = na; OLA[m, 1] = nb; OLA[m, 2] = nc; OLA[m, 3] = nd
                    OTA[m, 0] = tx; OTA[m, 1] = ty
                    OLB[m, 0] = oa; OLB[m, 1] = ob; OLB[m, 2] = oc; OLB[m, 3] = od
                    OTB[m, 0] = ox; OTB[m, 1] = oy
                else:
                    OLB[m, 0] = na; OLB[m, 1] = nb; OLB[m, 2] = nc; OLB[m, 3] = nd
                    OTB[m, 0] = tx; OTB[m, 1] = ty
                    OLA[m, 0] = oa; OLA[m, 1] = ob; OLA[m, 2] = oc; OLA[m, 3] = od
                    OTA[m, 0] = ox; OTA[m, 1] = oy
                m += 1
    return (parent[:m], digit[:m], np.asarray(OLA[:m]), np.asarray(OTA[:m]),
            np.asarray(OLB[:m]), np.asarray(OTB[:m]))


def rasterize(ML, MT, c0, double r0, double x0, double y0, double pixel,
              Py_ssize_t width, Py_ssize_t height, Py_ssize_t budget):
    cdef double[:, ::1] M = np.ascontiguousarray(ML, dtype=np.float64)
    cdef double[:, ::1] Mt = np.ascontiguousarray(MT, dtype=np.float64)
    cdef double cx = c0[0], cy = c0[1]
    cdef Py_ssize_t n = M.shape[0]
    cnp_grid = np.zeros((height, width), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] grid = cnp_grid
    cdef double half = 0.5 * pixel
    cdef double x1 = x0 + width * pixel, y1 = y0 + height * pixel
    cdef Py_ssize_t cap = 1024, top = 0, k, i0, i1, j0, j1, ii, jj
    cdef long long stamps = 0
    cdef double *stack = <double *> malloc(cap * 6 * sizeof(double))
    cdef double a, b, c, d, tx, ty, ex, ey, r
    if stack == NULL:
        raise MemoryError()
    stack[0] = 1.0; stack[1] = 0.0; stack[2] = 0.0; stack[3] = 1.0; stack[4] = 0.0; stack[5] = 0.0
    top = 1
    try:
        while top > 0:
            top -= 1
            a = stack[6 * top]; b = stack[6 * top + 1]; c = stack[6 * top + 2]
            d = stack[6 * top + 3]; tx = stack[6 * top + 4]; ty = stack[6 * top + 5]
            ex = a * cx + b * cy + tx
            ey = c * cx + d * cy + ty
            r = r0 * _norm(a, b, c, d)
            if ex + r < x0 or ex - r > x1 or ey + r < y0 or ey - r > y1:
                continue
            if r < half:
                i0 = <Py_ssize_t> floor((ex - r - x0) / pixel)
                i1 = <Py_ssize_t> floor((ex + r - x0) / pixel)
                j0 = <Py_ssize_t> floor((ey - r - y0) / pixel)
                j1 = <Py_ssize_t> floor((ey + r - y0) / pixel)
                i0 = 0 if i0 < 0 else (width - 1 if i0 > width - 1 else i0)
                i1 = 0 if i1 < 0 else (width - 1 if i1 > width - 1 else i1)
                j0 = 0 if j0 < 0 else (height - 1 if j0 > height - 1 else j0)
                j1 = 0 if j1 < 0 else (height - 1 if j1 > height - 1 else j1)
                for jj in range(j0, j1 + 1):
                    for ii in range(i0, i1 + 1):
                        grid[jj, ii] = 1
                stamps += 1
                continue
            if top + n > budget:
                raise MemoryError(f"rasterization stack exceeds budget {budget}")
            if top + n > cap:
                cap = 2 * (top + n)
                stack = <double *> realloc(stack, cap * 6 * sizeof(double))
                if stack == NULL:
                    raise MemoryError()
            # push in reverse so digit 1 is processed first
            for k in range(n - 1, -1, -1):
                stack[6 * top] = a * M[k, 0] + b * M[k, 2]
                stack[6 * top + 1] = a * M[k, 1] + b * M[k, 3]
                stack[6 * top + 2] = c * M[k, 0] + d * M[k, 2]
                stack[6 * top + 3] = c * M[k, 1] + d * M[k, 3]
                stack[6 * top + 4] = a * Mt[k, 0] + b * Mt[k, 1] + tx
                stack[6 * top + 5] = c * Mt[k, 0] + d * Mt[k, 1] + ty
                top += 1
    finally:
        free(stack)
    return cnp_grid, stamps


def label_components(free):
    cdef cnp.uint8_t[:, ::1] f = np.ascontiguousarray(free, dtype=np.uint8)
    cdef Py_ssize_t h = f.shape[0], w = f.shape[1], total = h * w
    out = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] lab = out
    cdef cnp.ndarray[cnp.int64_t] queue = np.empty(total, dtype=np.int64)
    cdef Py_ssize_t s, p, head, tail, r, c
    cdef int nxt = 0
    for s in range(total):
        r = s // w
        c = s - r * w
        if f[r, c] == 0 or lab[r, c] != 0:
            continue
        nxt += 1
        lab[r, c] = nxt
        head = 0
        tail = 0
        queue[tail] = s
        tail += 1
        while head < tail:
            p = queue[head]
            head += 1
            r = p // w
            c = p - r * w
            if r > 0 and f[r - 1, c] and lab[r - 1, c] == 0:
                lab[r - 1, c] = nxt
                queue[tail] = p - w
                tail += 1
            if r < h - 1 and f[r + 1, c] and lab[r + 1, c] == 0:
                lab[r + 1, c] = nxt
                queue[tail] = p + w
                tail += 1
            if c > 0 and f[r, c - 1] and lab[r, c - 1] == 0:
                lab[r, c - 1] = nxt
                queue[tail] = p - 1
                tail += 1
            if c < w - 1 and f[r, c + 1] and lab[r, c + 1] == 0:
                lab[r, c + 1] = nxt
                queue[tail] = p + 1
                tail += 1
    return out


cdef Py_ssize_t _find(cnp.int64_t[::1] parent, Py_ssize_t x) nogil:
    cdef Py_ssize_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def union_find(Py_ssize_t n, edges):
    cdef cnp.int64_t[:, ::1] e = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    pa = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = pa
    cdef Py_ssize_t i, ru, rv, count = 0
    for i in range(e.shape[0]):
        ru = _find(parent, e[i, 0])
        rv = _find(parent, e[i, 1])
        if ru != rv:
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    remap = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] rm = remap
    for i in range(n):
        ru = _find(parent, i)
        if rm[ru] < 0:
            rm[ru] = count
            count += 1
        o[i] = rm[ru]
    return out
