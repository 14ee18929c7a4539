# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled persistence kernel.

Mirrors ``pure.persistence_from_matrix`` bit for bit: union-find over the
sorted edge list for dimension 0, GF(2) column reduction of the triangle
boundary matrix for dimension 1.  The whole computation runs without the
GIL, so ensemble workers can overlap on multicore hosts.
"""

from libc.math cimport INFINITY
from libcpp.vector cimport vector

import numpy as np

BACKEND_NAME = "compiled"


cdef struct Rec:
    double val
    int a
    int b
    int c


ctypedef int (*cmpfunc)(const void*, const void*) noexcept nogil

cdef extern from "stdlib.h" nogil:
    void qsort(void* base, size_t nmemb, size_t size, cmpfunc compar)


cdef int rec_cmp(const void* pa, const void* pb) noexcept nogil:
    cdef const Rec* x = <const Rec*> pa
    cdef const Rec* y = <const Rec*> pb
    if x.val < y.val:
        return -1
    if x.val > y.val:
        return 1
    if x.a != y.a:
        return -1 if x.a < y.a else 1
    if x.b != y.b:
        return -1 if x.b < y.b else 1
    if x.c != y.c:
        return -1 if x.c < y.c else 1
    return 0


cdef int int_cmp(const void* pa, const void* pb) noexcept nogil:
    cdef int x = (<const int*> pa)[0]
    cdef int y = (<const int*> pb)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef int uf_find(int* parent, int x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]  # path halving
        x = parent[x]
    return x


cdef void symdiff(const vector[int]& a, const vector[int]& b, vector[int]& out) noexcept nogil:
    cdef size_t i = 0, j = 0
    out.clear()
    while i < a.size() and j < b.size():
        if a[i] < b[j]:
            out.push_back(a[i])
            i += 1
        elif b[j] < a[i]:
            out.push_back(b[j])
            j += 1
        else:
            i += 1
            j += 1
    while i < a.size():
        out.push_back(a[i])
        i += 1
    while j < b.size():
        out.push_back(b[j])
        j += 1


cdef int _run(const double[:, ::1] D, int n, double eps, vector[double]& deaths0,
              vector[double]& births1, vector[double]& deaths1) noexcept nogil:
    cdef vector[Rec] edges
    cdef vector[Rec] tris
    cdef Rec rec
    cdef int i, j, k, e, t
    for i in range(n):
        for j in range(i + 1, n):
            if D[i, j] <= eps:
                rec.val = D[i, j]
                rec.a = i
                rec.b = j
                rec.c = -1
                edges.push_back(rec)
    cdef int E = <int> edges.size()
    if E > 1:
        qsort(edges.data(), E, sizeof(Rec), rec_cmp)

    cdef vector[int] parent = vector[int](n)
    for i in range(n):
        parent[i] = i
    cdef vector[char] positive = vector[char](E)
    cdef int merges = 0, ra, rb
    for e in range(E):
        ra = uf_find(parent.data(), edges[e].a)
        rb = uf_find(parent.data(), edges[e].b)
        if ra == rb:
            positive[e] = 1
        else:
            positive[e] = 0
            parent[rb] = ra
            merges += 1
            if edges[e].val > 0.0:  # duplicates merge at 0: zero persistence
                deaths0.push_back(edges[e].val)

    cdef vector[int] erank = vector[int](n * n, -1)
    for e in range(E):
        erank[edges[e].a * n + edges[e].b] = e

    cdef vector[vector[int]] nbr = vector[vector[int]](n)
    for e in range(E):
        nbr[edges[e].a].push_back(edges[e].b)
        nbr[edges[e].b].push_back(edges[e].a)
    for i in range(n):
        if nbr[i].size() > 1:
            qsort(nbr[i].data(), nbr[i].size(), sizeof(int), int_cmp)

    cdef size_t p, q
    cdef double v
    for e in range(E):
        i = edges[e].a
        j = edges[e].b
        p = 0
        q = 0
        while p < nbr[i].size() and q < nbr[j].size():
            if nbr[i][p] < nbr[j][q]:
                p += 1
            elif nbr[j][q] < nbr[i][p]:
                q += 1
            else:
                k = nbr[i][p]
                if k > j:  # each triangle once, via its (a, b) edge
                    v = edges[e].val
                    if D[i, k] > v:
                        v = D[i, k]
                    if D[j, k] > v:
                        v = D[j, k]
                    rec.val = v
                    rec.a = i
                    rec.b = j
                    rec.c = k
                    tris.push_back(rec)
                p += 1
                q += 1
    cdef int T = <int> tris.size()
    if T > 1:
        qsort(tris.data(), T, sizeof(Rec), rec_cmp)

    cdef vector[int] pivot = vector[int](E, -1)
    cdef vector[vector[int]] cols
    cdef vector[int] cur, tmp
    cdef int low, owner, e1, e2, e3, swp
    for t in range(T):
        e1 = erank[tris[t].a * n + tris[t].b]
        e2 = erank[tris[t].a * n + tris[t].c]
        e3 = erank[tris[t].b * n + tris[t].c]
        if e1 > e2:
            swp = e1; e1 = e2; e2 = swp
        if e2 > e3:
            swp = e2; e2 = e3; e3 = swp
        if e1 > e2:
            swp = e1; e1 = e2; e2 = swp
        cur.clear()
        cur.push_back(e1)
        cur.push_back(e2)
        cur.push_back(e3)
        while cur.size() > 0:
            low = cur.back()
            owner = pivot[low]
            if owner == -1:
                pivot[low] = <int> cols.size()
                cols.push_back(cur)
                if edges[low].val != tris[t].val:
                    births1.push_back(edges[low].val)
                    deaths1.push_back(tris[t].val)
                break
            symdiff(cur, cols[owner], tmp)
            cur.swap(tmp)

    for e in range(E):
        if positive[e] and pivot[e] == -1:
            births1.push_back(edges[e].val)
            deaths1.push_back(INFINITY)
    return n - merges


def persistence_from_matrix(dm, double epsilon_max):
    """Persistence pairs of the VR 2-skeleton of a distance matrix.

    Returns ``(deaths0, n_inf0, births1, deaths1)`` exactly as the pure
    backend does; zero-persistence pairs are dropped.
    """
    dm = np.ascontiguousarray(dm, dtype=np.float64)
    cdef const double[:, ::1] D = dm
    cdef int n = D.shape[0]
    if n == 0:
        z = np.zeros(0)
        return z, 0, z.copy(), z.copy()
    cdef vector[double] deaths0, births1, deaths1
    cdef int n_inf0
    with nogil:
        n_inf0 = _run(D, n, epsilon_max, deaths0, births1, deaths1)
    d0 = np.asarray([deaths0[i] for i in range(deaths0.size())], dtype=np.float64)
    b1 = np.asarray([births1[i] for i in range(births1.size())], dtype=np.float64)
    d1 = np.asarray([deaths1[i] for i in range(deaths1.size())], dtype=np.float64)
    order = np.lexsort((d1, b1))
    return d0, n_inf0, b1[order], d1[order]
