"""Pure-Python persistence kernel.

Same contract and bit-identical output as the compiled kernel in
``_speedups``: dimension-0 pairing by union-find over the sorted edge list,
dimension-1 pairing by column reduction of the triangle boundary matrix over
GF(2).  Columns are held as Python integers (bit ``r`` set means edge rank
``r``), so column addition is a single bignum XOR.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]  # path halving
        x = parent[x]
    return x


def enumerate_complex(dm: np.ndarray, epsilon_max: float):
    """Edges and triangles of the VR 2-skeleton at scale ``epsilon_max``.

    Returns ``(ei, ej, ev, ta, tb, tc, tv)`` with edges sorted by
    (value, i, j) and triangles by (value, a, b, c); triangle values are the
    maxima of their three edge values.
    """
    n = dm.shape[0]
    iu, ju = np.triu_indices(n, 1)
    vals = dm[iu, ju]
    keep = vals <= epsilon_max
    ei, ej, ev = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ej, ei, ev))
    ei = np.ascontiguousarray(ei[order], dtype=np.int32)
    ej = np.ascontiguousarray(ej[order], dtype=np.int32)
    ev = np.ascontiguousarray(ev[order], dtype=np.float64)

    # adjacency as sorted index arrays, for common-neighbour enumeration
    nbr = [[] for _ in range(n)]
    for i, j in zip(ei.tolist(), ej.tolist()):
        nbr[i].append(j)
        nbr[j].append(i)
    nbr = [np.array(sorted(a), dtype=np.int32) for a in nbr]

    ta, tb, tc, tv = [], [], [], []
    for i, j, v in zip(ei.tolist(), ej.tolist(), ev.tolist()):
        common = np.intersect1d(nbr[i], nbr[j], assume_unique=True)
        for k in common[common > j].tolist():
            ta.append(i)
            tb.append(j)
            tc.append(k)
            tv.append(max(v, dm[i, k], dm[j, k]))
    ta = np.array(ta, dtype=np.int32)
    tb = np.array(tb, dtype=np.int32)
    tc = np.array(tc, dtype=np.int32)
    tv = np.array(tv, dtype=np.float64)
    order = np.lexsort((tc, tb, ta, tv))
    return ei, ej, ev, ta[order], tb[order], tc[order], tv[order]


def reduce_vr(n, ei, ej, ev, ta, tb, tc, tv):
    """Persistence pairs of a sorted VR 2-skeleton.

    Inputs must already be in a valid filtration order (edges and triangles
    each sorted by value with deterministic lexicographic tie-breaks, every
    triangle edge present).  Zero-persistence pairs are dropped.

    Returns ``(deaths0, n_inf0, births1, deaths1)``; infinite dim-1 deaths
    are ``np.inf`` (loops unfilled below the truncation scale).
    """
    E = len(ev)
    parent = list(range(n))
    deaths0 = []
    positive = np.zeros(E, dtype=bool)
    merges = 0
    eil, ejl, evl = ei.tolist(), ej.tolist(), ev.tolist()
    for r in range(E):
        a, b = _find(parent, eil[r]), _find(parent, ejl[r])
        if a == b:
            positive[r] = True
        else:
            parent[b] = a
            merges += 1
            if evl[r] > 0.0:  # duplicate points merge at 0 with zero persistence
                deaths0.append(evl[r])
    n_inf0 = n - merges

    # edge (i, j) -> filtration rank, for triangle boundary lookups
    erank = {}
    for r in range(E):
        erank[(eil[r], ejl[r])] = r

    pivot = {}
    births1, deaths1 = [], []
    for a, b, c, v in zip(ta.tolist(), tb.tolist(), tc.tolist(), tv.tolist()):
        col = (1 << erank[(a, b)]) | (1 << erank[(a, c)]) | (1 << erank[(b, c)])
        while col:
            low = col.bit_length() - 1
            other = pivot.get(low)
            if other is None:
                pivot[low] = col
                if evl[low] != v:
                    births1.append(evl[low])
                    deaths1.append(v)
                break
            col ^= other
    for r in range(E):
        if positive[r] and r not in pivot:
            births1.append(evl[r])
            deaths1.append(np.inf)

    deaths0 = np.array(deaths0, dtype=np.float64)
    births1 = np.array(births1, dtype=np.float64)
    deaths1 = np.array(deaths1, dtype=np.float64)
    order = np.lexsort((deaths1, births1))
    return deaths0, n_inf0, births1[order], deaths1[order]


def persistence_from_matrix(dm: np.ndarray, epsilon_max: float):
    """Persistence pairs of the VR 2-skeleton of a distance matrix."""
    dm = np.asarray(dm, dtype=np.float64)
    n = dm.shape[0]
    if n == 0:
        z = np.zeros(0)
        return z, 0, z.copy(), z.copy()
    ei, ej, ev, ta, tb, tc, tv = enumerate_complex(dm, epsilon_max)
    return reduce_vr(n, ei, ej, ev, ta, tb, tc, tv)
