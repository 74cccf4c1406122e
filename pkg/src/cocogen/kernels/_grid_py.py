"""Pure-numpy grid-scan kernels (fallback backend).

Semantics contract shared with the compiled backend:

* F over the grid is ``bg1[i]*g2[j](*g3[k]) + lin1[i] + lin2[j](+ lin3[k])``
  where the innermost axis of the 3-d scan is reduced exactly through a
  precomputed lower envelope of the lines ``q -> q*g3[k] + lin3[k]``.
* The argmin is the first one in lexicographic (i, j, k) order among exact
  float ties, and arithmetic is performed in the same operation order in
  both backends so results agree bitwise.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 128


def argmin_2d(bg1, lin1, g2, lin2):
    m1 = bg1.shape[0]
    best_val = np.inf
    best_i = best_j = 0
    m2 = g2.shape[0]
    for i0 in range(0, m1, _CHUNK):
        i1 = min(i0 + _CHUNK, m1)
        f = bg1[i0:i1, None] * g2[None, :] + lin1[i0:i1, None] + lin2[None, :]
        flat = int(np.argmin(f))
        val = float(f.flat[flat])
        if val < best_val:
            best_val = val
            best_i = i0 + flat // m2
            best_j = flat % m2
    return best_val, best_i, best_j


def argmin_3d(bg1, lin1, g2, lin2, hull_slope, hull_inter, hull_thresh, hull_k):
    m1 = bg1.shape[0]
    m2 = g2.shape[0]
    best_val = np.inf
    best_i = best_j = 0
    best_k = 0
    for i0 in range(0, m1, _CHUNK):
        i1 = min(i0 + _CHUNK, m1)
        q = bg1[i0:i1, None] * g2[None, :]
        base = lin1[i0:i1, None] + lin2[None, :]
        h = np.searchsorted(hull_thresh, q, side="left")
        f = q * hull_slope[h] + hull_inter[h] + base
        flat = int(np.argmin(f))
        val = float(f.flat[flat])
        if val < best_val:
            best_val = val
            best_i = i0 + flat // m2
            best_j = flat % m2
            best_k = int(hull_k[h.flat[flat]])
    return best_val, best_i, best_j, best_k
