"""Independent reference computations used to cross-check the library."""

from __future__ import annotations

import cmath
from itertools import combinations, product

import numpy as np


def eig_2x2_hermitian(a: float, b: complex, c: float) -> tuple[float, float]:
    """Eigenvalues of [[a, b], [conj(b), c]] from the characteristic polynomial."""
    tr, det = a + c, a * c - abs(b) ** 2
    disc = cmath.sqrt(tr * tr - 4 * det).real
    return (tr - disc) / 2, (tr + disc) / 2


def functions_01(size: int):
    return list(product((0, 1), repeat=size))


def _compose(f, m):
    return tuple(f[m[x]] for x in range(len(m)))


def monoid_maps(maps, size):
    """All distinct compositions of ``maps`` (identity included), by breadth-first closure."""
    ident = tuple(range(size))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for m in maps:
                h = tuple(m[g[x]] for x in range(size))
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def ideal_vanishing_oracle(maps, S) -> frozenset:
    """Vanishing set of I_x from the function-level definition.

    ``K`` is the set of 0/1 functions killed by every ``alpha_i``, i in S; the
    perp ideal contains ``g`` iff ``g h = 0`` for all ``h`` in K. The point
    ``p`` lies outside the vanishing set iff ``delta_p o phi_y`` is in the perp
    ideal for every ``y`` supported off S.
    """
    size = len(maps[0])
    S = set(S)
    if not S:
        return frozenset(range(size))
    K = [h for h in functions_01(size) if all(not any(_compose(h, maps[i - 1])) for i in S)]
    others = [maps[j] for j in range(len(maps)) if (j + 1) not in S]
    ys = monoid_maps(others, size)

    def in_perp(g):
        return all(all(g[x] * h[x] == 0 for x in range(size)) for h in K)

    out = set()
    for p in range(size):
        delta = tuple(1 if x == p else 0 for x in range(size))
        if not all(in_perp(_compose(delta, y)) for y in ys):
            out.add(p)
    return frozenset(out)


def is_minimal_oracle(maps) -> bool:
    """No nonempty proper subset is mapped into itself by every map."""
    size = len(maps[0])
    for k in range(1, size):
        for Z in combinations(range(size), k):
            Zs = set(Z)
            if all(m[z] in Zs for m in maps for z in Z):
                return False
    return True


def kms_matrix(t: float, m: int) -> np.ndarray:
    """Gram matrix [t^{|i-j|}] of a scalar contraction t on the window {0..m-1}."""
    i = np.arange(m)
    return t ** np.abs(i[:, None] - i[None, :])


def truncated_shift(d: int) -> np.ndarray:
    """e_1 -> e_2 -> ... -> e_d -> 0."""
    return np.diag(np.ones(d - 1), -1).astype(complex)
