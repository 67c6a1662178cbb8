"""Index combinatorics for the lattice Z^n, the cone Z_+^n and the free monoid F_+^n.

Grid points and group points are plain tuples of ints; words are tuples of
1-based letters written left to right as ``i_k ... i_2 i_1``, so the last
letter is the source.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Sequence

GridPoint = tuple[int, ...]
GroupPoint = tuple[int, ...]
Word = tuple[int, ...]


class DimensionError(ValueError):
    """Raised when two multi-indices of different length are combined."""


def _same_dim(x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != len(y):
        raise DimensionError(f"dimension mismatch: {len(x)} vs {len(y)}")


def grid_point(coords: Iterable[int]) -> GridPoint:
    x = tuple(int(c) for c in coords)
    if any(c < 0 for c in x):
        raise ValueError(f"grid point must have nonnegative coordinates, got {x}")
    return x


def zero(n: int) -> GridPoint:
    return (0,) * n


def ones(n: int) -> GridPoint:
    return (1,) * n


def unit(n: int, i: int) -> GridPoint:
    """The generator e_i of Z_+^n, with ``i`` 1-based."""
    if not 1 <= i <= n:
        raise ValueError(f"generator index {i} out of range 1..{n}")
    return tuple(1 if k == i - 1 else 0 for k in range(n))


def add(x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    _same_dim(x, y)
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    _same_dim(x, y)
    return tuple(a - b for a, b in zip(x, y))


def neg(x: Sequence[int]) -> tuple[int, ...]:
    return tuple(-a for a in x)


def leq(x: Sequence[int], y: Sequence[int]) -> bool:
    _same_dim(x, y)
    return all(a <= b for a, b in zip(x, y))


def lattice_bounds(x: Sequence[int], y: Sequence[int]) -> tuple[GroupPoint, GroupPoint]:
    """Coordinatewise join and meet; ``join + meet == x + y``."""
    _same_dim(x, y)
    join = tuple(max(a, b) for a, b in zip(x, y))
    meet = tuple(min(a, b) for a, b in zip(x, y))
    return join, meet


def join(x: Sequence[int], y: Sequence[int]) -> GroupPoint:
    return lattice_bounds(x, y)[0]


def meet(x: Sequence[int], y: Sequence[int]) -> GroupPoint:
    return lattice_bounds(x, y)[1]


def pos_neg_parts(g: Sequence[int]) -> tuple[GridPoint, GridPoint]:
    """Split ``g = g_plus - g_minus`` with disjoint supports."""
    plus = tuple(max(a, 0) for a in g)
    minus = tuple(max(-a, 0) for a in g)
    return plus, minus


def support(x: Sequence[int]) -> frozenset[int]:
    """1-based indices of the nonzero coordinates."""
    return frozenset(i + 1 for i, a in enumerate(x) if a != 0)


def support_perp(x: Sequence[int]) -> tuple[frozenset[int], Callable[[Sequence[int]], bool]]:
    """Return ``supp(x)`` and a membership test for ``x^perp``.

    ``x^perp`` is infinite, so it is only ever queried, never listed.
    """
    supp = support(x)

    def perp(y: Sequence[int]) -> bool:
        _same_dim(x, y)
        return not (support(y) & supp)

    return supp, perp


def norm1(x: Sequence[int]) -> int:
    return sum(abs(a) for a in x)


def word_reverse_source(w: Sequence[int]) -> tuple[Word, int | None]:
    """Reversed word and source letter; the source of ``i_k ... i_1`` is ``i_1``."""
    w = tuple(w)
    return w[::-1], (w[-1] if w else None)


def reverse(w: Sequence[int]) -> Word:
    return tuple(w)[::-1]


def source(w: Sequence[int]) -> int | None:
    return w[-1] if w else None


def _graded_key(x: GridPoint) -> tuple:
    # total degree first, then reverse-lexicographic so (1,0) precedes (0,1)
    return (sum(x), tuple(reversed(x)))


def enumerate_box(n: int, N: int) -> list[GridPoint]:
    """All ``x`` with ``0 <= x <= N*1``, in graded order.

    Within a degree the order is lexicographic on the reversed coordinates,
    which gives ``[(0,0),(1,0),(0,1),(1,1)]`` for ``n=2, N=1``.
    """
    if n < 1 or N < 0:
        raise ValueError("need n >= 1 and N >= 0")
    return sorted(product(range(N + 1), repeat=n), key=_graded_key)


def enumerate_cube(n: int, r: int) -> list[GroupPoint]:
    """All group points with sup-norm at most ``r``, graded by sup-norm then lexicographic."""
    pts = product(range(-r, r + 1), repeat=n)
    return sorted(pts, key=lambda g: (max((abs(a) for a in g), default=0), g))


def enumerate_words(n: int, N: int) -> list[Word]:
    """Words of length at most ``N`` over ``1..n``, shortest first, lexicographic within a length."""
    if n < 1 or N < 0:
        raise ValueError("need n >= 1 and N >= 0")
    out: list[Word] = []
    for k in range(N + 1):
        out.extend(product(range(1, n + 1), repeat=k))
    return out


def reduced(letters: Sequence[int]) -> Word:
    """Free reduction of a signed word (``-i`` is the inverse of ``i``)."""
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def cayley_branch_vertices(n: int, N: int) -> list[Word]:
    """Vertices of the deleted Cayley graph of F_n up to radius ``N``.

    These are the nonempty reduced signed words whose source (rightmost
    letter) is a positive generator, ordered by length and then
    lexicographically. The root is not included.
    """
    letters = [a for i in range(1, n + 1) for a in (i, -i)]
    out: list[Word] = []
    layer: list[Word] = [(i,) for i in range(1, n + 1)]
    for _ in range(N):
        out.extend(sorted(layer))
        nxt = []
        for w in layer:
            for a in letters:
                if a != -w[0]:
                    nxt.append((a,) + w)
        layer = nxt
    return out
