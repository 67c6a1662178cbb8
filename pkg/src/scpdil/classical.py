"""Classical systems: a finite set X with self-maps, and their ideal combinatorics.

Functions on X are identified with C(X). An ideal of C(X) is stored by its
vanishing set ``Z`` (the ideal is ``{f : f|_Z = 0}``), so ideal arithmetic is
set arithmetic:

* ``ker alpha_i`` vanishes on ``Im phi_i``;
* the annihilator of ``I_Z`` is ``I_{X \\ Z}``;
* ``alpha_y^{-1}(I_Z) = I_{phi_y(Z)}``;
* intersections of ideals are unions of vanishing sets.

Points are handled internally by index ``0..|X|-1``; labels are only used for
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from . import lattice as lw

Map = tuple[int, ...]


class SystemError_(ValueError):
    """Invalid classical system description."""


class BudgetError(ValueError):
    """A grid point or word falls outside the truncation it is evaluated on."""


class PreconditionError(ValueError):
    pass


def compose(f: Map, g: Map) -> Map:
    """``f o g``."""
    return tuple(f[x] for x in g)


def identity_map(size: int) -> Map:
    return tuple(range(size))


@dataclass(frozen=True)
class ClassicalSystem:
    points: tuple
    maps: tuple[Map, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        maps = tuple(tuple(int(v) for v in m) for m in self.maps)
        if len(set(pts)) != len(pts):
            raise SystemError_("point labels must be distinct")
        if not maps:
            raise SystemError_("at least one map is required")
        size = len(pts)
        for i, m in enumerate(maps):
            if len(m) != size:
                raise SystemError_(f"map {i} has length {len(m)}, expected {size}")
            for pos, v in enumerate(m):
                if not 0 <= v < size:
                    raise SystemError_(f"map {i} position {pos}: index {v} out of range 0..{size - 1}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "maps", maps)

    @classmethod
    def from_maps(cls, maps: Sequence[Sequence[int]], points: Sequence | None = None):
        size = len(maps[0]) if maps else 0
        return cls(tuple(points) if points is not None else tuple(range(size)), tuple(maps))

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.maps)

    def phi(self, i: int) -> Map:
        """The i-th map, 1-based."""
        return self.maps[i - 1]

    def grid_map(self, x: Sequence[int]) -> Map:
        """``phi_x = phi_1^{x_1} o ... o phi_n^{x_n}`` (meaningful when the maps commute)."""
        if len(x) != self.n:
            raise lw.DimensionError(f"grid point of dimension {len(x)} for n = {self.n}")
        out = identity_map(self.size)
        for i, k in enumerate(x, start=1):
            for _ in range(k):
                out = compose(self.phi(i), out)
        return out

    def word_map(self, w: Sequence[int]) -> Map:
        """``phi_w = phi_{i_k} o ... o phi_{i_1}`` for ``w = i_k ... i_1``; letter ``-i`` uses the inverse."""
        out = identity_map(self.size)
        for a in reversed(tuple(w)):
            m = self.phi(a) if a > 0 else invert(self.phi(-a))
            out = compose(m, out)
        return out

    def is_commuting(self) -> bool:
        return all(
            compose(f, g) == compose(g, f) for f, g in combinations(self.maps, 2)
        )

    def is_bijective(self) -> bool:
        return all(len(set(m)) == self.size for m in self.maps)

    def inverse(self) -> "ClassicalSystem":
        return ClassicalSystem(self.points, tuple(invert(m) for m in self.maps))

    def labels(self, subset: Iterable[int]) -> list:
        return [self.points[k] for k in sorted(subset)]

    def to_json(self) -> dict:
        return {"points": list(self.points), "maps": [list(m) for m in self.maps]}

    @classmethod
    def from_json(cls, data: Mapping) -> "ClassicalSystem":
        if "maps" not in data:
            raise SystemError_("classical system: missing field 'maps'")
        maps = data["maps"]
        if not isinstance(maps, list) or not all(isinstance(m, list) for m in maps):
            raise SystemError_("classical system: field 'maps' must be a list of index arrays")
        points = data.get("points")
        if points is None:
            points = list(range(len(maps[0]) if maps else 0))
        if not isinstance(points, list):
            raise SystemError_("classical system: field 'points' must be a list")
        return cls(tuple(points), tuple(tuple(m) for m in maps))


def invert(m: Map) -> Map:
    if len(set(m)) != len(m):
        raise PreconditionError("map is not bijective")
    out = [0] * len(m)
    for x, y in enumerate(m):
        out[y] = x
    return tuple(out)


def image(m: Map, Z: Iterable[int]) -> frozenset[int]:
    return frozenset(m[z] for z in Z)


# -- ideal dictionary -------------------------------------------------------


def kernel_of(sys: ClassicalSystem, i: int) -> frozenset[int]:
    """Vanishing set of ``ker alpha_i``."""
    return frozenset(sys.phi(i))


def perp(sys: ClassicalSystem, Z: Iterable[int]) -> frozenset[int]:
    """Vanishing set of the annihilator ideal."""
    return frozenset(range(sys.size)) - frozenset(Z)


def pullback(sys: ClassicalSystem, Z: Iterable[int], y: Sequence[int]) -> frozenset[int]:
    """Vanishing set of ``alpha_y^{-1}(I_Z)``, namely ``phi_y(Z)``."""
    return image(sys.grid_map(y), Z)


def intersect_ideals(*Zs: Iterable[int]) -> frozenset[int]:
    out: frozenset[int] = frozenset()
    for Z in Zs:
        out |= frozenset(Z)
    return out


def closure_under(maps: Sequence[Map], Z: Iterable[int]) -> frozenset[int]:
    """Smallest superset of ``Z`` mapped into itself by every map."""
    W = set(Z)
    frontier = list(W)
    while frontier:
        x = frontier.pop()
        for m in maps:
            y = m[x]
            if y not in W:
                W.add(y)
                frontier.append(y)
    return frozenset(W)


def ideal_Ix(sys: ClassicalSystem, S: Iterable[int]) -> frozenset[int]:
    """Vanishing set of ``I_x`` for any ``x`` with ``supp(x) = S`` (1-based indices).

    ``I_x`` is the intersection over ``y`` in ``x^perp`` of
    ``alpha_y^{-1}((cap_{i in S} ker alpha_i)^perp)``; its vanishing set is the
    orbit of ``X \\ U_{i in S} Im phi_i`` under the maps ``phi_j``, ``j`` not in ``S``.
    """
    S = frozenset(S)
    if not S <= frozenset(range(1, sys.n + 1)):
        raise ValueError(f"support {sorted(S)} not within 1..{sys.n}")
    if not S:
        return frozenset(range(sys.size))
    Z = perp(sys, intersect_ideals(*(kernel_of(sys, i) for i in S)))
    others = [sys.phi(j) for j in range(1, sys.n + 1) if j not in S]
    return closure_under(others, Z)


def all_supports(n: int) -> list[frozenset[int]]:
    return [frozenset(c) for k in range(n + 1) for c in combinations(range(1, n + 1), k)]


# -- adding tail --------------------------------------------------------------


@dataclass
class AddingTailSystem:
    """Truncation of the injective dilation ``B = sum_x B_x`` with ``B_x = C(W_{supp x})``.

    Elements of ``B`` are dicts mapping a grid point to a tuple of values indexed
    by the sorted carrier ``W_{supp x}``.
    """

    system: ClassicalSystem
    depth: int
    profile: dict[frozenset[int], frozenset[int]]
    positions: list[lw.GridPoint] = field(default_factory=list)

    def carrier(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(sorted(self.profile[lw.support(x)]))

    def inside(self, x: Sequence[int]) -> bool:
        return all(0 <= c <= self.depth for c in x)

    def q(self, x: Sequence[int], f: Sequence) -> tuple:
        """Quotient map ``A -> B_x``: restriction to the carrier."""
        return tuple(f[p] for p in self.carrier(x))

    def component_map(self, i: int, x: Sequence[int]):
        """The component pieces of ``beta_i`` on ``B_x``.

        Returns a list of ``(target position, point map)`` pairs: the value of
        the image at carrier point ``p`` of the target is the value of the
        source at ``point_map[p]``.
        """
        x = tuple(x)
        e = lw.unit(self.system.n, i)
        src = self.carrier(x)
        pieces = []
        if i in lw.support(x):
            pieces.append((lw.add(x, e), {p: p for p in src}))
        else:
            phi = self.system.phi(i)
            pieces.append((x, {p: phi[p] for p in src}))
            xi = lw.add(x, e)
            pieces.append((xi, {p: p for p in self.carrier(xi)}))
        return pieces

    def beta(self, i: int, b: Mapping) -> dict:
        """Apply ``beta_i``; components pushed past the truncation are dropped."""
        out: dict = {}
        for x, vals in b.items():
            src = self.carrier(x)
            pos = {p: k for k, p in enumerate(src)}
            for target, pmap in self.component_map(i, x):
                if not self.inside(target):
                    continue
                tcar = self.carrier(target)
                img = tuple(vals[pos[pmap[p]]] for p in tcar)
                if target in out:
                    out[target] = tuple(a + c for a, c in zip(out[target], img))
                else:
                    out[target] = img
        return out

    def beta_x(self, x: Sequence[int], b: Mapping) -> dict:
        for i, k in enumerate(x, start=1):
            for _ in range(k):
                b = self.beta(i, b)
        return b

    def embed(self, f: Sequence) -> dict:
        """``a (x) e_0``."""
        return {lw.zero(self.system.n): tuple(f)}


def adding_tail(sys: ClassicalSystem, N: int) -> AddingTailSystem:
    if N < 1:
        raise ValueError("truncation depth must be at least 1")
    profile = {S: ideal_Ix(sys, S) for S in all_supports(sys.n)}
    return AddingTailSystem(sys, N, profile, lw.enumerate_box(sys.n, N))


def normalize(b: Mapping) -> dict:
    """Drop zero components so two elements compare equal iff they are equal."""
    return {x: v for x, v in b.items() if any(c != 0 for c in v)}


def verify_on0(sys: ClassicalSystem, tail: AddingTailSystem, a: Sequence, x: Sequence[int]) -> int:
    """Compare ``beta_x(a (x) e_0)`` with ``sum_{w+z=x} q_w alpha_z(a) (x) e_w``.

    Arithmetic is exact (ints or Fractions); the return value is the largest
    absolute entry of the difference, so a correct identity gives exactly 0.
    """
    x = tuple(x)
    if len(x) != sys.n:
        raise lw.DimensionError("grid point dimension does not match system")
    if any(c > tail.depth - 1 for c in x):
        raise BudgetError(f"{x} exceeds the verified range (N-1)*1 for depth {tail.depth}")
    a = tuple(Fraction(v) if isinstance(v, float) else v for v in a)
    lhs = normalize(tail.beta_x(x, tail.embed(a)))
    rhs: dict = {}
    for w in product(*(range(c + 1) for c in x)):
        z = lw.sub(x, w)
        az = compose(a, sys.grid_map(z))
        rhs[tuple(w)] = tail.q(w, az)
    rhs = normalize(rhs)
    worst = 0
    for pos in set(lhs) | set(rhs):
        u = lhs.get(pos)
        v = rhs.get(pos)
        if u is None:
            u = (0,) * len(v)
        if v is None:
            v = (0,) * len(u)
        for p, q in zip(u, v):
            worst = max(worst, abs(p - q))
    return worst


def beta_injective_and_commuting(tail: AddingTailSystem) -> dict:
    """Exact checks on the truncation interior.

    ``beta_i`` is injective on ``B_x`` when ``x + e_i`` lies in the box; for
    commuting maps, ``beta_i beta_j = beta_j beta_i`` on ``B_x`` when
    ``x + e_i + e_j`` lies in the box.
    """
    sys = tail.system
    n = sys.n
    injective = True
    commuting = True
    failures = []
    for x in tail.positions:
        car = tail.carrier(x)
        basis = [{x: tuple(1 if q == p else 0 for q in car)} for p in car]
        for i in range(1, n + 1):
            if not tail.inside(lw.add(x, lw.unit(n, i))):
                continue
            images = [normalize(tail.beta(i, b)) for b in basis]
            # images of distinct indicators must be nonzero with disjoint supports
            seen = set()
            for img in images:
                keys = {(pos, k) for pos, vals in img.items() for k, v in enumerate(vals) if v}
                if not keys or keys & seen:
                    injective = False
                    failures.append(("injective", x, i))
                    break
                seen |= keys
            for j in range(i + 1, n + 1):
                if not tail.inside(lw.add(lw.add(x, lw.unit(n, i)), lw.unit(n, j))):
                    continue
                for b in basis:
                    if normalize(tail.beta(i, tail.beta(j, b))) != normalize(tail.beta(j, tail.beta(i, b))):
                        commuting = False
                        failures.append(("commuting", x, i, j))
                        break
    return {"injective": injective, "commuting": commuting, "failures": failures}


def tail_ideal(tail: AddingTailSystem) -> dict:
    """The ideal ``sum_{x != 0} B_x`` of the truncation and its exact beta-invariance.

    Invariance is checked on every indicator basis element: the image under
    each ``beta_i`` must have no component at the origin.
    """
    n = tail.system.n
    origin = lw.zero(n)
    components = {x: tail.carrier(x) for x in tail.positions if x != origin and tail.carrier(x)}
    invariant = True
    for x, car in components.items():
        for p in car:
            b = {x: tuple(1 if q == p else 0 for q in car)}
            for i in range(1, n + 1):
                if origin in normalize(tail.beta(i, b)):
                    invariant = False
    return {
        "nonzero": bool(components),
        "invariant": invariant,
        "components": components,
    }


# -- minimality, radical, freeness ------------------------------------------


def orbit_closure(sys: ClassicalSystem, x: int) -> frozenset[int]:
    return closure_under(sys.maps, [x])


def is_invariant(sys: ClassicalSystem, Z: Iterable[int]) -> bool:
    Z = frozenset(Z)
    return all(m[z] in Z for m in sys.maps for z in Z)


def is_minimal(sys: ClassicalSystem) -> tuple[bool, frozenset[int] | None]:
    """True iff every forward orbit closure is all of X; else a proper invariant witness.

    The witness is the smallest orbit closure (ties broken by point index).
    """
    full = frozenset(range(sys.size))
    best = None
    for x in range(sys.size):
        orb = orbit_closure(sys, x)
        if orb != full and (best is None or len(orb) < len(best)):
            best = orb
    return best is None, best


def monoid_elements(sys: ClassicalSystem) -> list[Map]:
    """All distinct maps in the monoid generated by the ``phi_i`` (including the identity)."""
    start = identity_map(sys.size)
    seen = {start}
    order = [start]
    k = 0
    while k < len(order):
        f = order[k]
        k += 1
        for m in sys.maps:
            g = compose(m, f)
            if g not in seen:
                seen.add(g)
                order.append(g)
    return order


def radical_quotient(sys: ClassicalSystem) -> tuple[frozenset[int], ClassicalSystem]:
    """Eventual image ``E = cap_s Im phi_s`` and the restricted system on ``E``."""
    E = frozenset(range(sys.size))
    for f in monoid_elements(sys):
        E &= frozenset(f)
    order = sorted(E)
    pos = {p: k for k, p in enumerate(order)}
    maps = []
    for m in sys.maps:
        if any(m[p] not in E for p in order):
            raise PreconditionError("eventual image is not invariant; maps do not commute")
        maps.append(tuple(pos[m[p]] for p in order))
    return E, ClassicalSystem(tuple(sys.points[p] for p in order), tuple(maps))


def distinctness_report(sys: ClassicalSystem, budget: int | None = None) -> dict:
    """Collision ``phi_s = phi_r`` with ``s != r`` along the first generator, and group-level data.

    The powers of ``phi_1`` must repeat within ``|X|^|X| + 1`` steps; the
    first repeat ``phi_1^mu = phi_1^{mu+lambda}`` is the witness.
    """
    size = sys.size
    if budget is None:
        budget = size**size + 1
    n = sys.n
    seen: dict[Map, int] = {}
    f = identity_map(size)
    witness = None
    for k in range(budget + 1):
        if f in seen:
            s = tuple([seen[f]] + [0] * (n - 1))
            r = tuple([k] + [0] * (n - 1))
            witness = (s, r)
            break
        seen[f] = k
        f = compose(sys.phi(1), f)
    out = {
        "injective_on_P": witness is None,
        "witness": witness,
        "id_in_group": None,
        "topologically_free": witness is None,
    }
    if sys.is_bijective() and witness is not None:
        g = lw.sub(witness[1], witness[0])
        # phi_g = phi_{g+} o phi_{g-}^{-1}
        plus, minus = lw.pos_neg_parts(g)
        phig = compose(sys.grid_map(plus), invert(sys.grid_map(minus)))
        if phig != identity_map(size):
            raise AssertionError("collision does not yield an identity group element")
        out["id_in_group"] = g
    return out


def group_identity_check(sys: ClassicalSystem, g: Sequence[int]) -> bool:
    if not sys.is_bijective():
        raise PreconditionError("group-level check needs bijective maps")
    plus, minus = lw.pos_neg_parts(g)
    return compose(sys.grid_map(plus), invert(sys.grid_map(minus))) == identity_map(sys.size)


def minimality_report(sys: ClassicalSystem, N: int = 2) -> dict:
    """Minimality, injectivity and the tail-ideal witness on a depth-``N`` truncation."""
    minimal, witness = is_minimal(sys)
    injective = sys.is_bijective()
    tail = adding_tail(sys, N)
    report = {
        "minimal_A": minimal,
        "injective": injective,
        "minimal_witness": sorted(witness) if witness is not None else None,
        "tail_ideal_witness": None,
        "tail_invariant": None,
    }
    tail_info = tail_ideal(tail)
    some_carrier = any(tail.profile[S] for S in tail.profile if S)
    if tail_info["nonzero"] != some_carrier:
        raise AssertionError("tail ideal nonvanishing must match some nonempty W_S")
    if not injective:
        report["tail_ideal_witness"] = {
            x: list(car) for x, car in tail_info["components"].items()
        }
        report["tail_invariant"] = tail_info["invariant"]
    if minimal and not injective:
        report["implication_violation"] = True
    else:
        report["implication_violation"] = False
    if injective:
        # every W_S with S nonempty is empty, so the truncation of B is A itself
        report["minimal_B_truncation"] = minimal
    return report
