"""Operator tuples, covariant pairs, Nica-covariance checks and Gram windows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lattice as lw
from .classical import ClassicalSystem, Map
from .opcore import (
    DEFAULT_POLICY,
    Operator,
    StructureError,
    TolerancePolicy,
    opnorm,
    psd_min_eig,
)


class CovarianceError(ValueError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class DoublyCommutingError(ValueError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class Check:
    residual: float
    passed: bool

    def to_json(self) -> dict:
        return {"residual": self.residual, "passed": self.passed}


def _check(res: float, tol: float) -> Check:
    return Check(float(res), bool(res <= tol))


def _cols(a: np.ndarray, interior: Sequence[int] | None) -> np.ndarray:
    return a if interior is None else a[:, list(interior)]


# -- representations of C(X) --------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteSpectrumRep:
    """``pi(f) = sum_x f(x) P_x`` for orthogonal projections ``P_x`` summing to I."""

    projections: tuple[np.ndarray, ...]
    labels: tuple = ()

    def __post_init__(self):
        projs = tuple(np.asarray(p, dtype=complex) for p in self.projections)
        if not projs:
            raise StructureError("a representation needs at least one point")
        d = projs[0].shape[0]
        for p in projs:
            if p.shape != (d, d):
                raise StructureError("projections must share one square shape")
        object.__setattr__(self, "projections", projs)
        labels = tuple(self.labels) if self.labels else tuple(range(d))
        if len(labels) != d:
            raise StructureError("label count does not match the dimension")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def diagonal(cls, point_of: Sequence[int], size: int, labels: Sequence = ()) -> "FiniteSpectrumRep":
        """Basis vector ``k`` sits in the spectral subspace of point ``point_of[k]``."""
        d = len(point_of)
        projs = []
        for x in range(size):
            p = np.zeros((d, d), dtype=complex)
            for k, y in enumerate(point_of):
                if y == x:
                    p[k, k] = 1.0
            projs.append(p)
        return cls(tuple(projs), tuple(labels))

    @classmethod
    def scalar(cls, dim: int, size: int = 1, point: int = 0) -> "FiniteSpectrumRep":
        """All of ``C^dim`` sits over one point: ``pi(f) = f(point) I``."""
        return cls.diagonal([point] * dim, size)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.projections)

    def __call__(self, f: Sequence) -> np.ndarray:
        if len(f) != self.size:
            raise StructureError(f"function has {len(f)} values, X has {self.size} points")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, p in zip(f, self.projections):
            if c != 0:
                out = out + complex(c) * p
        return out

    def indicator(self, x: int) -> np.ndarray:
        return self.projections[x]

    def compose_map(self, m: Map) -> "FiniteSpectrumRep":
        """The representation ``f -> pi(f o m)``."""
        d = self.dim
        out = [np.zeros((d, d), dtype=complex) for _ in range(self.size)]
        for x, y in enumerate(m):
            out[y] = out[y] + self.projections[x]
        return FiniteSpectrumRep(tuple(out), self.labels)

    def validate(self, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
        """Largest defect among Hermitian, idempotent, orthogonal and completeness identities."""
        worst = 0.0
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for a, p in enumerate(self.projections):
            worst = max(worst, opnorm(p - p.conj().T), opnorm(p @ p - p))
            for q in self.projections[a + 1 :]:
                worst = max(worst, opnorm(p @ q))
            total = total + p
        worst = max(worst, opnorm(total - np.eye(self.dim)))
        if worst > pol.residual_tol:
            raise StructureError(f"spectral projections are invalid (residual {worst:.3e})")
        return worst

    def to_json(self) -> dict:
        return {"projections": [Operator(p).to_wire()["entries"] for p in self.projections]}


# -- operator tuples ------------------------------------------------------------


@dataclass(eq=False)
class TupleRep:
    """An n-tuple of operators on a common space.

    ``kind='grid'`` expects commuting operators (a representation of Z_+^n);
    ``kind='free'`` expects none (a representation of the free monoid).
    ``grid_ops`` may hold precomputed ``T_x`` for grid points, used in place
    of generator products when a representation is not determined by its
    generators on a truncation.
    """

    ops: list[np.ndarray]
    kind: str = "grid"
    labels: tuple = ()
    grid_ops: dict = field(default_factory=dict)
    _powers: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.ops = [np.asarray(t, dtype=complex) for t in self.ops]
        if not self.ops:
            raise StructureError("a tuple needs at least one operator")
        d = self.ops[0].shape
        if len(d) != 2 or d[0] != d[1]:
            raise StructureError("tuple operators must be square")
        for t in self.ops:
            if t.shape != d:
                raise StructureError("tuple operators must share one space")
        if self.kind not in ("grid", "free"):
            raise ValueError("kind must be 'grid' or 'free'")
        if not self.labels:
            self.labels = tuple(range(d[0]))

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def gen(self, i: int) -> np.ndarray:
        return self.ops[i - 1]

    def _pow(self, i: int, k: int) -> np.ndarray:
        key = (i, k)
        if key not in self._powers:
            if k == 0:
                self._powers[key] = np.eye(self.dim, dtype=complex)
            else:
                self._powers[key] = self.gen(i) @ self._pow(i, k - 1)
        return self._powers[key]

    def power(self, x: Sequence[int]) -> np.ndarray:
        """``T_x = T_1^{x_1} ... T_n^{x_n}``."""
        x = tuple(x)
        if len(x) != self.n:
            raise lw.DimensionError(f"grid point of dimension {len(x)} for n = {self.n}")
        if any(c < 0 for c in x):
            raise ValueError("grid point must be nonnegative")
        if x in self.grid_ops:
            return self.grid_ops[x]
        out = np.eye(self.dim, dtype=complex)
        for i, k in enumerate(x, start=1):
            if k:
                out = out @ self._pow(i, k)
        return out

    def word(self, w: Sequence[int]) -> np.ndarray:
        """``T_w = T_{i_k} ... T_{i_1}``."""
        out = np.eye(self.dim, dtype=complex)
        for a in w:
            out = out @ self.gen(a)
        return out

    def adjoint(self) -> "TupleRep":
        grid = {x: v.conj().T for x, v in self.grid_ops.items()}
        return TupleRep([t.conj().T for t in self.ops], self.kind, self.labels, grid)

    def to_json(self) -> dict:
        return {"kind": self.kind, "ops": [Operator(t).to_wire()["entries"] for t in self.ops]}


@dataclass(eq=False)
class CovariantPair:
    """A representation of C(X) with an operator tuple.

    ``side='left'`` means ``pi(a) T_i = T_i pi alpha_i(a)``; ``side='right'``
    means ``T_i pi(a) = pi alpha_i(a) T_i``. Here ``alpha_i(a) = a o phi_i``.
    """

    rep: FiniteSpectrumRep
    tuple: TupleRep
    system: ClassicalSystem
    side: str = "left"

    def __post_init__(self):
        if self.rep.dim != self.tuple.dim:
            raise StructureError("representation and tuple act on different spaces")
        if self.rep.size != self.system.size:
            raise StructureError("representation and system have different point sets")
        if self.tuple.n != self.system.n:
            raise StructureError("tuple arity does not match the number of maps")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    @property
    def n(self) -> int:
        return self.tuple.n


def trivial_pair(t: TupleRep) -> CovariantPair:
    """``A = C`` acting by scalars, trivial dynamics."""
    sys = ClassicalSystem((0,), tuple((0,) for _ in range(t.n)))
    return CovariantPair(FiniteSpectrumRep.scalar(t.dim), t, sys)


# -- checks ---------------------------------------------------------------------


def check_commuting(t: TupleRep, pol: TolerancePolicy = DEFAULT_POLICY, interior=None) -> Check:
    res = 0.0
    for i in range(t.n):
        for j in range(i + 1, t.n):
            a, b = t.ops[i], t.ops[j]
            res = max(res, opnorm(a @ _cols(b, interior) - b @ _cols(a, interior)))
    return _check(res, pol.residual_tol)


def check_doubly_commuting(t: TupleRep, pol: TolerancePolicy = DEFAULT_POLICY, interior=None) -> Check:
    res = 0.0
    for i in range(t.n):
        for j in range(t.n):
            if i == j:
                continue
            a, b = t.ops[i], t.ops[j]
            res = max(res, opnorm(a.conj().T @ _cols(b, interior) - b @ _cols(a.conj().T, interior)))
    return _check(res, pol.residual_tol)


def regular_extension_eval(t: TupleRep, g: Sequence[int]) -> np.ndarray:
    """``T~(g) = T_{g_-}^* T_{g_+}``."""
    plus, minus = lw.pos_neg_parts(g)
    return t.power(minus).conj().T @ t.power(plus)


def gram_blocks(t: TupleRep, window: Sequence[Sequence[int]]) -> np.ndarray:
    """Array ``B[a, b] = T~(g_b - g_a)``, each distinct difference evaluated once."""
    pts = np.asarray(window, dtype=int).reshape(len(window), t.n)
    diffs = pts[None, :, :] - pts[:, None, :]
    uniq, inv = np.unique(diffs.reshape(-1, t.n), axis=0, return_inverse=True)
    vals = np.stack([regular_extension_eval(t, tuple(int(c) for c in h)) for h in uniq])
    return vals[inv.reshape(-1)].reshape(len(window), len(window), t.dim, t.dim)


def cpd_gram(
    t: TupleRep, window: Sequence[Sequence[int]], pol: TolerancePolicy = DEFAULT_POLICY
) -> tuple[Operator, float, bool]:
    """Block matrix ``[T~(-g_i + g_j)]`` and its PSD verdict."""
    window = [tuple(g) for g in window]
    d, m = t.dim, len(window)
    G = gram_blocks(t, window).transpose(0, 2, 1, 3).reshape(m * d, m * d)
    labels = tuple((g, k) for g in window for k in t.labels)
    ok, lam = psd_min_eig(G, pol)
    return Operator(G, labels, labels), lam, ok


def cpd_radius_sweep(
    t: TupleRep, max_radius: int, pol: TolerancePolicy = DEFAULT_POLICY, stop_at_failure: bool = False
) -> dict:
    """Gram windows ``{g : |g|_inf <= r}`` for ``r = 1..max_radius``.

    A failing window certifies that the regular extension is not completely
    positive definite; passing windows only give "inconclusive up to R".
    """
    trace = []
    first_fail = None
    for r in range(1, max_radius + 1):
        _, lam, ok = cpd_gram(t, lw.enumerate_cube(t.n, r), pol)
        trace.append({"radius": r, "min_eig": lam, "psd": ok})
        if not ok and first_fail is None:
            first_fail = r
            if stop_at_failure:
                break
    verdict = f"not CPD (fails at radius {first_fail})" if first_fail else f"inconclusive up to radius {max_radius}"
    return {"trace": trace, "first_failing_radius": first_fail, "verdict": verdict}


def _generator(p: CovariantPair, s) -> tuple[np.ndarray, Map]:
    """Operator ``T_s`` and map ``phi_s`` for a generator index, grid point or word."""
    sys = p.system
    if isinstance(s, int):
        return p.tuple.gen(s), sys.phi(s)
    s = tuple(s)
    if p.tuple.kind == "grid":
        return p.tuple.power(s), sys.grid_map(s)
    return p.tuple.word(s), sys.word_map(s)


def covariance_residual(p: CovariantPair, s, interior=None) -> float:
    T, phi = _generator(p, s)
    twisted = p.rep.compose_map(phi)
    res = 0.0
    for x in range(p.rep.size):
        a = p.rep.indicator(x)
        b = twisted.indicator(x)
        if p.side == "left":
            diff = a @ _cols(T, interior) - T @ _cols(b, interior)
        else:
            diff = T @ _cols(a, interior) - b @ _cols(T, interior)
        res = max(res, opnorm(diff))
    return res


def check_covariance(p: CovariantPair, s, pol: TolerancePolicy = DEFAULT_POLICY, interior=None) -> Check:
    """Covariance defect maximized over the indicator functions of X."""
    return _check(covariance_residual(p, s, interior), pol.residual_tol)


def require_covariant(p: CovariantPair, pol: TolerancePolicy = DEFAULT_POLICY) -> None:
    for i in range(1, p.n + 1):
        c = check_covariance(p, i, pol)
        if not c.passed:
            raise CovarianceError(f"covariance fails for generator {i} (residual {c.residual:.3e})", c.residual)


def range_projection(v: np.ndarray) -> np.ndarray:
    return v @ v.conj().T


def check_nica_joins(
    t: TupleRep,
    s: Sequence[int],
    t2: Sequence[int],
    pol: TolerancePolicy = DEFAULT_POLICY,
    interior=None,
) -> Check:
    """``V_s V_s^* V_t V_t^* = V_{s v t} V_{s v t}^*``, evaluated on ``interior`` columns if given."""
    j = lw.join(s, t2)
    vs, vt, vj = t.power(s), t.power(t2), t.power(j)
    lhs = vs @ (vs.conj().T @ (vt @ _cols(vt.conj().T, interior)))
    rhs = vj @ _cols(vj.conj().T, interior)
    return _check(opnorm(lhs - rhs), pol.residual_tol)


def adjoint_dual(p):
    """Replace each ``T_i`` by ``T_i^*``; covariant pairs switch side."""
    if isinstance(p, TupleRep):
        return p.adjoint()
    return CovariantPair(p.rep, p.tuple.adjoint(), p.system, "right" if p.side == "left" else "left")


def _require_unitary(u: np.ndarray, name: str, pol: TolerancePolicy) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise StructureError(f"{name} must be square")
    res = opnorm(u.conj().T @ u - np.eye(u.shape[0]))
    if res > pol.residual_tol:
        raise StructureError(f"{name} is not unitary (residual {res:.3e})")


def parrott_triple(U, V, pol: TolerancePolicy = DEFAULT_POLICY) -> TupleRep:
    """``T_1 = [[0,0],[I,0]], T_2 = [[0,0],[U,0]], T_3 = [[0,0],[V,0]]`` on ``H + H``."""
    U = np.asarray(U.mat if isinstance(U, Operator) else U, dtype=complex)
    V = np.asarray(V.mat if isinstance(V, Operator) else V, dtype=complex)
    _require_unitary(U, "U", pol)
    _require_unitary(V, "V", pol)
    if U.shape != V.shape:
        raise StructureError("U and V must act on the same space")
    d = U.shape[0]

    def lower(block):
        out = np.zeros((2 * d, 2 * d), dtype=complex)
        out[d:, :d] = block
        return out

    labels = tuple((c, k) for c in range(2) for k in range(d))
    return TupleRep([lower(np.eye(d)), lower(U), lower(V)], "grid", labels)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# -- random families --------------------------------------------------------


def random_contraction(rng: np.random.Generator, d: int, scale: float | None = None) -> np.ndarray:
    """A random complex matrix rescaled to norm ``scale`` (default uniform in (0, 1])."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    nrm = opnorm(a)
    if scale is None:
        scale = rng.uniform(0.05, 1.0)
    return a * (scale / nrm) if nrm > 0 else a


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_doubly_commuting_pair(rng: np.random.Generator, max_dim: int = 6) -> TupleRep:
    """``T_1 = A (x) I (x) f(N)``, ``T_2 = I (x) B (x) g(N)`` with ``N`` normal and ``|f|, |g| <= 1``.

    Tensor factors in different slots doubly commute, and functions of one
    normal matrix commute with each other and with their adjoints.
    """
    shapes = [(a, b, c) for a in range(1, 4) for b in range(1, 4) for c in range(1, 4) if a * b * c <= max_dim]
    d1, d2, d3 = shapes[rng.integers(len(shapes))]
    A = random_contraction(rng, d1)
    B = random_contraction(rng, d2)
    Q = random_unitary(rng, d3)
    f = rng.uniform(0, 1, d3) * np.exp(2j * np.pi * rng.uniform(size=d3))
    g = rng.uniform(0, 1, d3) * np.exp(2j * np.pi * rng.uniform(size=d3))
    F = (Q * f) @ Q.conj().T
    Gm = (Q * g) @ Q.conj().T
    T1 = np.kron(np.kron(A, np.eye(d2)), F)
    T2 = np.kron(np.kron(np.eye(d1), B), Gm)
    return TupleRep([T1, T2], "grid")


def tuple_from_ops(ops: Sequence, kind: str = "grid") -> TupleRep:
    return TupleRep([np.asarray(o.mat if isinstance(o, Operator) else o, dtype=complex) for o in ops], kind)
