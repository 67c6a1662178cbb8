"""Explicit dilations on truncated spaces and a uniform verifier.

Every construction returns a :class:`DilationResult` whose space records, for
each basis label, its *headroom*: how many more generator steps fit before the
truncation cuts. ``interior(k)`` is the set of labels with headroom at least
``k``; identities that fail only because of the cut are claimed on interiors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lattice as lw
from .classical import ClassicalSystem, PreconditionError, identity_map
from .opcore import (
    DEFAULT_POLICY,
    ContractionError,
    Operator,
    PositivityError,
    TolerancePolicy,
    closest_unitary,
    defect,
    eigh_sorted,
    opnorm,
    orth_range,
    projection_basis,
    psd_min_eig,
)
from .reps import (
    CovariantPair,
    DoublyCommutingError,
    FiniteSpectrumRep,
    TupleRep,
    check_commuting,
    check_doubly_commuting,
    check_nica_joins,
    covariance_residual,
    require_covariant,
    trivial_pair,
)


class BudgetError(ValueError):
    """Requested word length exceeds what the truncation supports."""


@dataclass(frozen=True)
class TruncatedSpace:
    labels: tuple
    headroom: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.headroom):
            raise ValueError("one headroom value per label")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def interior(self, k: int) -> list[int]:
        return [j for j, h in enumerate(self.headroom) if h >= k]

    def interior_labels(self, k: int) -> list:
        return [self.labels[j] for j in self.interior(k)]


@dataclass(eq=False)
class DilationResult:
    space: TruncatedSpace
    pair: CovariantPair
    kind: str
    budget: int
    embedding: list[int]
    params: dict = field(default_factory=dict)
    claims: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def ops(self) -> list[np.ndarray]:
        return self.pair.tuple.ops

    def interior(self, k: int) -> list[int]:
        return self.space.interior(k)

    def to_json(self) -> dict:
        labels = self.space.labels
        return {
            "kind": self.kind,
            "budget": self.budget,
            "params": self.params,
            "dim": self.space.dim,
            "labels": [_wire_label(l) for l in labels],
            "headroom": list(self.space.headroom),
            "ops": [Operator(v, labels, labels).to_wire()["entries"] for v in self.ops],
            "diagnostics": self.diagnostics,
        }


def _wire_label(lab):
    if isinstance(lab, tuple):
        return [_wire_label(x) for x in lab]
    return lab


class _Layout:
    """Offsets of equally or unequally sized blocks keyed by an index."""

    def __init__(self, keys: Sequence, dims: Sequence[int]):
        self.keys = list(keys)
        self.dims = dict(zip(self.keys, dims))
        self.offset = {}
        pos = 0
        for k in self.keys:
            self.offset[k] = pos
            pos += self.dims[k]
        self.total = pos

    def sl(self, key) -> slice:
        o = self.offset[key]
        return slice(o, o + self.dims[key])

    def __contains__(self, key) -> bool:
        return key in self.offset


def _block_diag(layout: _Layout, blocks: dict) -> np.ndarray:
    out = np.zeros((layout.total, layout.total), dtype=complex)
    for key, b in blocks.items():
        s = layout.sl(key)
        out[s, s] = b
    return out


def _spectral_rep(layout: _Layout, size: int, block_of) -> FiniteSpectrumRep:
    """Representation with ``sigma(delta_x)`` given blockwise by ``block_of(key, x)``."""
    projs = []
    for x in range(size):
        projs.append(_block_diag(layout, {key: block_of(key, x) for key in layout.keys}))
    return FiniteSpectrumRep(tuple(projs))


def _require_contraction(t: np.ndarray, pol: TolerancePolicy, name: str = "T") -> None:
    nrm = opnorm(t)
    if nrm > 1 + pol.residual_tol:
        raise ContractionError(f"{name} is not a contraction: norm {nrm:.6g}", nrm)


# -- Fock pair -------------------------------------------------------------------


def fock_pair(rep: FiniteSpectrumRep, sys: ClassicalSystem, N: int) -> DilationResult:
    """Orbit representation on ``H (x) l^2(box)`` with the coordinate shifts."""
    if rep.size != sys.size:
        raise ValueError("representation and system have different point sets")
    n, d = sys.n, rep.dim
    box = lw.enumerate_box(n, N)
    lay = _Layout(box, [d] * len(box))
    ops = []
    for i in range(1, n + 1):
        V = np.zeros((lay.total, lay.total), dtype=complex)
        for s in box:
            t = lw.add(s, lw.unit(n, i))
            if t in lay:
                V[lay.sl(t), lay.sl(s)] = np.eye(d)
        ops.append(V)
    twisted = {s: rep.compose_map(sys.grid_map(s)) for s in box}
    sigma = _spectral_rep(lay, sys.size, lambda s, x: twisted[s].indicator(x))
    labels = tuple((s, b) for s in box for b in range(d))
    head = tuple(N - max(s) for s in box for _ in range(d))
    pair = CovariantPair(sigma, TupleRep(ops, "grid", labels), sys)
    return DilationResult(
        TruncatedSpace(labels, head),
        pair,
        "fock",
        N,
        list(range(d)),
        {"N": N, "n": n},
        ("covariance", "compression", "isometry", "commutation", "nica"),
    )


def zero_pair(rep: FiniteSpectrumRep, sys: ClassicalSystem) -> CovariantPair:
    """``(pi, T = 0)``, the pair a Fock representation dilates."""
    z = np.zeros((rep.dim, rep.dim), dtype=complex)
    return CovariantPair(rep, TupleRep([z] * sys.n, "grid"), sys)


# -- doubly commuting tuples ----------------------------------------------------


def doubly_commuting_dilation(
    t: TupleRep, N: int, pol: TolerancePolicy = DEFAULT_POLICY, pair: CovariantPair | None = None
) -> DilationResult:
    """Isometric dilation of a doubly commuting contractive tuple on ``H (x) l^2(box)``."""
    dc = check_doubly_commuting(t, pol)
    if not dc.passed:
        raise DoublyCommutingError(f"tuple does not doubly commute (residual {dc.residual:.3e})", dc.residual)
    pair = pair or trivial_pair(t)
    n, d = t.n, t.dim
    D = [defect(t.gen(i), "left", pol) for i in range(1, n + 1)]
    box = lw.enumerate_box(n, N)
    lay = _Layout(box, [d] * len(box))
    ops = []
    for i in range(1, n + 1):
        V = np.zeros((lay.total, lay.total), dtype=complex)
        for x in box:
            xi = lw.add(x, lw.unit(n, i))
            if i in lw.support(x):
                if xi in lay:
                    V[lay.sl(xi), lay.sl(x)] = np.eye(d)
            else:
                V[lay.sl(x), lay.sl(x)] = t.gen(i)
                if xi in lay:
                    V[lay.sl(xi), lay.sl(x)] = D[i - 1]
        ops.append(V)
    sys = pair.system
    twisted = {x: pair.rep.compose_map(sys.grid_map(x)) for x in box}
    sigma = _spectral_rep(lay, sys.size, lambda x, a: twisted[x].indicator(a))
    labels = tuple((x, b) for x in box for b in range(d))
    head = tuple(N - max(x) for x in box for _ in range(d))
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, TupleRep(ops, "grid", labels), sys),
        "doubly_commuting",
        N,
        list(range(d)),
        {"N": N, "n": n},
        ("covariance", "compression", "isometry", "commutation", "nica"),
    )


# -- exact unitary dilation of one contraction ------------------------------------


def exact_unitary_step_matrix(T, N: int, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Unitary on ``H^(N+1)`` whose powers compress to ``T^k`` for ``k <= N``."""
    T = np.asarray(T.mat if isinstance(T, Operator) else T, dtype=complex)
    if N < 1:
        raise ValueError("N must be at least 1")
    _require_contraction(T, pol)
    d = T.shape[0]
    U = np.zeros(((N + 1) * d, (N + 1) * d), dtype=complex)

    def blk(r, c, m):
        U[r * d : (r + 1) * d, c * d : (c + 1) * d] = m

    blk(0, 0, T)
    blk(0, N, defect(T, "right", pol))
    blk(1, 0, defect(T, "left", pol))
    blk(1, N, -T.conj().T)
    for j in range(1, N):
        blk(j + 1, j, np.eye(d))
    return U


def exact_unitary_step_dilation(T, N: int, pol: TolerancePolicy = DEFAULT_POLICY) -> DilationResult:
    U = exact_unitary_step_matrix(T, N, pol)
    d = U.shape[0] // (N + 1)
    labels = tuple((j, b) for j in range(N + 1) for b in range(d))
    t = TupleRep([U], "grid", labels)
    pair = trivial_pair(t)
    return DilationResult(
        TruncatedSpace(labels, (N,) * len(labels)),
        pair,
        "exact_unitary",
        N,
        list(range(d)),
        {"N": N},
        ("compression", "isometry", "coisometry"),
    )


# -- free semigroup -----------------------------------------------------------------


def _defect_bases(t: TupleRep, pol: TolerancePolicy) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for i in range(1, t.n + 1):
        D = defect(t.gen(i), "left", pol)
        lam, vecs = eigh_sorted(D)
        out.append((D, vecs[:, lam > pol.rank_tol]))
    return out


def free_schaeffer_dilation(
    p: CovariantPair, N: int, minimal: bool = False, pol: TolerancePolicy = DEFAULT_POLICY
) -> DilationResult:
    """Isometric co-extension ``V_i = [[T_i, 0], [J_i D_i, L_i]]`` on ``H + sum_{|w|<=N} H_w``."""
    if p.side != "left":
        raise PreconditionError("free Schaeffer dilation expects a left covariant pair")
    if N < 1:
        raise ValueError("N must be at least 1")
    require_covariant(p, pol)
    t, sys, rep = p.tuple, p.system, p.rep
    n, d = t.n, t.dim
    for i in range(1, n + 1):
        _require_contraction(t.gen(i), pol, f"T_{i}")
    bases = _defect_bases(t, pol)
    words = lw.enumerate_words(n, N)

    def fiber(w):
        if not w:
            return np.eye(d, dtype=complex)
        return bases[w[-1] - 1][1] if minimal else np.eye(d, dtype=complex)

    fibers = {w: fiber(w) for w in words}
    lay = _Layout(words, [fibers[w].shape[1] for w in words])
    ops = []
    for i in range(1, n + 1):
        V = np.zeros((lay.total, lay.total), dtype=complex)
        root = ()
        V[lay.sl(root), lay.sl(root)] = t.gen(i)
        Di = bases[i - 1][0]
        V[lay.sl((i,)), lay.sl(root)] = fibers[(i,)].conj().T @ Di
        for w in words:
            if w and len(w) < N:
                V[lay.sl((i,) + w), lay.sl(w)] = np.eye(lay.dims[w])
        ops.append(V)
    twisted = {w: rep.compose_map(sys.word_map(w)) for w in words}
    sigma = _spectral_rep(
        lay, sys.size, lambda w, x: fibers[w].conj().T @ twisted[w].indicator(x) @ fibers[w]
    )
    labels = tuple((w, b) for w in words for b in range(lay.dims[w]))
    head = tuple(N - len(w) for w in words for _ in range(lay.dims[w]))
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, TupleRep(ops, "free", labels), sys),
        "free_schaeffer_minimal" if minimal else "free_schaeffer",
        N,
        list(range(d)),
        {"N": N, "n": n, "minimal": minimal, "fiber_dims": [b.shape[1] for _, b in bases]},
        ("covariance", "compression", "isometry"),
    )


def _psi_system(sys: ClassicalSystem) -> ClassicalSystem:
    # letter +i acts by phi_i^{-1}, letter -i by phi_i
    return sys.inverse()


def free_unitary_dilation(
    p: CovariantPair, N: int, pol: TolerancePolicy = DEFAULT_POLICY, minimal: bool = False
) -> DilationResult:
    """Unitary dilation over the deleted Cayley graph, extending the Schaeffer dilation."""
    sys = p.system
    if not sys.is_bijective():
        raise PreconditionError("free unitary dilation needs bijective maps")
    K1 = free_schaeffer_dilation(p, N, minimal, pol)
    rho = K1.pair.rep
    n, dk = sys.n, K1.space.dim
    Vs = K1.ops
    Bs = []
    for V in Vs:
        P = np.eye(dk) - V @ V.conj().T
        Bs.append(projection_basis(P))
    vertices = lw.cayley_branch_vertices(n, N)
    keys = ["K"] + vertices
    dims = [dk] + [Bs[w[-1] - 1].shape[1] for w in vertices]
    lay = _Layout(keys, dims)
    vset = set(vertices)
    ops = []
    for i in range(1, n + 1):
        Up = np.zeros((lay.total, lay.total), dtype=complex)
        Up[lay.sl("K"), lay.sl("K")] = Vs[i - 1].conj().T
        Up[lay.sl((i,)), lay.sl("K")] = Bs[i - 1].conj().T
        for w in vertices:
            tgt = lw.reduced((i,) + w)
            if tgt in vset:
                Up[lay.sl(tgt), lay.sl(w)] = np.eye(lay.dims[w])
        ops.append(Up.conj().T)
    psi = _psi_system(sys)
    twisted = {w: rho.compose_map(psi.word_map(w)) for w in vertices}

    def block(key, x):
        if key == "K":
            return rho.indicator(x)
        B = Bs[key[-1] - 1]
        return B.conj().T @ twisted[key].indicator(x) @ B

    sigma = _spectral_rep(lay, sys.size, block)
    labels = tuple(("k",) + l for l in K1.space.labels) + tuple(
        ("c", w, b) for w in vertices for b in range(lay.dims[w])
    )
    head = tuple(K1.space.headroom) + tuple(N - len(w) for w in vertices for _ in range(lay.dims[w]))
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, TupleRep(ops, "free", labels), sys),
        "free_unitary",
        N,
        list(K1.embedding),
        {"N": N, "n": n, "minimal": minimal, "branch_dims": [b.shape[1] for b in Bs]},
        ("covariance", "compression", "isometry", "coisometry"),
    )


def trivial_action_unitary_dilation(
    p: CovariantPair,
    pol: TolerancePolicy = DEFAULT_POLICY,
    interior: Sequence[int] | None = None,
    budget: int = 1,
) -> DilationResult:
    """``U_i = [[T_i, I - T_i T_i^*], [0, T_i^*]]`` with ``sigma = pi + pi``.

    ``interior`` lists the indices of H on which each ``T_i`` is known to be
    isometric; it applies to both copies. By default all of H is interior.
    """
    sys = p.system
    ident = identity_map(sys.size)
    if any(m != ident for m in sys.maps):
        raise PreconditionError("trivial-action dilation needs identity maps")
    t, rep = p.tuple, p.rep
    d = t.dim
    for x in range(rep.size):
        P = rep.indicator(x)
        for i in range(1, t.n + 1):
            res = opnorm(P @ t.gen(i) - t.gen(i) @ P)
            if res > pol.residual_tol:
                raise PreconditionError(f"pi does not commute with T_{i} (residual {res:.3e})")
    ops = []
    for i in range(1, t.n + 1):
        T = t.gen(i)
        U = np.zeros((2 * d, 2 * d), dtype=complex)
        U[:d, :d] = T
        U[:d, d:] = np.eye(d) - T @ T.conj().T
        U[d:, d:] = T.conj().T
        ops.append(U)
    lay = _Layout([0, 1], [d, d])
    sigma = _spectral_rep(lay, rep.size, lambda c, x: rep.indicator(x))
    inner = set(range(d) if interior is None else interior)
    labels = tuple((c, b) for c in range(2) for b in range(d))
    head = tuple(budget if b in inner else 0 for c in range(2) for b in range(d))
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, TupleRep(ops, t.kind, labels), sys),
        "trivial_action",
        budget,
        list(range(d)),
        {"interior": sorted(inner)},
        ("covariance", "compression", "isometry", "coisometry"),
    )


# -- Ando ------------------------------------------------------------------------------


def _block_procrustes(JX: np.ndarray, JY: np.ndarray, projs: Sequence[np.ndarray]) -> np.ndarray:
    """Unitary commuting with each spectral projection and best matching ``U JX = JY``.

    Solved independently inside every spectral block by the orthogonal
    Procrustes problem, which returns an exactly unitary block.
    """
    m = JX.shape[0]
    U = np.zeros((m, m), dtype=complex)
    for E in projs:
        F = projection_basis(E)
        if F.shape[1] == 0:
            continue
        M = F.conj().T @ JY @ JX.conj().T @ F
        a, _, bh = np.linalg.svd(M)
        U += F @ (a @ bh) @ F.conj().T
    return closest_unitary(U)


def ando_dilation(
    p: CovariantPair, N: int, k: int | None = None, pol: TolerancePolicy = DEFAULT_POLICY
) -> DilationResult:
    """Commuting isometric covariant co-extension of a covariant pair over Z_+^2.

    The space is ``H + sum_{0 != m <= (N,N)} H_m`` with one copy of H per
    position. Starting from ``V_i = [[T_i, 0], [D_i -> e_i, L_i]]``, a unitary
    ``W`` fixing H, commuting with ``sigma`` and satisfying ``V_2 V_1 W = W V_1 V_2``
    is assembled from a single unitary on the positions ``(1,0), (0,1), (1,1)``
    transported along the diagonal. Then ``V_1' = V_1 W`` and ``V_2' = W^* V_2``.
    """
    if p.n != 2:
        raise ValueError("Ando dilation is for pairs (n = 2)")
    if N < 2:
        raise ValueError("N must be at least 2")
    budget = N - 1
    if k is not None and k > budget:
        raise BudgetError(f"budget {k} exceeds N - 1 = {budget}")
    require_covariant(p, pol)
    t, sys, rep = p.tuple, p.system, p.rep
    cc = check_commuting(t, pol)
    if not cc.passed:
        raise PreconditionError(f"T_1, T_2 do not commute (residual {cc.residual:.3e})")
    d = t.dim
    T1, T2 = t.gen(1), t.gen(2)
    D1, D2 = defect(T1, "left", pol), defect(T2, "left", pol)
    box = lw.enumerate_box(2, N)
    lay = _Layout(box, [d] * len(box))
    o = (0, 0)
    e1, e2 = (1, 0), (0, 1)

    def base(i, T, D, e):
        V = np.zeros((lay.total, lay.total), dtype=complex)
        V[lay.sl(o), lay.sl(o)] = T
        V[lay.sl(e), lay.sl(o)] = D
        for m in box:
            if m != o:
                tgt = lw.add(m, e)
                if tgt in lay:
                    V[lay.sl(tgt), lay.sl(m)] = np.eye(d)
        return V

    V1, V2 = base(1, T1, D1, e1), base(2, T2, D2, e2)
    twisted = {m: rep.compose_map(sys.grid_map(m)) for m in box}
    sigma = _spectral_rep(lay, sys.size, lambda m, x: twisted[m].indicator(x))

    tube0 = [(1, 0), (0, 1), (1, 1)]
    z = np.zeros((d, d))
    JX = np.vstack([D1 @ T2, z, D2])
    JY = np.vstack([z, D2 @ T1, D1])
    tube_projs = [
        np.block([[twisted[m].indicator(x) if m == m2 else z for m2 in tube0] for m in tube0])
        for x in range(sys.size)
    ]
    U0 = _block_procrustes(JX, JY, tube_projs)

    W = np.eye(lay.total, dtype=complex)
    for nn in range(N):
        tube = [lw.add(m, (nn, nn)) for m in tube0]
        idx = np.concatenate([np.arange(lay.offset[m], lay.offset[m] + d) for m in tube])
        W[np.ix_(idx, idx)] = U0
    V1p = V1 @ W
    V2p = W.conj().T @ V2
    labels = tuple((m, b) for m in box for b in range(d))
    head = tuple(N - max(m) for m in box for _ in range(d))

    # diagnostics: how W matches the orbits of H under X = V1 V2 and Y = V2 V1
    X, Y = V1 @ V2, V2 @ V1
    iota = np.zeros((lay.total, d), dtype=complex)
    iota[lay.sl(o), :] = np.eye(d)
    match = 0.0
    xs, ys = [], []
    xk, yk = iota, iota
    for _ in range(N + 1):
        match = max(match, opnorm(W @ xk - yk))
        xs.append(xk)
        ys.append(yk)
        xk, yk = X @ xk, Y @ yk
    MX = orth_range(np.hstack(xs), pol.rank_tol)
    MY = orth_range(np.hstack(ys), pol.rank_tol)
    diag = {
        "tube_unitary_residual": opnorm(U0 @ JX - JY),
        "orbit_match_residual": match,
        "span_dims": {"X": int(MX.shape[1]), "Y": int(MY.shape[1])},
        "wandering_dims": {
            "X": int(lay.total - orth_range(X, pol.rank_tol).shape[1]),
            "Y": int(lay.total - orth_range(Y, pol.rank_tol).shape[1]),
        },
    }
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, TupleRep([V1p, V2p], "grid", labels), sys),
        "ando",
        budget,
        list(range(d)),
        {"N": N},
        ("covariance", "compression", "isometry", "commutation"),
        diag,
    )


# -- GNS co-extension ------------------------------------------------------------------


def gns_coextension(
    t: TupleRep, N: int, pol: TolerancePolicy = DEFAULT_POLICY, pair: CovariantPair | None = None
) -> DilationResult:
    """Isometric dilation on the completion of ``H (x) box`` under the regular-extension form.

    The form is ``<xi (x) s, eta (x) r> = <T~(s - r) xi, eta>``. Its numerical
    null space (eigenvalues below ``rank_tol``) is quotiented out, and the
    quotient gets an orthonormal basis adapted to the headroom filtration, so
    that H occupies the first ``dim H`` coordinates.
    """
    from .reps import regular_extension_eval

    pair = pair or trivial_pair(t)
    n, d = t.n, t.dim
    box = lw.enumerate_box(n, N)
    m = len(box)
    G = np.zeros((m * d, m * d), dtype=complex)
    for a, si in enumerate(box):
        for b, sj in enumerate(box):
            G[a * d : (a + 1) * d, b * d : (b + 1) * d] = regular_extension_eval(t, lw.sub(sj, si))
    ok, lam_min = psd_min_eig(G, pol)
    if not ok:
        raise PositivityError(f"Gram matrix is not PSD (min eigenvalue {lam_min:.3e})", lam_min)
    lam, vecs = eigh_sorted((G + G.conj().T) / 2)
    keep = lam > pol.rank_tol
    E = np.sqrt(lam[keep])[:, None] * vecs[:, keep].conj().T
    rank = int(keep.sum())

    # orthonormal basis adapted to the levels max(s) = 0, 1, ..., N
    cols = {s: slice(a * d, (a + 1) * d) for a, s in enumerate(box)}
    iota = E[:, cols[box[0]]]
    Q = closest_unitary(iota) if iota.size else iota
    levels = [0] * d
    for lev in range(1, N + 1):
        block = np.hstack([E[:, cols[s]] for s in box if max(s) == lev])
        block = block - Q @ (Q.conj().T @ block)
        new = orth_range(block, np.sqrt(pol.rank_tol))
        Q = np.hstack([Q, new])
        levels += [lev] * new.shape[1]
    Ep = Q.conj().T @ E
    r = Ep.shape[0]

    cutoff = np.sqrt(pol.rank_tol)

    def shift_op(p):
        dom = [s for s in box if lw.add(s, p) in cols]
        if not dom:
            return np.zeros((r, r), dtype=complex)
        src = np.hstack([Ep[:, cols[s]] for s in dom])
        dst = np.hstack([Ep[:, cols[lw.add(s, p)]] for s in dom])
        smax = opnorm(src)
        return dst @ np.linalg.pinv(src, rcond=cutoff / smax if smax > 0 else 1e-15)

    grid = {p: shift_op(p) for p in box if any(p)}
    gens = [grid[lw.unit(n, i)] if N >= 1 else np.zeros((r, r)) for i in range(1, n + 1)]
    sys = pair.system
    Epinv = np.linalg.pinv(Ep, rcond=cutoff / max(opnorm(Ep), 1e-300))

    def rho_block(x):
        diag = np.zeros((m * d, m * d), dtype=complex)
        for s in box:
            diag[cols[s], cols[s]] = pair.rep.compose_map(sys.grid_map(s)).indicator(x)
        return Ep @ diag @ Epinv

    sigma = FiniteSpectrumRep(tuple(rho_block(x) for x in range(sys.size)))
    labels = tuple(("h", b) for b in range(d)) + tuple(("q", lev, j) for j, lev in enumerate(levels[d:]))
    head = tuple(N - lev for lev in levels)
    dc = check_doubly_commuting(t, pol)
    claims = ("covariance", "compression", "isometry", "commutation") + (("nica",) if dc.passed else ())
    tup = TupleRep(gens, "grid", labels, grid)
    return DilationResult(
        TruncatedSpace(labels, head),
        CovariantPair(sigma, tup, sys),
        "gns",
        N,
        list(range(d)),
        {"N": N, "n": n},
        claims,
        {"gram_min_eig": lam_min, "retained_rank": rank, "basis_rank": r},
    )


# -- verification ------------------------------------------------------------------


def _family(items: dict, tol: float) -> dict:
    worst = max(items.values(), default=0.0)
    return {"per_item": items, "max": worst, "passed": bool(worst <= tol)}


def _shape_words(kind: str, n: int, k: int) -> list:
    if kind == "free":
        return lw.enumerate_words(n, k)
    return [x for x in lw.enumerate_box(n, k) if sum(x) <= k]


def _apply(V: TupleRep, w, cols: np.ndarray) -> np.ndarray:
    """``V_w @ cols`` without forming ``V_w``."""
    if V.kind == "grid" and tuple(w) in V.grid_ops:
        return V.grid_ops[tuple(w)] @ cols
    if V.kind == "free":
        letters = list(w)
    else:
        letters = [i for i, c in enumerate(w, start=1) for _ in range(c)]
    out = cols
    for i in reversed(letters):
        out = V.gen(i) @ out
    return out


def verify_dilation(
    original: CovariantPair, d: DilationResult, k: int, pol: TolerancePolicy = DEFAULT_POLICY
) -> dict:
    """Residual families of a dilation on ``interior(k)``.

    Families reported depend on what the construction claims: covariance,
    compression ``P_H V_w sigma(a)|_H = T_w pi(a)`` for ``|w| <= k``, interior
    isometry/coisometry, generator commutation, and Nica identities.
    """
    if k > d.budget:
        raise BudgetError(f"budget {k} exceeds the declared budget {d.budget}")
    if k < 1:
        raise BudgetError("budget must be at least 1")
    tol = pol.residual_tol
    inner = d.interior(k)
    V = d.pair.tuple
    sigma = d.pair.rep
    n = V.n
    report: dict = {"kind": d.kind, "budget": k, "interior_dim": len(inner)}

    if "covariance" in d.claims:
        report["covariance_residuals"] = _family(
            {str(i): covariance_residual(d.pair, i, inner) for i in range(1, n + 1)}, tol
        )

    if "compression" in d.claims:
        emb = d.embedding
        items = {}
        for w in _shape_words(V.kind, n, k):
            Tw = original.tuple.word(w) if V.kind == "free" else original.tuple.power(w)
            res = 0.0
            for x in range(original.rep.size):
                lhs = _apply(V, w, sigma.indicator(x)[:, emb])[emb, :]
                rhs = Tw @ original.rep.indicator(x)
                res = max(res, opnorm(lhs - rhs))
            items[str(list(w))] = res
        report["compression_residuals"] = _family(items, tol)

    eye = np.eye(d.space.dim)
    if "isometry" in d.claims:
        report["isometry_interior_residuals"] = _family(
            {str(i): opnorm(v.conj().T @ v[:, inner] - eye[:, inner]) for i, v in enumerate(V.ops, 1)}, tol
        )
    if "coisometry" in d.claims:
        report["coisometry_interior_residuals"] = _family(
            {str(i): opnorm(v @ v.conj().T[:, inner] - eye[:, inner]) for i, v in enumerate(V.ops, 1)}, tol
        )
    if "commutation" in d.claims and n > 1:
        report["commutation_interior_residuals"] = _family(
            {"max": check_commuting(V, pol, inner).residual}, tol
        )
    if "nica" in d.claims and n > 1:
        items = {"doubly_commuting": check_doubly_commuting(V, pol, inner).residual}
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                items[f"join_{i}_{j}"] = check_nica_joins(V, lw.unit(n, i), lw.unit(n, j), pol, inner).residual
        report["nica_interior_residuals"] = _family(items, tol)

    report["passed"] = all(v["passed"] for v in report.values() if isinstance(v, dict))
    return report


def reachable_rank(d: DilationResult, depth: int, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    """Rank of the span of ``V_w sigma(a) H`` over ``|w| <= depth`` (free kind)."""
    V = d.pair.tuple
    iota = np.eye(d.space.dim)[:, d.embedding]
    cols = []
    for w in lw.enumerate_words(V.n, depth):
        Vw = V.word(w)
        for x in range(d.pair.rep.size):
            cols.append(Vw @ d.pair.rep.indicator(x) @ iota)
    return int(orth_range(np.hstack(cols), np.sqrt(pol.rank_tol)).shape[1])


def weighted_composition_pair(sys: ClassicalSystem, weights: Sequence[Sequence[complex]]) -> CovariantPair:
    """Left covariant pair on ``C^X`` with ``pi`` diagonal and ``T_i e_x = w_i(x) e_{phi_i(x)}``."""
    size = sys.size
    rep = FiniteSpectrumRep.diagonal(list(range(size)), size)
    ops = []
    for i, w in enumerate(weights, start=1):
        T = np.zeros((size, size), dtype=complex)
        for x, y in enumerate(sys.phi(i)):
            T[y, x] = w[x]
        ops.append(T)
    return CovariantPair(rep, TupleRep(ops, "grid"), sys)
