"""Dense complex operators with labeled orthonormal bases, plus positivity tools."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

Label = Hashable


class StructureError(ValueError):
    """Shape or basis-label mismatch."""


class PositivityError(ValueError):
    """A matrix required to be positive semidefinite is not, beyond tolerance."""

    def __init__(self, msg: str, min_eig: float):
        super().__init__(msg)
        self.min_eig = min_eig


class ContractionError(ValueError):
    def __init__(self, msg: str, norm: float):
        super().__init__(msg)
        self.norm = norm


class HermitianError(ValueError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class TolerancePolicy:
    residual_tol: float = 1e-10
    psd_tol: float = 1e-8
    rank_tol: float = 1e-8

    def __post_init__(self):
        for name in ("residual_tol", "psd_tol", "rank_tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_POLICY = TolerancePolicy()


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class Operator:
    """A matrix together with the labels of its row and column bases."""

    mat: np.ndarray
    rows: tuple = field(default=())
    cols: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2:
            raise StructureError(f"operator entries must be 2-d, got shape {m.shape}")
        rows = tuple(self.rows) if self.rows else tuple(range(m.shape[0]))
        cols = tuple(self.cols) if self.cols else tuple(range(m.shape[1]))
        if len(rows) != m.shape[0] or len(cols) != m.shape[1]:
            raise StructureError(
                f"basis sizes ({len(rows)}, {len(cols)}) do not match entries {m.shape}"
            )
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def square(cls, mat, labels: Sequence[Label] | None = None) -> "Operator":
        labels = tuple(labels) if labels is not None else ()
        return cls(mat, labels, labels)

    @classmethod
    def identity(cls, labels: Sequence[Label]) -> "Operator":
        labels = tuple(labels)
        return cls(np.eye(len(labels), dtype=complex), labels, labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mat.shape

    @property
    def is_square(self) -> bool:
        return self.mat.shape[0] == self.mat.shape[1] and self.rows == self.cols

    @property
    def H(self) -> "Operator":
        return Operator(self.mat.conj().T, self.cols, self.rows)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.cols != other.rows:
            raise StructureError("basis mismatch in operator product")
        return Operator(self.mat @ other.mat, self.rows, other.cols)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same(other)
        return Operator(self.mat + other.mat, self.rows, self.cols)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same(other)
        return Operator(self.mat - other.mat, self.rows, self.cols)

    def __mul__(self, c) -> "Operator":
        return Operator(self.mat * c, self.rows, self.cols)

    __rmul__ = __mul__

    def _check_same(self, other: "Operator") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise StructureError("basis mismatch")

    def norm(self) -> float:
        return opnorm(self.mat)

    def index(self, labels: Sequence[Label], axis: str = "cols") -> list[int]:
        basis = self.cols if axis == "cols" else self.rows
        pos = {lab: k for k, lab in enumerate(basis)}
        try:
            return [pos[lab] for lab in labels]
        except KeyError as exc:
            raise StructureError(f"unknown label {exc.args[0]!r}") from None

    def to_wire(self) -> dict:
        return {
            "rows": [_label_wire(r) for r in self.rows],
            "cols": [_label_wire(c) for c in self.cols],
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.mat],
        }

    @classmethod
    def from_wire(cls, data) -> "Operator":
        """Accepts either the full dict form or a bare row-major nested array."""
        if isinstance(data, dict):
            entries = parse_matrix(data["entries"])
            rows = tuple(_label_from_wire(r) for r in data.get("rows", ()))
            cols = tuple(_label_from_wire(c) for c in data.get("cols", ()))
            return cls(entries, rows, cols)
        return cls(parse_matrix(data))


def _label_wire(lab):
    if isinstance(lab, tuple):
        return [_label_wire(x) for x in lab]
    return lab


def _label_from_wire(lab):
    if isinstance(lab, list):
        return tuple(_label_from_wire(x) for x in lab)
    return lab


def parse_scalar(z) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise StructureError(f"complex scalar must be [re, im], got {z!r}")
        return complex(float(z[0]), float(z[1]))
    return complex(float(z))


def parse_matrix(rows) -> np.ndarray:
    """Row-major nested array with entries either reals or ``[re, im]`` pairs."""
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise StructureError("matrix must be a list of rows")
    width = {len(r) for r in rows}
    if len(width) > 1:
        raise StructureError("ragged matrix rows")
    return np.array([[parse_scalar(z) for z in r] for r in rows], dtype=complex).reshape(
        len(rows), width.pop() if width else 0
    )


def _as_array(A) -> np.ndarray:
    return A.mat if isinstance(A, Operator) else np.asarray(A, dtype=complex)


def hermitian_part(A, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    a = _as_array(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {a.shape}")
    skew = a - a.conj().T
    # Frobenius bounds the spectral norm from above, so small values settle it cheaply
    if float(np.linalg.norm(skew)) > pol.residual_tol:
        res = opnorm(skew)
        scale = max(1.0, opnorm(a))
        if res > pol.residual_tol * scale:
            raise HermitianError(f"matrix is not Hermitian (residual {res:.3e})", res)
    return (a + a.conj().T) / 2


def psd_min_eig(A, pol: TolerancePolicy = DEFAULT_POLICY) -> tuple[bool, float]:
    """Smallest eigenvalue of the symmetrized matrix and the PSD verdict."""
    h = hermitian_part(A, pol)
    if h.shape[0] == 0:
        return True, 0.0
    if not np.any(h.imag):
        h = h.real  # real symmetric solve is several times faster
    lam = float(np.linalg.eigvalsh(h)[0])
    return lam >= -pol.psd_tol, lam


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    # first non-negligible entry made real positive, for reproducible output
    out = vecs.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        j = int(np.argmax(np.abs(v) > 1e-12 * max(np.abs(v).max(), 1e-300)))
        if abs(v[j]) > 0:
            out[:, k] = v * (abs(v[j]) / v[j])
    return out


def eigh_sorted(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs ascending by eigenvalue, first nonzero entry of each vector real positive."""
    lam, vecs = np.linalg.eigh(h)
    return lam, _phase_fix(vecs)


def hermitian_sqrt(A, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    h = hermitian_part(A, pol)
    if h.shape[0] == 0:
        return h
    lam, vecs = np.linalg.eigh(h)
    if lam[0] < -pol.psd_tol:
        raise PositivityError(f"matrix is not PSD (min eigenvalue {lam[0]:.3e})", float(lam[0]))
    # eigenvalues at roundoff level are zero; their square roots would not be
    floor = 64 * np.finfo(float).eps * max(1.0, float(np.abs(lam).max()))
    lam = np.where(lam < floor, 0.0, lam)
    return (vecs * np.sqrt(lam)) @ vecs.conj().T


def defect(T, side: str = "left", pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """``(I - T*T)^{1/2}`` for ``side='left'``, ``(I - TT*)^{1/2}`` for ``side='right'``."""
    t = _as_array(T)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise StructureError(f"defect needs a square operator, got {t.shape}")
    nrm = opnorm(t)
    if nrm > 1 + pol.residual_tol:
        raise ContractionError(f"not a contraction: ||T|| = {nrm:.6g}", nrm)
    eye = np.eye(t.shape[0])
    if side == "left":
        arg = eye - t.conj().T @ t
    elif side == "right":
        arg = eye - t @ t.conj().T
    else:
        raise ValueError("side must be 'left' or 'right'")
    # symmetrize explicitly: roundoff in T*T is the only non-Hermitian part
    return hermitian_sqrt((arg + arg.conj().T) / 2, pol)


def classify(T, pol: TolerancePolicy = DEFAULT_POLICY) -> dict[str, bool]:
    t = _as_array(T)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise StructureError("classify needs a square operator")
    tol = pol.residual_tol
    eye = np.eye(t.shape[0])
    tstar = t.conj().T
    isometry = opnorm(tstar @ t - eye) <= tol
    coisometry = opnorm(t @ tstar - eye) <= tol
    return {
        "contraction": opnorm(t) <= 1 + tol,
        "isometry": isometry,
        "coisometry": coisometry,
        "unitary": isometry and coisometry,
        "partial_isometry": opnorm(t @ tstar @ t - t) <= tol,
        "projection": opnorm(t @ t - t) <= tol and opnorm(t - tstar) <= tol,
    }


def subspace_compress(A: Operator, labels: Sequence[Label]) -> Operator:
    """Principal submatrix on the given labels."""
    if not A.is_square:
        raise StructureError("compression needs a square operator")
    idx = A.index(labels)
    labels = tuple(labels)
    return Operator(A.mat[np.ix_(idx, idx)], labels, labels)


def direct_sum(ops: Sequence[Operator]) -> Operator:
    """Block diagonal sum; labels become ``(summand index, label)``."""
    mats = [o.mat for o in ops]
    rows = tuple((k, r) for k, o in enumerate(ops) for r in o.rows)
    cols = tuple((k, c) for k, o in enumerate(ops) for c in o.cols)
    out = np.zeros((len(rows), len(cols)), dtype=complex)
    r0 = c0 = 0
    for m in mats:
        out[r0 : r0 + m.shape[0], c0 : c0 + m.shape[1]] = m
        r0 += m.shape[0]
        c0 += m.shape[1]
    return Operator(out, rows, cols)


def tensor(A: Operator, B: Operator) -> Operator:
    """Kronecker product with product labels ``(a, b)``."""
    rows = tuple((a, b) for a in A.rows for b in B.rows)
    cols = tuple((a, b) for a in A.cols for b in B.cols)
    return Operator(np.kron(A.mat, B.mat), rows, cols)


def orth_range(a: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the range of ``a``, singular values above ``tol`` kept."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, s > tol]


def projection_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis for the range of an (approximate) orthogonal projection."""
    if p.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    lam, vecs = eigh_sorted((p + p.conj().T) / 2)
    return vecs[:, lam > 0.5]


def closest_unitary(u: np.ndarray) -> np.ndarray:
    """Polar factor (an isometry when ``u`` is tall), used to scrub roundoff."""
    if u.size == 0:
        return u
    a, _, bh = np.linalg.svd(u, full_matrices=False)
    return a @ bh
