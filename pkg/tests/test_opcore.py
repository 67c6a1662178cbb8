import numpy as np
import pytest
from hypothesis import given, strategies as st

from scpdil.opcore import (
    DEFAULT_POLICY,
    ContractionError,
    HermitianError,
    Operator,
    PositivityError,
    StructureError,
    TolerancePolicy,
    classify,
    defect,
    direct_sum,
    hermitian_sqrt,
    psd_min_eig,
    subspace_compress,
    tensor,
)

from oracles import eig_2x2_hermitian, truncated_shift

seeds = st.integers(0, 2**32 - 1)


def rand_matrix(seed, d):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_tolerance_policy_rejects_negative():
    with pytest.raises(ValueError):
        TolerancePolicy(residual_tol=-1.0)


def test_psd_min_eig_examples():
    assert psd_min_eig(np.eye(3)) == (True, pytest.approx(1.0))
    ok, lam = psd_min_eig(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not ok
    assert lam == pytest.approx(eig_2x2_hermitian(1.0, 2.0, 1.0)[0])
    ok, lam = psd_min_eig(np.ones((3, 3)))
    assert ok and abs(lam) < 1e-12


def test_psd_min_eig_errors():
    with pytest.raises(StructureError):
        psd_min_eig(np.ones((2, 3)))
    with pytest.raises(HermitianError) as exc:
        psd_min_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert exc.value.residual == pytest.approx(1.0)


@given(seeds, seeds, st.integers(1, 4), st.integers(1, 4))
def test_psd_min_eig_of_direct_sum_is_min(s1, s2, d1, d2):
    a = rand_matrix(s1, d1)
    b = rand_matrix(s2, d2)
    A, B = a + a.conj().T, b + b.conj().T
    both = direct_sum([Operator(A), Operator(B)]).mat
    assert psd_min_eig(both)[1] == pytest.approx(min(psd_min_eig(A)[1], psd_min_eig(B)[1]), abs=1e-10)


def test_hermitian_sqrt_examples():
    assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_hermitian_sqrt_clamps_and_rejects():
    s = hermitian_sqrt(np.diag([1.0, -1e-12]))
    assert np.allclose(s, np.diag([1.0, 0.0]))
    with pytest.raises(PositivityError) as exc:
        hermitian_sqrt(np.diag([1.0, -1e-3]))
    assert exc.value.min_eig == pytest.approx(-1e-3)


@given(seeds, st.integers(1, 6))
def test_hermitian_sqrt_reconstructs(seed, d):
    b = rand_matrix(seed, d)
    a = b.conj().T @ b
    s = hermitian_sqrt(a)
    assert np.linalg.norm(s - s.conj().T, 2) < 1e-12
    assert np.linalg.norm(s @ s - a, 2) <= DEFAULT_POLICY.residual_tol * max(1.0, np.linalg.norm(a, 2))
    assert psd_min_eig(s, TolerancePolicy(psd_tol=1e-10))[0]


@given(seeds, st.integers(1, 5))
def test_hermitian_sqrt_fixes_projections(seed, d):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rand_matrix(seed, d))
    k = int(rng.integers(0, d + 1))
    p = q[:, :k] @ q[:, :k].conj().T
    assert np.linalg.norm(hermitian_sqrt(p) - p, 2) < 1e-10


def test_defect_examples():
    assert np.allclose(defect(np.zeros((3, 3))), np.eye(3))
    u = np.array([[0, 1j], [1, 0]])
    assert np.allclose(defect(u), 0) and np.allclose(defect(u, "right"), 0)
    assert defect(np.array([[0.5]]))[0, 0] == pytest.approx(np.sqrt(3) / 2)


def test_defect_rejects_non_contraction():
    with pytest.raises(ContractionError) as exc:
        defect(np.array([[2.0]]))
    assert exc.value.norm == pytest.approx(2.0)
    with pytest.raises(ValueError):
        defect(np.eye(2), side="up")


@given(seeds, st.integers(1, 5))
def test_defect_commutes_with_commutant_of_modulus(seed, d):
    rng = np.random.default_rng(seed)
    # T = U diag(s) V*, so T*T = V diag(s^2) V*; X = V diag(r) V* commutes with it
    u, _ = np.linalg.qr(rand_matrix(seed, d))
    v, _ = np.linalg.qr(rand_matrix(seed + 1, d))
    s = rng.uniform(0, 1, d)
    T = (u * s) @ v.conj().T
    X = (v * rng.standard_normal(d)) @ v.conj().T
    D = defect(T)
    assert np.linalg.norm(X @ D - D @ X, 2) < 1e-10
    assert np.linalg.norm(D @ D - (np.eye(d) - T.conj().T @ T), 2) < 1e-10


def test_classify_examples():
    flags = classify(np.eye(2))
    assert all(flags[k] for k in ("contraction", "isometry", "coisometry", "unitary"))
    s = classify(truncated_shift(3))
    assert s["contraction"] and s["partial_isometry"] and not s["isometry"]
    h = classify(np.array([[0.5]]))
    assert h == {"contraction": True, "isometry": False, "coisometry": False, "unitary": False,
                 "partial_isometry": False, "projection": False}


@given(seeds, st.integers(1, 5))
def test_classify_unitary_consistency(seed, d):
    q, _ = np.linalg.qr(rand_matrix(seed, d))
    f = classify(q)
    assert f["unitary"] and f["isometry"] and f["coisometry"]
    g = classify(rand_matrix(seed, d))
    assert g["unitary"] == (g["isometry"] and g["coisometry"])


def test_compress_sum_tensor():
    I4 = Operator.identity(["a", "b", "c", "d"])
    assert np.allclose(subspace_compress(I4, ["b", "d"]).mat, np.eye(2))
    with pytest.raises(StructureError):
        subspace_compress(I4, ["z"])
    ds = direct_sum([Operator([[1]]), Operator([[2]])])
    assert np.allclose(ds.mat, np.diag([1, 2]))
    assert ds.rows == ((0, 0), (1, 0))
    J = np.array([[0, 1], [0, 0]])
    t = tensor(Operator(np.eye(2)), Operator(J))
    assert t.shape == (4, 4)
    assert np.allclose(t.mat, np.kron(np.eye(2), J))
    assert t.rows[1] == (0, 1)


def test_operator_basics_and_wire_roundtrip():
    a = Operator([[1, 2j], [0, 1]], ("x", "y"), ("x", "y"))
    assert a.H.mat[1, 0] == -2j
    assert np.allclose((a @ a.H).mat, a.mat @ a.mat.conj().T)
    with pytest.raises(StructureError):
        a @ Operator(np.eye(2))
    with pytest.raises(StructureError):
        Operator(np.eye(2), ("only one",))
    b = Operator.from_wire(a.to_wire())
    assert np.array_equal(b.mat, a.mat) and b.rows == a.rows
    c = Operator.from_wire([[[0.5, 0]], ])
    assert c.mat[0, 0] == 0.5
