import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapchain import numerics as nx
from gapchain.errors import SizeError, ValidationError


def kron_loops(A, B):
    # Reference Kronecker product from its index definition.
    ra, ca = A.shape
    rb, cb = B.shape
    out = np.zeros((ra * rb, ca * cb), dtype=np.result_type(A, B))
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for m in range(cb):
                    out[i * rb + k, j * cb + m] = A[i, j] * B[k, m]
    return out


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (X + X.conj().T) / 2


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_kron_matches_index_definition(ra, ca, rb, cb, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((ra, ca)) + 1j * rng.standard_normal((ra, ca))
    B = rng.standard_normal((rb, cb))
    assert np.allclose(nx.kron(A, B), kron_loops(A, B), atol=1e-14)


def test_kron_all_and_ceiling():
    mats = [np.eye(2), np.array([[0, 1], [1, 0]]), np.diag([1.0, -1.0])]
    assert np.array_equal(nx.kron_all(mats), np.kron(np.kron(mats[0], mats[1]), mats[2]))
    with pytest.raises(SizeError):
        nx.kron(np.eye(100), np.eye(100), max_dim=1000)


def test_hermitian_eigensystem_rejects_bad_input():
    with pytest.raises(ValidationError):
        nx.hermitian_eigensystem(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        nx.hermitian_eigensystem(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    w, v = nx.hermitian_eigensystem(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])
    assert np.allclose(v.conj().T @ v, np.eye(3))


@pytest.mark.parametrize("n", [10, 60, 200])
def test_krylov_matches_dense(n):
    rng = np.random.default_rng(n)
    H = random_hermitian(rng, n)
    w = nx.krylov_lowest_eigs(lambda v: H @ v, n, 5)
    assert np.allclose(w, np.linalg.eigvalsh(H)[:5], atol=1e-10)


def test_krylov_vectors_and_determinism():
    rng = np.random.default_rng(7)
    H = random_hermitian(rng, 120)
    w1, v1 = nx.krylov_lowest_eigs(lambda v: H @ v, 120, 4, return_vectors=True)
    w2 = nx.krylov_lowest_eigs(lambda v: H @ v, 120, 4)
    assert np.array_equal(w1, w2)
    assert np.allclose(H @ v1, v1 * w1, atol=1e-9)


def test_krylov_shift_keeps_null_vectors():
    # A zero eigenvalue on a basis vector decoupled from everything else.
    rng = np.random.default_rng(11)
    X = rng.standard_normal((99, 99))
    H = np.zeros((100, 100))
    H[1:, 1:] = X @ X.T / 99 + 0.5 * np.eye(99)
    w = nx.krylov_lowest_eigs(lambda v: H @ v, 100, 3, dtype=float, shift=np.abs(H).sum(1).max() + 1)
    assert abs(w[0]) < 1e-10
    assert np.allclose(w, np.linalg.eigvalsh(H)[:3], atol=1e-10)


def test_krylov_rejects_bad_counts():
    with pytest.raises(ValidationError):
        nx.krylov_lowest_eigs(lambda v: v, 5, 0)
    with pytest.raises(ValidationError):
        nx.krylov_lowest_eigs(lambda v: v, 5, 6)


def test_frame_projector_and_complement():
    v = [np.array([1.0, 1.0, 0.0]), np.array([2.0, 2.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    F = nx.orthonormal_frame_of_span(v)
    assert F.shape == (3, 2)
    P = nx.projector_onto(F)
    assert np.allclose(P @ P, P)
    C = nx.complement_frame(F)
    assert C.shape == (3, 1)
    assert np.allclose(F.conj().T @ C, 0)
    assert nx.orthonormal_frame_of_span(np.zeros((4, 0))).shape == (4, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_subspace_distance_properties(dim, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, dim))
    A = nx.orthonormal_frame_of_span(rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r)))
    B = nx.orthonormal_frame_of_span(rng.standard_normal((dim, r)))
    d_ab = nx.subspace_distance(A, B)
    assert 0 <= d_ab <= 1 + 1e-12
    assert abs(d_ab - nx.subspace_distance(B, A)) < 1e-12
    # Agrees with the norm of the projector difference.
    assert abs(d_ab - np.linalg.norm(nx.projector_onto(A) - nx.projector_onto(B), 2)) < 1e-10
    # Invariant under a change of frame of the same space.
    Q, _ = np.linalg.qr(rng.standard_normal((r, r)))
    assert nx.subspace_distance(A, A @ Q) < 1e-12


def test_kernel_dimension_cluster():
    assert nx.kernel_dimension([0.0, 1e-12, 2e-12, 0.3], scale=5.0) == 3
    assert nx.kernel_dimension([0.0, 1e-6, 0.3], scale=5.0) == 1
    assert nx.kernel_dimension([], scale=1.0) == 0
