"""Dense and matrix-free linear algebra used by every model module.

Orthonormal frames are plain 2D arrays whose *columns* are the frame vectors;
an empty frame has shape ``(dim, 0)``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as sla

from .errors import SizeError, SolverError, ValidationError

MAX_DIMENSION = 3**13
RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-12
CLUSTER_TOL = 1e-9
DEFAULT_SEED = 0xC0FFEE


def kron(A, B, max_dim: int = MAX_DIMENSION) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > max_dim:
        raise SizeError(f"Kronecker product of dimension {rows}x{cols} exceeds {max_dim}")
    return np.kron(A, B)


def kron_all(mats, max_dim: int = MAX_DIMENSION) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = kron(out, m, max_dim)
    return out


def is_hermitian(H, tol: float = HERMITIAN_TOL) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    scale = np.max(np.abs(H)) if H.size else 0.0
    return bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= tol * max(scale, 1e-300))


def hermitian_eigensystem(H, tol: float = HERMITIAN_TOL):
    """Ascending eigenvalues and an orthonormal frame of eigenvectors of a Hermitian matrix."""
    H = np.asarray(H)
    if not np.all(np.isfinite(H)):
        raise ValidationError("matrix has non-finite entries")
    if not is_hermitian(H, tol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    try:
        w, v = la.eigh(H)
    except la.LinAlgError as exc:
        raise SolverError(f"dense eigensolver failed: {exc}") from exc
    return w, v


def hermitian_eigvals(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H)
    if not is_hermitian(H, tol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    try:
        return la.eigvalsh(H)
    except la.LinAlgError as exc:
        raise SolverError(f"dense eigensolver failed: {exc}") from exc


def krylov_lowest_eigs(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    how_many: int,
    tol: float = 0.0,
    seed: int = DEFAULT_SEED,
    dtype=complex,
    maxiter: int | None = None,
    return_vectors: bool = False,
    shift: float = 0.0,
):
    """Lowest ``how_many`` eigenvalues of a Hermitian map given only by its action.

    Backed by ARPACK's implicitly restarted Lanczos iteration, started from a
    seeded random vector so repeated calls agree bit for bit.  With
    ``return_vectors`` the matching orthonormal eigenvectors come back as columns.

    ARPACK drops the part of the start vector lying in the null space of the
    operator, so an exactly-zero eigenvector that decouples from the rest is never
    found.  ``shift`` is added to the operator (and removed from the result); a
    value above minus the lower spectral bound makes the operator definite.
    """
    if how_many < 1 or dim < how_many:
        raise ValidationError(f"need 1 <= how_many <= dim, got how_many={how_many}, dim={dim}")
    dtype = np.dtype(dtype)
    if dim <= max(2 * how_many + 2, 32):
        # ARPACK needs how_many well below dim; tiny problems go dense.
        cols = [np.asarray(apply(e)) for e in np.eye(dim, dtype=dtype)]
        H = np.column_stack(cols)
        H = 0.5 * (H + H.conj().T)
        w, v = la.eigh(H)
        return (w[:how_many], v[:, :how_many]) if return_vectors else w[:how_many]
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    if dtype.kind == "c":
        v0 = v0 + 1j * rng.standard_normal(dim)
    v0 = v0.astype(dtype)
    matvec = apply if shift == 0.0 else (lambda v: apply(v) + shift * v)
    op = sla.LinearOperator((dim, dim), matvec=matvec, dtype=dtype)
    ncv = min(dim, max(2 * how_many + 1, how_many + 20))
    try:
        out = sla.eigsh(op, k=how_many, which="SA", v0=v0, tol=tol, ncv=ncv,
                        maxiter=maxiter, return_eigenvectors=return_vectors)
    except sla.ArpackNoConvergence as exc:
        raise SolverError(f"Krylov solver did not converge: {exc}",
                          iterations=maxiter) from exc
    if not return_vectors:
        return np.sort(np.real(out)) - shift
    w, v = out
    order = np.argsort(w)
    return np.real(w[order]) - shift, v[:, order]


def orthonormal_frame_of_span(vectors, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the same space as the input columns.

    A list of 1D vectors is stacked as columns.  The numerical rank counts
    singular values at or above ``rank_tol`` times the largest one.
    """
    if isinstance(vectors, (list, tuple)):
        if not vectors:
            raise ValidationError("need at least one vector")
        M = np.column_stack([np.asarray(v) for v in vectors])
    else:
        M = np.asarray(vectors)
        if M.ndim == 1:
            M = M[:, None]
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = la.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[0], 0), dtype=U.dtype)
    r = int(np.count_nonzero(s >= rank_tol * s[0]))
    return U[:, :r]


def projector_onto(frame) -> np.ndarray:
    F = np.asarray(frame)
    P = F @ F.conj().T
    return 0.5 * (P + P.conj().T)


def complement_frame(frame, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal frame of the orthogonal complement of ``frame``."""
    F = np.asarray(frame)
    dim = F.shape[0]
    if F.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    Q, _ = la.qr(F, mode="full")
    # QR of an orthonormal frame puts its span in the leading columns.
    return Q[:, F.shape[1]:]


def subspace_distance(F1, F2) -> float:
    """Operator norm of the difference of the two orthogonal projectors."""
    F1 = np.asarray(F1)
    F2 = np.asarray(F2)
    if F1.shape[0] != F2.shape[0]:
        raise ValidationError("frames live in different ambient dimensions")
    d12 = _residual_norm(F1, F2)
    d21 = _residual_norm(F2, F1)
    return float(max(d12, d21))


def _residual_norm(A, B) -> float:
    # ||(1 - P_B) P_A|| = ||A - B (B^H A)||_2 for orthonormal A, B.
    if A.shape[1] == 0:
        return 0.0
    if B.shape[1] == 0:
        return 1.0
    R = A - B @ (B.conj().T @ A)
    return float(np.linalg.norm(R, 2))


def kernel_dimension(eigenvalues, scale: float, rel_tol: float = CLUSTER_TOL) -> int:
    """Size of the cluster of eigenvalues sitting at the bottom of the spectrum."""
    w = np.sort(np.asarray(eigenvalues, dtype=float))
    if w.size == 0:
        return 0
    return int(np.count_nonzero(w - w[0] <= rel_tol * max(scale, 1.0)))


def operator_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A), 2))
