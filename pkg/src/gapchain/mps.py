"""Finitely correlated states generated by a family of k x k matrices.

A family ``v = (v_1, ..., v_d)`` defines the map
``Gamma_N(B) = sum_{i_1..i_N} Tr(B v_{i_N} ... v_{i_1}) e_{i_1} (x) ... (x) e_{i_N}``
and the transfer operator ``E(X) = sum_i v_i^dagger X v_i``.  Words are indexed with
``i_1`` as the most significant digit, matching ``numpy.kron`` ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

from . import numerics as nx
from .chain import NearestNeighborInteraction, chain_kernels
from .errors import CertificationError, SizeError, ValidationError

BIORTHO_TOL = 1e-8
CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class MpsFamily:
    """``d`` matrices of size ``k x k``, stored as an array of shape ``(d, k, k)``."""

    matrices: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValidationError(f"family must have shape (d, k, k), got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("family has non-finite entries")
        object.__setattr__(self, "matrices", m)

    @classmethod
    def of(cls, mats: Sequence) -> "MpsFamily":
        return cls(np.array([np.asarray(a, dtype=complex) for a in mats]))

    @property
    def d(self) -> int:
        return self.matrices.shape[0]

    @property
    def k(self) -> int:
        return self.matrices.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self.matrices[i]

    def __len__(self) -> int:
        return self.d

    def rotated(self, U) -> "MpsFamily":
        """Family for the local basis ``e'_b = sum_a U[a, b] e_a``: ``v'_b = sum_a conj(U[a, b]) v_a``.

        With this rule ``Gamma'_N(B)`` written in the primed basis is the same
        vector as ``Gamma_N(B)`` written in the original one.
        """
        U = np.asarray(U)
        return MpsFamily(np.einsum("ab,aij->bij", U.conj(), self.matrices))


class QuadraticRelation(NamedTuple):
    """``sum c v_i v_j = sum c' v_k v_l``; indices refer to positions in the family."""

    lhs: tuple
    rhs: tuple = ()
    label: str = ""

    def residual(self, family: MpsFamily) -> float:
        def side(terms):
            out = np.zeros((family.k, family.k), dtype=complex)
            for c, (i, j) in terms:
                out += c * family[i] @ family[j]
            return out

        return float(np.linalg.norm(side(self.lhs) - side(self.rhs), 2))


def check_quadratic_relations(family: MpsFamily, relations: Sequence[QuadraticRelation]) -> float:
    """Largest operator-norm residual over the relations (0 for an empty list)."""
    return max((r.residual(family) for r in relations), default=0.0)


# ---------------------------------------------------------------------------
# transfer operator


def transfer_operator(family: MpsFamily) -> np.ndarray:
    """Matrix of ``X -> sum_i v_i^dagger X v_i`` on row-major vectorized ``k x k`` matrices."""
    v = family.matrices
    return sum(np.kron(a.conj().T, a.T) for a in v)


def apply_transfer(family: MpsFamily, X: np.ndarray) -> np.ndarray:
    v = family.matrices
    return np.einsum("iba,bc,icd->ad", v.conj(), X, v)


@dataclass
class TransferSpectrum:
    """Eigen-decomposition ``E = sum_j t_j |R_j)(L_j|`` with ``Tr(L_i R_j) = delta_ij``.

    Eigenvalues are ordered by decreasing modulus, ties broken by increasing
    phase in (-pi, pi].  ``right[j]`` and ``left[j]`` are ``k x k`` matrices.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    biorthogonality_error: float

    def __len__(self):
        return len(self.eigenvalues)

    def project(self, X, j: int) -> complex:
        return complex(np.trace(self.left[j] @ X))


def _order(eigs: np.ndarray) -> np.ndarray:
    keys = [(-round(abs(t), 9), round(float(np.angle(t)) if abs(t) > 1e-12 else 0.0, 9)) for t in eigs]
    return np.array(sorted(range(len(eigs)), key=lambda i: keys[i]))


def transfer_spectrum(family: MpsFamily) -> TransferSpectrum:
    """Diagonalize the transfer operator; raise if it is (numerically) not diagonalizable."""
    k = family.k
    M = transfer_operator(family)
    t, R = la.eig(M)
    idx = _order(t)
    t, R = t[idx], R[:, idx]
    cond = np.linalg.cond(R)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise CertificationError(
            f"transfer operator is not diagonalizable (eigenvector condition {cond:.3g}); "
            f"eigenvalues {np.round(t, 8).tolist()}")
    # Scale each right eigenvector so its largest entry is real and positive.
    for j in range(R.shape[1]):
        col = R[:, j]
        p = np.argmax(np.abs(col))
        R[:, j] = col / col[p] * (np.abs(col[p]) / np.linalg.norm(col, np.inf))
        R[:, j] /= np.max(np.abs(R[:, j]))
    Linv = np.linalg.inv(R)
    right = np.array([R[:, j].reshape(k, k) for j in range(k * k)])
    # Row j of R^{-1} is the functional X -> Tr(L_j X), so L_j = row.reshape(k, k).T.
    left = np.array([Linv[j].reshape(k, k).T for j in range(k * k)])
    gram = np.einsum("iab,jba->ij", left, right)
    err = float(np.max(np.abs(gram - np.eye(k * k))))
    if err > BIORTHO_TOL:
        raise CertificationError(f"left/right eigenvectors fail biorthogonality ({err:.3g})")
    return TransferSpectrum(t, right, left, err)


# ---------------------------------------------------------------------------
# the map Gamma_N and its range


def word_products(family: MpsFamily, N: int, max_dim: int = nx.MAX_DIMENSION) -> np.ndarray:
    """Array ``W`` of shape ``(d^N, k, k)`` with ``W[word] = v_{i_N} ... v_{i_1}``."""
    d, k = family.d, family.k
    if N < 1:
        raise ValidationError("N must be positive")
    if d**N > max_dim:
        raise SizeError(f"d^N = {d**N} exceeds the ceiling {max_dim}")
    v = family.matrices
    W = v.copy()
    for _ in range(N - 1):
        W = np.einsum("jab,wbc->wjac", v, W).reshape(-1, k, k)
    return W


def gamma_map(family: MpsFamily, N: int, B) -> np.ndarray:
    """The vector ``Gamma_N(B)`` in ``(C^d)^{(x) N}``."""
    B = np.asarray(B)
    if B.shape != (family.k, family.k):
        raise ValidationError(f"B must be {family.k}x{family.k}")
    W = word_products(family, N)
    return np.einsum("ab,wba->w", B, W)


def gamma_matrix(family: MpsFamily, N: int) -> np.ndarray:
    """Matrix of ``Gamma_N``: column ``p*k + q`` is ``Gamma_N(E_pq)``."""
    W = word_products(family, N)
    return W.transpose(0, 2, 1).reshape(W.shape[0], -1)


def ground_space(family: MpsFamily, N: int, rank_tol: float = nx.RANK_TOL) -> np.ndarray:
    """Orthonormal frame of ``Ran Gamma_N``."""
    return nx.orthonormal_frame_of_span(gamma_matrix(family, N), rank_tol)


def _local_superop(family: MpsFamily, A) -> np.ndarray:
    # Matrix of X -> sum_ij A_ij v_i^dagger X v_j in the row-major vec basis.
    v = family.matrices
    A = np.asarray(A)
    return np.einsum("ij,iab,jdc->bcad", A, v.conj(), v).reshape(family.k**2, family.k**2)


def mps_overlap(family: MpsFamily, B_left, B_right, N: int, observable=None) -> complex:
    """``<Gamma_N(B_left), A Gamma_N(B_right)>``.

    ``observable`` may be ``None`` (identity), a list of N single-site ``d x d``
    matrices (a product observable, site 1 first), or a dense ``d^N x d^N`` matrix.
    Only the dense case touches the full Hilbert space.
    """
    k = family.k
    BL = np.asarray(B_left)
    BR = np.asarray(B_right)
    if observable is not None and not isinstance(observable, (list, tuple)):
        A = np.asarray(observable)
        if A.ndim == 2 and A.shape[0] == family.d**N:
            psi_l = gamma_map(family, N, BL)
            psi_r = gamma_map(family, N, BR)
            return complex(np.vdot(psi_l, A @ psi_r))
        raise ValidationError("dense observable has the wrong dimension")
    if observable is None:
        S = np.linalg.matrix_power(transfer_operator(family), N)
    else:
        if len(observable) != N:
            raise ValidationError(f"product observable needs {N} factors")
        S = np.eye(k * k, dtype=complex)
        # The outermost factor of v_{i_1}^dagger ... X ... v_{j_1} is site 1.
        for A in observable:
            S = S @ _local_superop(family, A)
    # X_pq = B_L^dagger |p><q| B_R; the overlap is sum_pq <p| E(X_pq) |q>.
    X = np.einsum("ap,qb->pqab", BL.conj().T, BR).reshape(k, k, k * k)
    Y = np.einsum("ij,pqj->pqi", S, X).reshape(k, k, k, k)
    return complex(np.einsum("pqpq->", Y))


# ---------------------------------------------------------------------------
# intersection property and martingale coefficients


@dataclass
class IntersectionReport:
    holds: bool
    distance: float
    range_dim: int
    kernel_dim: int
    local_distance: float
    message: str = ""


def check_intersection_property(h: NearestNeighborInteraction, family: MpsFamily, N: int,
                                tol: float = 1e-8) -> IntersectionReport:
    """Compare ``Ran Gamma_N`` with ``ker H_[1,N]`` after checking ``ker h = Ran Gamma_2``."""
    G2 = ground_space(family, 2)
    local = nx.subspace_distance(G2, h.kernel())
    if local > tol:
        return IntersectionReport(False, float("nan"), -1, -1, local,
                                  f"ker h differs from Ran Gamma_2 (distance {local:.3g})")
    GN = ground_space(family, N)
    KN = chain_kernels(h, N)[N] if N > 2 else h.kernel()
    dist = nx.subspace_distance(GN, KN)
    same = GN.shape[1] == KN.shape[1]
    holds = bool(same and dist <= tol)
    msg = "" if holds else f"dim Ran={GN.shape[1]}, dim ker={KN.shape[1]}, distance {dist:.3g}"
    return IntersectionReport(holds, dist, GN.shape[1], KN.shape[1], local, msg)


def _ground_frames(h: NearestNeighborInteraction, upto: int, family: MpsFamily | None) -> dict:
    if family is None:
        return chain_kernels(h, upto)
    return {m: ground_space(family, m) for m in range(2, upto + 1)}


def martingale_coefficient(h: NearestNeighborInteraction, family: MpsFamily | None,
                           k: int, N: int) -> float:
    """``|| G_[N-k+2, N+1] (G_[1,N] - G_[1,N+1]) ||`` without forming full projectors.

    ``G_I`` is the projection onto the ground space of the chain restricted to I.
    The ground spaces are kernels of the chain (or ``Ran Gamma`` when a family
    is supplied).  The norm is the square root of the top eigenvalue of the small
    Gram matrix of ``1 (x) P_k`` restricted to ``Ran(G_N (x) 1) minus Ran G_{N+1}``.
    """
    d = h.d
    if not 2 <= k <= N:
        raise ValidationError(f"need 2 <= k <= N, got k={k}, N={N}")
    frames = _ground_frames(h, N + 1, family)
    FN, FN1, Fk = frames[N], frames[N + 1], frames[k]
    r = FN.shape[1]
    cand = np.einsum("ar,bc->abrc", FN, np.eye(d)).reshape(d ** (N + 1), r * d)
    C = cand.conj().T @ FN1
    Y = nx.complement_frame(nx.orthonormal_frame_of_span(C)) if C.shape[1] else np.eye(r * d)
    Phi = cand @ Y
    if Phi.shape[1] == 0:
        return 0.0
    L = d ** (N + 1 - k)
    Z = np.einsum("lkc,kr->lrc", Phi.reshape(L, d**k, -1), Fk.conj()).reshape(-1, Phi.shape[1])
    gram = Z.conj().T @ Z
    top = la.eigvalsh(0.5 * (gram + gram.conj().T))[-1]
    return float(np.sqrt(max(top, 0.0)))


def martingale_coefficient_dense(h: NearestNeighborInteraction, k: int, N: int) -> float:
    """Reference value of the martingale coefficient from full projectors (small N only)."""
    d = h.d
    frames = chain_kernels(h, N + 1)
    PN = np.kron(nx.projector_onto(frames[N]), np.eye(d))
    PN1 = nx.projector_onto(frames[N + 1])
    Pk = np.kron(np.eye(d ** (N + 1 - k)), nx.projector_onto(frames[k]))
    return nx.operator_norm(Pk @ (PN - PN1))


class MartingaleBound(NamedTuple):
    value: float
    applicable: bool


def martingale_gap_bound(gamma_k: float, k: int, eps_k: float) -> MartingaleBound:
    """``(gamma_k / (k - 1)) (1 - eps_k sqrt(k))^2`` when ``eps_k < 1/sqrt(k)``, else 0."""
    if k < 2:
        raise ValidationError("k must be at least 2")
    if eps_k < 0 or gamma_k < 0:
        raise ValidationError("gamma_k and eps_k must be non-negative")
    if eps_k >= 1.0 / np.sqrt(k):
        return MartingaleBound(0.0, False)
    return MartingaleBound(float(gamma_k / (k - 1) * (1.0 - eps_k * np.sqrt(k)) ** 2), True)


def first_admissible_k(eps_by_k: dict) -> int | None:
    """Smallest ``k`` with ``eps_k**2 < 1/k``, the measured onset of the martingale bound."""
    for k in sorted(eps_by_k):
        if eps_by_k[k] ** 2 < 1.0 / k:
            return int(k)
    return None


def fit_decay_rate(ks, values) -> float:
    """Least-squares rate ``r`` in ``values ~ C r^k`` (log-linear fit)."""
    ks = np.asarray(ks, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    slope = np.polyfit(ks, y, 1)[0]
    return float(np.exp(slope))
