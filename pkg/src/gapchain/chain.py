"""Open-boundary chain Hamiltonians built from a two-site projector.

``H_[1,N] = sum_x h_{x,x+1}`` is assembled either as a dense matrix or as a
matrix-free operator that applies each bond term through tensor reshapes.
Sites are 0-based internally; site 0 is the most significant tensor factor.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import numerics as nx
from .errors import CertificationError, SizeError, ValidationError

DENSE_CEILING = 4096
PROJECTOR_TOL = 1e-10


@dataclass(frozen=True)
class NearestNeighborInteraction:
    """A Hermitian idempotent on C^d (x) C^d together with its provenance."""

    matrix: np.ndarray
    d: int
    model: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.d * self.d, self.d * self.d):
            raise ValidationError(f"interaction must be {self.d**2}x{self.d**2}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("interaction has non-finite entries")
        scale = max(1.0, np.max(np.abs(m)))
        if np.max(np.abs(m - m.conj().T)) > PROJECTOR_TOL * scale:
            raise ValidationError("interaction is not Hermitian")
        if np.max(np.abs(m @ m - m)) > PROJECTOR_TOL * scale:
            raise ValidationError("interaction is not idempotent")

    @classmethod
    def from_range(cls, vectors, d: int, model: str = "", params: dict | None = None):
        """Orthogonal projection onto the span of the given two-site vectors."""
        frame = nx.orthonormal_frame_of_span(list(vectors))
        return cls(nx.projector_onto(frame), d, model, dict(params or {}))

    @classmethod
    def parent_of(cls, ground_frame, d: int, model: str = "", params: dict | None = None):
        """Projection onto the orthogonal complement of a two-site ground space."""
        P = nx.projector_onto(ground_frame)
        return cls(np.eye(d * d) - P, d, model, dict(params or {}))

    @property
    def rank(self) -> int:
        return int(round(np.real(np.trace(self.matrix))))

    def kernel(self) -> np.ndarray:
        w, v = la.eigh(self.matrix)
        return v[:, w < 0.5]

    def compact(self) -> np.ndarray:
        """The matrix as a real array when it has no imaginary part."""
        m = np.asarray(self.matrix)
        if np.iscomplexobj(m) and np.max(np.abs(m.imag), initial=0.0) == 0.0:
            return np.ascontiguousarray(m.real)
        return m


class ChainHamiltonian:
    """Matrix-free ``sum_x h_{x,x+1}`` on N sites."""

    def __init__(self, h: NearestNeighborInteraction, N: int, max_dim: int = nx.MAX_DIMENSION):
        if N < 2:
            raise ValidationError("a chain needs at least two sites")
        dim = h.d**N
        if dim > max_dim:
            raise SizeError(f"d^N = {dim} exceeds the ceiling {max_dim}")
        self.h = h
        self.N = N
        self.d = h.d
        self.dim = dim
        self._hm = h.compact()
        self.dtype = np.result_type(self._hm, np.float64)

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def norm_bound(self) -> float:
        return float((self.N - 1) * nx.operator_norm(self.h.matrix))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        d, N = self.d, self.N
        v = np.asarray(v)
        out = np.zeros(v.shape, dtype=np.result_type(v, self._hm))
        for x in range(N - 1):
            vr = v.reshape(d**x, d * d, d ** (N - 2 - x))
            out.reshape(d**x, d * d, d ** (N - 2 - x))[...] += np.matmul(self._hm, vr)
        return out

    def term(self, x: int) -> np.ndarray:
        d, N = self.d, self.N
        return nx.kron_all([np.eye(d**x), self._hm, np.eye(d ** (N - 2 - x))])

    def dense(self) -> np.ndarray:
        H = np.zeros(self.shape, dtype=self.dtype)
        for x in range(self.N - 1):
            H += self.term(x)
        return H


def assemble_hamiltonian(h: NearestNeighborInteraction, N: int,
                         dense_ceiling: int = DENSE_CEILING,
                         max_dim: int = nx.MAX_DIMENSION):
    """Dense matrix when ``d^N <= dense_ceiling``, otherwise a :class:`ChainHamiltonian`."""
    op = ChainHamiltonian(h, N, max_dim=max_dim)
    if op.dim <= dense_ceiling:
        return op.dense()
    return op


@dataclass
class SpectrumReport:
    model_id: str
    N: int
    ground_energy: float
    kernel_dim: int
    gap: float
    solver: str
    tolerances: dict
    wall_time: float
    eigenvalues: np.ndarray | None = None

    def as_row(self) -> dict:
        return {
            "model_id": self.model_id,
            "N": self.N,
            "ground_energy": self.ground_energy,
            "kernel_dim": self.kernel_dim,
            "gap": self.gap,
            "solver": self.solver,
            "cluster_tol": self.tolerances.get("cluster_tol"),
            "krylov_tol": self.tolerances.get("krylov_tol"),
            "wall_time": self.wall_time,
        }


def spectral_gap(H, expected_kernel_dim: int | None = None, solver: str = "auto",
                 tol: float = 0.0, seed: int = nx.DEFAULT_SEED,
                 cluster_tol: float = nx.CLUSTER_TOL, model_id: str = "",
                 N: int | None = None) -> SpectrumReport:
    """Ground energy, kernel dimension and gap of a frustration-free chain Hamiltonian.

    The kernel is the cluster of eigenvalues within ``cluster_tol * ||H||`` of the
    lowest one; the gap is the next eigenvalue above it.  A kernel dimension that
    disagrees with ``expected_kernel_dim`` raises :class:`CertificationError`.
    """
    t0 = time.perf_counter()
    if isinstance(H, ChainHamiltonian):
        op = H
        N = H.N if N is None else N
        dense = solver == "dense" or (solver == "auto" and H.dim <= DENSE_CEILING)
        scale = H.norm_bound
        mat = H.dense() if dense else None
    else:
        mat = np.asarray(H)
        op = None
        dense = solver != "krylov"
        scale = None
    if dense:
        w = nx.hermitian_eigvals(mat)
        scale = max(abs(w[0]), abs(w[-1])) if scale is None else scale
        used = "dense"
    else:
        if op is None:
            apply = lambda v: mat @ v  # noqa: E731
            dim, dtype = mat.shape[0], mat.dtype
            # Row-sum bound on the norm; an exact 2-norm would cost a full SVD.
            scale = float(np.max(np.sum(np.abs(mat), axis=1)))
        else:
            apply, dim, dtype = op.matvec, op.dim, op.dtype
        w = _deflated_krylov(apply, dim, dtype, scale, (expected_kernel_dim or 4) + 4,
                             tol, seed, cluster_tol)
        used = "krylov"
    m = nx.kernel_dimension(w, scale, cluster_tol)
    gap = float(w[m] - w[0]) if m < len(w) else float("nan")
    report = SpectrumReport(
        model_id=model_id,
        N=N if N is not None else -1,
        ground_energy=float(w[0]),
        kernel_dim=m,
        gap=gap,
        solver=used,
        tolerances={"cluster_tol": cluster_tol, "krylov_tol": tol, "scale": scale},
        wall_time=time.perf_counter() - t0,
        eigenvalues=np.asarray(w),
    )
    if expected_kernel_dim is not None and m != expected_kernel_dim:
        err = CertificationError(
            f"{model_id or 'model'} N={report.N}: kernel dimension {m}, expected {expected_kernel_dim}")
        err.report = report
        raise err
    return report


def _deflated_krylov(apply, dim, dtype, scale, want, tol, seed, cluster_tol):
    """Bottom cluster plus the next eigenvalue, found with explicit deflation.

    A single Krylov sequence sees at most one direction of an exactly degenerate
    eigenspace, so cluster vectors found so far are pushed above the spectrum and
    the solver is rerun until its lowest eigenvalue leaves the cluster.  Each rerun
    starts from a fresh seeded vector: the old start has no weight on the cluster
    directions still missing.
    """
    shift = 2.0 * scale + 1.0
    found = np.zeros((dim, 0), dtype=np.result_type(dtype, np.float64))
    cluster = []
    ground = None
    cut = cluster_tol * max(scale, 1.0)
    for rnd in itertools.count():
        F = found

        def op(v, F=F):
            if F.shape[1] == 0:
                return apply(v)
            c = F.conj().T @ v
            u = v - F @ c
            Hu = apply(u)
            return Hu - F @ (F.conj().T @ Hu) + shift * (F @ c)

        k = min(want, dim - found.shape[1])
        if k < 1:
            return np.sort(np.asarray(cluster))
        w, V = nx.krylov_lowest_eigs(op, dim, k, tol=tol, seed=seed if rnd == 0 else (seed, rnd), dtype=found.dtype,
                                     return_vectors=True, shift=scale + 1.0)
        if ground is None:
            ground = w[0]
        inside = w - ground <= cut
        if not inside.any():
            return np.sort(np.concatenate([cluster, w]))
        cluster.extend(w[inside])
        new = V[:, inside]
        if found.shape[1]:
            new = new - found @ (found.conj().T @ new)
        q, r = la.qr(new, mode="economic")
        keep = np.abs(np.diag(r)) > 1e-8
        found = np.hstack([found, q[:, keep]])


def chain_kernels(h: NearestNeighborInteraction, N: int, tol: float = 1e-9,
                  max_dim: int = nx.MAX_DIMENSION) -> dict[int, np.ndarray]:
    """Orthonormal frames of ker H_[1,m] for m = 2..N, built site by site.

    ``ker H_[1,m+1] = (ker H_[1,m] (x) C^d)  intersected with  ker h_{m,m+1}``; the second
    condition is imposed on the small compression of ``h`` to the first space.
    """
    d = h.d
    if d**N > max_dim:
        raise SizeError(f"d^N = {d**N} exceeds the ceiling {max_dim}")
    hm = h.compact()
    K = h.kernel()
    if not np.iscomplexobj(hm):
        K = np.real_if_close(K)
    frames = {2: K}
    for m in range(2, N):
        r = K.shape[1]
        cand = np.einsum("ar,bc->abrc", K, np.eye(d)).reshape(d ** (m + 1), r * d)
        hc = np.matmul(hm, cand.reshape(d ** (m - 1), d * d, r * d)).reshape(d ** (m + 1), r * d)
        C = cand.conj().T @ hc
        w, v = la.eigh(0.5 * (C + C.conj().T))
        K = cand @ v[:, w <= tol]
        frames[m + 1] = K
    return frames


def chain_kernel(h: NearestNeighborInteraction, N: int, tol: float = 1e-9) -> np.ndarray:
    if N == 2:
        return h.kernel()
    return chain_kernels(h, N, tol)[N]
