"""Product vacua with boundary states.

Local basis ``e_0, e_1, ..., e_n``: ``e_0`` is the vacuum and ``e_i`` carries one
particle of type i.  A model is fixed by weights ``lambda_1..lambda_n > 0``
(``lambda_0 = 1``) and antisymmetric phases ``theta_ij``.  Particles with
``lambda < 1`` bind to the left edge, those with ``lambda > 1`` to the right edge.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
from scipy.special import eval_chebyu

from . import numerics as nx
from .chain import NearestNeighborInteraction
from .errors import CertificationError, CriticalModelError, PhaseObstructionError, ValidationError
from .mps import MpsFamily, QuadraticRelation, gamma_map, mps_overlap

SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
SIGMA_MINUS = SIGMA_PLUS.T.copy()
P_UP = np.diag([1.0, 0.0])


@dataclass(frozen=True)
class PvbsParams:
    lambdas: tuple
    thetas: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = tuple(self.lambdas)
        for x in lam:
            if isinstance(x, complex) or np.iscomplexobj(x):
                raise ValidationError("weights must be real and positive")
            if not np.isfinite(x) or x <= 0:
                raise ValidationError(f"weights must be positive, got {x}")
        object.__setattr__(self, "lambdas", tuple(float(x) for x in lam))
        n = len(lam)
        th = {}
        for key, val in dict(self.thetas).items():
            i, j = (int(t) for t in key)
            if not (0 <= i <= n and 0 <= j <= n) or i == j:
                raise ValidationError(f"bad phase index {key} for n={n}")
            if not np.isfinite(val):
                raise ValidationError("phases must be finite")
            if i > j:
                i, j, val = j, i, -val
            th[(i, j)] = float(val)
        object.__setattr__(self, "thetas", th)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def d(self) -> int:
        return self.n + 1

    def lam(self, i: int) -> float:
        return 1.0 if i == 0 else self.lambdas[i - 1]

    def theta(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i < j:
            return self.thetas.get((i, j), 0.0)
        return -self.thetas.get((j, i), 0.0)

    @property
    def gapped_admissible(self) -> bool:
        return all(x != 1.0 for x in self.lambdas)

    def to_json(self) -> dict:
        return {"lambda": list(self.lambdas),
                "theta": {f"{i},{j}": v for (i, j), v in sorted(self.thetas.items())}}

    @classmethod
    def from_json(cls, obj) -> "PvbsParams":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if "lambda" not in obj:
            raise ValidationError("PVBS parameters need a 'lambda' list")
        thetas = {}
        for key, val in (obj.get("theta") or {}).items():
            parts = str(key).split(",")
            if len(parts) != 2:
                raise ValidationError(f"phase key must look like 'i,j', got {key!r}")
            try:
                thetas[(int(parts[0]), int(parts[1]))] = float(val)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"bad phase entry {key!r}: {val!r}") from exc
        lam = obj["lambda"]
        lam = [lam] if np.isscalar(lam) else lam
        try:
            lam = tuple(float(x) for x in lam)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"weights must be numbers, got {obj['lambda']!r}") from exc
        return cls(lam, thetas)

    def label(self) -> str:
        lam = ",".join(f"{x:g}" for x in self.lambdas)
        return f"pvbs[{lam}]"


class PhaseLabel(NamedTuple):
    n_L: int
    n_R: int


def classify(p: PvbsParams) -> PhaseLabel:
    if not p.gapped_admissible:
        raise CriticalModelError(f"{p.label()} has a weight equal to 1 and no phase label")
    n_L = sum(1 for x in p.lambdas if x < 1)
    return PhaseLabel(n_L, p.n - n_L)


# ---------------------------------------------------------------------------
# interaction and representation


def interaction_vectors(p: PvbsParams) -> list[np.ndarray]:
    """The vectors spanning the range of the interaction."""
    d = p.d
    e = np.eye(d)
    vecs = []
    for i in range(d):
        for j in range(i + 1, d):
            c = np.exp(1j * p.theta(i, j)) * p.lam(j) / p.lam(i)
            vecs.append(np.kron(e[i], e[j]) - c * np.kron(e[j], e[i]))
    # The vacuum pair e_0 (x) e_0 stays in the kernel; only particles are hard-core.
    for i in range(1, d):
        vecs.append(np.kron(e[i], e[i]).astype(complex))
    return vecs


def pvbs_interaction(p: PvbsParams) -> NearestNeighborInteraction:
    return NearestNeighborInteraction.from_range(interaction_vectors(p), p.d, "pvbs", p.to_json())


def pvbs_mps(p: PvbsParams) -> MpsFamily:
    """Generating matrices of dimension ``2^n`` built from ``sigma^+``, ``diag(1, lambda)`` and phases."""
    n = p.n
    if n == 0:
        return MpsFamily.of([np.eye(1)])

    def dmat(j):
        return np.diag([1.0, p.lam(j)])

    def pmat(i, j):
        return np.diag([np.exp(0.5j * p.theta(i, j)), 1.0])

    mats = [nx.kron_all([pmat(0, j) @ pmat(0, j) @ dmat(j) for j in range(1, n + 1)])]
    for i in range(1, n + 1):
        factors = [SIGMA_PLUS if j == i else pmat(i, j) @ dmat(j) for j in range(1, n + 1)]
        mats.append(nx.kron_all(factors))
    return MpsFamily.of(mats)


def pvbs_relations(p: PvbsParams) -> list[QuadraticRelation]:
    """``v_i v_j = e^{i theta_ij} lambda_i / lambda_j v_j v_i`` and ``v_i^2 = 0`` for particles."""
    rels = []
    for i in range(p.d):
        for j in range(p.d):
            if i != j:
                c = np.exp(1j * p.theta(i, j)) * p.lam(i) / p.lam(j)
                rels.append(QuadraticRelation(((1.0, (i, j)),), ((c, (j, i)),), f"exchange {i}{j}"))
    for i in range(1, p.d):
        rels.append(QuadraticRelation(((1.0, (i, i)),), (), f"hard core {i}"))
    return rels


def boundary_matrix(p: PvbsParams, S) -> np.ndarray:
    """``B^S``: ``sigma^-`` on the tensor factors of S and ``P = sigma^+ sigma^-`` elsewhere."""
    S = _check_subset(p, S)
    return nx.kron_all([SIGMA_MINUS if j in S else P_UP for j in range(1, p.n + 1)])


def _check_subset(p: PvbsParams, S) -> frozenset:
    S = frozenset(int(s) for s in S)
    if not S <= set(range(1, p.n + 1)):
        raise ValidationError(f"particle set {sorted(S)} is not a subset of 1..{p.n}")
    return S


def pvbs_ground_vector(p: PvbsParams, N: int, S=()) -> np.ndarray:
    """The ground vector with particle content S on a chain of N sites.

    Normalized so that the word with particle ``s_j`` (``S`` sorted) at site j has
    amplitude ``prod_j (e^{i theta_{s_j 0}} lambda_{s_j})^j``; every component then
    has modulus ``prod lambda^{x}`` with x the 1-based particle positions.
    """
    S = sorted(_check_subset(p, S))
    if N < 1:
        raise ValidationError("N must be positive")
    if not S:
        omega = np.zeros(p.d**N, dtype=complex)
        omega[0] = 1.0
        return omega
    psi = gamma_map(pvbs_mps(p), N, boundary_matrix(p, S))
    if len(S) > N:
        return psi
    digits = [0] * N
    target = 1.0 + 0j
    for pos, s in enumerate(S, start=1):
        digits[pos - 1] = s
        target *= (np.exp(1j * p.theta(s, 0)) * p.lam(s)) ** pos
    ref = psi[_word_index(digits, p.d)]
    return psi * (target / ref)


def _word_index(digits, d: int) -> int:
    idx = 0
    for x in digits:
        idx = idx * d + x
    return idx


# ---------------------------------------------------------------------------
# transfer spectrum in closed form


class ClosedFormSpectrum(NamedTuple):
    values: np.ndarray
    top: complex
    top_simple: bool


def pvbs_transfer_spectrum_closed_form(p: PvbsParams) -> ClosedFormSpectrum:
    """All ``4^n`` products over j of one of ``1, lambda_j e^{+-i theta_0j}, lambda_j^2``."""
    factors = []
    for j in range(1, p.n + 1):
        lam, th = p.lam(j), p.theta(0, j)
        factors.append([1.0, lam * np.exp(1j * th), lam * np.exp(-1j * th), lam**2])
    values = np.array([np.prod(c) for c in itertools.product(*factors)] if factors else [1.0],
                      dtype=complex)
    top = np.prod([x**2 for x in p.lambdas if x > 1]) if p.n else 1.0
    simple = int(np.sum(np.abs(values - top) <= 1e-12 * max(1.0, abs(top)))) == 1
    return ClosedFormSpectrum(sort_spectrum(values), complex(top), simple)


def sort_spectrum(values) -> np.ndarray:
    """Order by decreasing modulus, then increasing phase."""
    values = np.asarray(values, dtype=complex)
    key = [(-round(abs(t), 9), round(float(np.angle(t)) if abs(t) > 1e-12 else 0.0, 9)) for t in values]
    return values[sorted(range(len(values)), key=lambda i: key[i])]


def multiset_distance(a, b) -> float:
    """Largest gap in an optimal pairing of two equally long complex multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return float("inf")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max(initial=0.0))


# ---------------------------------------------------------------------------
# gap bounds and the one-particle problem


class GapBound(NamedTuple):
    value: float
    vacuous: bool
    critical: bool


def gap_upper_bound(p: PvbsParams, N: int) -> GapBound:
    """Variational bound ``min_i (1 - 2/(lambda_i + 1/lambda_i)) (1 + (C_i - 1)/(N - C_i))``.

    ``C_i = (1 + lambda_i)/|1 - lambda_i|``; a particle type contributes only when
    ``N > C_i``.  Returns ``inf`` with ``vacuous`` set when no type contributes.
    """
    if not p.gapped_admissible:
        return GapBound(float("inf"), True, True)
    terms = []
    for lam in p.lambdas:
        C = (1 + lam) / abs(1 - lam)
        if N > C:
            terms.append((1 - 2 / (lam + 1 / lam)) * (1 + (C - 1) / (N - C)))
    if not terms:
        return GapBound(float("inf"), True, False)
    return GapBound(float(min(terms)), False, False)


def one_particle_hamiltonian(lam: float, theta_i0: float, N: int) -> np.ndarray:
    """Rescaled one-particle block ``K = -(lambda + 1/lambda)(H^i - 1)`` on N sites."""
    if N < 2:
        raise ValidationError("need at least two sites")
    if lam <= 0:
        raise ValidationError("weight must be positive")
    K = np.zeros((N, N), dtype=complex)
    idx = np.arange(N - 1)
    K[idx, idx + 1] = np.exp(-1j * theta_i0)
    K[idx + 1, idx] = np.exp(1j * theta_i0)
    K[0, 0] = 1.0 / lam
    K[N - 1, N - 1] = lam
    return K


def one_particle_block(lam: float, theta_i0: float, N: int) -> np.ndarray:
    """``H^i = 1 - K/(lambda + 1/lambda)``, the Hamiltonian on the one-particle sector."""
    K = one_particle_hamiltonian(lam, theta_i0, N)
    return np.eye(N) - K / (lam + 1.0 / lam)


def chebyshev_residual(lam: float, N: int) -> float:
    """Relative residual of the boundary recursion for ``U_N(E/2)`` at ``E = lambda + 1/lambda``."""
    E = lam + 1.0 / lam
    x = E / 2
    U = [eval_chebyu(m, x) for m in (N, N - 1, N - 2)]
    a, b = E - lam, E - 1.0 / lam
    rhs = (1 / a + 1 / b) * U[1] - U[2] / (a * b)
    return float(abs(U[0] - rhs) / max(abs(U[0]), 1.0))


@dataclass
class OneParticleCertificate:
    lam: float
    N_max: int
    passed: bool
    limit: float
    gaps: np.ndarray
    top_error: float
    chebyshev_residual: float
    failures: list


def one_particle_gap_certificate(lam: float, N_max: int, theta_i0: float = 0.0,
                                 tol: float = 1e-10) -> OneParticleCertificate:
    """Check for every N in 2..N_max that K tops out at ``lambda + 1/lambda`` and avoids
    ``[2, lambda + 1/lambda)``, so the one-particle gap stays above ``1 - 2/(lambda + 1/lambda)``."""
    if lam == 1.0:
        raise CriticalModelError("lambda = 1 is critical: E = 2 reaches the top of the band")
    E = lam + 1.0 / lam
    limit = 1 - 2 / E
    gaps, failures = [], []
    top_err, cheb = 0.0, 0.0
    for N in range(2, N_max + 1):
        w = la.eigvalsh(one_particle_hamiltonian(lam, theta_i0, N))
        top_err = max(top_err, abs(w[-1] - E))
        if abs(w[-1] - E) > tol * max(1.0, E):
            failures.append(f"N={N}: top eigenvalue {w[-1]!r} differs from {E!r}")
        inside = w[:-1][(w[:-1] >= 2 - tol) & (w[:-1] < E - tol)]
        if inside.size:
            failures.append(f"N={N}: eigenvalue {inside[-1]!r} in [2, {E!r})")
        gap = 1 - w[-2] / E
        gaps.append(gap)
        if gap < limit - tol:
            failures.append(f"N={N}: gap {gap!r} below {limit!r}")
        if N >= 2:
            cheb = max(cheb, chebyshev_residual(lam, N))
    if cheb > 1e-8:
        failures.append(f"recursion residual {cheb:.3g}")
    return OneParticleCertificate(lam, N_max, not failures, limit, np.array(gaps), top_err, cheb, failures)


# ---------------------------------------------------------------------------
# particle sectors


def occupation(word: int, N: int, n: int) -> tuple:
    counts = [0] * n
    d = n + 1
    for _ in range(N):
        word, digit = divmod(word, d)
        if digit:
            counts[digit - 1] += 1
    return tuple(counts)


def sector_decomposition(p: PvbsParams, N: int) -> dict:
    """Basis indices grouped by how many particles of each type they contain."""
    sectors: dict = {}
    for w in range(p.d**N):
        sectors.setdefault(occupation(w, N, p.n), []).append(w)
    return {k: np.array(v) for k, v in sorted(sectors.items())}


def off_sector_residual(H: np.ndarray, sectors: dict) -> float:
    """Largest matrix element of H connecting two different sectors."""
    label = np.empty(H.shape[0], dtype=int)
    for t, idx in enumerate(sectors.values()):
        label[idx] = t
    mask = label[:, None] != label[None, :]
    return float(np.max(np.abs(H[mask]), initial=0.0))


# ---------------------------------------------------------------------------
# paths between models with the same label


def _sorted_relabel(p: PvbsParams):
    order = sorted(range(1, p.n + 1), key=lambda i: (p.lam(i), i))
    sigma = [0] + order  # sorted position j -> original label sigma[j]
    lam = tuple(p.lam(sigma[j]) for j in range(1, p.d))
    th = {(j, k): p.theta(sigma[j], sigma[k]) for j in range(p.d) for k in range(j + 1, p.d)}
    perm = np.zeros((p.d, p.d))
    for j, s in enumerate(sigma):
        perm[s, j] = 1.0
    return PvbsParams(lam, th), perm


def unitary_power(U: np.ndarray, t: float) -> np.ndarray:
    """``U^t`` along the principal branch, phases taken in (-pi, pi]."""
    T, Z = la.schur(np.asarray(U, dtype=complex), output="complex")
    phases = np.angle(np.diag(T))
    phases[phases <= -np.pi + 1e-14] = np.pi
    return (Z * np.exp(1j * t * phases)) @ Z.conj().T


def conjugate_interaction(h: NearestNeighborInteraction, u: np.ndarray, model: str = "", params=None):
    uu = np.kron(u, u)
    return NearestNeighborInteraction(uu @ h.matrix @ uu.conj().T, h.d, model or h.model, params or h.params)


class PathPoint(NamedTuple):
    interaction: NearestNeighborInteraction
    params: PvbsParams
    unitary: np.ndarray


def equivalence_path(p1: PvbsParams, p2: PvbsParams, s: float) -> PathPoint:
    """Point ``s`` of a gapped path with ``s = 1`` at ``p1`` and ``s = 0`` at ``p2``.

    Both models are relabelled so the weights increase, the relabelled weights and
    phases are interpolated linearly, and the result is conjugated by a smooth
    unitary path between the two relabelling permutations.  ``params`` is the
    relabelled model at s, before conjugation.
    """
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"path parameter must lie in [0, 1], got {s}")
    if p1.n != p2.n:
        raise PhaseObstructionError(f"models have {p1.n} and {p2.n} particle types")
    l1, l2 = classify(p1), classify(p2)
    if l1 != l2:
        raise PhaseObstructionError(f"labels {tuple(l1)} and {tuple(l2)} differ; the gap must close")
    q1, perm1 = _sorted_relabel(p1)
    q2, perm2 = _sorted_relabel(p2)
    lam = tuple(s * a + (1 - s) * b for a, b in zip(q1.lambdas, q2.lambdas))
    keys = set(q1.thetas) | set(q2.thetas)
    th = {k: s * q1.theta(*k) + (1 - s) * q2.theta(*k) for k in keys}
    qs = PvbsParams(lam, th)
    u = perm1 @ unitary_power(perm1.T @ perm2, 1 - s)
    h = conjugate_interaction(pvbs_interaction(qs), u, "pvbs-path", {"s": s})
    return PathPoint(h, qs, u)


# ---------------------------------------------------------------------------
# finite-size asymptotics


def bulk_bound(p: PvbsParams) -> float:
    """``min_i (1 - 2/(lambda_i + 1/lambda_i))``, the large-N limit of the variational bound."""
    return float(min(1 - 2 / (x + 1 / x) for x in p.lambdas))


def extrapolate_gap(Ns, gaps) -> float:
    """Intercept ``a`` of a least-squares fit ``gap ~ a + b/N + c/N^2``.

    With only two distinct lengths the quadratic term is dropped.
    """
    Ns = np.asarray(Ns, dtype=float)
    distinct = len(np.unique(Ns))
    if distinct < 2:
        raise ValidationError("extrapolation needs at least two distinct chain lengths")
    return float(np.polyfit(1 / Ns, np.asarray(gaps, dtype=float), min(2, distinct - 1))[-1])


def decay_rate(p: PvbsParams) -> float:
    """``max_i min(lambda_i, 1/lambda_i)``."""
    return max(min(x, 1 / x) for x in p.lambdas)


def local_expectation(p: PvbsParams, S, N: int, site: int, A) -> complex:
    """``<A at site>`` in the normalized ground vector with content S (1-based site)."""
    F = pvbs_mps(p)
    B = boundary_matrix(p, S)
    ops = [np.eye(p.d)] * N
    ops[site - 1] = np.asarray(A)
    return mps_overlap(F, B, B, N, ops) / mps_overlap(F, B, B, N)


def truncation_coefficient(p: PvbsParams, S, S_k, N: int, k: int) -> complex:
    """``T_{N,k}(S_k)``: coefficient of ``psi_{N-k}(S minus S_k) (x) psi_k(S_k)`` in ``psi_N(S)``."""
    S = _check_subset(p, S)
    S_k = _check_subset(p, S_k)
    if not S_k <= S or not 0 < k < N:
        raise ValidationError("need S_k within S and 0 < k < N")
    left = pvbs_ground_vector(p, N - k, S - S_k)
    right = pvbs_ground_vector(p, k, S_k)
    whole = pvbs_ground_vector(p, N, S)
    prod = np.kron(left, right)
    return complex(np.vdot(prod, whole) / (np.vdot(left, left).real * np.vdot(right, right).real))
