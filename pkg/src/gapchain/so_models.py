"""SO(2J+1)-invariant chains and their deformation to a product-vacuum model.

The local space is C^(2J+1).  Two bases are used:

* Cartesian: ``e_0 .. e_2J``, in which the interaction is ``Sym - |omega><omega|`` and
  the ground states are generated by ``Z_a / sqrt(2J+1)`` with ``Z`` a Clifford
  representation;
* spherical: ``f_0 = e_0``, ``f_{2j-1} = -(e_{2j-1} + i e_{2j})/sqrt 2``,
  ``f_{2j} = (e_{2j-1} - i e_{2j})/sqrt 2``, in which the generators are the
  fermionic matrices ``V_a`` and the deformation path lives.

For J = 1 the spherical labels ``(1, 0, 2)`` are the spin-1 labels ``(+, 0, -)``.
The auxiliary space is ``(C^2)^{(x) J}`` with ``Q = diag(0, 1)`` on each factor, so
``(-1)^Q = sigma_z`` and ``sigma^+`` lowers Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import numerics as nx
from .chain import ChainHamiltonian, NearestNeighborInteraction, spectral_gap
from .errors import CertificationError, ValidationError
from .mps import MpsFamily, QuadraticRelation, check_quadratic_relations, gamma_matrix, transfer_operator

SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
POSITIVITY_TOL = 1e-10


def _check_J(J: int):
    if not isinstance(J, (int, np.integer)) or J < 1:
        raise ValidationError(f"J must be a positive integer, got {J!r}")


def _twist(x: float) -> np.ndarray:
    """``x^Q = diag(1, x)``."""
    return np.diag([1.0, x])


def s0_of(J: int) -> float:
    """Endpoint of the path, ``cos(s0) = (2J+1)^(-1/2)``."""
    _check_J(J)
    return float(np.arccos(1.0 / np.sqrt(2 * J + 1)))


# ---------------------------------------------------------------------------
# interaction


def symmetric_projector(d: int) -> np.ndarray:
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    return 0.5 * (np.eye(d * d) + swap)


def so_interaction(d: int) -> NearestNeighborInteraction:
    """Projection onto the traceless symmetric part of C^d (x) C^d (Cartesian basis)."""
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise ValidationError(f"d must be an odd integer >= 3, got {d!r}")
    omega = np.eye(d).reshape(d * d) / np.sqrt(d)
    P = symmetric_projector(d) - np.outer(omega, omega)
    return NearestNeighborInteraction(P.astype(complex), d, "so", {"d": int(d)})


def spherical_basis(J: int) -> np.ndarray:
    """Columns are the spherical basis vectors in Cartesian coordinates."""
    _check_J(J)
    d = 2 * J + 1
    U = np.zeros((d, d), dtype=complex)
    U[0, 0] = 1.0
    r = 1 / np.sqrt(2.0)
    for j in range(1, J + 1):
        x, y = 2 * j - 1, 2 * j
        U[x, x], U[y, x] = -r, -1j * r
        U[x, y], U[y, y] = r, -1j * r
    return U


def to_spherical(h: NearestNeighborInteraction, J: int) -> NearestNeighborInteraction:
    """The same two-site operator written in spherical components."""
    U = spherical_basis(J)
    W = np.kron(U, U)
    m = W.conj().T @ h.matrix @ W
    return NearestNeighborInteraction(0.5 * (m + m.conj().T), h.d, h.model, dict(h.params, basis="spherical"))


def spin1_labels() -> np.ndarray:
    """Permutation matrix taking spherical J = 1 components to the spin-1 order (+, 0, -)."""
    P = np.zeros((3, 3))
    P[0, 1] = P[1, 0] = P[2, 2] = 1.0
    return P


# ---------------------------------------------------------------------------
# Clifford and CAR representations


@dataclass(frozen=True)
class CliffordRep:
    J: int
    generators: np.ndarray  # (2J+1, 2^J, 2^J)

    def anticommutator_residual(self) -> float:
        Z = self.generators
        dim = Z.shape[1]
        worst = 0.0
        for a in range(len(Z)):
            for b in range(a, len(Z)):
                target = 2.0 * np.eye(dim) if a == b else 0.0
                worst = max(worst, float(np.max(np.abs(Z[a] @ Z[b] + Z[b] @ Z[a] - target))))
        return worst

    def hermiticity_residual(self) -> float:
        Z = self.generators
        return float(max(np.max(np.abs(z - z.conj().T)) for z in Z))


def creation_operators(J: int) -> list[np.ndarray]:
    """``a_j^* = sigma_z (x) .. (x) sigma_z (x) sigma^+ (x) 1 (x) .. (x) 1`` for j = 1..J."""
    _check_J(J)
    sz = np.diag([1.0, -1.0])
    return [nx.kron_all([sz] * (j - 1) + [SIGMA_PLUS] + [np.eye(2)] * (J - j)) for j in range(1, J + 1)]


def clifford_rep(J: int) -> CliffordRep:
    adag = creation_operators(J)
    Z0 = nx.kron_all([np.diag([1.0, -1.0])] * J)
    gens = [Z0.astype(complex)]
    for ad in adag:
        a = ad.T
        gens.append((a + ad).astype(complex))
        gens.append(1j * (a - ad))
    return CliffordRep(J, np.array(gens))


def so_cartesian_mps(J: int) -> MpsFamily:
    """Normalized Clifford generators ``-Z_a / sqrt(2J+1)``."""
    return MpsFamily(-clifford_rep(J).generators / np.sqrt(2 * J + 1))


def so_mps(J: int) -> MpsFamily:
    """Generators ``V_0 = -Z_0 c, V_{2j-1} = sqrt 2 c a_j, V_{2j} = -sqrt 2 c a_j^*`` with ``c = (2J+1)^(-1/2)``."""
    _check_J(J)
    c = 1.0 / np.sqrt(2 * J + 1)
    Z0 = nx.kron_all([np.diag([1.0, -1.0])] * J)
    mats = [None] * (2 * J + 1)
    mats[0] = -c * Z0
    for j, ad in enumerate(creation_operators(J), start=1):
        mats[2 * j - 1] = np.sqrt(2) * c * ad.T
        mats[2 * j] = -np.sqrt(2) * c * ad
    return MpsFamily.of(mats)


def isometry_residual(family: MpsFamily) -> float:
    S = sum(v.conj().T @ v for v in family.matrices)
    return float(np.max(np.abs(S - np.eye(family.k))))


@dataclass(frozen=True)
class TwistedCarFamily:
    J: int
    lambdas: tuple
    creation: tuple  # a_j^*(Lambda), j = 1..J
    a0: np.ndarray

    def annihilation(self, j: int) -> np.ndarray:
        return self.creation[j - 1].conj().T

    def relations_residual(self) -> dict:
        """Largest residual of each family of twisted commutation relations."""
        lam = self.lambdas
        out = {"nilpotent": 0.0, "pair": 0.0, "mixed": 0.0, "vacuum": 0.0, "creation": 0.0}

        def upd(key, M):
            out[key] = max(out[key], float(np.max(np.abs(M))))

        a0 = self.a0
        for j in range(1, self.J + 1):
            ad, a, lj = self.creation[j - 1], self.annihilation(j), lam[j - 1]
            upd("nilpotent", ad @ ad)
            upd("nilpotent", a @ a)
            upd("pair", ad @ a + lj**2 * a @ ad - a0 @ a0)
            upd("vacuum", ad @ a0 + lj * a0 @ ad)
            for k in range(1, self.J + 1):
                if k == j:
                    continue
                lk = lam[k - 1]
                upd("mixed", ad @ self.annihilation(k) + lj * lk * self.annihilation(k) @ ad)
                upd("creation", ad @ self.creation[k - 1] + lj / lk * self.creation[k - 1] @ ad)
        return out


def twisted_car(J: int, lambdas: Sequence[float]) -> TwistedCarFamily:
    """``a_j^*(L) = (-l_1)^Q (x) .. (x) (-l_{j-1})^Q (x) sigma^+ (x) l_{j+1}^Q (x) .. (x) l_J^Q``."""
    _check_J(J)
    lam = tuple(float(x) for x in lambdas)
    if len(lam) != J:
        raise ValidationError(f"need {J} twist parameters, got {len(lam)}")
    if any(not (0 < x <= 1) for x in lam):
        raise ValidationError(f"twist parameters must lie in (0, 1], got {lam}")
    creation = []
    for j in range(1, J + 1):
        factors = [_twist(-lam[i]) for i in range(j - 1)] + [SIGMA_PLUS]
        factors += [_twist(lam[i]) for i in range(j, J)]
        creation.append(nx.kron_all(factors))
    a0 = nx.kron_all([_twist(-x) for x in lam])
    return TwistedCarFamily(J, lam, tuple(creation), a0)


# ---------------------------------------------------------------------------
# deformation path


def default_lambda_profile(J: int, lambda0: Sequence[float] | float = 0.5) -> Callable[[float], np.ndarray]:
    """Linear interpolation from ``lambda0`` at s = 0 to 1 at s0."""
    s0 = s0_of(J)
    l0 = np.broadcast_to(np.asarray(lambda0, dtype=float), (J,)).copy()
    if np.any(l0 <= 0) or np.any(l0 >= 1):
        raise ValidationError(f"lambda0 must lie in (0, 1), got {l0}")
    return lambda s: 1.0 - (1.0 - l0) * (1.0 - s / s0)


@dataclass(frozen=True)
class SoPathPoint:
    J: int
    s: float
    lambdas: tuple
    alpha: float
    beta: tuple
    gamma: float

    def sphere_residual(self) -> float:
        return abs(self.J * self.alpha**2 + self.gamma**2 - 1.0)

    def pair_coefficients(self) -> tuple:
        """``alpha_j beta_j / gamma^2``, the weight with which a pair is added to the vacuum."""
        return tuple(self.alpha * b / self.gamma**2 for b in self.beta)


def so_path_point(J: int, s: float, profile: Callable | None = None) -> SoPathPoint:
    _check_J(J)
    s0 = s0_of(J)
    if not np.isfinite(s) or s < 0 or s > s0 + 1e-15:
        raise ValidationError(f"s={s} outside [0, s0] = [0, {s0}]")
    profile = profile or default_lambda_profile(J)
    lam = np.broadcast_to(np.asarray(profile(s), dtype=float), (J,))
    at_end = abs(s - s0) <= 1e-15
    if np.any(lam <= 0) or np.any(lam > 1 + 1e-15) or (not at_end and np.any(lam >= 1)):
        raise ValidationError(f"twist parameters {lam} at s={s} must lie in (0, 1) before s0")
    if at_end and np.any(np.abs(lam - 1) > 1e-12):
        raise ValidationError(f"twist parameters must equal 1 at s0, got {lam}")
    lam = np.minimum(lam, 1.0)
    alpha = np.sin(s) / np.sqrt(J)
    beta = tuple(float(-np.sqrt(1 - x**2 * (1 - alpha**2))) for x in lam)
    return SoPathPoint(J, float(s), tuple(float(x) for x in lam), float(alpha), beta, float(-np.cos(s)))


def so_path_mps(J: int, s: float, profile: Callable | None = None) -> MpsFamily:
    """``V_{2j-1} = alpha a_j(L), V_{2j} = beta_j a_j^*(L), V_0 = gamma a_0(L)`` at parameter s."""
    pt = so_path_point(J, s, profile)
    car = twisted_car(J, pt.lambdas)
    mats = [None] * (2 * J + 1)
    mats[0] = pt.gamma * car.a0
    for j in range(1, J + 1):
        mats[2 * j - 1] = pt.alpha * car.annihilation(j)
        mats[2 * j] = pt.beta[j - 1] * car.creation[j - 1]
    return MpsFamily.of(mats)


def so_path_relations(J: int, s: float, profile: Callable | None = None) -> list[QuadraticRelation]:
    """Quadratic relations of the path generators, read off from the twisted algebra."""
    pt = so_path_point(J, s, profile)
    lam = pt.lambdas
    rels = []
    for j in range(1, J + 1):
        lo, hi, lj = 2 * j - 1, 2 * j, lam[j - 1]
        rels.append(QuadraticRelation(((1.0, (lo, lo)),), (), f"a{j}a{j}"))
        rels.append(QuadraticRelation(((1.0, (hi, hi)),), (), f"a{j}*a{j}*"))
        rels.append(QuadraticRelation(((1.0, (hi, lo)), (lj**2, (lo, hi))),
                                      ((pt.alpha * pt.beta[j - 1] / pt.gamma**2, (0, 0)),), f"pair {j}"))
        rels.append(QuadraticRelation(((1.0, (hi, 0)),), ((-lj, (0, hi)),), f"a{j}* a0"))
        rels.append(QuadraticRelation(((lj, (lo, 0)),), ((-1.0, (0, lo)),), f"a{j} a0"))
        for k in range(1, J + 1):
            if k == j:
                continue
            lk = lam[k - 1]
            # alpha and beta rescale both sides equally, so the twisted relations carry over.
            rels.append(QuadraticRelation(((1.0, (hi, 2 * k - 1)),), ((-lj * lk, (2 * k - 1, hi)),),
                                          f"a{j}* a{k}"))
            rels.append(QuadraticRelation(((1.0, (hi, 2 * k)),), ((-lj / lk, (2 * k, hi)),),
                                          f"a{j}* a{k}*"))
    return rels


def so_path_interaction(J: int, s: float, profile: Callable | None = None) -> NearestNeighborInteraction:
    """Parent interaction of the path generators: projection onto the complement of Ran Gamma_2(s).

    At s = 0 half of the generators vanish and this construction degenerates, so
    only ``s > 0`` is accepted.
    """
    if s <= 0:
        raise ValidationError("the path interaction is built from its ground space, which needs s > 0")
    fam = so_path_mps(J, s, profile)
    frame = nx.orthonormal_frame_of_span(gamma_matrix(fam, 2))
    return NearestNeighborInteraction.parent_of(frame, 2 * J + 1, "so-path", {"J": J, "s": float(s)})


# ---------------------------------------------------------------------------
# transfer operator certificate


@dataclass
class SoTransferReport:
    """Perron-Frobenius data of the path transfer operator at one grid point.

    ``spectral_radius`` and ``isometry_residual`` describe the family as built; all
    other fields refer to the operator divided by its spectral radius.
    """

    J: int
    s: float
    spectral_radius: float
    isometry_residual: float
    top_eigenvalue: complex
    top_simple: bool
    second_modulus: float
    margin: float
    right_min: float
    left_min: float
    reducible: bool
    passed: bool

    def certify(self) -> "SoTransferReport":
        if not self.passed:
            why = "the transfer matrix on diagonal states is reducible" if self.reducible else "positivity failed"
            raise CertificationError(f"transfer certificate failed at J={self.J}, s={self.s}: {why}")
        return self


def diagonal_transfer(family: MpsFamily) -> np.ndarray:
    """Matrix of ``X -> sum v^* X v`` restricted to diagonal X (the generators are monomial)."""
    mags = np.abs(family.matrices) ** 2  # mags[a, x, y] = |<x|v_a|y>|^2
    return mags.sum(axis=0).T


def _perron_vector(M: np.ndarray, r: float) -> np.ndarray:
    w, v = np.linalg.eig(M)
    x = v[:, np.argmin(np.abs(w - r))]
    x = x / x[np.argmax(np.abs(x))]
    return np.real_if_close(x, tol=1e6)


def _min_entry(x: np.ndarray) -> float:
    return float(np.min(x.real)) if not np.iscomplexobj(x) else -np.inf


def isometric_gauge(family: MpsFamily) -> MpsFamily:
    """Equivalent family with ``sum v^* v = 1``: ``R^(1/2) v R^(-1/2) / sqrt(r)``.

    ``R`` is the positive diagonal Perron vector of the transfer operator and ``r``
    its spectral radius.  The similarity leaves every ``Ran Gamma_N`` unchanged.
    """
    M = diagonal_transfer(family)
    r = float(np.max(np.abs(np.linalg.eigvals(transfer_operator(family)))))
    R = _perron_vector(M, r)
    if _min_entry(R) <= POSITIVITY_TOL:
        raise CertificationError("no positive fixed point; the family cannot be made isometric this way")
    sq = np.sqrt(R.real)
    mats = [(sq[:, None] * v / sq[None, :]) / np.sqrt(r) for v in family.matrices]
    return MpsFamily.of(mats)


def so_transfer_check(J: int, s: float, profile: Callable | None = None) -> SoTransferReport:
    """Perron-Frobenius check of the path transfer operator.

    After division by the spectral radius, the eigenvalue 1 must be simple and
    strictly dominant, and its right and left eigenvectors in the diagonal sector
    entrywise positive.  At s = 0 the diagonal transfer matrix is triangular and
    the check reports it reducible.
    """
    fam = so_path_mps(J, s, profile)
    E = transfer_operator(fam)
    w = np.linalg.eigvals(E)
    r = float(np.max(np.abs(w)))
    w = w[np.argsort(-np.abs(w))] / r
    top = complex(w[0])
    near_one = np.abs(w - 1.0) <= 1e-9
    top_simple = bool(abs(top - 1) <= 1e-9 and np.count_nonzero(near_one) == 1)
    second = float(np.abs(w[1])) if len(w) > 1 else 0.0

    M = diagonal_transfer(fam) / r
    n_comp, _ = connected_components((M > POSITIVITY_TOL).astype(int), directed=True, connection="strong")
    reducible = n_comp > 1
    right_min = _min_entry(_perron_vector(M, 1.0))
    left_min = _min_entry(_perron_vector(M.T, 1.0))
    positive = right_min > POSITIVITY_TOL and left_min > POSITIVITY_TOL
    passed = top_simple and second < 1 - 1e-9 and positive and not reducible
    return SoTransferReport(J, float(s), r, isometry_residual(fam), top, top_simple, second, 1.0 - second,
                            right_min, left_min, bool(reducible), bool(passed))


# ---------------------------------------------------------------------------
# spectra


def expected_kernel_dim(J: int) -> int:
    return 4**J


def so_ground_space_dim(J: int, N: int, solver: str = "krylov", seed: int = nx.DEFAULT_SEED) -> int:
    """Numerical dimension of ker H_[1,N] for the SO(2J+1) chain."""
    H = ChainHamiltonian(so_interaction(2 * J + 1), N)
    rep = spectral_gap(H, None, solver=solver, seed=seed, model_id=f"so{2 * J + 1}", N=N)
    return rep.kernel_dim


def so_path_gap(J: int, s: float, N: int, profile: Callable | None = None, solver: str = "krylov",
                seed: int = nx.DEFAULT_SEED, expected: int | None = None):
    """Spectrum report of the path Hamiltonian on N sites, certifying the kernel dimension."""
    H = ChainHamiltonian(so_path_interaction(J, s, profile), N)
    exp = expected_kernel_dim(J) if expected is None else expected
    return spectral_gap(H, exp, solver=solver, seed=seed, model_id=f"so{2 * J + 1}-path", N=N)
