import numpy as np
import pytest
from scipy.stats import special_ortho_group

from gapchain import aklt
from gapchain import numerics as nx
from gapchain import so_models as so
from gapchain.chain import chain_kernels
from gapchain.errors import CertificationError, ValidationError
from gapchain.mps import check_quadratic_relations, ground_space

PROFILE_J2 = so.default_lambda_profile(2, (0.5, 1 / 3))


@pytest.mark.parametrize("d,rank", [(3, 5), (5, 14), (7, 27)])
def test_interaction_rank(d, rank):
    assert so.so_interaction(d).rank == rank


def test_interaction_validation():
    for d in (2, 4, 1):
        with pytest.raises(ValidationError):
            so.so_interaction(d)
    with pytest.raises(ValidationError):
        so.spherical_basis(0)


@pytest.mark.parametrize("d", [3, 5])
def test_interaction_is_orthogonally_invariant(d):
    h = so.so_interaction(d).matrix
    rng = np.random.default_rng(d)
    for O in special_ortho_group.rvs(d, size=20, random_state=rng):
        OO = np.kron(O, O)
        assert np.max(np.abs(OO @ h @ OO.T - h)) < 1e-13


@pytest.mark.parametrize("J", [1, 2, 3])
def test_clifford_representation(J):
    rep = so.clifford_rep(J)
    assert rep.generators.shape == (2 * J + 1, 2**J, 2**J)
    assert rep.anticommutator_residual() < 1e-14
    assert rep.hermiticity_residual() < 1e-14


@pytest.mark.parametrize("J", [1, 2])
def test_generators_isometric_and_spherical_rotation(J):
    assert so.isometry_residual(so.so_mps(J)) < 1e-14
    assert so.isometry_residual(so.so_cartesian_mps(J)) < 1e-14
    U = so.spherical_basis(J)
    assert np.allclose(U.conj().T @ U, np.eye(2 * J + 1))
    rotated = so.so_cartesian_mps(J).rotated(U)
    assert np.max(np.abs(rotated.matrices - so.so_mps(J).matrices)) < 1e-14


@pytest.mark.parametrize("J", [1, 2])
def test_generators_span_the_kernel(J):
    h = so.so_interaction(2 * J + 1)
    frames = chain_kernels(h, 4)
    F = so.so_cartesian_mps(J)
    assert frames[2].shape[1] == (2 * J + 1) ** 2 - h.rank
    # For J = 2 the kernel grows 11, 15, 16 before saturating.
    assert frames[4].shape[1] == so.expected_kernel_dim(J)
    for m in range(2, 5):
        assert nx.subspace_distance(frames[m], ground_space(F, m)) < 1e-9


def test_j1_is_aklt():
    P = np.kron(so.spin1_labels(), so.spin1_labels())
    h = so.to_spherical(so.so_interaction(3), 1).matrix
    assert np.max(np.abs(P @ h @ P.T - aklt.aklt_interaction().matrix)) < 1e-13
    F = so.so_mps(1).rotated(so.spin1_labels())
    assert nx.subspace_distance(ground_space(F, 4), ground_space(aklt.aklt_mps(), 4)) < 1e-12


@pytest.mark.parametrize("s", [0.2, 0.5, 0.9, so.s0_of(1)])
def test_j1_path_matches_aklt_path(s):
    sched = aklt.PathSchedule()
    prof = lambda t: np.array([sched.f(t)])
    F = so.so_path_mps(1, s, prof).rotated(so.spin1_labels())
    G = aklt.path_mps(s, sched)
    assert nx.subspace_distance(ground_space(F, 3), ground_space(G, 3)) < 1e-12
    pair = so.so_path_point(1, s, prof).pair_coefficients()[0]
    assert abs(pair + sched.g(s) * np.sin(s) / np.cos(s) ** 2) < 1e-12


@pytest.mark.parametrize("J,lams", [(1, (0.5,)), (2, (0.5, 1 / 3)), (3, (0.3, 0.6, 0.9)), (2, (1.0, 1.0))])
def test_twisted_relations(J, lams):
    res = so.twisted_car(J, lams).relations_residual()
    assert max(res.values()) < 1e-14, res


def test_twisted_at_one_is_plain_car():
    car = so.twisted_car(2, (1.0, 1.0))
    for got, ref in zip(car.creation, so.creation_operators(2)):
        # Same operators up to the sign convention of the Jordan-Wigner string.
        assert np.allclose(np.abs(got), np.abs(ref))


def test_twisted_validation():
    with pytest.raises(ValidationError):
        so.twisted_car(2, (0.5,))
    with pytest.raises(ValidationError):
        so.twisted_car(1, (1.5,))


@pytest.mark.parametrize("s", [0.0, 0.3, 0.8, so.s0_of(2)])
def test_path_point_on_sphere(s):
    pt = so.so_path_point(2, s, PROFILE_J2)
    assert pt.sphere_residual() < 1e-14
    for lam, b in zip(pt.lambdas, pt.beta):
        assert abs(b**2 - (1 - lam**2 * (1 - pt.alpha**2))) < 1e-14


@pytest.mark.parametrize("s", [0.3, 0.8, so.s0_of(2)])
def test_path_relations(s):
    F = so.so_path_mps(2, s, PROFILE_J2)
    assert check_quadratic_relations(F, so.so_path_relations(2, s, PROFILE_J2)) < 1e-13


def test_path_endpoint_matches_so_model():
    J = 2
    F = so.so_path_mps(J, so.s0_of(J))
    assert np.max(np.abs(F.matrices - so.so_mps(J).matrices)) < 1e-12


def test_path_isometry_defect():
    # At the doubly occupied state only a_0 and the two creation operators act:
    # gamma^2 l1^2 l2^2 + beta_1^2 l2^2 + beta_2^2 l1^2, which is below 1 for l < 1.
    s = 0.4
    F = so.so_path_mps(2, s, PROFILE_J2)
    pt = so.so_path_point(2, s, PROFILE_J2)
    S = sum(v.conj().T @ v for v in F.matrices)
    l1, l2 = pt.lambdas
    b1, b2 = (b**2 for b in pt.beta)
    expected = pt.gamma**2 * l1**2 * l2**2 + b1 * l2**2 + b2 * l1**2
    assert np.allclose(S - np.diag([1, 1, 1, expected]), 0, atol=1e-14)
    assert abs(S[3, 3].real - expected) < 1e-14
    assert so.isometry_residual(F) > 1e-3
    G = so.isometric_gauge(F)
    assert so.isometry_residual(G) < 1e-12
    assert nx.subspace_distance(ground_space(F, 3), ground_space(G, 3)) < 1e-10


@pytest.mark.parametrize("J", [1, 2])
def test_transfer_check_interior(J):
    prof = so.default_lambda_profile(J)
    for s in np.linspace(0, so.s0_of(J), 6)[1:]:
        rep = so.so_transfer_check(J, float(s), prof).certify()
        assert rep.top_simple and rep.margin > 0
        assert rep.right_min > 0 and rep.left_min > 0


def test_transfer_check_reducible_at_zero():
    rep = so.so_transfer_check(2, 0.0)
    assert rep.reducible and not rep.passed
    with pytest.raises(CertificationError):
        rep.certify()


def test_path_interaction_refuses_zero():
    with pytest.raises(ValidationError):
        so.so_path_interaction(1, 0.0)
    with pytest.raises(ValidationError):
        so.so_path_point(1, so.s0_of(1) + 0.1)


@pytest.mark.parametrize("J,N", [(1, 4), (1, 6), (2, 4)])
def test_ground_space_dimension(J, N):
    assert so.so_ground_space_dim(J, N) == so.expected_kernel_dim(J)


@pytest.mark.parametrize("J,s", [(1, 0.5), (2, 0.6)])
def test_path_gap_certifies_kernel(J, s):
    rep = so.so_path_gap(J, s, 4)
    assert rep.kernel_dim == so.expected_kernel_dim(J)
    assert rep.gap > 0
