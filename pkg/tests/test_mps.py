import itertools

import numpy as np
import pytest

from gapchain import aklt, mps, pvbs as pv
from gapchain.chain import assemble_hamiltonian
from gapchain.errors import CertificationError, ValidationError
from gapchain.mps import (MpsFamily, apply_transfer, check_intersection_property, fit_decay_rate, gamma_map,
                          ground_space, martingale_coefficient, martingale_coefficient_dense,
                          martingale_gap_bound, mps_overlap, transfer_operator, transfer_spectrum)


def random_family(rng, d, k):
    return MpsFamily(rng.standard_normal((d, k, k)) + 1j * rng.standard_normal((d, k, k)))


def gamma_brute(family, N, B):
    # Sum over words of Tr(B v_{i_N} ... v_{i_1}) e_{i_1} (x) ... (x) e_{i_N}.
    d = family.d
    out = np.zeros(d**N, dtype=complex)
    for word in itertools.product(range(d), repeat=N):
        M = np.eye(family.k)
        for i in word:
            M = family[i] @ M
        idx = 0
        for i in word:
            idx = idx * d + i
        out[idx] = np.trace(B @ M)
    return out


def test_family_validation():
    with pytest.raises(ValidationError):
        MpsFamily(np.zeros((2, 2, 3)))
    with pytest.raises(ValidationError):
        MpsFamily(np.full((2, 2, 2), np.nan))


@pytest.mark.parametrize("d,k,N", [(2, 2, 3), (3, 2, 4), (3, 3, 2)])
def test_gamma_map_matches_word_sum(d, k, N):
    rng = np.random.default_rng(d * 100 + k * 10 + N)
    F = random_family(rng, d, k)
    B = rng.standard_normal((k, k))
    assert np.allclose(gamma_map(F, N, B), gamma_brute(F, N, B), atol=1e-12)


def test_transfer_operator_matches_application():
    rng = np.random.default_rng(3)
    F = random_family(rng, 3, 3)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    lhs = (transfer_operator(F) @ X.reshape(-1)).reshape(3, 3)
    assert np.allclose(lhs, apply_transfer(F, X))


def test_transfer_spectrum_biorthogonal_and_ordered():
    rng = np.random.default_rng(4)
    F = random_family(rng, 2, 2)
    ts = transfer_spectrum(F)
    mods = np.abs(ts.eigenvalues)
    assert np.all(np.diff(mods) <= 1e-9)
    for j in range(len(ts)):
        assert np.allclose(apply_transfer(F, ts.right[j]), ts.eigenvalues[j] * ts.right[j], atol=1e-9)
    assert ts.biorthogonality_error < 1e-10


def test_transfer_spectrum_refuses_jordan_block():
    F = MpsFamily.of([[[1.0, 1.0], [0.0, 1.0]]])
    with pytest.raises(CertificationError):
        transfer_spectrum(F)


def test_rotated_family_represents_the_same_vectors():
    rng = np.random.default_rng(5)
    F = random_family(rng, 3, 2)
    U, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    B = rng.standard_normal((2, 2))
    N = 3
    v = gamma_map(F, N, B)
    w = gamma_map(F.rotated(U), N, B)
    UN = np.kron(np.kron(U, U), U)
    assert np.allclose(UN @ w, v, atol=1e-12)


def test_overlap_three_ways():
    rng = np.random.default_rng(6)
    F = random_family(rng, 3, 2)
    N = 4
    BL, BR = rng.standard_normal((2, 2)), rng.standard_normal((2, 2)) + 1j
    vl, vr = gamma_map(F, N, BL), gamma_map(F, N, BR)
    ops = [rng.standard_normal((3, 3)) for _ in range(N)]
    dense = ops[0]
    for A in ops[1:]:
        dense = np.kron(dense, A)
    ref = np.vdot(vl, dense @ vr)
    assert abs(mps_overlap(F, BL, BR, N) - np.vdot(vl, vr)) < 1e-10 * abs(np.vdot(vl, vr))
    assert abs(mps_overlap(F, BL, BR, N, ops) - ref) < 1e-10 * max(1, abs(ref))
    assert abs(mps_overlap(F, BL, BR, N, dense) - ref) < 1e-10 * max(1, abs(ref))


def test_intersection_property_aklt():
    for N in (3, 4, 5):
        rep = check_intersection_property(aklt.aklt_interaction(), aklt.aklt_mps(), N)
        assert rep.holds and rep.range_dim == rep.kernel_dim == 4


def test_intersection_detects_wrong_family():
    rep = check_intersection_property(aklt.aklt_interaction(), aklt.path_mps(0.3), 3)
    assert not rep.holds


def test_aklt_martingale_small_case():
    # Three-site AKLT blocks on four sites; the exact value is 1/7.
    h = aklt.aklt_interaction()
    lowrank = martingale_coefficient(h, aklt.aklt_mps(), 3, 3)
    dense = martingale_coefficient_dense(h, 3, 3)
    assert abs(lowrank - dense) < 1e-12
    assert abs(lowrank - 1 / 7) < 1e-12


@pytest.mark.parametrize("k,N", [(2, 3), (3, 4), (2, 5), (4, 5)])
def test_martingale_low_rank_matches_dense(k, N):
    p = pv.PvbsParams((0.5, 3.0), {(0, 1): 0.4})
    h = pv.pvbs_interaction(p)
    a = martingale_coefficient(h, None, k, N)
    b = martingale_coefficient(h, pv.pvbs_mps(p), k, N)
    c = martingale_coefficient_dense(h, k, N)
    assert abs(a - c) < 1e-10 and abs(b - c) < 1e-10


def test_martingale_bound_formula():
    b = martingale_gap_bound(0.6, 4, 0.1)
    assert b.applicable and abs(b.value - 0.2 * 0.8**2) < 1e-15
    assert martingale_gap_bound(0.6, 4, 0.5) == (0.0, False)
    with pytest.raises(ValidationError):
        martingale_gap_bound(0.6, 1, 0.1)


def test_fit_decay_rate_recovers_exponent():
    ks = np.arange(2, 10)
    assert abs(fit_decay_rate(ks, 3.0 * 0.4**ks) - 0.4) < 1e-12


def test_ground_space_of_pvbs_matches_kernel():
    p = pv.PvbsParams((0.5,), {})
    F = ground_space(pv.pvbs_mps(p), 4)
    w, v = np.linalg.eigh(assemble_hamiltonian(pv.pvbs_interaction(p), 4))
    null = v[:, w < 1e-9]
    assert F.shape[1] == null.shape[1] == 2


def test_first_admissible_k():
    assert mps.first_admissible_k({2: 0.8, 3: 0.5, 4: 0.2}) == 3
    assert mps.first_admissible_k({4: 0.2, 2: 0.8}) == 4
    assert mps.first_admissible_k({2: 0.9}) is None
