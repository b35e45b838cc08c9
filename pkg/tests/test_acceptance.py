"""Acceptance suite: thirteen criteria, each a verify check plus an independent oracle.

Run with ``pytest tests/test_acceptance.py`` (or ``python tests/test_acceptance.py``);
a PASS/FAIL line per criterion is printed at the end of the run.
"""

import sys

import numpy as np
import pytest

from gapchain import aklt, mps
from gapchain import numerics as nx
from gapchain import pvbs as pv
from gapchain import so_models as so
from gapchain import verify as vf
from gapchain.chain import assemble_hamiltonian

SCHED = aklt.PathSchedule()


def passed(result):
    print(result.line())
    assert result.passed, result.details
    return result.details


@pytest.mark.criterion(1, "product-vacuum kernel dimension 2^n")
def test_pvbs_kernel_dimension():
    details = passed(vf.check_pvbs_kernel())
    expected = {(n, N) for n in (1, 2) for N in range(2, 9)}
    assert {(r["n"], r["N"]) for r in details["rows"]} == expected
    # Dense oracle at sizes where the full spectrum is cheap.
    for n, p in vf.KERNEL_PARAMS.items():
        N = 5
        w = np.linalg.eigvalsh(assemble_hamiltonian(pv.pvbs_interaction(p), N))
        assert np.count_nonzero(w < 1e-9 * (N - 1)) == 2**n


@pytest.mark.criterion(2, "gap below the variational bound")
def test_gap_upper_bound():
    details = passed(vf.check_gap_upper_bound())
    assert len(details["rows"]) == 12
    assert details["min_margin"] > 0
    for (p, N), row in zip(vf.gap_bound_instances(), details["rows"]):
        assert p.n <= 2 and N <= 8
        # Recompute the bound term by term.
        terms = [(1 - 2 / (x + 1 / x)) * (1 + ((1 + x) / abs(1 - x) - 1) / (N - (1 + x) / abs(1 - x)))
                 for x in p.lambdas if N > (1 + x) / abs(1 - x)]
        assert abs(min(terms) - row["bound"]) < 1e-14


@pytest.mark.criterion(3, "one-particle band certificate")
def test_one_particle_certificate():
    passed(vf.check_one_particle())
    for lam in (0.3, 0.5, 0.8, 3.0):
        E = lam + 1 / lam
        for N in (2, 7, 50, 200):
            K = np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1)
            K[0, 0], K[-1, -1] = 1 / lam, lam
            w = np.linalg.eigvalsh(K)
            assert abs(w[-1] - E) <= 1e-10
            assert not np.any((w[:-1] >= 2) & (w[:-1] < E))
            assert 1 - w[-2] / E >= 1 - 2 / E - 1e-10


@pytest.mark.criterion(4, "transfer spectrum matches the closed form")
def test_transfer_closed_form():
    passed(vf.check_transfer_closed_form())
    for p in vf.TRANSFER_PARAMS:
        # Column-major vectorization, independent of the library's convention.
        E = sum(np.kron(v, v.conj()) for v in pv.pvbs_mps(p).matrices)
        cf = pv.pvbs_transfer_spectrum_closed_form(p)
        assert pv.multiset_distance(np.linalg.eigvals(E), cf.values) <= 1e-9
    assert any(abs(th) > 0 for p in vf.TRANSFER_PARAMS for th in p.thetas.values())
    assert max(p.n for p in vf.TRANSFER_PARAMS) == 3


@pytest.mark.criterion(5, "intersection property")
@pytest.mark.parametrize("family", ["pvbs", "aklt-path", "so-path"])
def test_intersection_property(family):
    if family == "pvbs":
        passed(vf.check_intersection_pvbs())
    elif family == "aklt-path":
        details = passed(vf.check_intersection_aklt(SCHED))
        assert len({r["s"] for r in details["rows"]}) == 11
    else:
        details = passed(vf.check_intersection_so())
        assert {r["J"] for r in details["rows"]} == {1, 2}
    # Oracle: dense null space of the whole chain against Ran Gamma_4 at one point.
    h, fam = {"pvbs": (pv.pvbs_interaction(vf.KERNEL_PARAMS[2]), pv.pvbs_mps(vf.KERNEL_PARAMS[2])),
              "aklt-path": (aklt.path_interaction(0.3, SCHED), aklt.path_mps(0.3, SCHED)),
              "so-path": (so.so_path_interaction(1, 0.4), so.so_path_mps(1, 0.4))}[family]
    w, v = np.linalg.eigh(assemble_hamiltonian(h, 4))
    assert nx.subspace_distance(v[:, w < 1e-9], mps.ground_space(fam, 4)) <= 1e-8


@pytest.mark.criterion(6, "AKLT path endpoints")
def test_path_endpoints():
    passed(vf.check_endpoints(SCHED))
    S = aklt.spin1_matrices()
    tot = [np.kron(a, np.eye(3)) + np.kron(np.eye(3), a) for a in S]
    w, v = np.linalg.eigh(sum(t @ t for t in tot))
    P2 = v[:, np.abs(w - 6) < 1e-9] @ v[:, np.abs(w - 6) < 1e-9].conj().T
    assert nx.operator_norm(aklt.path_interaction(aklt.S0, SCHED).matrix - P2) <= 1e-12
    p, U = aklt.pvbs_endpoint()
    assert p.lambdas == (np.sqrt(2.0), 1 / np.sqrt(2.0))
    assert all(abs(t - np.pi) < 1e-15 for t in p.thetas.values())


@pytest.mark.criterion(7, "AKLT path gap on 6 sites")
def test_path_gap_positivity():
    details = passed(vf.check_path_gaps(SCHED))
    assert len(details["gaps"]) == 21
    assert all(k == 4 for k in details["kernels"])
    assert abs(details["min_gap"] - vf.AKLT_PATH_MIN_GAP_N6) <= vf.GOLDEN_TOL
    # The minimum recomputed with the matrix-free Krylov solver.
    s_min = np.linspace(0, aklt.S0, 21)[int(np.argmin(details["gaps"]))]
    rep = aklt.path_gap(float(s_min), 6, SCHED, solver="krylov")
    assert abs(rep.gap - details["min_gap"]) < 1e-9


@pytest.mark.criterion(8, "zeta basis orthogonality and norms")
def test_zeta_basis():
    details = passed(vf.check_zeta(SCHED))
    # The identity holds symbolically; what remains is rounding in the formula.
    assert details["q2"] <= 4 * np.finfo(float).eps
    # Norms of the explicit vectors at the largest chain.
    for s in (aklt.S0 / 4, aklt.S0 / 2, aklt.S0):
        zb = aklt.zeta_basis(s, 8, SCHED)
        brute = np.linalg.norm(zb.vectors, axis=0) ** 2
        assert np.max(np.abs(brute - zb.closed_norms_sq)) <= 1e-10


@pytest.mark.criterion(9, "martingale scheme")
@pytest.mark.parametrize("model", ["aklt", "pvbs"])
def test_martingale(model):
    r = vf.check_martingale_aklt() if model == "aklt" else vf.check_martingale_pvbs()
    details = passed(r)
    assert details["dense_difference"] <= 1e-9
    assert details["rate"] <= details["epsilon"] + 0.1
    assert 0 < details["lower_bound"] <= details["gap"]


@pytest.mark.criterion(10, "gap closes at the critical weight")
def test_critical_closing():
    details = passed(vf.check_critical_closing())
    gaps = details["gaps"]
    assert all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < gaps[0] / 2


@pytest.mark.criterion(11, "SO(2J+1) models")
def test_so_models():
    details = passed(vf.check_so_models())
    assert details["kernel_dims"] == {4: 16, 5: 16, 6: 16}
    assert len(details["certificates"]) == 20
    assert details["reducible_at_zero"] == [True, True]


@pytest.mark.criterion(12, "phase path between matching labels")
def test_phase_path():
    details = passed(vf.check_phase_path())
    assert all(details["refused"])
    assert len(details["gaps"]) == 11 and min(details["gaps"]) > 0
    assert details["min_abs_lambda_minus_1"] > 0


@pytest.mark.criterion(13, "convergence to the bulk state")
def test_thermo_rate():
    details = passed(vf.check_thermo_rate())
    assert details["rate"] <= details["epsilon"] + 0.05
    # Oracle: the occupation at the middle site from explicit amplitudes lambda^x.
    lam = 0.5
    for x in (2, 5):
        N = 2 * x + 1
        w = lam ** (2 * np.arange(1, N + 1))
        assert abs(w[x] / w.sum() - vf.thermo_deviation(lam, [x])[0]) < 1e-12


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
