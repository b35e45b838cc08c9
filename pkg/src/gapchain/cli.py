"""Command-line interface: ``gapchain <subcommand> [options]``.

Exit codes: 0 success, 1 I/O or other failure, 2 invalid input, 3 a
certification or acceptance check failed, 4 the eigensolver failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import numerics as nx
from .errors import CertificationError, GapChainError, ValidationError
from .tables import write_rows


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("config must be a JSON object")
    return obj


def _pick(args, cfg: dict, name: str, default=None, key: str | None = None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(key or name, default)


def _pvbs_params(args, cfg: dict):
    from .pvbs import PvbsParams

    obj = {"lambda": _pick(args, cfg, "lam", key="lambda"), "theta": dict(cfg.get("theta", {}))}
    for item in args.theta or []:
        key, _, val = item.partition("=")
        if not val:
            raise ValidationError(f"--theta expects i,j=value, got {item!r}")
        obj["theta"][key.strip()] = float(val)
    if obj["lambda"] is None:
        raise ValidationError("give --lambda or a config with a \"lambda\" list")
    return PvbsParams.from_json(obj)


def _emit(args, rows: list[dict], summary: dict | None = None):
    if args.out:
        write_rows(args.out, rows)
    if args.json:
        print(json.dumps({"rows": _plain(rows), **({"summary": _plain(summary)} if summary else {})}))
        return
    if rows:
        cols = list(rows[0])
        print(",".join(cols))
        for r in rows:
            print(",".join(_short(r.get(c)) for c in cols))
    for k, v in (summary or {}).items():
        print(f"{k}: {_short(v)}")


def _short(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{complex(x).real:.10g}{complex(x).imag:+.10g}i"
    return "" if x is None else str(x)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _solver(args, cfg) -> str:
    return _pick(args, cfg, "solver", "auto")


def _seed(args, cfg) -> int:
    return int(_pick(args, cfg, "seed", nx.DEFAULT_SEED))


def _tol(args, cfg) -> float:
    return float(_pick(args, cfg, "tol", 0.0))


# ---------------------------------------------------------------------------
# subcommands


def cmd_pvbs_gap(args) -> int:
    from .chain import ChainHamiltonian, spectral_gap
    from .pvbs import bulk_bound, extrapolate_gap, gap_upper_bound, pvbs_interaction

    cfg = _load_config(args.config)
    p = _pvbs_params(args, cfg)
    Ns = args.N or cfg.get("N") or [6]
    Ns = [Ns] if isinstance(Ns, int) else Ns
    rows = []
    for N in Ns:
        rep = spectral_gap(ChainHamiltonian(pvbs_interaction(p), int(N)), 2**p.n, solver=_solver(args, cfg),
                           tol=_tol(args, cfg), seed=_seed(args, cfg), model_id=p.label(), N=int(N))
        b = gap_upper_bound(p, int(N))
        row = rep.as_row()
        row.update(bound=b.value, bound_vacuous=b.vacuous)
        rows.append(row)
    # measured comparison with the conjectured bulk gap; nothing is asserted
    summary = {"bulk_bound": bulk_bound(p)}
    if len({r["N"] for r in rows}) >= 2:
        summary["extrapolated_gap"] = extrapolate_gap([r["N"] for r in rows], [r["gap"] for r in rows])
    _emit(args, rows, summary)
    return 0


def cmd_pvbs_classify(args) -> int:
    from .pvbs import classify

    cfg = _load_config(args.config)
    p = _pvbs_params(args, cfg)
    lab = classify(p)
    row = {"model_id": p.label(), "n_L": lab.n_L, "n_R": lab.n_R, "gapped": p.gapped_admissible}
    _emit(args, [row])
    return 0


def cmd_pvbs_one_particle(args) -> int:
    from .pvbs import one_particle_gap_certificate

    cfg = _load_config(args.config)
    lams = _pick(args, cfg, "lam", key="lambda")
    if lams is None:
        raise ValidationError("give --lambda")
    lams = [lams] if np.isscalar(lams) else lams
    N_max = int(_pick(args, cfg, "N_max", 200))
    rows, ok = [], True
    for lam in lams:
        c = one_particle_gap_certificate(float(lam), N_max)
        ok &= c.passed
        rows.append({"lambda": float(lam), "N_max": N_max, "passed": c.passed, "gap_limit": c.limit,
                     "min_gap": float(np.min(c.gaps)), "top_error": c.top_error,
                     "recursion_residual": c.chebyshev_residual, "failures": "; ".join(c.failures[:3])})
    _emit(args, rows)
    return 0 if ok else 3


def cmd_transfer_spectrum(args) -> int:
    from . import mps

    cfg = _load_config(args.config)
    model = _pick(args, cfg, "model", "pvbs")
    closed = None
    if model == "pvbs":
        from .pvbs import pvbs_mps, pvbs_transfer_spectrum_closed_form

        p = _pvbs_params(args, cfg)
        fam = pvbs_mps(p)
        closed = pvbs_transfer_spectrum_closed_form(p).values
    elif model == "aklt-path":
        from .aklt import S0, path_mps, path_transfer_closed_form

        s = float(_pick(args, cfg, "s", S0))
        fam = path_mps(s)
        closed = path_transfer_closed_form(s).eigenvalues
    elif model == "so-path":
        from .so_models import default_lambda_profile, s0_of, so_path_mps

        J = int(_pick(args, cfg, "J", 1))
        s = float(_pick(args, cfg, "s", s0_of(J)))
        fam = so_path_mps(J, s, default_lambda_profile(J, cfg.get("lambda0", 0.5)))
    else:
        raise ValidationError(f"unknown model {model!r}")
    w = np.linalg.eigvals(mps.transfer_operator(fam))
    w = w[np.lexsort((np.angle(w), -np.abs(w)))]
    rows = [{"index": i, "eigenvalue": complex(x), "modulus": float(abs(x))} for i, x in enumerate(w)]
    summary = {}
    if closed is not None:
        from .pvbs import multiset_distance

        summary["closed_form_distance"] = multiset_distance(closed, w)
    _emit(args, rows, summary)
    return 0


def cmd_aklt_path(args) -> int:
    from . import aklt

    cfg = _load_config(args.config)
    N = int(_pick(args, cfg, "N", 6))
    points = int(_pick(args, cfg, "points", 21))
    k = int(_pick(args, cfg, "k", 3))
    M = int(_pick(args, cfg, "martingale_N", max(k, 2 * k - 2)))
    if points < 1:
        raise ValidationError("the s grid is empty")
    sched = aklt.PathSchedule(**({"delta": float(cfg["delta"])} if "delta" in cfg else {}))
    grid = np.linspace(0.0, aklt.S0, points)
    rows = aklt.gap_along_path(N, grid, sched, solver=_solver(args, cfg), seed=_seed(args, cfg))
    for row in rows:
        row["g_kN"] = aklt.martingale_along_path(row["s"], k, M, sched)
        row.pop("N", None)
    cols = ["s", "f", "g", "t_2", "t_4", "gap", "kernel_dim", "g_kN"]
    rows = [{c: r[c] for c in cols} for r in rows]
    _emit(args, rows, {"N": N, "k": k, "martingale_N": M, "min_gap": min(r["gap"] for r in rows)})
    return 0


def cmd_martingale(args) -> int:
    from . import mps

    cfg = _load_config(args.config)
    model = _pick(args, cfg, "model", "aklt")
    if model == "aklt":
        from .aklt import aklt_interaction, aklt_mps

        h, fam = aklt_interaction(), aklt_mps()
    elif model == "aklt-path":
        from .aklt import ground_family, path_interaction

        s = float(_pick(args, cfg, "s", 0.5))
        h = path_interaction(s)
        fam = ground_family(s)
    elif model == "so-path":
        from .so_models import so_path_interaction, so_path_mps

        J, s = int(_pick(args, cfg, "J", 2)), float(_pick(args, cfg, "s", 0.1))
        h, fam = so_path_interaction(J, s), so_path_mps(J, s)
    elif model == "pvbs":
        from .pvbs import pvbs_interaction, pvbs_mps

        p = _pvbs_params(args, cfg)
        h, fam = pvbs_interaction(p), pvbs_mps(p)
    else:
        raise ValidationError(f"unknown model {model!r}")
    ks = args.k or cfg.get("k") or [2, 3, 4]
    ks = [ks] if isinstance(ks, int) else ks
    N_max = int(_pick(args, cfg, "N_max", 8))
    rows = []
    for k in ks:
        for N in range(max(int(k), 2), N_max + 1):
            row = {"k": int(k), "N": N, "g_kN": mps.martingale_coefficient(h, fam, int(k), N),
                   "regime": "N>=2k-1" if N >= 2 * k - 1 else ("N=2k-2" if N == 2 * k - 2 else "N<2k-2")}
            if args.dense_check and h.d ** (N + 1) <= 4096:
                row["g_kN_dense"] = mps.martingale_coefficient_dense(h, int(k), N)
            rows.append(row)
    # eps_k over the recorded regimes N >= 2k-2
    eps = {}
    for r in rows:
        if r["N"] >= 2 * r["k"] - 2:
            eps[r["k"]] = max(eps.get(r["k"], 0.0), r["g_kN"])
    _emit(args, rows, {"eps_k": {str(k): v for k, v in eps.items()}, "first_admissible_k": mps.first_admissible_k(eps)})
    return 0


def cmd_so_models(args) -> int:
    from . import so_models as so

    cfg = _load_config(args.config)
    J = int(_pick(args, cfg, "J", 1))
    points = int(_pick(args, cfg, "grid", 11))
    N = int(_pick(args, cfg, "N", 4))
    if points < 1:
        raise ValidationError("the s grid is empty")
    prof = so.default_lambda_profile(J, cfg.get("lambda0", 0.5) if args.lambda0 is None else args.lambda0)
    rows = []
    for s in np.linspace(0.0, so.s0_of(J), points):
        s = float(s)
        cert = so.so_transfer_check(J, s, prof)
        row = {"J": J, "s": s, "lambda": float(prof(s)[0]), "spectral_radius": cert.spectral_radius,
               "isometry_residual": cert.isometry_residual, "margin": cert.margin,
               "certified": cert.passed, "reducible": cert.reducible}
        if s > 0:
            rep = so.so_path_gap(J, s, N, prof, solver=_pick(args, cfg, "solver", "krylov"), seed=_seed(args, cfg))
            row.update(N=N, kernel_dim=rep.kernel_dim, gap=rep.gap)
        rows.append(row)
    _emit(args, rows)
    return 0


def cmd_sweep(args) -> int:
    from .sweep import SweepConfig, run_sweep

    cfg = _load_config(args.config)
    if not cfg:
        raise ValidationError("sweep needs --config")
    sc = SweepConfig.from_json(cfg, out=args.out, seed=args.seed, solver=args.solver, tol=args.tol,
                               workers=args.workers)
    rows = run_sweep(sc)
    failed = [r for r in rows if r.get("status") != "ok"]
    if args.json:
        print(json.dumps({"rows": _plain(rows)}))
    else:
        for r in rows:
            print(f"{r['model']} N={r['N']} kernel={r.get('kernel_dim')} gap={_short(r.get('gap'))} {r['status']}")
    return 3 if failed else 0


def cmd_verify(args) -> int:
    from .verify import verify_bundle

    seed = args.seed if args.seed is not None else nx.DEFAULT_SEED

    def show(r):
        if args.json:
            print(json.dumps(r.to_json()), flush=True)
        else:
            print(f"{r.line()}  ({r.seconds:.1f}s)", flush=True)

    results = verify_bundle(args.bundle, seed=seed, on_result=show)
    return 0 if all(r.passed for r in results) else 3


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters; flags override it")
    common.add_argument("--out", help="write the result table to this CSV file")
    common.add_argument("--seed", type=int, help=f"random seed (default {nx.DEFAULT_SEED:#x})")
    common.add_argument("--solver", choices=["auto", "dense", "krylov"], help="eigensolver")
    common.add_argument("--tol", type=float, help="Krylov convergence tolerance (0 = machine precision)")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    pv = argparse.ArgumentParser(add_help=False)
    pv.add_argument("--lambda", dest="lam", type=float, nargs="+", help="particle weights lambda_1..lambda_n")
    pv.add_argument("--theta", action="append", metavar="I,J=VALUE", help="phase theta_ij (repeatable)")

    ap = argparse.ArgumentParser(prog="gapchain", description="Spectral gaps of frustration-free spin chains.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pvbs-gap", parents=[common, pv], help="gap of a product-vacuum chain")
    p.add_argument("--N", type=int, nargs="+", help="chain lengths")
    p.set_defaults(func=cmd_pvbs_gap)

    p = sub.add_parser("pvbs-classify", parents=[common, pv], help="edge-state label (n_L, n_R)")
    p.set_defaults(func=cmd_pvbs_classify)

    p = sub.add_parser("pvbs-one-particle", parents=[common, pv], help="one-particle band certificate")
    p.add_argument("--N-max", dest="N_max", type=int, help="largest chain length (default 200)")
    p.set_defaults(func=cmd_pvbs_one_particle)

    p = sub.add_parser("transfer-spectrum", parents=[common, pv], help="transfer operator eigenvalues")
    p.add_argument("--model", choices=["pvbs", "aklt-path", "so-path"])
    p.add_argument("--s", type=float, help="path parameter")
    p.add_argument("--J", type=int, help="SO(2J+1) rank")
    p.set_defaults(func=cmd_transfer_spectrum)

    p = sub.add_parser("aklt-path", parents=[common], help="gap and transfer data along the AKLT path")
    p.add_argument("--N", type=int, help="chain length (default 6)")
    p.add_argument("--points", type=int, help="number of s grid points (default 21)")
    p.add_argument("--k", type=int, help="martingale block length (default 3)")
    p.add_argument("--martingale-N", dest="martingale_N", type=int, help="chain length for g_kN")
    p.set_defaults(func=cmd_aklt_path)

    p = sub.add_parser("martingale", parents=[common, pv], help="martingale coefficients g_kN")
    p.add_argument("--model", choices=["aklt", "aklt-path", "so-path", "pvbs"])
    p.add_argument("--s", type=float, help="path parameter for aklt-path and so-path")
    p.add_argument("--J", type=int, help="SO(2J+1) rank for so-path (default 2)")
    p.add_argument("--k", type=int, nargs="+", help="block lengths")
    p.add_argument("--N-max", dest="N_max", type=int, help="largest N (default 8)")
    p.add_argument("--dense-check", action="store_true", help="also compute the dense reference")
    p.set_defaults(func=cmd_martingale)

    p = sub.add_parser("so-models", parents=[common], help="SO(2J+1) path certificates and gaps")
    p.add_argument("--J", type=int)
    p.add_argument("--N", type=int, help="chain length for gaps (default 4)")
    p.add_argument("--grid", type=int, help="number of s grid points (default 11)")
    p.add_argument("--lambda0", type=float, nargs="+", help="twist parameters at s = 0")
    p.set_defaults(func=cmd_so_models)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep from a JSON config")
    p.add_argument("--workers", type=int, help="concurrent rows")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    p.add_argument("bundle", choices=["pvbs", "aklt", "so", "all"])
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GapChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
