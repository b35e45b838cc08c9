"""Parameter sweeps over model families, one CSV row per (grid point, N).

A sweep config is a JSON object::

    {"model": "pvbs" | "aklt-path" | "so" | "so-path",
     "N": [4, 5, 6],                       # chain lengths
     "lambdas": [[0.5], [2.0]],            # pvbs: one weight vector per point
     "theta": {"0,1": 0.3},                # pvbs: phases shared by all points
     "s": [0.0, 0.5] or {"points": 21},    # aklt-path / so-path grid
     "J": 2, "lambda0": [0.5, 0.5],        # so / so-path
     "solver": "auto", "seed": 12648430, "tol": 0.0, "workers": 4,
     "out": "rows.csv"}

Rows are computed concurrently and written by a single writer in grid order.
A failing row records its error and the sweep carries on.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics as nx
from .chain import ChainHamiltonian, NearestNeighborInteraction, spectral_gap
from .errors import GapChainError, ValidationError
from .tables import write_rows

MODELS = ("pvbs", "aklt-path", "so", "so-path")
SOLVERS = ("auto", "dense", "krylov")


@dataclass
class SweepConfig:
    model: str
    N: list
    points: list = field(default_factory=list)  # model parameters, one dict per grid point
    solver: str = "auto"
    seed: int = nx.DEFAULT_SEED
    tol: float = 0.0
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.solver not in SOLVERS:
            raise ValidationError(f"unknown solver {self.solver!r}")
        if not self.N:
            raise ValidationError("the N grid is empty")
        if not self.points:
            raise ValidationError("the parameter grid is empty")
        if any(int(n) != n or n < 2 for n in self.N):
            raise ValidationError(f"chain lengths must be integers >= 2, got {self.N}")
        if self.workers < 1:
            raise ValidationError("workers must be positive")
        d = local_dimension(self)
        too_big = [n for n in self.N if d**n > nx.MAX_DIMENSION]
        if too_big:
            raise ValidationError(f"N={too_big} exceeds the dimension ceiling {nx.MAX_DIMENSION} for d={d}")

    @classmethod
    def from_json(cls, obj: dict, **overrides) -> "SweepConfig":
        obj = dict(obj)
        obj.update({k: v for k, v in overrides.items() if v is not None})
        model = obj.get("model")
        N = obj.get("N", [])
        N = [N] if isinstance(N, int) else list(N)
        if model == "pvbs":
            lams = obj.get("lambdas", [])
            theta = obj.get("theta", {})
            points = [{"lambda": [lam] if np.isscalar(lam) else list(lam), "theta": theta} for lam in lams]
        elif model in ("aklt-path", "so-path"):
            points = [{"s": s} for s in _s_grid(obj, model)]
            if model == "so-path":
                for p in points:
                    p.update(J=int(obj.get("J", 1)), lambda0=obj.get("lambda0", 0.5))
        elif model == "so":
            Js = obj.get("J", [1])
            points = [{"J": int(j)} for j in ([Js] if isinstance(Js, int) else Js)]
        else:
            raise ValidationError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
        return cls(model=model, N=N, points=points, solver=obj.get("solver", "auto"),
                   seed=int(obj.get("seed", nx.DEFAULT_SEED)), tol=float(obj.get("tol", 0.0)),
                   workers=int(obj.get("workers", 1)), out=obj.get("out"))


def _s_grid(obj: dict, model: str) -> list:
    from .aklt import S0
    from .so_models import s0_of

    grid = obj.get("s", {"points": 11})
    if isinstance(grid, dict):
        n = int(grid.get("points", 0))
        if n < 1:
            return []
        end = S0 if model == "aklt-path" else s0_of(int(obj.get("J", 1)))
        start = float(grid.get("start", 0.0 if model == "aklt-path" else end / n))
        return [float(x) for x in np.linspace(start, end, n)]
    return [float(x) for x in grid]


def local_dimension(cfg: SweepConfig) -> int:
    if cfg.model == "pvbs":
        return max(len(p["lambda"]) for p in cfg.points) + 1
    if cfg.model == "aklt-path":
        return 3
    return 2 * max(int(p["J"]) for p in cfg.points) + 1


def _model_at(model: str, point: dict) -> tuple[NearestNeighborInteraction, int, dict]:
    """Interaction, expected kernel dimension and descriptive columns of one grid point."""
    if model == "pvbs":
        from .pvbs import PvbsParams, pvbs_interaction

        p = PvbsParams.from_json(point)
        cols = {f"lambda_{i}": lam for i, lam in enumerate(p.lambdas, start=1)}
        return pvbs_interaction(p), 2**p.n, cols
    if model == "aklt-path":
        from .aklt import EXPECTED_KERNEL, PathSchedule, path_interaction

        sched = PathSchedule()
        s = point["s"]
        return path_interaction(s, sched), EXPECTED_KERNEL, {"s": s, "f": sched.f(s), "g": sched.g(s)}
    from . import so_models as so

    J = int(point["J"])
    if model == "so":
        return so.so_interaction(2 * J + 1), so.expected_kernel_dim(J), {"J": J}
    s = point["s"]
    prof = so.default_lambda_profile(J, point.get("lambda0", 0.5))
    return so.so_path_interaction(J, s, prof), so.expected_kernel_dim(J), {"J": J, "s": s}


def _row(cfg: SweepConfig, point: dict, N: int) -> dict:
    row: dict = {"model": cfg.model, "N": N}
    try:
        h, expected, cols = _model_at(cfg.model, point)
        row.update(cols)
        H = ChainHamiltonian(h, N)
        rep = spectral_gap(H, expected, solver=cfg.solver, tol=cfg.tol, seed=cfg.seed,
                           model_id=cfg.model, N=N)
        row.update(rep.as_row())
        row.update(expected_kernel_dim=expected, status="ok", error=None)
    except GapChainError as exc:
        report = getattr(exc, "report", None)
        if report is not None:
            row.update(report.as_row())
        row.update(status=type(exc).__name__, error=str(exc))
    return row


def run_sweep(cfg: SweepConfig, progress: Callable[[dict], None] | None = None) -> list[dict]:
    """Compute every row; write them to ``cfg.out`` when set.  Rows come back in grid order."""
    jobs = [(p, int(N)) for p in cfg.points for N in cfg.N]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        rows = []
        for row in pool.map(lambda job: _row(cfg, *job), jobs):
            rows.append(row)
            if progress:
                progress(row)
    if cfg.out:
        write_rows(cfg.out, rows)
    return rows
