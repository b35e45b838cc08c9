import pytest

from gapchain import aklt
from gapchain.errors import ValidationError
from gapchain.sweep import SweepConfig, run_sweep
from gapchain.tables import read_rows, same_value


def test_config_validation():
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "ising", "N": [4]})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "pvbs", "N": [4], "lambdas": []})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "pvbs", "N": [], "lambdas": [[0.5]]})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "pvbs", "N": [1], "lambdas": [[0.5]]})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "aklt-path", "N": [14]})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "aklt-path", "N": [4], "s": {"points": 0}})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "so", "N": [4], "J": 1, "solver": "magic"})
    with pytest.raises(ValidationError):
        SweepConfig.from_json({"model": "so", "N": [4], "J": 1, "workers": 0})


def test_grid_construction():
    cfg = SweepConfig.from_json({"model": "aklt-path", "N": 4, "s": {"points": 3}})
    assert [p["s"] for p in cfg.points] == [0.0, aklt.S0 / 2, aklt.S0]
    cfg = SweepConfig.from_json({"model": "pvbs", "N": [3], "lambdas": [0.5, [0.2, 3.0]]})
    assert [p["lambda"] for p in cfg.points] == [[0.5], [0.2, 3.0]]


def test_pvbs_rows(tmp_path):
    out = tmp_path / "rows.csv"
    cfg = SweepConfig.from_json({"model": "pvbs", "N": [3, 4], "lambdas": [[0.5], [2.0]],
                                 "theta": {"0,1": 0.3}, "out": str(out)})
    rows = run_sweep(cfg)
    assert [(r["lambda_1"], r["N"]) for r in rows] == [(0.5, 3), (0.5, 4), (2.0, 3), (2.0, 4)]
    assert all(r["status"] == "ok" and r["kernel_dim"] == 2 for r in rows)
    back = read_rows(out)
    for a, b in zip(rows, back):
        for k in a:
            assert same_value(a[k], b[k]), k


def test_failing_row_is_recorded():
    # s = 0 has no path interaction for the SO deformation; the other point still runs.
    cfg = SweepConfig.from_json({"model": "so-path", "J": 1, "N": [3], "s": [0.0, 0.5]})
    rows = run_sweep(cfg)
    assert rows[0]["status"] == "ValidationError" and rows[0]["error"]
    assert rows[1]["status"] == "ok" and rows[1]["kernel_dim"] == 4


def test_worker_count_does_not_change_results():
    obj = {"model": "aklt-path", "N": [4, 5], "s": {"points": 4}, "solver": "krylov"}
    one = run_sweep(SweepConfig.from_json(obj, workers=1))
    four = run_sweep(SweepConfig.from_json(obj, workers=4))
    assert all(r["status"] == "ok" for r in one)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]
    assert strip(one) == strip(four)


def test_so_rows():
    rows = run_sweep(SweepConfig.from_json({"model": "so", "N": [4], "J": [1, 2]}))
    assert [r["kernel_dim"] for r in rows] == [4, 16]
