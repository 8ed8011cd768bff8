import json

import numpy as np
import pytest

from localep.densities import Sample
from localep.experiments import (CSV_COLUMNS, ExperimentConfig, ResultRow, emit, load_config,
                                 read_rows, rows_to_csv, run_exp_a, run_exp_b, run_exp_c,
                                 run_exp_d, run_experiment)
from localep.local_process import oscillation_modulus

UNI = {"kind": "uniform-box", "low": [0.0], "high": [1.0]}
UNI2 = {"kind": "uniform-box", "low": [0.0, 0.0], "high": [1.0, 1.0],
        "region_J": [[0.2, 0.2], [0.8, 0.8]]}


def small(eid, **over):
    base = {
        "EXP-A": {"density": UNI, "net": {"kind": "intervals", "q": 4}, "n_list": [400, 2000]},
        "EXP-B": {"density": UNI, "n_list": [500, 5000]},
        "EXP-C": {"density": {**UNI, "region_J": [[0.1], [0.9]]}, "net": {"kind": "kernel"},
                  "n_list": [1000], "grids": {"z_points": 20}},
        "EXP-D": {"density": UNI2, "net": {"kind": "anchored-rectangles", "d": 2},
                  "n_list": [1000], "grids": {"z_points": 3}},
        "DIAG-COV": {"density": UNI, "net": {"kind": "intervals", "q": 2}, "n_list": [1000],
                     "reps": 500},
    }[eid]
    doc = {"experiment_id": eid, "seeds": [0, 1], "schedule": {"kind": "power", "alpha": 0.5,
                                                               "threshold": 2}}
    doc.update(base)
    doc.update(over)
    return doc


# -- config validation ------------------------------------------------------

@pytest.mark.parametrize("mutate", [
    lambda d: d.update(colour="red"),
    lambda d: d["net"].update(width=3),
    lambda d: d["density"].update(colour="red"),
    lambda d: d.update(params={"kernel": "uniform"}),
    lambda d: d.update(grids={"t_stepp": 0.1}),
    lambda d: d.update(solver={"tolerance": 1e-3}),
    lambda d: d.update(experiment_id="EXP-Z"),
    lambda d: d.pop("n_list"),
    lambda d: d.update(n_list=[]),
    lambda d: d.update(seeds=[]),
])
def test_config_rejects(mutate):
    doc = small("EXP-A")
    doc["net"] = dict(doc["net"])
    doc["density"] = dict(doc["density"])
    mutate(doc)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(doc)


def test_schedule_with_h_at_least_one_rejected():
    with pytest.raises(ValueError, match="bandwidths"):
        ExperimentConfig.from_dict(small("EXP-B", n_list=[1, 100]))
    with pytest.raises(ValueError, match="validation"):
        ExperimentConfig.from_dict(small("EXP-B", n_list=[100, 1000], schedule={
            "kind": "custom-table", "table": [[100, 0.1], [1000, 0.2]]}))
    with pytest.raises(ValueError, match="no entry"):
        ExperimentConfig.from_dict(small("EXP-B", schedule={
            "kind": "custom-table", "table": [[100, 0.1]]}))


def test_theta_outside_ball_rejected():
    with pytest.raises(ValueError, match="limit ball"):
        ExperimentConfig.from_dict(small("EXP-A", target_theta={"xi": 1.5}))
    cfg = ExperimentConfig.from_dict(small("EXP-A", target_theta={"xi": 0.8}))
    assert cfg.model().rate(cfg.theta_vector()) == pytest.approx(0.32)


def test_experiment_specific_checks():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(small("EXP-A", density={"kind": "triangular"}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(small("EXP-C", net={"kind": "intervals", "q": 2}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(small("EXP-D", density=UNI))


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig.from_dict(small("EXP-A", target_theta={"xi": 0.5}))
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    again = load_config(p)
    assert again.to_dict() == cfg.to_dict()
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        load_config(bad)


# -- CSV ----------------------------------------------------------------------

def test_zero_rows_header_only(tmp_path):
    path = emit([], tmp_path / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert read_rows(path) == []


def test_csv_roundtrip(tmp_path):
    rows = [ResultRow("EXP-B", 1, 10, 0.1 + 0.2, "osc_ratio", 1 / 3, {"a": [1, 2], "b": np.inf}),
            ResultRow("EXP-B", 0, 10, 0.3, "osc_ratio", 2.5, {"x": np.float64(0.1)})]
    path = emit(rows, tmp_path / "out.csv")
    back = read_rows(path)
    assert [r.seed for r in back] == [0, 1]
    assert back[1].h == 0.1 + 0.2 and back[1].value == 1 / 3
    assert back[1].aux == {"a": [1, 2], "b": "inf"}
    summary = json.loads(path.with_suffix(".summary.json").read_text())
    assert summary["medians"]["EXP-B"]["osc_ratio"]["10"] == pytest.approx((1 / 3 + 2.5) / 2)


def test_merge_in_seed_order():
    cfg = small("EXP-B", seeds=[3, 1, 2])
    rows = run_experiment(cfg)
    assert [r.seed for r in rows] == [1, 1, 2, 2, 3, 3]
    text = rows_to_csv(list(reversed(rows)))
    assert text == rows_to_csv(rows)


def test_emit_to_directory_with_summary(tmp_path):
    cfg = load_config(small("EXP-B"))
    run_experiment(cfg, out=tmp_path)
    summary = json.loads((tmp_path / "EXP-B.summary.json").read_text())
    assert summary["schedule_report"]["passed"] == {"H.i": True, "H.ii": True, "H.iii": True}
    assert summary["config"]["experiment_id"] == "EXP-B"


# -- determinism ----------------------------------------------------------------

@pytest.mark.parametrize("eid", ["EXP-A", "EXP-B", "DIAG-COV"])
def test_worker_count_does_not_change_bytes(eid):
    doc = small(eid)
    one = rows_to_csv(run_experiment(doc, workers=1))
    two = rows_to_csv(run_experiment(doc, workers=2))
    assert one == two
    assert one == rows_to_csv(run_experiment(doc, workers=1))


# -- experiment semantics ----------------------------------------------------------

def test_exp_a_bounds():
    rows = run_exp_a(small("EXP-A", target_theta={"values": [0.0] * 4}))
    sup = [r for r in rows if r.statistic == "sup_dist"]
    mins = [r for r in rows if r.statistic == "min_theta_dist"]
    assert len(sup) == 4 and len(mins) == 4
    for s, m in zip(sup, mins):
        assert s.value <= s.aux["max_norm"] + 1e-12
        assert m.value <= s.aux["max_norm"] + 1e-12
        assert 0 < s.h < 1


def test_exp_b_ratio_formula():
    h = 0.15
    ratio = oscillation_modulus(Sample([0.2, 0.3]), h) / np.sqrt(2 * h * np.log(1 / h))
    # 1.27279 / sqrt(0.3 * 1.89712) = 1.27279 / 0.754411
    assert ratio == pytest.approx(1.68713, abs=1e-5)
    rows = run_exp_b(small("EXP-B"))
    for r in rows:
        assert r.value == pytest.approx(
            r.aux["oscillation"] / np.sqrt(2 * r.h * np.log(1 / r.h)), rel=1e-14)


def test_exp_c_theoretical_limits():
    rows = run_exp_c(small("EXP-C"))
    assert {r.statistic for r in rows} == {"kde_ratio", "kde_ratio_f"}
    assert all(r.aux["theoretical"] == pytest.approx(1.0) for r in rows)
    tri = small("EXP-C", density={"kind": "triangular", "region_J": [[0.1], [0.9]]})
    rows = run_exp_c(tri)
    ratio = [r for r in rows if r.statistic == "kde_ratio"]
    assert ratio[0].aux["theoretical"] == pytest.approx(np.sqrt(2), abs=1e-6)


def test_exp_d_full_square_and_single_point():
    full = {"kind": "explicit", "members": [{"kind": "rect-indicator", "lo": [-0.5, -0.5],
                                             "hi": [0.5, 0.5]}]}
    rows = run_exp_d(small("EXP-D", net=full, grids={"z_points": 1}, seeds=[0], n_list=[4000]))
    r, = rows
    assert r.aux["z_points"] == 1
    # the net ellipsoid is [-1, 1]: dist = max(|L| - 1, 0)
    assert r.value == pytest.approx(max(r.aux["max_norm"] - 1.0, 0.0), abs=1e-6)
    rows = run_exp_d(small("EXP-D"))
    assert all(r.value <= r.aux["max_norm"] + 1e-12 for r in rows)


def test_runner_checks_experiment_id():
    assert run_exp_b.__name__ == "run_exp_b"
    with pytest.raises(ValueError):
        run_exp_a(small("EXP-B"))
