"""Monte Carlo harness: seeded replication, aggregation, table presets,
summary emission."""

import json
import math

import numpy as np
import pytest

from levyestim.errors import DomainError, EstimationError
from levyestim.mc import (
    DEFAULT_MASTER_SEED,
    PRESET_NAMES,
    ExperimentConfig,
    emit,
    preset,
    run_experiment,
    run_preset,
)
from levyestim.serialize import SUMMARY_COLUMNS, read_summary
from levyestim.stable_core import (
    StableParams,
    derive_seed,
    sample_increments,
    skew_to_positivity,
)
from levyestim.symmetric import frac_moment_estimate, log_moment_estimate


def _small_config(**overrides):
    base = dict(
        model="symmetric_stable",
        truth={"beta": 1.5, "sigma": 0.5, "gamma": -0.5},
        n_list=(301,),
        h_rule={"kind": "fixed_T", "T": 5.0},
        replications=8,
        estimators=({"id": "log", "kind": "log"},),
        master_seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# config validation


def test_config_rejects_bad_fields():
    with pytest.raises(DomainError):
        _small_config(model="brownian")
    with pytest.raises(DomainError):
        _small_config(replications=0)
    with pytest.raises(DomainError):
        _small_config(n_list=())
    with pytest.raises(DomainError):
        _small_config(h_rule={"kind": "log"})
    with pytest.raises(DomainError):
        _small_config(h_rule={"kind": "fixed_T", "T": 0.0})
    with pytest.raises(DomainError):
        _small_config(estimators=())
    with pytest.raises(DomainError):
        _small_config(estimators=({"id": "x", "kind": "mystery"},))
    with pytest.raises(DomainError):
        # estimator reports sigma but truth omits it
        _small_config(truth={"beta": 1.5, "gamma": -0.5})


def test_config_mesh_rules():
    assert _small_config().mesh(500) == 0.01
    power = _small_config(h_rule={"kind": "power", "a": 0.6})
    assert power.mesh(2001) == pytest.approx(2001.0 ** -0.6, rel=1e-15)


def test_config_json_round_trip():
    cfg = _small_config()
    again = ExperimentConfig.from_json_dict(
        json.loads(json.dumps(cfg.to_json_dict())))
    assert again == cfg


# ---------------------------------------------------------------------------
# run_experiment semantics


def test_single_replication_row_is_the_single_estimate():
    cfg = _small_config(replications=1)
    rows = {(r.estimator, r.param): r for r in run_experiment(cfg)}
    sample = sample_increments(StableParams(1.5, 0.5, 0.0, -0.5), 5.0 / 301,
                               301, derive_seed(99, 301, "log", 0))
    est = log_moment_estimate(sample)
    for param, value, truth in (("beta", est.beta_hat, 1.5),
                                ("sigma", est.sigma_hat, 0.5),
                                ("gamma", est.gamma_hat, -0.5)):
        row = rows[("log", param)]
        assert row.mean == value
        assert row.rmse == abs(value - truth)
        assert row.failures == 0


def test_rmse_identity_and_exact_aggregation():
    # recompute every replication estimate independently and check the
    # mean and the population convention rmse^2 = bias^2 + var
    cfg = _small_config(replications=11)
    rows = {(r.estimator, r.param): r for r in run_experiment(cfg)}
    params = StableParams(1.5, 0.5, 0.0, -0.5)
    ests = []
    for rep in range(11):
        s = sample_increments(params, 5.0 / 301, 301,
                              derive_seed(99, 301, "log", rep))
        ests.append(log_moment_estimate(s).beta_hat)
    ests = np.array(ests)
    row = rows[("log", "beta")]
    assert row.mean == pytest.approx(ests.mean(), rel=1e-15)
    rmse_sq = (ests.mean() - 1.5) ** 2 + ests.var()
    assert row.rmse ** 2 == pytest.approx(rmse_sq, rel=1e-12)
    assert row.rmse >= abs(row.mean - row.truth)


def test_failures_excluded_from_aggregates():
    # fractional order p = 0.2 needs beta > 6p = 1.2; at truth beta = 1.2
    # the root lands outside the bracket for roughly half the paths
    cfg = _small_config(
        truth={"beta": 1.2, "sigma": 0.5, "gamma": -0.5},
        replications=40,
        estimators=({"id": "frac", "kind": "frac", "p": 0.2},))
    row = run_experiment(cfg)[0]
    assert 0 < row.failures < 40
    params = StableParams(1.2, 0.5, 0.0, -0.5)
    kept = []
    fails = 0
    for rep in range(40):
        s = sample_increments(params, 5.0 / 301, 301,
                              derive_seed(99, 301, "frac", rep))
        try:
            kept.append(frac_moment_estimate(s, 0.2).beta_hat)
        except EstimationError:
            fails += 1
    assert fails == row.failures
    assert fails + len(kept) == row.replications
    assert row.mean == pytest.approx(np.mean(kept), rel=1e-15)


def test_all_replications_failed_gives_nan_row():
    # p = 0.2 on beta = 0.8 paths: the admissibility root never exists
    cfg = _small_config(
        truth={"beta": 0.8, "sigma": 0.5, "gamma": -0.5},
        replications=5,
        estimators=({"id": "frac", "kind": "frac", "p": 0.2},))
    row = run_experiment(cfg)[0]
    assert row.failures == 5
    assert math.isnan(row.mean) and math.isnan(row.rmse)


def test_worker_count_never_changes_rows():
    cfg = ExperimentConfig(
        model="skewed_stable",
        truth={"beta": 1.5, "p_pos": 0.5984, "sigma": 1.0},
        n_list=(400,),
        h_rule={"kind": "fixed_T", "T": 1.0},
        replications=24,
        estimators=({"id": "sign", "kind": "sign"},
                    {"id": "bipower", "kind": "bipower", "q": 0.25}),
        master_seed=7)
    rows1 = run_experiment(cfg, threads=1)
    assert run_experiment(cfg, threads=2) == rows1
    assert run_experiment(cfg, threads=4) == rows1


def test_thread_env_var_drives_default_worker_count(monkeypatch):
    monkeypatch.setenv("LEVY_ESTIM_THREADS", "3")
    cfg = _small_config(replications=6)
    assert run_experiment(cfg) == run_experiment(cfg, threads=1)


def test_rows_cover_every_cell_in_order():
    cfg = _small_config(n_list=(101, 301),
                        estimators=({"id": "log", "kind": "log"},
                                    {"id": "median", "kind": "median"}))
    rows = run_experiment(cfg)
    cells = [(r.n, r.estimator, r.param) for r in rows]
    assert cells == [
        (101, "log", "beta"), (101, "log", "sigma"), (101, "log", "gamma"),
        (101, "median", "gamma"),
        (301, "log", "beta"), (301, "log", "sigma"), (301, "log", "gamma"),
        (301, "median", "gamma"),
    ]
    assert all(r.T == pytest.approx(5.0, rel=1e-15) for r in rows)


# ---------------------------------------------------------------------------
# presets


def test_preset_names_and_unknown_id():
    assert PRESET_NAMES == ("table1", "table2", "table3", "table4")
    with pytest.raises(DomainError):
        preset("table5")


def test_symmetric_preset_designs():
    t1 = preset("table1")
    assert [c.truth["beta"] for c in t1] == [0.8, 1.0, 1.5, 1.8]
    for cfg in t1:
        assert cfg.truth["sigma"] == 0.5 and cfg.truth["gamma"] == -0.5
        assert cfg.n_list == (501, 1001, 2001)
        assert cfg.replications == 1000
        assert cfg.mesh(2001) == 5.0 / 2001
        ids = [e["id"] for e in cfg.estimators]
        assert ids[0] == "log" and "known_scale" in ids and "median" in ids
    # fractional orders appear only when p < beta/6
    fracs = {c.truth["beta"]: [e["p"] for e in c.estimators
                               if e["kind"] == "frac"] for c in t1}
    assert fracs[0.8] == [0.05, 0.1]
    assert fracs[1.0] == [0.05, 0.1]
    assert fracs[1.5] == [0.05, 0.1, 0.2]
    assert fracs[1.8] == [0.05, 0.1, 0.2]

    t2 = preset("table2")
    assert t2[0].h_rule == {"kind": "power", "a": 0.6}
    n = 2001
    assert n * t2[0].mesh(n) == pytest.approx(n ** 0.4, rel=1e-15)
    assert n * t2[0].mesh(n) == pytest.approx(20.917, abs=5e-4)


def test_skewed_preset_designs():
    t3 = preset("table3")
    assert [c.truth["beta"] for c in t3] == [1.2, 1.5, 1.7, 1.9]
    pairs = {round(c.truth["p_pos"], 4): c.truth["beta"] for c in t3}
    assert pairs[0.5467] == 1.7
    for cfg in t3:
        assert cfg.model == "skewed_stable"
        assert cfg.n_list == (500, 1000, 2000, 5000)
        assert cfg.truth["p_pos"] == pytest.approx(
            skew_to_positivity(cfg.truth["beta"], -0.5), abs=1e-12)
        assert [e["kind"] for e in cfg.estimators] == [
            "sign", "bipower", "power_scale"]
        assert all(e.get("q", 0.25) == 0.25 for e in cfg.estimators)

    t4 = preset("table4")
    for cfg in t4:
        assert cfg.model == "timevarying_stable"
        assert cfg.truth["path"] == "cosine"
        assert cfg.truth["sigma_star"] == 0.6
        assert cfg.estimators[-1]["kind"] == "tripower"


def test_run_preset_filters():
    rows = run_preset("table1", replications=3, beta=0.8, n_list=[101])
    assert {r.n for r in rows} == {101}
    assert all(r.replications == 3 for r in rows)
    assert all(r.table == "table1[beta=0.8]" for r in rows)
    with pytest.raises(DomainError):
        run_preset("table1", beta=0.77)


def test_table1_log_cell_reproduces_published_row(table1_beta08):
    row = table1_beta08[("log", "beta")]
    assert row.seed == DEFAULT_MASTER_SEED
    assert row.failures == 0
    assert abs(row.mean - 0.800) <= 0.003
    assert abs(row.rmse - 0.024) <= 0.3 * 0.024


def test_table4_tripower_cell_reproduces_published_row(table4_beta15):
    row = table4_beta15[("tripower", "sigma_star")]
    assert abs(row.mean - 0.615) <= 0.02
    assert abs(row.rmse - 0.141) <= 0.3 * 0.141


# ---------------------------------------------------------------------------
# emission


def _demo_rows():
    cfg = _small_config(replications=2)
    return run_experiment(cfg)


def test_emit_csv_round_trip(tmp_path):
    rows = _demo_rows()
    path = tmp_path / "summary.csv"
    emit(rows, "csv", path, config_echo={"label": "demo", "seed": 99})
    text = path.read_text()
    assert text.splitlines()[0] == "# label=demo"
    assert ",".join(SUMMARY_COLUMNS) in text
    back, meta = read_summary(path)
    assert meta == {"label": "demo", "seed": "99"}
    assert [r.as_record() for r in back] == [r.as_record() for r in rows]


def test_emit_json_mirrors_csv(tmp_path):
    rows = _demo_rows()
    path = tmp_path / "summary.json"
    emit(rows, "json", path, config_echo={"seed": 99})
    payload = json.loads(path.read_text())
    assert payload["config"] == {"seed": "99"}
    assert len(payload["rows"]) == len(rows)
    for rec, row in zip(payload["rows"], rows):
        assert set(rec) == {c.lower() for c in SUMMARY_COLUMNS}
        assert all(k == k.lower() and " " not in k for k in rec)
        assert rec["mean"] == float(f"{row.mean:.6g}")
        assert rec["n"] == row.n


def test_emit_handles_all_failed_cells(tmp_path):
    cfg = _small_config(
        truth={"beta": 0.8, "sigma": 0.5, "gamma": -0.5},
        replications=3,
        estimators=({"id": "frac", "kind": "frac", "p": 0.2},))
    rows = run_experiment(cfg)
    csv_path = tmp_path / "nan.csv"
    emit(rows, "csv", csv_path)
    back, _ = read_summary(csv_path)
    assert math.isnan(back[0].mean)
    json_path = tmp_path / "nan.json"
    emit(rows, "json", json_path)
    rec = json.loads(json_path.read_text())["rows"][0]
    assert rec["mean"] is None and rec["rmse"] is None
    assert rec["failures"] == 3


def test_emit_rejects_empty_and_unknown_format(tmp_path):
    with pytest.raises(DomainError):
        emit([], "csv", tmp_path / "x.csv")
    with pytest.raises(DomainError):
        emit(_demo_rows(), "parquet", tmp_path / "x.parquet")
