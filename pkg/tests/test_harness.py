import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eesim import hardware as hw
from eesim.cli import main
from eesim.harness import (
    CSV_COLUMNS, PRESET_NAMES, SimConfig, SweepTable, aggregate, emit_csv, preset, read_csv, run_sweep,
    run_trial, write_outputs,
)
from eesim.precoding import DIGITAL


def small(**kw):
    base = dict(n_t=16, n_r=2, n_s=2, trials=4, snr_grid_db=[0.0], bits_dac=[3], master_seed=1)
    base.update(kw)
    return SimConfig(**base)


# -- configuration ---------------------------------------------------------------

def test_config_defaults():
    cfg = SimConfig()
    assert cfg.num_paths == 5 and cfg.p_max == 1.0 and cfg.bits_ps == 5
    assert cfg.sample_rate == 1e9 and cfg.trials == 1000 and cfg.tol == 1e-6
    assert cfg.dimension_sets() == [(64, 4, 4, 4)]


def test_l_t_follows_n_s_unless_set():
    assert small(n_s=2).dimension_sets() == [(16, 2, 2, 2)]
    assert small(n_s=2, l_t=4).dimension_sets() == [(16, 2, 4, 2)]
    assert small(n_t=[16, 32], n_s=[2, 4], n_r=4).dimension_sets() == [(16, 4, 2, 2), (32, 4, 4, 4)]


@pytest.mark.parametrize("bad", [
    dict(trials=0), dict(architectures=["bogus"]), dict(architectures=[]), dict(bits_dac=[0]),
    dict(n_s=3, l_t=2), dict(n_t=[16, 32], n_s=[2]), dict(p_max=0.0), dict(l_t=32),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        small(**bad)


def test_config_json_round_trip(tmp_path):
    cfg = small(hardware={"p_lo": 0.03})
    assert cfg.hardware.p_lo == 0.03
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert SimConfig.from_json(path) == cfg


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_t": 16, "colour": "red"}))
    with pytest.raises(ValueError, match="colour"):
        SimConfig.from_json(path)
    with pytest.raises(ValueError):
        SimConfig.from_dict({"hardware": {"p_lo": 1, "nope": 2}})


# -- trials and sweeps -------------------------------------------------------------

def test_run_trial_deterministic():
    cfg = small(architectures=["digital", "hpf_passive", "hpp_active"], bits_dac=[1, 8])
    a, b = run_trial(cfg, 3), run_trial(cfg, 3)
    assert a.records == b.records
    assert run_trial(cfg, 4).records != a.records


def test_trial_independent_of_history():
    cfg = small()
    first = run_trial(cfg, 2).records
    for i in range(5):
        run_trial(cfg, i)
    assert run_trial(cfg, 2).records == first


def test_parallel_sweep_is_byte_identical(tmp_path):
    cfg = small(trials=6, bits_dac=[1, 4], snr_grid_db=[-10.0, 10.0])
    emit_csv(run_sweep(cfg, jobs=1), tmp_path / "a.csv")
    emit_csv(run_sweep(cfg, jobs=3), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_aggregation_order_independent():
    cfg = small(trials=5)
    trials = [run_trial(cfg, i) for i in range(5)]
    assert aggregate(trials, 5).rows == aggregate(trials[::-1], 5).rows


def test_single_row_sweep():
    table = run_sweep(small(architectures=["hpp_passive"], trials=10))
    assert len(table) == 1 and table.rows[0]["rate_std"] >= 0


@settings(max_examples=10, deadline=None)
@given(st.lists(st.sampled_from(["digital", "hpf_active", "hpf_passive", "hpp_active", "hpp_passive"]),
                min_size=1, max_size=5, unique=True),
       st.integers(1, 3), st.integers(1, 3), st.booleans())
def test_row_count(archs, n_snr, n_bits, two_dims):
    dims = dict(n_t=[16, 32], n_s=[2, 4], n_r=4) if two_dims else {}
    cfg = small(architectures=archs, snr_grid_db=list(np.linspace(-10, 10, n_snr)),
                bits_dac=list(range(1, n_bits + 1)), trials=1, **dims)
    table = run_sweep(cfg)
    assert len(table) == len(archs) * n_snr * n_bits * (2 if two_dims else 1)


def test_record_fields_consistent():
    cfg = small(architectures=["digital", "hpf_active", "hpp_passive"], bits_dac=[2])
    for rec in run_trial(cfg, 0).records:
        assert rec.rate >= 0 and rec.p_static > 0
        assert rec.ee == pytest.approx(rec.rate / rec.p_static)
        if rec.arch == "digital":
            assert rec.ps_type == "none" and rec.loss_db == 0 and rec.iterations == 0
        else:
            assert rec.iterations >= 1
            topo = {"hpf": "fully_connected", "hpp": "partially_connected"}[rec.arch]
            assert rec.loss_db == pytest.approx(hw.loss_db(topo, rec.ps_type, 16, 2))


def test_lossless_active_passive_coincide():
    table = run_sweep(small(lossless_rf=True, architectures=["hpf_active", "hpf_passive", "hpp_active", "hpp_passive"],
                            trials=5, snr_grid_db=[-20.0, 20.0]))
    rows = {(r["arch"], r["ps_type"], r["snr_db"]): r for r in table.rows}
    for arch in ("hpf", "hpp"):
        for snr in (-20.0, 20.0):
            assert rows[(arch, "active", snr)]["rate_mean"] == rows[(arch, "passive", snr)]["rate_mean"]
            assert rows[(arch, "active", snr)]["loss_db"] == 0


def test_digital_beats_lossy_hybrids_at_high_resolution():
    cfg = SimConfig(n_t=64, n_r=4, n_s=4, bits_dac=[8], snr_grid_db=[-10.0, 10.0, 30.0], trials=40)
    table = run_sweep(cfg)
    for snr in (-10.0, 10.0, 30.0):
        rows = [r for r in table.rows if r["snr_db"] == snr]
        digital = next(r["rate_mean"] for r in rows if r["arch"] == "digital")
        assert all(digital >= r["rate_mean"] for r in rows)


# -- presets -----------------------------------------------------------------------

def test_presets_shapes():
    sizes = {"fig1": 34, "fig2": 170, "fig3": 136, "fig4": 100, "fig5": 40, "fig6": 40, "fig7": 25, "fig8": 25}
    for name in PRESET_NAMES:
        cfg = preset(name, trials=1)
        n = (len(cfg.architectures) * len(cfg.snr_grid_db) * len(cfg.bits_dac) * len(cfg.dimension_sets()))
        assert n == sizes[name]
    assert preset("fig6").snr_grid_db == [-15.0]
    assert preset("fig7").dimension_sets()[-1] == (512, 32, 32, 32)
    assert preset("fig4").dimension_sets()[0] == (32, 4, 2, 2)
    assert preset("fig1").snr_grid_db[0] == -40 and preset("fig1").snr_grid_db[-1] == 40
    with pytest.raises(ValueError):
        preset("fig9")


def test_fig5_preset_rows():
    assert len(run_sweep(preset("fig5", trials=2))) == 40


def test_fig1_monotone_in_snr():
    table = run_sweep(preset("fig1", trials=20))
    for b in (1, 8):
        rates = [r["rate_mean"] for r in table.rows if r["b_dac"] == b]
        assert all(y >= x for x, y in zip(rates, rates[1:]))


def test_fig4_power_columns_match_hardware_model(tmp_path):
    cfg = preset("fig4", trials=1)
    cfg.architectures = ["digital", "hpp_passive"]
    rows = read_csv(emit_csv(run_sweep(cfg), tmp_path / "f4.csv"))
    for r in rows:
        topo = DIGITAL if r["arch"] == "digital" else "partially_connected"
        ps = None if r["ps_type"] == "none" else r["ps_type"]
        loss = hw.loss_factor(topo, ps, r["n_t"], r["l_t"])
        expected = hw.p_static(topo, ps, r["n_t"], r["l_t"], r["b_dac"], 1e9, 1 / loss).p_static
        assert r["p_static_w"] == pytest.approx(expected, rel=1e-5)
        if topo == DIGITAL:
            assert r["p_comp_w"] == pytest.approx(hw.p_comp(hw.flops_count(DIGITAL, r["n_t"], 4, r["l_t"])), rel=1e-5)


# -- CSV -----------------------------------------------------------------------------

def test_empty_table_writes_header_only(tmp_path):
    path = emit_csv(SweepTable([], 5), tmp_path / "e.csv")
    assert open(path).read() == ",".join(CSV_COLUMNS) + "\n"


def test_csv_round_trip(tmp_path):
    table = run_sweep(small(bits_dac=[1, 8], snr_grid_db=[-5.0, 12.5]))
    rows = read_csv(emit_csv(table, tmp_path / "t.csv"))
    assert len(rows) == len(table)
    for got, want in zip(rows, table.rows):
        for col in CSV_COLUMNS:
            if isinstance(want[col], str):
                assert got[col] == want[col]
            else:
                assert got[col] == pytest.approx(want[col], rel=5e-6, abs=1e-300)
    header = open(tmp_path / "t.csv").readline().strip()
    assert header == "arch,ps_type,n_t,n_r,l_t,n_s,b_dac,b_ps,snr_db,rate_mean,rate_std,loss_db,p_static_w,p_comp_w,ee_mean"


def test_csv_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_csv(SweepTable([], 5), tmp_path / "missing" / "x.csv")


def test_manifest(tmp_path):
    cfg = small(master_seed=77)
    write_outputs(cfg, run_sweep(cfg), tmp_path)
    man = json.loads((tmp_path / "run-manifest.json").read_text())
    assert man["master_seed"] == 77 and man["config"]["master_seed"] == 77
    assert SimConfig.from_dict(man["config"]) == cfg
    assert os.path.exists(tmp_path / man["csv"])


# -- CLI ----------------------------------------------------------------------------

def test_cli_run_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_t": 16, "n_r": 2, "n_s": 2, "trials": 50, "bits_dac": [2],
                               "architectures": ["digital", "hpp_passive"], "snr_grid_db": [0]}))
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--trials", "2", "--seed", "9", "--out", str(out)]) == 0
    man = json.loads((out / "run-manifest.json").read_text())
    assert man["trials"] == 2 and man["master_seed"] == 9
    assert len(read_csv(out / "sweep.csv")) == 2


def test_cli_preset(tmp_path):
    assert main(["preset", "fig5", "--trials", "1", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "fig5.csv")) == 40


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_t": 16, "unknown": 1}')
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) != 0
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) != 0
    bad.write_text("{not json")
    assert main(["power-table", "--config", str(bad)]) != 0
    assert main(["quantizer", "--bits", "0"]) != 0
    assert "error" in capsys.readouterr().err


def test_cli_power_table(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_t": 64, "n_r": 4, "n_s": 4, "bits_dac": [1]}))
    assert main(["power-table", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("arch,")
    digital = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(digital["p_static"]) == pytest.approx(6.904, abs=1e-3)
    assert int(digital["flops"]) == 5_771_264


def test_cli_quantizer(capsys):
    assert main(["quantizer", "--bits", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rho"] == pytest.approx(1 - 2 / np.pi)
    assert data["codes"] == pytest.approx([-np.sqrt(2 / np.pi), np.sqrt(2 / np.pi)])
