import csv
import io
import json
import math

import numpy as np
import pytest
from conftest import FIXTURES

from tunneltime.cli import (PRESETS, SCAN_COLUMNS, ConfigError, load_config, main, parse_config,
                            run_scan, scan_point, to_csv, to_json)


def _config(**over):
    doc = {"schema_version": 1,
           "barrier": {"type": "rectangular", "V0_eV": 0.3, "d_nm": 5.0, "a_nm": 100.0},
           "packet": {"E0_eV": 0.02, "l0_nm": 10.0, "m_eff": 0.067}}
    doc.update(over)
    return doc


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def _read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def _numeric_match(expected, actual, rtol=1e-9):
    assert expected.keys() == actual.keys()
    for key, e in expected.items():
        a = actual[key]
        try:
            fe, fa = float(e), float(a)
        except ValueError:
            assert a == e, key
            continue
        if math.isnan(fe):
            assert math.isnan(fa), key
        else:
            assert fa == pytest.approx(fe, rel=rtol, abs=1e-300), key


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    cfg = load_config(preset=name)
    assert cfg.scan is not None and cfg.m_eff == 0.067


@pytest.mark.parametrize("text,where", [
    ("{\n  \"barrier\": 3,\n", "line"),
    (json.dumps(_config(packet={"l0_nm": 10.0, "m_eff": 0.067})), "packet"),
    (json.dumps(_config(packet={"E0_eV": 0.02, "k0_invnm": 0.2, "l0_nm": 10.0,
                                "m_eff": 0.067})), "exactly one"),
    (json.dumps(_config(packet={"E0_eV": 0.02, "l0_nm": -1.0, "m_eff": 0.067})), "l0_nm"),
    (json.dumps(_config(scan={"parameter": "d", "from": 9.0, "to": 5.0, "steps": 3})),
     "ordered"),
    (json.dumps(_config(scan={"parameter": "V0", "from": 1.0, "to": 5.0, "steps": 3})),
     "scan.parameter"),
    (json.dumps(_config(scan={"parameter": "d", "from": 1.0, "to": math.inf, "steps": 3}
                        )).replace("Infinity", "1e999"), "scan.to"),
    (json.dumps(_config(barrier={"type": "staircase"})), "barrier.type"),
])
def test_config_errors_name_location(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(text)


def test_segment_barrier_config():
    cfg = parse_config(json.dumps(_config(barrier={"type": "segments", "a_nm": 80.0,
                                                   "segments": [[2.0, 0.2], [1.0, 0.3]]})))
    spec, p = cfg.point()
    assert p.segments == ((2.0, 0.2), (1.0, 0.3)) and p.a == 80.0


def test_default_a_policy():
    doc = _config()
    del doc["barrier"]["a_nm"]
    cfg = parse_config(json.dumps(doc))
    assert cfg.a_for(2.0) == 100.0 and cfg.a_for(30.0) == 600.0


def test_scan_values_and_points():
    cfg = parse_config(json.dumps(_config(scan={"parameter": "log_d_over_l0", "from": -1.0,
                                                "to": 1.0, "steps": 3})))
    specs = [cfg.point(v)[0].l0 for v in cfg.scan.values()]
    assert specs == pytest.approx([50.0, 5.0, 0.5])


def test_exit_code_config_error(tmp_path, capsys):
    assert main(["scan", "--config", _write(tmp_path, "{oops")]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["scan"]) == 2


def test_exit_code_all_points_failed(tmp_path, capsys):
    # a barrier nearer than the packet width fails the window precheck at every point
    doc = _config(barrier={"type": "rectangular", "V0_eV": 0.3, "d_nm": 5.0, "a_nm": 20.0},
                  scan={"parameter": "l0", "from": 30.0, "to": 40.0, "steps": 2})
    out = tmp_path / "out.csv"
    assert main(["scan", "--config", _write(tmp_path, doc), "--out", str(out)]) == 3
    rows = _read_csv(out.read_text())
    assert len(rows) == 2 and all(r["error"].startswith("DomainError") for r in rows)


def test_failed_points_do_not_abort_sweep():
    doc = _config(barrier={"type": "rectangular", "V0_eV": 0.3, "d_nm": 5.0, "a_nm": 25.0},
                  scan={"parameter": "l0", "from": 10.0, "to": 30.0, "steps": 2})
    rows = run_scan(parse_config(json.dumps(doc)))
    assert rows[0]["error"] == "" and rows[1]["error"] != ""
    assert rows[1]["T_bar"] > 0


def test_exit_code_io_error(tmp_path, capsys):
    cfg = _write(tmp_path, _config())
    assert main(["moments", "--config", cfg, "--out", str(tmp_path / "no" / "x.csv")]) == 1
    assert "no" in capsys.readouterr().err


def test_header_only_csv():
    assert to_csv([], SCAN_COLUMNS) == ",".join(SCAN_COLUMNS) + "\n"


def test_json_round_trip():
    rows = [scan_point(parse_config(json.dumps(_config())), None)]
    doc = json.loads(to_json(rows, SCAN_COLUMNS, {"command": "scan"}))
    assert doc["schema_version"] == 1
    back = doc["rows"][0]
    for c in SCAN_COLUMNS:
        v = rows[0][c]
        if isinstance(v, float) and math.isnan(v):
            assert back[c] is None
        elif isinstance(v, float):
            assert back[c] == pytest.approx(v, rel=1e-11)
            assert back[c] == float(f"{v:.12g}")
        else:
            assert back[c] == v
    assert json.loads(json.dumps(doc)) == doc


def test_threads_do_not_change_output(tmp_path):
    doc = _config(scan={"parameter": "d", "from": 2.0, "to": 12.0, "steps": 6})
    cfg = _write(tmp_path, doc)
    one, four = tmp_path / "one.csv", tmp_path / "four.csv"
    assert main(["scan", "--config", cfg, "--out", str(one)]) == 0
    assert main(["scan", "--config", cfg, "--out", str(four), "--threads", "4"]) == 0
    assert one.read_bytes() == four.read_bytes()


def test_params_subcommand(tmp_path, capsys):
    cfg = _write(tmp_path, _config())
    assert main(["params", "--config", cfg, "--k-from", "0.1", "--k-to", "0.5",
                 "--k-steps", "5"]) == 0
    rows = _read_csv(capsys.readouterr().out)
    assert len(rows) == 5
    assert all(abs(float(r["T"]) + float(r["R"]) - 1) < 1e-11 for r in rows)
    assert main(["params", "--config", cfg, "--k-from", "0.5", "--k-to", "0.1",
                 "--k-steps", "5"]) == 2


def test_moments_subcommand_json(tmp_path, capsys):
    assert main(["moments", "--config", _write(tmp_path, _config()), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    kinds = [r["kind"] for r in doc["rows"]]
    assert "transmitted" in kinds and "to_be_reflected" in kinds
    assert doc["metadata"]["units"]["time"] == "fs"


def test_times_subcommand(tmp_path, capsys):
    cfg = _write(tmp_path, _config())
    args = ["times", "--config", cfg, "--L1", "20", "--L2", "30", "--samples", "20000",
            "--seed", "3"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    t = json.loads(first)["times"]
    assert t["delay_tr_ps"] == pytest.approx(t["delay_tr_fs"] / 1000, rel=1e-11)
    assert t["non_measurable"] is False and t["completed"] is True
    assert t["montecarlo"]["n_samples"] == 20000 and t["montecarlo"]["seed"] == 3
    assert main(["times", "--config", cfg, "--L1", "0", "--L2", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["times"]["non_measurable"] is True


def test_propagate_subcommand(tmp_path, capsys):
    doc = {"schema_version": 1,
           "barrier": {"type": "rectangular", "V0_eV": 0.3, "d_nm": 2.0, "a_nm": 60.0},
           "packet": {"k0_invnm": 0.45, "l0_nm": 5.0, "m_eff": 0.067}}
    snaps = tmp_path / "snaps.csv"
    summary = tmp_path / "summary.json"
    assert main(["propagate", "--config", _write(tmp_path, doc), "--t-max", "200",
                 "--snapshot-every", "100", "--dt", "0.05", "--out", str(snaps),
                 "--summary", str(summary)]) == 0
    s = json.loads(summary.read_text())["summary"]
    assert s["norm_right"] == pytest.approx(s["T_bar"], abs=1e-3)
    assert s["norm_drift"] < 1e-10
    rows = _read_csv(snaps.read_text())
    assert {float(r["t"]) for r in rows} == {0.0, 100.0, 200.0}


def _golden(name):
    return _read_csv((FIXTURES / f"{name}.csv").read_text())


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_golden_fig1_sweep(name, fig1_rows):
    fresh = _read_csv(to_csv(fig1_rows, SCAN_COLUMNS))
    gold = _golden(name)
    assert len(fresh) == len(gold) == 51
    for e, a in zip(gold, fresh):
        _numeric_match(e, a)


@pytest.mark.parametrize("name", ["fig3", "fig4", "fig5"])
def test_golden_d_sweep(name, fig5_rows):
    fresh = _read_csv(to_csv(fig5_rows, SCAN_COLUMNS))
    gold = _golden(name)
    assert len(fresh) == len(gold) == 40
    for e, a in zip(gold, fresh):
        _numeric_match(e, a)


def test_golden_tables_are_plottable():
    for name in PRESETS:
        rows = _golden(name)
        assert np.all(np.isfinite([float(r["T_bar"]) for r in rows]))
        assert all(r["error"] == "" for r in rows)
