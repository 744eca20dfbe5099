import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mmsim.cli import main
from mmsim.golden import MatF16, save_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_reports_json(capsys):
    code, out, _ = run(capsys, "run", "8", "16", "16")
    assert code == 0
    data = json.loads(out)
    assert data["useful_macs"] == 2048 and data["cycles"] > 64


def test_run_csv(capsys):
    code, out, _ = run(capsys, "run", "8", "16", "16", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["useful_macs"] == "2048"


def test_run_per_cycle_trace(capsys, tmp_path):
    code, out, err = run(capsys, "run", "8", "16", "16", "--trace", "per_cycle")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["cycle", "unit", "event", "detail"]
    port = [int(r["cycle"]) for r in rows if r["unit"] == "port"]
    assert len(port) == len(set(port)) == 32
    assert json.loads(err)["useful_macs"] == 2048
    code, out, _ = run(capsys, "run", "8", "16", "16", "--trace", "per_cycle",
                       "--trace-out", str(tmp_path / "t.csv"), "--out", str(tmp_path / "r.json"))
    assert code == 0 and out == ""
    assert (tmp_path / "t.csv").read_text().startswith("cycle,unit,event,detail")
    assert json.loads((tmp_path / "r.json").read_text())["cycles"] > 0


@pytest.mark.parametrize("argv", [
    ["run", "0", "1", "1"],
    ["run", "4", "4"],
    ["run", "4", "4", "4", "--H", "0"],
    ["run", "4", "4", "4", "--format", "xml"],
    ["run", "4", "4", "4", "--config", "/nonexistent.json"],
    ["sweep", "--h-range", "", "--l-range", "8"],
    ["bench", "0"],
    ["fp16", "eval", "1.0", "bogus", "0"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"H": 2, "L": 4, "P": 1, "frequency_hz": 1e9, "power_mw": 10,
                               "sw_cores": 4, "sw_macs_per_cycle_per_core": 0.5,
                               "stationarity": "w_stationary", "seed": 3}))
    _, out, _ = run(capsys, "run", "4", "4", "4", "--config", str(cfg))
    a = json.loads(out)
    assert a["freq_hz"] == 1e9 and a["power_mw"] == 10
    assert a["sw_cycles"] == pytest.approx(64 / 2.0)
    _, out, _ = run(capsys, "run", "4", "4", "4", "--config", str(cfg), "--freq", "5e8", "--H", "4")
    b = json.loads(out)
    assert b["freq_hz"] == 5e8 and b["power_mw"] == 10
    assert b["utilization"] != a["utilization"]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "run", "4", "4", "4", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"H": "4"}))
    assert run(capsys, "run", "4", "4", "4", "--config", str(cfg))[0] == 2


def test_run_with_operand_files(capsys, tmp_path):
    rng = np.random.default_rng(0)
    x = MatF16.from_float(rng.uniform(-1, 1, (5, 6)))
    w = MatF16.from_float(rng.uniform(-1, 1, (6, 7)))
    save_matrix(x, tmp_path / "x.rmat")
    save_matrix(w, tmp_path / "w.csv")
    code, _, _ = run(capsys, "run", "5", "6", "7", "--x", str(tmp_path / "x.rmat"),
                     "--w", str(tmp_path / "w.csv"), "--z-out", str(tmp_path / "z.rmat"))
    assert code == 0
    assert (tmp_path / "z.rmat").read_bytes()[:4] == b"RMAT"
    assert run(capsys, "run", "5", "6", "8", "--x", str(tmp_path / "x.rmat"), "--w", str(tmp_path / "w.csv"))[0] == 2


def test_mismatch_exit_code(capsys, monkeypatch):
    import mmsim.cli as cli

    def broken(p, g):
        return MatF16.from_bits(np.full((p.dims[0], p.dims[2]), 0x3C00))

    monkeypatch.setattr(cli, "gemm_padded", broken)
    code, _, err = run(capsys, "run", "4", "4", "4")
    assert code == 1
    assert "differ" in err and "Z[0,0]" in err


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--h-range", "4:5", "--l-range", "8", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["ports"] for r in rows] == ["9", "11"]
    code, out, _ = run(capsys, "sweep", "--h-range", "2,4", "--l-range", "4", "--probe", "8", "16", "16")
    data = json.loads(out)
    assert code == 0 and len(data) == 2 and 0 < float(data[1]["utilization"]) <= 1


def test_bench_outputs(capsys, tmp_path):
    code, out, err = run(capsys, "bench", "1", "--layers", "narrow", "--summary", str(tmp_path / "s.json"))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["phase"] == "fwd" and len(rows) == 30
    assert json.loads((tmp_path / "s.json").read_text())["batch"] == 1
    code, out, _ = run(capsys, "bench", "1", "--layers", "narrow", "--format", "json")
    assert json.loads(out)["gemms"] == 30


@pytest.mark.parametrize("argv,expected", [
    (["1.0", "1.0", "1.0"], "0x4000 2.0"),
    (["0x3C01", "0x3C01", "0x0000"], "0x3C02 1.001953125"),
    (["inf", "0", "0"], "0x7E00 nan"),
    (["-inf", "1", "-1"], "0xFC00 -inf"),
    (["-0.0", "1", "-0.0"], "0x8000 -0.0"),
])
def test_fp16_eval(capsys, argv, expected):
    code, out, _ = run(capsys, "fp16", "eval", *argv)
    assert code == 0 and out.strip() == expected


def test_fp16_eval_json(capsys):
    _, out, _ = run(capsys, "fp16", "eval", "--format", "json", "1", "2", "3")
    assert json.loads(out) == {"hex": "0x4500", "decimal": "5.0"}


def test_byte_identical_outputs(tmp_path):
    cmd = [sys.executable, "-m", "mmsim", "run", "17", "9", "21", "--seed", "11", "--format", "csv"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
