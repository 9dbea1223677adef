import os
import subprocess
import sys

import pytest

from fraclab import fields
from fraclab.cli import run
from fraclab.fieldio import write_field
from fraclab.grid import Grid
from fraclab.records import parse_record


def record(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1
    return parse_record(out[0])


def test_sobolev_const(capsys):
    assert run(["sobolev-const", "--grid", "2,64,10", "--s", "1"]) == 0
    rec = record(capsys)
    assert rec["outcome"] == "certified"
    assert abs(rec["value"] - 3.544907701811032) <= 1e-12


def test_verify_ps_s0_file(tmp_path, capsys):
    path = tmp_path / "gaussian.fld"
    write_field(fields.gaussian(Grid(1, 128, 20.0), center=[1.0]), path)
    assert run(["verify-ps", "--field", str(path), "--s", "0"]) == 0
    rec = record(capsys)
    assert rec["satisfied"] is True and rec["slack"] == 0.0 and rec["kind"] == "polya-szego"


def test_verify_gn_bad_order(capsys):
    assert run(["verify-gn", "--s", "2", "--grid", "1,64,10", "--q", "4"]) == 2
    rec = record(capsys)
    assert rec["outcome"] == "error" and "s" in rec["constraint"] and "n" in rec["constraint"]


def test_verify_gn_ok(capsys):
    assert run(["verify-gn", "--s", "1", "--q", "4", "--grid", "1,256,40", "--field", "gen:gaussian"]) == 0
    rec = record(capsys)
    assert rec["theta"] == 0.25


def test_usage_errors(capsys):
    assert run(["frobnicate"]) == 2
    err = capsys.readouterr().err
    assert "usage" in err
    assert run(["series-check", "--bogus", "1"]) == 2
    assert "usage" in capsys.readouterr().err


def test_series_check_and_csv(tmp_path, capsys):
    csv = tmp_path / "series.csv"
    assert run(["series-check", "--s", "0.5", "--csv", str(csv)]) == 0
    rec = record(capsys)
    assert rec["error"] <= 1e-5 and rec["monotone"] is True
    lines = csv.read_text().splitlines()
    assert lines[0] == "k,coefficient,partial,error" and len(lines) == 21
    assert lines[1].startswith("1,0.5,0.75,")


def test_out_file_and_timing(tmp_path, capsys):
    out = tmp_path / "rec.txt"
    assert run(["pairing-check", "--grid", "1,64,10", "--k", "2", "--out", str(out), "--timing"]) == 0
    assert capsys.readouterr().out == ""
    rec = parse_record(out.read_text())
    assert rec["outcome"] == "certified" and rec["wall"] >= 0


def test_check_F_orientation(capsys):
    assert run(["check-F", "--l", "1"]) == 0
    assert record(capsys)["F4"] is True


def test_check_F_violation(tmp_path, capsys):
    cfg = tmp_path / "f.ini"
    cfg.write_text("[nonlinearity]\nfamily=power\nl=1\na=exp\n")
    assert run(["check-F", "--config", str(cfg)]) == 1
    rec = record(capsys)
    assert rec["F4"] is False and rec["F4_reciprocal"] is True and rec["orientation"] == "displayed"


def test_minimize_dump(tmp_path, capsys):
    cfg = tmp_path / "m.ini"
    cfg.write_text("[grid]\nn=1\nN=128\nL=30\n[solver]\ns=0.75\n[nonlinearity]\nl=1\n")
    dump = tmp_path / "u.bin"
    assert run(["minimize", "--config", str(cfg), "--dump", str(dump)]) == 0
    rec = record(capsys)
    assert rec["converged"] is True and rec["residual"] <= 1e-7
    assert dump.exists() and (tmp_path / "u.bin.hdr").exists()


def test_minimize_supercritical_is_error(capsys):
    assert run(["minimize", "--grid", "1,64,20", "--s", "0.5", "--l", "3"]) == 2
    assert record(capsys)["constraint"] == "subcritical_nonlinearity"


def test_probe_super(capsys):
    assert run(["probe-super", "--grid", "1,2048,40", "--s", "0.5", "--l", "3", "--c", "5"]) == 0
    rec = record(capsys)
    assert rec["decreasing"] is True and rec["last_energy"] < 0


def test_make_field_and_missing_file(tmp_path, capsys):
    path = tmp_path / "r.txt"
    assert run(["make-field", "--gen", "random", "--grid", "1,64,6.0", "--seed", "3", "--out", str(path)]) == 0
    capsys.readouterr()
    assert run(["verify-ps", "--field", str(path), "--s", "0.5"]) == 0
    capsys.readouterr()
    assert run(["verify-ps", "--field", str(tmp_path / "nope.txt"), "--s", "0.5"]) == 2


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "fraclab", "series-check", "--s", "0.5"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "outcome=certified" in p.stdout


# -- batch ---------------------------------------------------------------------------

def test_batch_empty(tmp_path, capsys):
    m = tmp_path / "empty.txt"
    m.write_text("")
    assert run(["batch", str(m)]) == 0
    assert parse_record(capsys.readouterr().out.strip()) == dict(
        summary="batch", total=0, certified=0, violated=0, converged=0, flagged=0, error=0)


def test_batch_malformed_runs_nothing(tmp_path, capsys):
    m = tmp_path / "m.txt"
    out = tmp_path / "out.txt"
    m.write_text("series-check --s 0.5\nseries-check --s 0.25\nsobolev-const --n 2 --s 1\n"
                 "verify-ps --nonsense\n")
    assert run(["batch", str(m), "--out", str(out)]) == 2
    assert not out.exists()
    assert "line 4" in capsys.readouterr().err


def test_batch_sweep_order_and_determinism(tmp_path, monkeypatch):
    m = tmp_path / "sweep.txt"
    lines = [f"verify-ps --grid 1,256,6.283185307179586 --field gen:random --seed {i} --s {[0, .25, .5, .75, 1][i % 5]}"
             for i in range(100)]
    m.write_text("\n".join(lines) + "\n")
    outs = []
    for threads in ("4", "1"):
        monkeypatch.setenv("FRACLAB_THREADS", threads)
        out = tmp_path / f"out{threads}.txt"
        csv = tmp_path / f"out{threads}.csv"
        assert run(["batch", str(m), "--out", str(out), "--csv", str(csv)]) == 0
        outs.append((out.read_bytes(), csv.read_bytes()))
    assert outs[0] == outs[1]
    recs = [parse_record(l) for l in outs[0][0].decode().splitlines()]
    assert recs[-1]["total"] == 100 and recs[-1]["certified"] == 100
    assert [r["seed"] for r in recs[:-1]] == list(range(100))
    assert all(r["subcommand"] == "verify-ps" for r in recs[:-1])
