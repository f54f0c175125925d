import csv
import hashlib
import json
import os

import numpy as np
import pytest

from hartree5.cli import main

SOLITON_RUN = """
[run]
command = evolve
[initial]
kind = soliton
[solver]
dt = 1e-3
t_end = 1.0
monitor_stride = 20
monitor_virial = false
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def tree(root):
    out = {}
    for base, _, names in os.walk(root):
        for name in names:
            p = os.path.join(base, name)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = fh.read()
    return out


def check_manifest(root):
    with open(os.path.join(root, "manifest.json")) as fh:
        listed = {f["path"]: f["sha256"] for f in json.load(fh)["files"]}
    files = {k: v for k, v in tree(root).items() if k != "manifest.json"}
    assert set(listed) == set(files)
    for path, data in files.items():
        assert listed[path] == hashlib.sha256(data).hexdigest()


@pytest.fixture(scope="module")
def soliton_out(tmp_path_factory):
    base = tmp_path_factory.mktemp("soliton")
    cfg = write(base, SOLITON_RUN)
    codes = [main(["--config", cfg, "--out", str(base / d)]) for d in ("a", "b")]
    return base, codes


@pytest.mark.slow
def test_ground_state_command(tmp_path):
    out = tmp_path / "gs"
    assert main(["ground-state", "--out", str(out)]) == 0
    with open(out / "gs_summary.json") as fh:
        summary = json.load(fh)
    assert summary["pass"]
    assert all(v["pass"] for v in summary["invariants"].values())
    assert summary["grid_doubling"]["pass"] and summary["sharpness"]["pass"]
    assert summary["sharp_constant"] == pytest.approx(0.08255158193013368, rel=1e-9)
    assert (out / "ground_state.field").exists()
    check_manifest(out)


def test_soliton_evolve_hhalf_flat(soliton_out):
    base, codes = soliton_out
    assert codes == [0, 0]
    with open(base / "a" / "monitors.csv") as fh:
        hh = np.array([float(r["hhalf"]) for r in csv.DictReader(fh)])
    assert hh.size > 10
    assert hh.max() / hh.min() - 1 < 1e-4


def test_reruns_byte_identical(soliton_out):
    base, _ = soliton_out
    a, b = tree(base / "a"), tree(base / "b")
    assert set(a) == set(b)
    assert all(a[k] == b[k] for k in a)


def test_manifest_complete(soliton_out):
    base, _ = soliton_out
    check_manifest(base / "a")
    assert {"summary.json", "monitors.csv", "final.field"} <= set(tree(base / "a"))


def test_negative_dt_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "[run]\ncommand = evolve\n[solver]\ndt = -1e-3\n")
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out)]) == 2
    assert "'dt'" in capsys.readouterr().err
    with open(out / "error.json") as fh:
        err = json.load(fh)
    assert err["key"] == "dt" and err["line"] == 4
    check_manifest(out)


def test_unknown_key_is_config_error(tmp_path):
    cfg = write(tmp_path, "[solver]\ndtt = 1\n")
    out = tmp_path / "out"
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 2
    with open(out / "error.json") as fh:
        assert json.load(fh)["key"] == "dtt"


def test_missing_command(tmp_path):
    assert main(["--out", str(tmp_path / "o")]) == 2


def test_flags_after_subcommand(tmp_path):
    cfg = write(tmp_path, "[solver]\ndt = -1\n")
    out = tmp_path / "late"
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 2
    assert (out / "error.json").exists()


def test_stale_error_removed(tmp_path):
    out = tmp_path / "o"
    bad = write(tmp_path, "[solver]\ndt = -1\n", "bad.ini")
    assert main(["evolve", "--config", bad, "--out", str(out)]) == 2
    good = write(
        tmp_path,
        "[grid]\nn = 1023\nr_max = 20\n[solver]\ndt = 1e-2\nt_end = 0.1\nmonitor_virial = false\n",
        "good.ini",
    )
    assert main(["evolve", "--config", good, "--out", str(out)]) == 0
    assert not (out / "error.json").exists()
    check_manifest(out)


def test_threshold_scan_zero_row(tmp_path):
    cfg = write(
        tmp_path,
        """
[grid]
n = 1023
r_max = 20
[solver]
dt = 1e-2
t_end = 0.5
monitor_stride = 5
monitor_virial = false
[scan]
scales = 0, 0.2
""",
    )
    out = tmp_path / "scan"
    assert main(["threshold-scan", "--config", cfg, "--out", str(out), "--threads", "2"]) == 0
    with open(out / "scan.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["c"]) for r in rows] == [0.0, 0.2]
    zero = rows[0]
    for key in ("hhalf0_over_threshold", "s_cumulative", "max_hhalf", "max_n_of_t"):
        assert float(zero[key]) == 0.0
    assert zero["verdict"] == "Completed"
    assert (out / "runs" / "run_001" / "monitors.csv").exists()
    check_manifest(out)


def test_virial_check_command(tmp_path):
    cfg = write(
        tmp_path,
        """
[initial]
amplitude = 0.6
chirp = 0.25
[solver]
dt = 1e-3
t_end = 0.3
monitor_stride = 10
virial_R = 15
""",
    )
    out = tmp_path / "virial"
    assert main(["virial-check", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "virial_summary.json") as fh:
        s = json.load(fh)
    assert s["pass"] and s["samples"] >= 20 and s["max_relative_error"] < 1e-3


def test_dispersive_check_command(tmp_path):
    out = tmp_path / "disp"
    assert main(["dispersive-check", "--out", str(out)]) == 0
    with open(out / "dispersive_summary.json") as fh:
        s = json.load(fh)
    assert s["pass"]
    assert s["exponent"] == pytest.approx(-2.5, abs=0.05)
