import json
import subprocess
import sys

import numpy as np
import pytest

from weakrealism.cli import main
from weakrealism.density import from_json
from weakrealism.states import werner_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_schedule_golden(capsys):
    code, out, _ = run(capsys, "schedule", "--mu", "0.75", "--total", "16")
    assert code == 0
    assert [s["duration_s"] for s in json.loads(out)["slices"]] == [13, 1, 1, 1]


def test_schedule_eps_quantized(capsys):
    code, out, _ = run(capsys, "schedule", "--eps", "0.3", "--granularity", "1")
    obj = json.loads(out)
    assert code == 0 and [s["label"] for s in obj["slices"]] == ["I", "Z"]
    assert obj["max_weight_error"] == pytest.approx(0.4 / 16)


def test_prepare_and_monitor(capsys, tmp_path):
    path = tmp_path / "w.json"
    assert run(capsys, "prepare", "--mu", "0.5", "--out", str(path))[0] == 0
    assert np.allclose(from_json(json.loads(path.read_text())), werner_state(0.5), atol=1e-12)
    code, out, _ = run(capsys, "monitor", "--state", str(path), "--eps", "1", "--basis", "z")
    rho = from_json(json.loads(out))
    assert code == 0 and abs(rho[0, 3]) < 1e-15


def test_quantify_werner(capsys):
    code, out, _ = run(capsys, "quantify", "--state", "werner:0.5", "--eps", "0.5")
    assert code == 0
    vals = dict(line.split(": ") for line in out.strip().splitlines())
    assert vals["irrealism"] == "0.18193947877"
    assert vals["delta_realism"] == vals["weak_discord_unmin"] == "0.139464719571"
    assert float(vals["weak_discord_min"]) == pytest.approx(0.139464719571, abs=1e-9)


def test_quantify_csv(capsys):
    code, out, _ = run(capsys, "quantify", "--state", "bell:phi-", "--eps", "1", "--csv", "--no-minimize")
    header, row = out.strip().splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert code == 0 and rec["irrealism"] == "0.69314718056" and rec["weak_discord_min"] == ""


def test_tomo_round_trip(capsys, tmp_path):
    counts = tmp_path / "c.csv"
    assert run(capsys, "tomo", "simulate", "--state", "werner:0.75", "--seed", "2", "--out", str(counts))[0] == 0
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "tomo", "reconstruct", "--counts", str(counts), "--out", str(out),
                        "--reference", "werner:0.75")
    assert code == 0
    assert float(text.split(": ")[1]) >= 0.98
    assert json.loads(out.read_text())["dim"] == 4


def test_sweep_and_verify(capsys, tmp_path):
    data = tmp_path / "s.csv"
    fid = tmp_path / "f.csv"
    code, out, _ = run(capsys, "sweep", "--mode", "ideal", "--out", str(data), "--fidelity-out", str(fid))
    assert code == 0 and "0 bound violations" in out
    assert len(data.read_text().splitlines()) == 76
    assert run(capsys, "verify", "--dataset", str(data))[0] == 0


def test_verify_violation_exit(capsys, tmp_path):
    data = tmp_path / "s.csv"
    data.write_text("mu,eps,method,value,err,bound,closed_form,fidelity\n"
                    "0.5,0.5,entropy-variation,0.01,0,0.09,0.139464719571,1\n")
    code, out, _ = run(capsys, "verify", "--dataset", str(data))
    assert code == 1 and "violation" in out
    # the same row reported as simulated data only warns
    assert run(capsys, "verify", "--dataset", str(data), "--mode", "simulated-tomography")[0] == 0


def test_verify_fidelity_dataset_is_error(capsys, tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("mu,eps,fidelity_vs_ideal,fidelity_vs_bell\n0,0,1,0.25\n")
    assert run(capsys, "verify", "--dataset", str(path))[0] == 2


@pytest.mark.parametrize("argv", [
    ["quantify", "--state", "werner:2", "--eps", "0.5"],
    ["monitor", "--state", "nope.json", "--eps", "0.5"],
    ["sweep", "--mode", "simulated-tomography"],
    ["verify", "--dataset", "missing.csv"],
    ["prepare", "--mu", "-1"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_sweep_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("mode: ideal\nmu_values: [1.0]\neps_values: [1.0]\n")
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "sweep", "--config", str(cfg), "--out", str(out))
    rows = json.loads(out.read_text())["rows"]
    assert code == 0 and len(rows) == 3
    assert all(r["value"] == pytest.approx(np.log(2), abs=1e-9) for r in rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weakrealism", "schedule", "--eps", "0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["slices"][1]["duration_s"] == 4
