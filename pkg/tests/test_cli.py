import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from cafes.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_yaml(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def rig(**changes):
    doc = yaml.safe_load((CONFIGS / "desk_rig.yaml").read_text())
    for dotted, value in changes.items():
        section, key = dotted.split("__")
        doc[section][key] = value
    return doc


class TestValidate:
    def test_default_config(self, capsys):
        assert main(["validate", "--config", str(CONFIGS / "desk_rig.yaml")]) == 0
        assert capsys.readouterr().out.strip() == "ok"

    def test_negative_stiffness(self, tmp_path, capsys):
        path = write_yaml(tmp_path, rig(system__stiffness_n_per_m=-5))
        assert main(["validate", "--config", path]) == 1
        assert "system.stiffness_n_per_m" in capsys.readouterr().out

    def test_overlapping_segments(self, tmp_path, capsys):
        doc = rig()
        doc["timeline"] = [{"t_s": 0.0, "cafe_id": 1, "state": "right"},
                           {"t_s": 0.2, "cafe_id": 1, "state": "stationary"}]
        assert main(["validate", "--config", write_yaml(tmp_path, doc)]) == 1
        out = capsys.readouterr().out
        assert "cafe 1" in out and "t=0.2" in out and "t=0" in out

    def test_every_issue_listed(self, tmp_path, capsys):
        doc = rig(system__stiffness_n_per_m=-5)
        doc["cafes"][0]["mass_kg"] = -1
        assert main(["validate", "--config", write_yaml(tmp_path, doc)]) == 1
        assert len(capsys.readouterr().out.strip().splitlines()) == 2

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--config", str(tmp_path / "nope.yaml")]) == 3

    def test_shipped_configs_are_valid(self):
        for name in ("desk_rig.yaml", "go_and_stop.yaml", "sync_cycle.yaml"):
            assert main(["validate", "--config", str(CONFIGS / name)]) == 0


class TestEquilibrium:
    def test_default_rig(self, capsys):
        assert main(["equilibrium"]) == 0
        out = capsys.readouterr().out
        assert "cafe 0: sag = 2.72" in out
        assert "segment 2: tension" in out

    def test_no_platforms(self, tmp_path, capsys):
        doc = rig()
        doc["cafes"] = []
        assert main(["equilibrium", "--config", write_yaml(tmp_path, doc)]) == 0
        assert "no platforms" in capsys.readouterr().out

    def test_unreachable_convergence(self, tmp_path, capsys):
        path = write_yaml(tmp_path, rig(system__stiffness_n_per_m=1e12))
        assert main(["equilibrium", "--config", path, "--dt", "0.1"]) == 2
        assert "residual" in capsys.readouterr().err

    def test_report_to_file(self, tmp_path):
        out = tmp_path / "eq.txt"
        assert main(["equilibrium", "--out", str(out)]) == 0
        assert out.read_text().startswith("cafe 0: sag")


class TestSimulate:
    def test_writes_trace(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(["simulate", "--config", str(CONFIGS / "desk_rig.yaml"),
                     "--out", str(out), "--duration", "0.5"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("time_s,x0_m")
        assert len(lines) == 502
        assert "max sag" in capsys.readouterr().out

    def test_go_and_stop_is_exact(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", str(CONFIGS / "go_and_stop.yaml"),
                     "--out", str(out)]) == 0
        report = capsys.readouterr().out
        assert "open-loop error = +0.000 mm" in report
        final_x = float(out.read_text().splitlines()[-1].split(",")[1])
        assert final_x == pytest.approx(0.05 + 1.25, abs=1e-4)

    def test_seeded_noise_is_reproducible(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"]
        for path, seed in zip(paths, ["7", "7", "8"]):
            assert main(["simulate", "--config", str(CONFIGS / "go_and_stop.yaml"),
                         "--out", str(path), "--noise", "--seed", seed,
                         "--duration", "4"]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_bytes() != paths[2].read_bytes()

    def test_bad_dt(self, capsys):
        assert main(["simulate", "--config", str(CONFIGS / "desk_rig.yaml"),
                     "--dt", "0"]) == 1
        assert "--dt" in capsys.readouterr().err

    def test_numerical_blow_up_names_time(self, tmp_path, capsys):
        doc = rig(system__stiffness_n_per_m=1e9)
        doc["timeline"] = [{"t_s": 0.0, "cafe_id": 0, "state": "left"}]
        path = write_yaml(tmp_path, doc)
        code = main(["simulate", "--config", path, "--dt", "0.05", "--duration", "2"])
        err = capsys.readouterr().err
        assert code == 2
        assert "t=" in err

    def test_unwritable_output(self, tmp_path):
        assert main(["simulate", "--config", str(CONFIGS / "desk_rig.yaml"),
                     "--duration", "0.01", "--out", str(tmp_path / "missing" / "t.csv")]) == 3


class TestSweep:
    def test_single_cell(self, tmp_path):
        spec = {"span_lengths_m": [10], "robot_counts": [2], "pretensions": ["60 kgf"],
                "robot_mass_kg": 1.4}
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", write_yaml(tmp_path, spec), "--out", str(out)]) == 0
        header, row = out.read_text().splitlines()
        assert header == "span_m,count,pretension_N,max_sag_m,max_tension_N,converged"
        assert row.startswith("10,2,588.399,0.0129")
        assert row.endswith(",true")

    def test_bad_spec(self, tmp_path, capsys):
        spec = {"span_lengths_m": [10], "robot_counts": [2], "pretensions": [],
                "robot_mass_kg": 1.4}
        assert main(["sweep", "--config", write_yaml(tmp_path, spec)]) == 1
        assert "sweep.pretensions" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cafes", "validate", "--config",
                           str(CONFIGS / "desk_rig.yaml")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "ok"
