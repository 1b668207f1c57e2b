import json

import numpy as np
import pytest

from qubosched import cli
from qubosched.nsp import Schedule

SECTION4_CONFIG = {
    "nurses": 5,
    "graveyard": {"size": 5, "per_day": 3},
    "max_consecutive": 4,
    "days": 5,
    "weights": {"t2": 0, "t3": 0, "t4": 0},
    "workload_target": 3,
}

TINY_CONFIG = {
    "nurses": 3,
    "graveyard": {"size": 3, "per_day": 2},
    "max_consecutive": 4,
    "days": 6,
}

FEASIBLE_TINY = "1,1,1,1,0,0\n0,0,1,1,1,1\n1,1,0,0,1,1\n"


@pytest.fixture
def cfg4(tmp_path):
    p = tmp_path / "cfg4.json"
    p.write_text(json.dumps(SECTION4_CONFIG))
    return str(p)


@pytest.fixture
def cfg_tiny(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(TINY_CONFIG))
    return str(p)


class TestSolve:
    def test_tiny_instance_feasible(self, cfg_tiny, capsys):
        rc = cli.main(["solve", "--config", cfg_tiny, "--reads", "10",
                       "--sweeps", "2000", "--seed", "0"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "feasible: True" in out
        assert "best energy: 0" in out

    def test_section4_zero_residuals(self, cfg4, capsys):
        # the workload-only demo anneals to zero residuals; rule 4 still
        # flags the short runs, so the run is solved-but-infeasible
        rc = cli.main(["solve", "--config", cfg4, "--format", "json"])
        doc = json.loads(capsys.readouterr().out)
        assert rc == 2
        assert all(v == 0 for v in doc["residuals"].values())
        assert sorted(doc["residuals"]) == ["T1", "workload"]
        bits = np.array(doc["schedule"])
        assert bits.sum(axis=0).tolist() == [3] * 5
        assert bits.sum(axis=1).tolist() == [3] * 5

    def test_ascii_layout(self, cfg_tiny, capsys):
        rc = cli.main(["solve", "--config", cfg_tiny, "--sweeps", "2000"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "U1 graveyard" in out
        assert "U2" not in out  # empty groups are omitted
        lines = [ln for ln in out.splitlines() if ln.startswith("P")]
        assert len(lines) == 3

    def test_deterministic_output(self, cfg_tiny, capsys):
        args = ["solve", "--config", cfg_tiny, "--sweeps", "500",
                "--seed", "42", "--format", "csv"]
        cli.main(args)
        first = capsys.readouterr().out
        cli.main(args)
        assert capsys.readouterr().out == first

    def test_zero_reads_is_parameter_error(self, cfg_tiny, capsys):
        rc = cli.main(["solve", "--config", cfg_tiny, "--reads", "0"])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_malformed_config_names_key(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({**TINY_CONFIG, "overtime": True}))
        rc = cli.main(["solve", "--config", str(p)])
        assert rc == 1
        assert "overtime" in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path, capsys):
        rc = cli.main(["solve", "--config", str(tmp_path / "missing.json")])
        assert rc == 1

    def test_beta_overrides(self, cfg_tiny, capsys):
        rc = cli.main(["solve", "--config", cfg_tiny, "--sweeps", "2000",
                       "--beta-hot", "0.1", "--beta-cold", "6.0",
                       "--format", "json"])
        doc = json.loads(capsys.readouterr().out)
        assert rc in (0, 2)
        assert doc["params"]["beta_hot"] == 0.1
        assert doc["params"]["beta_cold"] == 6.0


class TestCheck:
    def test_feasible_schedule(self, cfg_tiny, tmp_path, capsys):
        sched = tmp_path / "s.csv"
        sched.write_text(FEASIBLE_TINY)
        rc = cli.main(["check", str(sched), "--config", cfg_tiny])
        out = capsys.readouterr().out
        assert rc == 0
        assert "feasible: True" in out
        assert out.count("ok") == 5

    def test_violation_listed(self, cfg_tiny, tmp_path, capsys):
        sched = tmp_path / "s.csv"
        # nurse 3 gets an isolated working day on day 2
        sched.write_text("1,1,1,1,0,0\n0,0,1,1,1,1\n1,1,0,0,1,1\n".replace(
            "1,1,0,0,1,1", "0,1,0,0,1,1"))
        rc = cli.main(["check", str(sched), "--config", cfg_tiny])
        out = capsys.readouterr().out
        assert rc == 2
        assert "rule 4: violated" in out
        assert "feasible: False" in out

    def test_dimension_mismatch(self, cfg_tiny, tmp_path, capsys):
        sched = tmp_path / "s.csv"
        sched.write_text("1,1\n0,0\n")
        rc = cli.main(["check", str(sched), "--config", cfg_tiny])
        assert rc == 1
        assert "2x2" in capsys.readouterr().err

    def test_ragged_csv(self, cfg_tiny, tmp_path, capsys):
        sched = tmp_path / "s.csv"
        sched.write_text("1,1,1\n0,0\n")
        assert cli.main(["check", str(sched), "--config", cfg_tiny]) == 1

    def test_oracle_cross_check(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({
            "nurses": 2,
            "graveyard": {"size": 2, "per_day": 1},
            "max_consecutive": 2,
            "days": 2,
        }))
        sched = tmp_path / "s.csv"
        sched.write_text("1,1\n0,0\n")
        rc = cli.main(["check", str(sched), "--config", str(cfg), "--oracle"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "oracle: confirmed" in out

    def test_oracle_too_large(self, cfg_tiny, tmp_path, capsys):
        sched = tmp_path / "s.csv"
        sched.write_text(FEASIBLE_TINY)
        assert cli.main(["check", str(sched), "--config", cfg_tiny]) == 0
        # 3 x 6 = 18 cells is within the oracle cap, so this also passes
        assert cli.main(["check", str(sched), "--config", cfg_tiny,
                         "--oracle"]) == 0


class TestExport:
    def test_header_and_determinism(self, cfg4, tmp_path):
        out1, out2 = tmp_path / "a.qubo", tmp_path / "b.qubo"
        assert cli.main(["export-qubo", "--config", cfg4,
                         "--out", str(out1)]) == 0
        assert cli.main(["export-qubo", "--config", cfg4,
                         "--out", str(out2)]) == 0
        text = out1.read_text()
        assert text.startswith("p qubo 25 ")
        assert out1.read_bytes() == out2.read_bytes()

    def test_unwritable_path(self, cfg4):
        assert cli.main(["export-qubo", "--config", cfg4,
                         "--out", "/nonexistent/dir/out.qubo"]) == 1


class TestRendering:
    def test_csv_roundtrip(self):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, size=(4, 9), dtype=np.uint8)
        sched = Schedule(bits=bits, m1=2, m2=1)
        assert np.array_equal(cli.parse_csv(cli.render_csv(sched)), bits)

    def test_ascii_blocks_split_long_horizons(self):
        bits = np.zeros((2, 30), dtype=np.uint8)
        text = cli.render_ascii(Schedule(bits=bits, m1=1, m2=1))
        assert text.count("Date") == 4  # two groups x two 15-day blocks
        assert " 16" in text and " 30" in text
