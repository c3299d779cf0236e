"""CLI subcommands: output formats, provenance, determinism, exit codes."""

import json
import shutil
import subprocess

import pytest

import rhp
from rhp.cli import main

BASE = {
    "model": {"family": "gamma", "params": {"shape": 2.0, "rate": 1.0}},
    "kernel": {"family": "exponential", "params": {"alpha": 0.5, "beta": 1.0}},
    "sim": {"horizon": 50.0, "reps": 3, "seed": 7},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(BASE))
    return str(p)


def read_jsonl(path):
    lines = path.read_text().splitlines()
    return json.loads(lines[0]), [json.loads(ln) for ln in lines[1:]]


class TestSimulate:
    def test_jsonl_output(self, cfg_path, tmp_path):
        out = tmp_path / "events.jsonl"
        assert main(["simulate", "--config", cfg_path, "--out", str(out)]) == 0
        meta, rows = read_jsonl(out)
        cfg = rhp.parse_config(json.dumps(BASE))
        assert meta["meta"]["config_sha256"] == rhp.config_hash(cfg)
        assert meta["meta"]["seed"] == 7
        assert meta["meta"]["method"] == "cluster"
        assert {r["rep"] for r in rows} == {0, 1, 2}
        assert all(list(r) == ["t", "kind", "gen", "parent", "cluster", "rep"] for r in rows)
        # rows come grouped by replicate, time-ordered within each
        keys = [(r["rep"], r["t"]) for r in rows]
        assert keys == sorted(keys)
        imm = [r for r in rows if r["kind"] == "immigrant"]
        assert all(r["parent"] is None for r in imm)

    def test_csv_matches_jsonl(self, cfg_path, tmp_path):
        jl, cv = tmp_path / "e.jsonl", tmp_path / "e.csv"
        main(["simulate", "--config", cfg_path, "--out", str(jl)])
        main(["simulate", "--config", cfg_path, "--out", str(cv)])
        _, rows = read_jsonl(jl)
        lines = cv.read_text().splitlines()
        assert lines[0].startswith("# ")
        assert "config_sha256=" in lines[0] and "seed=7" in lines[0]
        assert lines[1] == "t,kind,gen,parent,cluster,rep"
        assert len(lines) - 2 == len(rows)
        cells = lines[2].split(",")
        assert float(cells[0]) == rows[0]["t"]  # repr floats round-trip
        assert cells[1] == rows[0]["kind"]
        first_imm = next(i for i, r in enumerate(rows) if r["parent"] is None)
        assert lines[2 + first_imm].split(",")[3] == ""  # parent null -> empty cell

    def test_byte_identical_reruns(self, cfg_path, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["simulate", "--config", cfg_path, "--out", str(a)])
        main(["simulate", "--config", cfg_path, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_and_reps_overrides(self, cfg_path, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["simulate", "--config", cfg_path, "--out", str(a), "--seed", "8", "--reps", "1"])
        main(["simulate", "--config", cfg_path, "--out", str(b), "--seed", "9", "--reps", "1"])
        meta_a, rows_a = read_jsonl(a)
        meta_b, rows_b = read_jsonl(b)
        assert meta_a["meta"]["seed"] == 8 and meta_b["meta"]["seed"] == 9
        assert {r["rep"] for r in rows_a} == {0}
        assert [r["t"] for r in rows_a] != [r["t"] for r in rows_b]

    def test_methods(self, cfg_path, tmp_path):
        for method in ("thinning", "stationary"):
            out = tmp_path / f"{method}.jsonl"
            code = main(
                ["simulate", "--config", cfg_path, "--out", str(out), "--method", method, "--reps", "1"]
            )
            assert code == 0
            meta, rows = read_jsonl(out)
            assert meta["meta"]["method"] == method
            assert rows
        assert all(r["t"] > 0.0 for r in rows)  # stationary stream has no origin event


class TestRenewalTable:
    def test_table_csv(self, cfg_path, tmp_path):
        out = tmp_path / "table.csv"
        code = main(
            ["renewal-table", "--config", cfg_path, "--out", str(out), "--step", "0.001", "--horizon", "2.0"]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "t,phi_fn,phi_density"
        first = lines[2].split(",")
        assert float(first[0]) == 0.0 and float(first[1]) == 1.0
        # Gamma(2,1) renewal function at t = 1 (closed form)
        row_at_1 = lines[2 + 1000].split(",")
        assert float(row_at_1[0]) == pytest.approx(1.0)
        assert float(row_at_1[1]) == pytest.approx(1.25 + 2.718281828459045**-2.0 / 4, abs=1e-3)


class TestClusterStats:
    def test_stats_json(self, cfg_path, tmp_path):
        out = tmp_path / "stats.json"
        assert main(["cluster-stats", "--config", cfg_path, "--out", str(out), "--reps", "2000"]) == 0
        d = json.loads(out.read_text())
        assert d["alpha"] == 0.5
        assert d["mean_size_theory"] == 2.0
        assert abs(d["mean_size"] - 2.0) <= 4 * d["mean_size_se"]
        assert len(d["pmf_head"]) == 16 and len(d["empirical_pmf_head"]) == 16
        assert [g["generation"] for g in d["generations"]] == [1, 2, 3, 4]
        assert d["meta"]["reps"] == 2000


class TestPgfl:
    def test_solver_mode(self, cfg_path, tmp_path):
        out = tmp_path / "pgfl.json"
        code = main(
            ["pgfl", "--config", cfg_path, "--out", str(out), "--z", "const:0.5", "--mode", "solver"]
        )
        assert code == 0
        d = json.loads(out.read_text())
        want = rhp.solve_cluster_pgfl(
            rhp.ExponentialKernel(0.5, 1.0), rhp.TestFunction.constant(0.5)
        ).value_at_zero
        assert d["value"] == want
        assert d["residual"] <= 1e-10

    def test_mc_mode(self, cfg_path, tmp_path):
        out = tmp_path / "mc.json"
        code = main(
            ["pgfl", "--config", cfg_path, "--out", str(out), "--z", "step:0.5:0:2", "--mode", "mc", "--reps", "2000"]
        )
        assert code == 0
        d = json.loads(out.read_text())
        assert d["mode"] == "mc" and d["reps"] == 2000
        assert 0.0 < d["value"] <= 1.0 and d["se"] > 0.0

    def test_stationary_mode(self, cfg_path, tmp_path):
        out = tmp_path / "st.json"
        code = main(
            ["pgfl", "--config", cfg_path, "--out", str(out), "--z", "step:0.5:0:1", "--mode", "stationary"]
        )
        assert code == 0
        d = json.loads(out.read_text())
        assert len(d["terms"]) == 3
        assert 0.0 < d["value"] < 1.0

    def test_bad_z_spec(self, cfg_path, tmp_path):
        out = tmp_path / "x.json"
        code = main(["pgfl", "--config", cfg_path, "--out", str(out), "--z", "ramp:1", "--mode", "solver"])
        assert code == 2


class TestValidate:
    def test_existence_passes(self, cfg_path, tmp_path):
        out = tmp_path / "ex.json"
        code = main(["validate", "--config", cfg_path, "--out", str(out), "--suite", "existence"])
        assert code == 0
        d = json.loads(out.read_text())
        assert d["pass"] is True
        assert d["meta"]["suite"] == "existence"

    def test_rescaling_passes(self, cfg_path, tmp_path):
        out = tmp_path / "rs.json"
        code = main(
            ["validate", "--config", cfg_path, "--out", str(out), "--suite", "rescaling", "--reps", "10"]
        )
        assert code == 0
        assert json.loads(out.read_text())["test"] == "time_rescaling"

    def test_cross_passes(self, tmp_path):
        raw = dict(BASE, sim={"horizon": 30.0, "reps": 60, "seed": 3})
        p = tmp_path / "cross.json"
        p.write_text(json.dumps(raw))
        out = tmp_path / "cr.json"
        code = main(["validate", "--config", str(p), "--out", str(out), "--suite", "cross"])
        assert code == 0
        d = json.loads(out.read_text())
        assert d["sizes"]["windows"] == 10

    def test_failing_validation_exits_one(self, tmp_path):
        raw = dict(BASE)
        raw["model"] = {
            "family": "tabulated",
            "params": {"grid": [0.0, 1.0], "density": [0.5, 0.5], "allow_defective": True},
        }
        p = tmp_path / "bad_model.json"
        p.write_text(json.dumps(raw))
        out = tmp_path / "ex.json"
        code = main(["validate", "--config", str(p), "--out", str(out), "--suite", "existence"])
        assert code == 1
        assert json.loads(out.read_text())["pass"] is False

    def test_rescaling_rejects_stationary_method(self, tmp_path):
        raw = dict(BASE, sim={"horizon": 50.0, "reps": 5, "seed": 0, "method": "stationary"})
        p = tmp_path / "st.json"
        p.write_text(json.dumps(raw))
        out = tmp_path / "r.json"
        code = main(["validate", "--config", str(p), "--out", str(out), "--suite", "rescaling"])
        assert code == 2


class TestErrorsAndUsage:
    def test_config_error_exit_two(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"model": {}}')
        assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o.jsonl")]) == 2

    def test_missing_config_file(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate"])  # missing required --config/--out
        assert exc.value.code == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])


@pytest.mark.skipif(shutil.which("rhp") is None, reason="entry point not installed")
class TestEntryPoint:
    def test_installed_script(self, cfg_path, tmp_path):
        out = tmp_path / "events.csv"
        proc = subprocess.run(
            ["rhp", "simulate", "--config", cfg_path, "--out", str(out), "--reps", "1"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.read_text().splitlines()[1] == "t,kind,gen,parent,cluster,rep"
