"""Config parsing, sweep orchestration, result emission, and the CLI."""

import json
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from adapshare.agents import AgentConfig, load_agent
from adapshare.domain import AgentKind, EnvConfig, ExperimentConfig, write_series_csv
from adapshare.harness.cli import main
from adapshare.harness.config import (
    ConfigFileError,
    build_experiment,
    coerce_overrides,
    parse_config_file,
    sweep_fields,
)
from adapshare.harness.results import (
    CURVE_HEADER,
    emit_results,
    read_sweep_csv,
    replot,
    svg_line_chart,
)
from adapshare.harness.sweep import SweepSpec, cell_seed, run_cell, run_sweep
from adapshare.metrics import SWEEP_HEADER


class TestConfigFile:
    def test_parses_comments_types_and_lists(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# experiment\n"
            "\n"
            "seed = 7\n"
            "env.n_r = 60\n"
            "env.zeta = 0.3\n"
            "agent.hidden_dims = 32, 16\n"
            "agent_kinds = td3, opt_base\n"
            "zeta_values = 0.1,0.5\n"
        )
        mapping = parse_config_file(path)
        assert mapping["seed"] == 7
        assert mapping["env.n_r"] == 60.0
        assert mapping["agent.hidden_dims"] == (32, 16)
        assert mapping["agent_kinds"] == (AgentKind.TD3, AgentKind.OPT_BASE)
        assert mapping["zeta_values"] == (0.1, 0.5)

    def test_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("seed = 1\nnot a line\n")
        with pytest.raises(ConfigFileError, match=":2"):
            parse_config_file(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("env.pool = 20\n")
        with pytest.raises(ConfigFileError, match="unknown config key"):
            parse_config_file(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("env.n_r = twenty\n")
        with pytest.raises(ConfigFileError, match="bad value"):
            parse_config_file(path)

    def test_coerce_overrides(self):
        out = coerce_overrides({"env.zeta": "0.4", "seed": 3, "agent_kind": "ddpg"})
        assert out == {"env.zeta": 0.4, "seed": 3, "agent_kind": AgentKind.DDPG}
        with pytest.raises(ConfigFileError):
            coerce_overrides({"nope": "1"})


class TestBuildExperiment:
    def test_full_mapping(self):
        cfg = build_experiment(
            {
                "env.n_r": 60.0,
                "env.zeta": 0.2,
                "seed": 5,
                "train_steps": 100,
                "agent.batch_size": 16,
                "agent_kind": AgentKind.DDPG,
            }
        )
        assert cfg.env.n_r == 60.0
        assert cfg.env.zeta == 0.2
        assert cfg.seed == 5
        assert cfg.agent.batch_size == 16
        assert cfg.agent_kind == AgentKind.DDPG

    def test_requires_pool_size(self):
        with pytest.raises(ConfigFileError, match="env.n_r"):
            build_experiment({"seed": 1})

    def test_sweep_keys_rejected(self):
        with pytest.raises(ConfigFileError, match="sweep-only"):
            build_experiment({"env.n_r": 20.0, "zeta_values": (0.1,)})

    def test_sweep_fields_split(self):
        sweep_kv, rest = sweep_fields(
            {"env.n_r": 20.0, "n_r_values": (20.0, 60.0), "seed": 2}
        )
        assert sweep_kv == {"n_r_values": (20.0, 60.0)}
        assert rest == {"env.n_r": 20.0, "seed": 2}


def solver_spec(train_steps=0, **kw):
    base = ExperimentConfig(
        env=EnvConfig(n_r=20.0, zeta=0.5, window_n=1),
        train_steps=train_steps,
        seed=5,
    )
    defaults = dict(
        base=base,
        n_r_values=(20.0, 60.0),
        zeta_values=(0.3, 0.7),
        agent_kinds=(AgentKind.OPT_ORACLE, AgentKind.OPT_BASE),
    )
    defaults.update(kw)
    return SweepSpec(**defaults)


class TestSweep:
    def test_cell_seed_stable_and_distinct(self):
        s = cell_seed(42, 20.0, 3, AgentKind.TD3)
        assert s == cell_seed(42, 20.0, 3, "td3")
        others = {
            cell_seed(42, 20.0, 3, AgentKind.DDPG),
            cell_seed(42, 60.0, 3, AgentKind.TD3),
            cell_seed(42, 20.0, 4, AgentKind.TD3),
            cell_seed(43, 20.0, 3, AgentKind.TD3),
        }
        assert s not in others
        assert len(others) == 4

    def test_spec_validation_and_coercion(self):
        spec = solver_spec(agent_kinds=("opt_oracle",), n_r_values=(20,))
        assert spec.agent_kinds == (AgentKind.OPT_ORACLE,)
        assert spec.n_r_values == (20.0,)
        with pytest.raises(ValueError):
            solver_spec(n_r_values=())
        with pytest.raises(ValueError):
            solver_spec(n_r_values=(0.0,))
        with pytest.raises(ValueError):
            solver_spec(zeta_values=(1.2,))

    def test_grid_covers_all_cells(self, small_series):
        spec = solver_spec()
        rows = run_sweep(spec, small_series)
        assert len(rows) == 8
        combos = {(r.n_r, r.zeta, r.agent_kind) for r in rows}
        assert len(combos) == 8
        for row in rows:
            assert row.curve is None
            assert row.report.per_step

    def test_progress_callback(self, small_series):
        seen = []
        spec = solver_spec(n_r_values=(20.0,), zeta_values=(0.5,))
        run_sweep(spec, small_series, progress=lambda d, t, r: seen.append((d, t)))
        assert seen == [(1, 2), (2, 2)]

    def test_single_cell_matches_full_grid(self, small_series):
        """Any cell rerun in isolation reproduces its row from the grid."""
        spec = solver_spec()
        rows = run_sweep(spec, small_series)
        lone = run_cell(small_series, spec, 60.0, 1, AgentKind.OPT_ORACLE)
        twin = next(
            r
            for r in rows
            if (r.n_r, r.zeta, r.agent_kind) == (60.0, 0.7, AgentKind.OPT_ORACLE)
        )
        assert lone.seed == twin.seed
        assert lone.report == twin.report

    def test_trainable_cell_records_curve(self, constant_series):
        base = ExperimentConfig(
            env=EnvConfig(n_r=20.0, window_n=1),
            train_steps=30,
            seed=2,
            agent=AgentConfig(batch_size=8, warmup_steps=5, hidden_dims=(4,)),
        )
        spec = SweepSpec(
            base=base, n_r_values=(20.0,), zeta_values=(0.5,), agent_kinds=(AgentKind.TD3,)
        )
        rows = run_sweep(spec, constant_series)
        assert rows[0].curve is not None
        assert len(rows[0].curve) == 30


class TestResults:
    def test_emit_inventory_and_metadata(self, small_series, tmp_path):
        rows = run_sweep(solver_spec(), small_series)
        out = tmp_path / "out"
        written = emit_results(rows, out)
        names = {Path(p).name for p in written}
        assert "sweep.csv" in names
        assert "run_metadata.json" in names
        detail_files = [n for n in names if n.startswith("detail_")]
        assert len(detail_files) == 8
        # two zetas per pool: the per-pool zeta charts exist, no curves
        assert "surplus_nr20.svg" in names
        assert "fairness_nr60.svg" in names
        assert not any(n.startswith("curve_") for n in names)
        meta = json.loads((out / "run_metadata.json").read_text())
        assert meta["cells"] == 8
        assert set(meta["files"]) == names - {"run_metadata.json"}

    def test_sweep_csv_round_trips(self, small_series, tmp_path):
        rows = run_sweep(solver_spec(), small_series)
        emit_results(rows, tmp_path)
        parsed = read_sweep_csv(tmp_path / "sweep.csv")
        assert len(parsed) == 8
        n_r, zeta, agent, s_a, s_b, fairness = parsed[0]
        assert (n_r, zeta) == (rows[0].n_r, rows[0].zeta)
        assert agent == rows[0].agent_kind.value
        assert s_a == rows[0].report.s_a
        assert fairness == rows[0].report.fairness

    def test_rerun_is_byte_identical(self, small_series, tmp_path):
        spec = solver_spec()
        dir_1, dir_2 = tmp_path / "one", tmp_path / "two"
        emit_results(run_sweep(spec, small_series), dir_1)
        emit_results(run_sweep(spec, small_series), dir_2)
        csvs = sorted(p.name for p in dir_1.glob("*.csv"))
        assert csvs
        for name in csvs:
            assert (dir_1 / name).read_bytes() == (dir_2 / name).read_bytes()

    def test_empty_table_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], tmp_path)

    def test_svg_is_valid_xml_with_one_polyline_per_series(self):
        doc = svg_line_chart(
            [("one", [0, 1, 2], [0.0, 0.5, 0.2]), ("two", [0, 1, 2], [1.0, 0.8, 0.9])],
            title="demo",
            x_label="x",
            y_label="y",
        )
        root = ET.fromstring(doc)
        ns = "{http://www.w3.org/2000/svg}"
        polylines = root.findall(f".//{ns}polyline")
        assert len(polylines) == 2
        texts = [t.text for t in root.findall(f".//{ns}text")]
        assert "demo" in texts

    def test_replot_rebuilds_charts(self, small_series, tmp_path):
        rows = run_sweep(solver_spec(), small_series)
        emit_results(rows, tmp_path)
        svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
        for name in svgs:
            (tmp_path / name).unlink()
        replot(tmp_path)
        assert sorted(p.name for p in tmp_path.glob("*.svg")) == svgs


@pytest.fixture
def constant_csv(tmp_path, constant_series):
    path = tmp_path / "constant.csv"
    write_series_csv(constant_series, path)
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestCliIngest:
    def test_end_to_end(self, dci_fixture_path, tmp_path, capsys):
        out = tmp_path / "demand.csv"
        rc = run_cli(
            "ingest", "--dci-a", dci_fixture_path, "--dci-b", dci_fixture_path,
            "--out", out,
        )
        assert rc == 0
        text = out.read_text().splitlines()
        assert text[0] == "timestamp,d_a,d_b"
        rows = [line.split(",") for line in text[1:]]
        # hand-computed hourly means of the format-2B rows
        assert [float(r[1]) for r in rows] == [20.0, 8.0]
        assert [float(r[2]) for r in rows] == [20.0, 8.0]
        assert "data transmissions" in capsys.readouterr().out

    def test_missing_file_is_rc2(self, tmp_path, capsys):
        rc = run_cli(
            "ingest", "--dci-a", tmp_path / "no.csv", "--dci-b", tmp_path / "no.csv",
            "--out", tmp_path / "o.csv",
        )
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestCliSynth:
    def test_deterministic_given_seed(self, hourly_fixture_path, tmp_path, capsys):
        out_1 = tmp_path / "one.csv"
        out_2 = tmp_path / "two.csv"
        for out in (out_1, out_2):
            rc = run_cli(
                "synth", "--ref", hourly_fixture_path, "--length", "100",
                "--seed", "5", "--out", out,
            )
            assert rc == 0
        assert out_1.read_bytes() == out_2.read_bytes()
        assert "ks_a=" in capsys.readouterr().out

    def test_two_sided_ref_needs_side(self, tmp_path, constant_csv, capsys):
        rc = run_cli("synth", "--ref", constant_csv, "--out", tmp_path / "x.csv")
        assert rc == 2
        assert "--side" in capsys.readouterr().err


class TestCliTrainEval:
    def train_args(self, data, tmp_path, *extra):
        return (
            "train", "--data", data, "--n-r", "20", "--steps", "40",
            "--set", "agent.warmup_steps=10", "--set", "agent.batch_size=8",
            "--set", "agent.hidden_dims=8", "--seed", "3",
            "--out", tmp_path / "agent.json", *extra,
        )

    def test_train_writes_checkpoint_and_curve(self, constant_csv, tmp_path, capsys):
        rc = run_cli(
            *self.train_args(constant_csv, tmp_path, "--curve-out", tmp_path / "curve.csv")
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "trained td3 for 40 steps" in out
        assert "opt_oracle:" in out
        agent, cfg = load_agent(tmp_path / "agent.json")
        assert cfg.train_steps == 40 and cfg.seed == 3
        curve_lines = (tmp_path / "curve.csv").read_text().splitlines()
        assert curve_lines[0] == CURVE_HEADER
        assert len(curve_lines) == 41

    def test_train_rejects_solver_kind(self, constant_csv, tmp_path, capsys):
        rc = run_cli(
            "train", "--data", constant_csv, "--n-r", "20", "--agent", "opt_oracle",
            "--steps", "1",
        )
        assert rc == 2
        assert "ddpg or td3" in capsys.readouterr().err

    def test_eval_checkpoint_with_env_override(self, constant_csv, tmp_path, capsys):
        assert run_cli(*self.train_args(constant_csv, tmp_path)) == 0
        capsys.readouterr()
        out_csv = tmp_path / "row.csv"
        rc = run_cli(
            "eval", "--data", constant_csv, "--checkpoint", tmp_path / "agent.json",
            "--n-r", "60", "--out", out_csv, "--detail-out", tmp_path / "detail.csv",
        )
        assert rc == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        cells = lines[1].split(",")
        assert float(cells[1]) == 60.0
        assert cells[2] == "td3"
        assert (tmp_path / "detail.csv").exists()

    def test_eval_solver_without_checkpoint(self, constant_csv, capsys):
        rc = run_cli(
            "eval", "--data", constant_csv, "--agent", "opt_oracle", "--n-r", "20"
        )
        assert rc == 0
        assert "opt_oracle: mean_j=0.000000" in capsys.readouterr().out

    def test_eval_rejects_rl_kind_by_name(self, constant_csv, capsys):
        rc = run_cli("eval", "--data", constant_csv, "--agent", "td3", "--n-r", "20")
        assert rc == 2
        assert "--checkpoint" in capsys.readouterr().err

    def test_eval_needs_exactly_one_source(self, constant_csv, tmp_path, capsys):
        rc = run_cli("eval", "--data", constant_csv, "--n-r", "20")
        assert rc == 2
        assert "exactly one" in capsys.readouterr().err


class TestCliPrecedence:
    def test_seed_resolution_order(self, constant_csv, tmp_path, capsys, monkeypatch):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("seed = 1\nenv.n_r = 20\ntrain_steps = 2\n")
        base = ("train", "--data", constant_csv, "--config", cfg_file)

        assert run_cli(*base) == 0
        assert "seed=1" in capsys.readouterr().out

        monkeypatch.setenv("ADAPSHARE_SEED", "9")
        assert run_cli(*base) == 0
        assert "seed=9" in capsys.readouterr().out

        assert run_cli(*base, "--seed", "4") == 0
        assert "seed=4" in capsys.readouterr().out

        assert run_cli(*base, "--seed", "4", "--set", "seed=6") == 0
        assert "seed=6" in capsys.readouterr().out

    def test_set_overrides_config_zeta(self, constant_csv, tmp_path, capsys):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("env.n_r = 20\nenv.zeta = 0.3\ntrain_steps = 2\n")
        rc = run_cli(
            "train", "--data", constant_csv, "--config", cfg_file,
            "--set", "env.zeta=0.8",
        )
        assert rc == 0
        assert "zeta=0.8" in capsys.readouterr().out

    def test_bad_env_seed_is_rc2(self, constant_csv, capsys, monkeypatch):
        monkeypatch.setenv("ADAPSHARE_SEED", "ten")
        rc = run_cli("train", "--data", constant_csv, "--n-r", "20", "--steps", "1")
        assert rc == 2
        assert "ADAPSHARE_SEED" in capsys.readouterr().err


class TestCliSweepPlot:
    def sweep_args(self, data, out_dir):
        return (
            "sweep", "--data", data, "--out-dir", out_dir,
            "--agents", "opt_oracle,opt_base",
            "--zeta-values", "0.3,0.7", "--n-r-values", "20",
        )

    def test_sweep_writes_grid(self, constant_csv, tmp_path, capsys):
        out_dir = tmp_path / "grid"
        rc = run_cli(*self.sweep_args(constant_csv, out_dir))
        assert rc == 0
        lines = (out_dir / "sweep.csv").read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 5
        out = capsys.readouterr().out
        assert "[4/4]" in out

    def test_sweep_rerun_byte_identical(self, constant_csv, tmp_path):
        dir_1, dir_2 = tmp_path / "one", tmp_path / "two"
        assert run_cli(*self.sweep_args(constant_csv, dir_1)) == 0
        assert run_cli(*self.sweep_args(constant_csv, dir_2)) == 0
        names = sorted(p.name for p in dir_1.glob("*.csv"))
        assert names
        for name in names:
            assert (dir_1 / name).read_bytes() == (dir_2 / name).read_bytes()

    def test_plot_rebuilds_charts(self, constant_csv, tmp_path):
        out_dir = tmp_path / "grid"
        assert run_cli(*self.sweep_args(constant_csv, out_dir)) == 0
        svgs = sorted(p.name for p in out_dir.glob("*.svg"))
        assert svgs
        for name in svgs:
            (out_dir / name).unlink()
        assert run_cli("plot", "--dir", out_dir) == 0
        assert sorted(p.name for p in out_dir.glob("*.svg")) == svgs
