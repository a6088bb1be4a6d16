"""Tests for the ExperimentService layer: dispatch, outputs and determinism."""

import csv
import dataclasses
import io
import json

import pytest

from specwave import ConfigError, ExperimentService, RunConfig, RunResult
from specwave.config import build_experiment_config


@pytest.fixture
def quick_config():
    """Short runs on a coarse interval, for every subcommand."""
    return build_experiment_config(
        {
            "backend": {"kind": "dirichlet-1d", "L_over_pi": 20, "N": 64},
            "data": {"amplitude": 0.01},
            "T": 4.0,
            "h": 0.1,
            "fit_window": [1.0, 4.0],
            "n_times": 20,
            "kernel_scan": {"n_t": 200, "n_lam": 200, "plot_n_t": 5, "plot_n_lam": 4},
            "inequalities": {"trials": 5, "levels": [128, 256]},
            "sweep": {"p": [2.0, 4.0], "eps": [0.01]},
        }
    )


@pytest.fixture
def service(out_dir):
    """A service writing into a fresh output directory."""
    return ExperimentService(out_dir)


class TestServiceInit:
    """Tests for constructing the service."""

    def test_from_run(self, out_dir):
        """Settings are taken from the run config."""
        run = RunConfig("sweep", out_dir=str(out_dir), seed=5, threads=3, exploratory=True)
        service = ExperimentService.from_run(run)
        assert service.out_dir == out_dir
        assert (service.seed, service.threads, service.exploratory) == (5, 3, True)


class TestPlainFlows:
    """Tests for linear, heat and nonlinear runs."""

    def test_linear(self, service, quick_config, out_dir):
        """Trace and a JSON summary are written; there is no verdict."""
        result = service.run("linear", quick_config)
        assert isinstance(result, RunResult)
        assert result.passed is None
        names = sorted(p.name for p in result.outputs)
        assert names == ["linear.json", "linear_trace.csv"]
        payload = json.loads((out_dir / "linear.json").read_text())
        assert payload["schema_version"] == "1"
        assert payload["experiment"] == "linear"
        assert payload["records"] == 21
        assert payload["final_time"] == pytest.approx(4.0)
        assert "timestamp" not in payload
        assert [row[0] for row in result.rows][:3] == ["l1", "lq", "l2"]

    def test_snapshots_on_request(self, service, quick_config, out_dir):
        """A positive snapshot_stride adds the snapshot matrix: u and ut rows per stored time."""
        config = dataclasses.replace(quick_config, snapshot_stride=10)
        result = service.run("linear", config)
        assert "linear_snapshots.csv" in {p.name for p in result.outputs}
        rows = list(csv.reader(io.StringIO((out_dir / "linear_snapshots.csv").read_text())))
        assert rows[0][:2] == ["t", "field"]
        assert len(rows[0]) == 2 + 64
        # 21 record times, every tenth kept
        assert [row[1] for row in rows[1:]] == ["u", "ut"] * 3
        assert (rows[1][0], rows[-1][0]) == ("0", "4")

    def test_smalldata_keeps_snapshots_internal(self, service, quick_config):
        """The small-data study stores states for its residual but writes no snapshot file by default."""
        result = service.run("smalldata", quick_config)
        assert not any(p.name.endswith("_snapshots.csv") for p in result.outputs)

    def test_heat(self, service, quick_config):
        """The heat flow writes its own files."""
        result = service.run("heat", quick_config)
        assert {p.name for p in result.outputs} >= {"heat.json", "heat_trace.csv"}

    def test_nonlinear(self, service, quick_config, out_dir):
        """Nonlinear traces carry the forcing channels."""
        result = service.run("nonlinear", quick_config)
        header = (out_dir / "nonlinear_trace.csv").read_text().splitlines()[0]
        assert header.endswith("blowup,f_l2,f_lsigma")
        assert result.payload["blowup"] is None

    def test_nonlinear_blowup(self, service, quick_config, out_dir):
        """A blown-up run still writes its outputs with the blow-up record."""
        quick_config.data.amplitude = 50.0
        quick_config.p = 2.0
        quick_config.cap = 1e3
        result = service.run("nonlinear", quick_config)
        payload = json.loads((out_dir / "nonlinear.json").read_text())
        assert payload["blowup"] is not None
        assert payload["blowup"]["time"] == result.payload["blowup"]["time"]


class TestKernelScan:
    """Tests for the kernel-scan subcommand."""

    def test_outputs(self, service, quick_config, out_dir):
        """The scan passes and writes a coarse table plus the bounds."""
        result = service.run("kernel-scan", quick_config)
        assert result.passed is True
        lines = (out_dir / "kernel_scan.csv").read_text().splitlines()
        assert lines[0] == "t,lambda,D,dtD,diff_symbol"
        assert len(lines) == 1 + 5 * 4
        bounds = json.loads((out_dir / "kernel_scan.json").read_text())["bounds"]
        assert bounds["sup_D"] <= 3.0
        assert result.rows[-1][-1] == "observed"


class TestStudies:
    """Tests for the report-producing subcommands."""

    def test_verify_matsumura(self, service, quick_config, out_dir):
        """One summary row per criterion and the report JSON."""
        result = service.run("verify-matsumura", quick_config)
        assert isinstance(result.passed, bool)
        assert len(result.rows) == 8
        assert (out_dir / "verify-matsumura_linear_trace.csv").exists()
        payload = json.loads((out_dir / "verify-matsumura.json").read_text())
        assert payload["passed"] == result.passed
        assert [c["name"] for c in payload["criteria"]][:4] == ["u_L2", "ut_L2", "h1dot_L2", "u_Linf"]

    def test_verify_diffusion(self, service, quick_config, out_dir):
        """Both difference and linear traces are written."""
        service.run("verify-diffusion", quick_config)
        assert (out_dir / "verify-diffusion_difference_trace.csv").exists()
        assert (out_dir / "verify-diffusion_linear_trace.csv").exists()

    def test_smalldata_gate(self, service, quick_config):
        """Inadmissible powers are refused unless the service is exploratory."""
        quick_config.p = 2.0
        with pytest.raises(ConfigError):
            service.run("smalldata", quick_config)

    def test_smalldata_exploratory(self, out_dir, quick_config):
        """Exploratory services run inadmissible powers."""
        quick_config.p = 2.0
        result = ExperimentService(out_dir, exploratory=True).run("smalldata", quick_config)
        assert result.payload["criticality"]["admissible"] is False

    def test_sweep(self, service, quick_config, out_dir):
        """The phase table is written and summarized row by row."""
        result = service.run("sweep", quick_config)
        lines = (out_dir / "sweep_phase.csv").read_text().splitlines()
        assert lines[0].startswith("p,q,eps,form,p_F,admissible,class")
        assert len(lines) == 3
        assert [row[0] for row in result.rows] == [2.0, 4.0]
        assert len(result.payload["table"]) == 2

    def test_check_inequalities(self, service, quick_config, out_dir):
        """The inequality report is written with the seed used."""
        result = ExperimentService(out_dir, seed=9).run("check-inequalities", quick_config)
        payload = json.loads((out_dir / "inequalities.json").read_text())
        assert payload["seed"] == 9
        assert payload["levels"] == [128, 256]
        assert {row[0] for row in result.rows} == {
            "gagliardo-nirenberg",
            "sobolev",
            "critical-sobolev",
            "heat-smoothing",
            "heat-decay",
        }

    def test_alphas(self, service, quick_config, out_dir):
        """The catalog lists every operator in its valid dimensions and writes nothing."""
        result = service.run("alphas", quick_config)
        assert result.passed is None
        assert result.outputs == []
        assert len(result.rows) == 5 * 3 + 1 + 2
        dirichlet_3d = next(r for r in result.rows if r[0] == "dirichlet-laplacian" and r[1] == 3)
        assert dirichlet_3d[2] == 0.75


class TestDeterminism:
    """Reruns with the same config and seed give byte-identical files."""

    @pytest.mark.parametrize("subcommand", ["verify-matsumura", "sweep", "check-inequalities"])
    def test_thread_count_invariance(self, tmp_path, quick_config, subcommand):
        """One and three worker threads write the same bytes."""
        one = ExperimentService(tmp_path / "one", threads=1).run(subcommand, quick_config)
        three = ExperimentService(tmp_path / "three", threads=3).run(subcommand, quick_config)
        assert [p.name for p in one.outputs] == [p.name for p in three.outputs]
        for a, b in zip(one.outputs, three.outputs):
            assert a.read_bytes() == b.read_bytes()
