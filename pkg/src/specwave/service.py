"""Service layer for specwave - runs one subcommand from a validated config."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .analysis import (
    DOCUMENTED_OPERATORS,
    check_inequalities,
    documented_alpha,
    fujita_exponent,
    kernel_table,
    scan_kernel_bounds,
)
from .backends import build_backend
from .config import ExperimentConfig, RunConfig
from .evolution import (
    EvolutionTrace,
    Nonlinearity,
    NonlinearForm,
    TraceOptions,
    heat_solve,
    linear_solve,
    nonlinear_evolve,
)
from .experiments import (
    SCHEMA_VERSION,
    ExperimentReport,
    critical_sweep,
    make_initial_data,
    record_times,
    smalldata_global,
    verify_diffusion,
    verify_matsumura,
)
from .export import (
    export_json,
    export_phase_csv,
    export_scan_csv,
    export_snapshots_csv,
    export_trace_csv,
    write_output,
)

logger = logging.getLogger("specwave")

# Scanned bound on sup |D| and sup |dD/dt| over the default grid
KERNEL_SUP_BOUND = 3.0


@dataclass
class RunResult:
    """Result of one subcommand run.

    ``passed`` is None for subcommands without pass/fail criteria.
    """

    subcommand: str
    passed: bool | None
    outputs: list[Path] = field(default_factory=list)
    headers: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)
    payload: dict[str, Any] = field(default_factory=dict)


class ExperimentService:
    """Runs specwave subcommands and writes their outputs.

    All outputs go under ``out_dir``; file names are fixed per subcommand so
    reruns overwrite rather than accumulate.
    """

    def __init__(self, out_dir: str | Path, seed: int = 0, threads: int = 1, exploratory: bool = False):
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.threads = threads
        self.exploratory = exploratory

    @classmethod
    def from_run(cls, run: RunConfig) -> "ExperimentService":
        return cls(run.out_dir, seed=run.seed, threads=run.threads, exploratory=run.exploratory)

    def run(self, subcommand: str, config: ExperimentConfig) -> RunResult:
        """Dispatch ``subcommand`` to its runner."""
        runners: dict[str, Callable[[ExperimentConfig], RunResult]] = {
            "kernel-scan": self.kernel_scan,
            "linear": self.linear,
            "heat": self.heat,
            "nonlinear": self.nonlinear,
            "verify-matsumura": self.verify_matsumura,
            "verify-diffusion": self.verify_diffusion,
            "check-inequalities": self.check_inequalities,
            "smalldata": self.smalldata,
            "sweep": self.sweep,
            "alphas": self.alphas,
        }
        logger.info("Running %s", subcommand)
        result = runners[subcommand](config)
        logger.info("Finished %s", subcommand)
        return result

    # -------------------------------------------------------------------------
    # Output helpers
    # -------------------------------------------------------------------------

    def _write(self, name: str, text: str, result: RunResult) -> None:
        result.outputs.append(write_output(self.out_dir / name, text))

    def _write_trace(self, stem: str, trace: EvolutionTrace, result: RunResult, snapshots: bool = True) -> None:
        self._write(f"{stem}_trace.csv", export_trace_csv(trace), result)
        if snapshots and trace.snapshots:
            self._write(f"{stem}_snapshots.csv", export_snapshots_csv(trace), result)

    def _trace_payload(self, name: str, config: ExperimentConfig, trace: EvolutionTrace) -> dict[str, Any]:
        times, channels = trace.finite_view()
        final = {k: float(v[-1]) for k, v in channels.items()} if times.size else {}
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": name,
            "config": config.to_dict(),
            "backend": trace.backend.describe(),
            "records": len(trace),
            "final_time": float(times[-1]) if times.size else None,
            "final": final,
            "underflow_modes": trace.metadata.get("underflow_modes", 0),
            "blowup": trace.blowup.to_dict() if trace.blowup is not None else None,
        }

    def _trace_result(self, name: str, config: ExperimentConfig, trace: EvolutionTrace) -> RunResult:
        result = RunResult(name, None)
        self._write_trace(name, trace, result)
        result.payload = self._trace_payload(name, config, trace)
        self._write(f"{name}.json", export_json(result.payload), result)
        result.headers = ["channel", "t=0", f"t={result.payload['final_time']}"]
        result.rows = [
            [channel, float(trace.channels[channel][0]), result.payload["final"].get(channel)]
            for channel in trace.channels
        ]
        return result

    def _report_result(self, name: str, report: ExperimentReport) -> RunResult:
        result = RunResult(name, report.passed)
        for stem, trace in report.traces.items():
            self._write_trace(f"{name}_{stem}", trace, result, snapshots=bool(report.config.get("snapshot_stride")))
        if report.table:
            self._write(f"{name}_phase.csv", export_phase_csv(report.table), result)
        result.payload = dict(report.to_dict())
        self._write(f"{name}.json", export_json(result.payload), result)
        result.headers = ["criterion", "predicted", "fitted", "tolerance", "result"]
        result.rows = [
            [
                c.name,
                c.predicted,
                c.fitted,
                c.tolerance,
                "observed" if c.observation else ("pass" if c.passed else "FAIL"),
            ]
            for c in report.criteria
        ]
        return result

    # -------------------------------------------------------------------------
    # Kernel scan
    # -------------------------------------------------------------------------

    def kernel_scan(self, config: ExperimentConfig) -> RunResult:
        """Scan the multiplier bounds and write a coarse (t, lambda) table."""
        scan = config.kernel_scan
        bounds = scan_kernel_bounds(
            t_max=scan.t_max,
            lam_max=scan.lam_max,
            n_t=scan.n_t,
            n_lam=scan.n_lam,
            diff_times=tuple(scan.diff_times),
            n_diff_lam=scan.n_diff_lam,
            threads=self.threads,
        )
        t_values = np.linspace(scan.t_max / scan.plot_n_t, scan.t_max, scan.plot_n_t)
        lam_values = np.linspace(0.0, scan.lam_max, scan.plot_n_lam)
        table = kernel_table(t_values, lam_values)

        checks = [
            ("sup_D", bounds.sup_D, KERNEL_SUP_BOUND, bounds.sup_D <= KERNEL_SUP_BOUND),
            ("sup_dtD", bounds.sup_dtD, KERNEL_SUP_BOUND, bounds.sup_dtD <= KERNEL_SUP_BOUND),
            ("diff_constant", bounds.diff_constant, bounds.diff_constant_refined, bounds.diff_stable),
        ]
        passed = all(ok for *_, ok in checks)
        for name, value, bound, ok in checks:
            logger.info("%s = %.6g (against %.6g): %s", name, value, bound, "pass" if ok else "FAIL")

        result = RunResult("kernel-scan", passed)
        self._write("kernel_scan.csv", export_scan_csv(table), result)
        result.payload = {
            "schema_version": SCHEMA_VERSION,
            "experiment": "kernel-scan",
            "config": config.to_dict(),
            "passed": passed,
            "bounds": bounds.to_dict(),
        }
        self._write("kernel_scan.json", export_json(result.payload), result)
        result.headers = ["quantity", "value", "bound", "result"]
        result.rows = [[n, v, b, "pass" if ok else "FAIL"] for n, v, b, ok in checks]
        result.rows.append(["sup_t |D(t, 1/4)|", bounds.sup_quarter_column, 2.0 / np.e, "observed"])
        return result

    # -------------------------------------------------------------------------
    # Plain flows
    # -------------------------------------------------------------------------

    def _options(self, config: ExperimentConfig, nonlinear: bool = False) -> TraceOptions:
        extras = ("f_l2", "f_lsigma") if nonlinear else ()
        return TraceOptions(
            q=config.q,
            extras=extras,
            record_stride=config.record_stride,
            snapshot_stride=config.snapshot_stride,
        )

    def linear(self, config: ExperimentConfig) -> RunResult:
        backend = build_backend(config.backend)
        data = make_initial_data(backend, config.data)
        trace = linear_solve(data, record_times(config), self._options(config))
        return self._trace_result("linear", config, trace)

    def heat(self, config: ExperimentConfig) -> RunResult:
        """Heat flow of ``u0 + u1``, the comparison profile of the diffusion phenomenon."""
        backend = build_backend(config.backend)
        data = make_initial_data(backend, config.data)
        trace = heat_solve(data.u0 + data.u1, record_times(config), self._options(config))
        return self._trace_result("heat", config, trace)

    def nonlinear(self, config: ExperimentConfig) -> RunResult:
        backend = build_backend(config.backend)
        data = make_initial_data(backend, config.data)
        nonlinearity = Nonlinearity(config.p, NonlinearForm(config.form))
        trace = nonlinear_evolve(
            data,
            nonlinearity,
            config.h,
            config.T,
            config.cap,
            config.integrator,
            self._options(config, nonlinear=True),
        )
        return self._trace_result("nonlinear", config, trace)

    # -------------------------------------------------------------------------
    # Experiments
    # -------------------------------------------------------------------------

    def verify_matsumura(self, config: ExperimentConfig) -> RunResult:
        return self._report_result("verify-matsumura", verify_matsumura(config))

    def verify_diffusion(self, config: ExperimentConfig) -> RunResult:
        return self._report_result("verify-diffusion", verify_diffusion(config))

    def smalldata(self, config: ExperimentConfig) -> RunResult:
        return self._report_result("smalldata", smalldata_global(config, exploratory=self.exploratory))

    def sweep(self, config: ExperimentConfig) -> RunResult:
        result = self._report_result("sweep", critical_sweep(config, threads=self.threads))
        result.headers = ["p", "q", "eps", "form", "p_F", "admissible", "class", "t_blowup"]
        result.rows = [
            [r["p"], r["q"], r["eps"], r["form"], r["p_F"], r["admissible"], r["classification"], r["t_blowup"]]
            for r in result.payload.get("table", [])
        ]
        return result

    def check_inequalities(self, config: ExperimentConfig) -> RunResult:
        backend = build_backend(config.backend)
        ineq = config.inequalities
        report = check_inequalities(
            backend,
            trials=ineq.trials,
            seed=self.seed,
            levels=tuple(ineq.levels),
            gn_q=ineq.gn_q,
            sobolev_q=ineq.sobolev_q,
            sobolev_s=ineq.sobolev_s,
            threads=self.threads,
        )
        result = RunResult("check-inequalities", report.passed)
        result.payload = {
            "schema_version": SCHEMA_VERSION,
            "experiment": "check-inequalities",
            "config": config.to_dict(),
            "backend": backend.describe(),
            **report.to_dict(),
        }
        self._write("inequalities.json", export_json(result.payload), result)
        result.headers = ["inequality", "status", "max ratio", "levels"]
        result.rows = [
            [r.inequality, r.status, r.max_ratio, ", ".join(str(n) for n, _ in r.per_level) or r.reason]
            for r in report.results
        ]
        return result

    # -------------------------------------------------------------------------
    # Catalog
    # -------------------------------------------------------------------------

    def alphas(self, config: ExperimentConfig) -> RunResult:
        """Decay index and Fujita exponent of the documented operators in d = 1, 2, 3."""
        result = RunResult("alphas", None)
        result.headers = ["operator", "d", "alpha", "p_F (q=1)", "alpha formula", "conditions"]
        for op in DOCUMENTED_OPERATORS:
            dims = (1,) if op.name == "schrodinger-delta" else (2, 3) if op.name == "sierpinski" else (1, 2, 3)
            for d in dims:
                alpha = documented_alpha(op.name, d=d)
                result.rows.append([op.name, d, alpha, fujita_exponent(alpha), op.alpha_formula, op.conditions])
        return result

