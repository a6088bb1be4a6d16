"""Type definitions for specwave JSON payloads using TypedDict."""

from typing import TypedDict


class BlowupPayload(TypedDict):
    """Terminal blow-up record of a nonlinear run."""

    time: float
    reason: str
    linf: float


class FitPayload(TypedDict):
    """A fitted decay law with its window and residual."""

    exponent: float
    intercept: float
    window: list[float]
    r_squared: float
    n_points: int
    regime: str


class CriterionPayload(TypedDict, total=False):
    """One pass/fail criterion or observation of an experiment."""

    name: str
    channel: str
    predicted: float | None
    fitted: float | None
    deviation: float | None
    tolerance: float | None
    passed: bool | None
    observation: bool
    fit: FitPayload | None
    note: str


class CriticalityPayload(TypedDict):
    """Criticality record for a (p, q, alpha) triple."""

    p: float
    q: float
    alpha: float
    p_F: float
    admissible: bool
    delta: int
    sigma: float
    q_range: list[float] | None
    reasons: list[str]
    note: str


class InequalityPayload(TypedDict):
    """Result of one numerical inequality check across refinement levels."""

    inequality: str
    status: str
    max_ratio: float | None
    per_level: list[dict[str, float]]
    reason: str
    parameters: dict[str, float | str]


class KernelBoundsPayload(TypedDict):
    """Scanned constants of the multiplier kernels."""

    sup_D: float
    sup_dtD: float
    sup_quarter_column: float
    diff_constants: list[dict[str, float]]
    diff_constant: float
    diff_constant_refined: float
    diff_stable: bool
    underflow_points: int
    grid: dict[str, float]


class SweepRowPayload(TypedDict, total=False):
    """One point of a critical-exponent sweep."""

    p: float
    q: float
    eps: float
    form: str
    p_F: float
    admissible: bool
    classification: str
    t_blowup: float | None
    max_linf: float | None
    energy_nonincreasing: bool | None


class ReportPayload(TypedDict, total=False):
    """Top-level JSON report written by every experiment subcommand."""

    schema_version: str
    experiment: str
    config: dict[str, object]
    backend: dict[str, object]
    criteria: list[CriterionPayload]
    passed: bool
    blowup: BlowupPayload | None
    criticality: CriticalityPayload | None
    metrics: dict[str, float | None]
    notes: list[str]
    table: list[SweepRowPayload]
