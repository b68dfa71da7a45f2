"""Desk-scale evaluation harness: dataset prep, sampling, simulation, metrics, reports."""

from .dataset import DatasetRecord, prepare_dataset, read_dataset
from .sampling import SamplingPlan, build_sampling_plan, plan_from_json, plan_to_json
from .metrics import (
    CiBounds,
    Counts,
    Metrics,
    bootstrap_ci,
    compute_metrics,
    count_outcomes,
    f1_from_pr,
)
from .simulate import RunConfig, RunResult, SimulationOutcome, generate_pool_reasoning, simulate_run
from .report import emit_report, rows_from_results

__all__ = [
    "DatasetRecord",
    "prepare_dataset",
    "read_dataset",
    "SamplingPlan",
    "build_sampling_plan",
    "plan_from_json",
    "plan_to_json",
    "CiBounds",
    "Counts",
    "Metrics",
    "bootstrap_ci",
    "compute_metrics",
    "count_outcomes",
    "f1_from_pr",
    "RunConfig",
    "RunResult",
    "SimulationOutcome",
    "generate_pool_reasoning",
    "simulate_run",
    "emit_report",
    "rows_from_results",
]
