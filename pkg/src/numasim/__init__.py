"""Deterministic simulation of NUMA-aware scientific workflow scheduling."""

from .engine import RunArtifact, SimState, TaskRecord, execute_task, finalize, make_artifact, run, simulate
from .platform import (
    CoreTopology,
    DistanceMatrix,
    Platform,
    RunConfig,
    build_platform,
    comm_cost,
    compute_cost,
    load_run_config,
    mean_comm_cost,
    parse_core_mask,
    parse_distance_matrix,
    parse_run_config,
)
from .scheduling import ScheduleDecision, eft, est, heft_ranks, make_scheduler
from .trace import emit_trace_yaml, load_trace
from .validation import compare_expected, validate_offsets
from .workflow import DataItemSpec, TaskSpec, WorkflowGraph, level_order_ranks, parse_workflow_dot, strip_boundary

__version__ = "0.1.0"
