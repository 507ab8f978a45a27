"""Virtual-clock execution of scheduled workflows.

Each dispatched task runs in three phases: all inputs are read concurrently,
then the task computes, then all outputs are written concurrently.  Written
data lands on the writing core's NUMA node (first touch) and is released
once its consumer has read it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import scheduling
from .platform import ConfigError, Platform, RunConfig, load_platform
from .scheduling import ScheduleDecision, Scheduler, make_scheduler
from .workflow import WorkflowGraph, parse_workflow_dot, strip_boundary

log = logging.getLogger(__name__)

Interval = tuple[float, float]


class SimulationError(RuntimeError):
    pass


class IncompleteExecutionError(SimulationError):
    pass


@dataclass
class Counters:
    tasks_active_count: int = 0
    reads_active_count: int = 0
    writes_active_count: int = 0
    threads_checksum: int = 0
    threads_active: int = 0


@dataclass
class TaskRecord:
    task: str
    core: int
    numa: int
    payload: float
    total: Interval
    compute: Interval
    reads: dict[tuple[str, str], tuple[float, float, float]] = field(default_factory=dict)
    writes: dict[tuple[str, str], tuple[float, float, float]] = field(default_factory=dict)
    read_numa: dict[tuple[str, str], int] = field(default_factory=dict)
    write_numa: dict[tuple[str, str], int] = field(default_factory=dict)
    voluntary_cs: int = 0
    involuntary_cs: int = 0
    core_migrations: int = 0


@dataclass
class SimState:
    """Mutable runtime state; doubles as the schedulers' read-only view."""

    avail: dict[int, float]
    aft: dict[str, float] = field(default_factory=dict)
    locality: dict[tuple[str, str], int] = field(default_factory=dict)
    counters: Counters = field(default_factory=Counters)
    dispatch_log: list[ScheduleDecision] = field(default_factory=list)
    records: list[TaskRecord] = field(default_factory=list)

    @classmethod
    def for_platform(cls, platform: Platform) -> "SimState":
        return cls(avail={c: 0.0 for c in platform.cores})

    @property
    def makespan(self) -> float:
        return max(self.avail.values(), default=0.0)


@dataclass
class RunArtifact:
    """Everything that goes into a trace file."""

    flops_per_cycle: float
    clock_frequency_type: str
    clock_frequency_hz: float | list[float]
    latency_ns: tuple
    bandwidth_gbps: tuple
    execs_count: int
    reads_count: int
    writes_count: int
    counters: Counters
    core_availability: dict[int, float]
    records: list[TaskRecord]

    @property
    def makespan(self) -> float:
        return max(self.core_availability.values(), default=0.0)

    @property
    def dispatch_order(self) -> list[str]:
        return [r.task for r in self.records]


def first_touch_locality(core: int, platform: Platform) -> int:
    return platform.numa_of(core)


def execute_task(decision: ScheduleDecision, state: SimState, graph: WorkflowGraph,
                 platform: Platform) -> TaskRecord:
    task, core = decision.task, decision.core
    if core not in state.avail:
        raise SimulationError(f"{task}: core {core} is not enabled")
    numa = platform.numa_of(core)
    start = scheduling.est(task, core, state, graph)

    reads, read_numa = {}, {}
    longest_read = 0.0
    for item in graph.inputs(task):
        if item.key not in state.locality:
            raise SimulationError(f"{task}: input {item.label} was never written")
        src = state.locality.pop(item.key)
        dur = platform.comm_cost(item.bytes, src, numa)
        reads[item.key] = (start, start + dur, item.bytes)
        read_numa[item.key] = src
        longest_read = max(longest_read, dur)
        state.counters.reads_active_count += 1
        log.info("Task ID: %s, Core ID: %d => read: %s, payload: %g, locality: [%d]",
                 task, core, item.label, item.bytes, src)

    flops = graph.task(task).flops
    compute_start = start + longest_read
    compute_end = compute_start + platform.compute_cost(flops, core)

    writes, write_numa = {}, {}
    end = compute_end
    target = first_touch_locality(core, platform)
    for item in graph.outputs(task):
        w_end = compute_end + platform.comm_cost(item.bytes, numa, target)
        writes[item.key] = (compute_end, w_end, item.bytes)
        write_numa[item.key] = target
        state.locality[item.key] = target
        end = max(end, w_end)
        state.counters.writes_active_count += 1
        log.info("Task ID: %s, Core ID: %d => write: %s, payload: %g, locality: [%d]",
                 task, core, item.label, item.bytes, target)

    state.avail[core] = end
    state.aft[task] = end
    state.counters.tasks_active_count += 1
    record = TaskRecord(task, core, numa, flops, (start, end), (compute_start, compute_end),
                        reads, writes, read_numa, write_numa)
    state.records.append(record)
    log.info("Task ID: %s, Core ID: %d => started: %g, finished: %g", task, core, start, end)
    return record


def simulate(graph: WorkflowGraph, platform: Platform, scheduler: Scheduler | str = "fifo",
             params=(), state: SimState | None = None) -> SimState:
    """Drive ``scheduler`` over a boundary-stripped ``graph`` until every task ran."""
    if state is None:
        state = SimState.for_platform(platform)
    if isinstance(scheduler, str):
        scheduler = make_scheduler(scheduler, graph, platform, state, params)
    while scheduler.has_next():
        decision = scheduler.next()
        if decision.task is None or decision.core is None:
            # execution is synchronous, so nothing is pending to wait for
            remaining = sorted(scheduler.unscheduled)
            raise SimulationError(f"deadlock: no dispatchable task; remaining: {', '.join(remaining)}")
        state.dispatch_log.append(decision)
        execute_task(decision, state, graph, platform)
        scheduler.task_completed(decision.task)
    return state


def finalize(state: SimState, graph: WorkflowGraph) -> Counters:
    c = state.counters
    expected = {
        "tasks_active_count": (c.tasks_active_count, len(graph.tasks)),
        "reads_active_count": (c.reads_active_count, len(graph.items)),
        "writes_active_count": (c.writes_active_count, len(graph.items)),
        "threads_active": (c.threads_active, 0),
        "threads_checksum": (c.threads_checksum, 0),
    }
    bad = [f"{k}={got} (expected {want})" for k, (got, want) in expected.items() if got != want]
    if state.locality:
        bad.append(f"unconsumed data items: {', '.join(f'{p}->{q}' for p, q in state.locality)}")
    if bad:
        raise IncompleteExecutionError("incomplete execution: " + "; ".join(bad))
    return c


def make_artifact(state: SimState, graph: WorkflowGraph, platform: Platform,
                  clock_frequency_hz=None) -> RunArtifact:
    counters = finalize(state, graph)
    if clock_frequency_hz is None:
        freqs = [platform.frequency_hz[c] for c in platform.cores]
        clock_frequency_hz = freqs[0] if platform.clock_frequency_type == "static" else freqs
    return RunArtifact(
        flops_per_cycle=platform.flops_per_cycle,
        clock_frequency_type=platform.clock_frequency_type,
        clock_frequency_hz=clock_frequency_hz,
        latency_ns=platform.distances.latency_ns,
        bandwidth_gbps=platform.distances.bandwidth_gbps,
        execs_count=len(graph.tasks),
        reads_count=len(graph.items),
        writes_count=len(graph.items),
        counters=counters,
        core_availability=dict(sorted(state.avail.items())),
        records=list(state.records),
    )


def load_workflow(path: str | Path) -> WorkflowGraph:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"workflow file not found: {path}")
    return parse_workflow_dot(path.read_text(encoding="utf-8"))


def run(config: RunConfig) -> RunArtifact:
    if config.mapper_type != "simulation":
        raise ConfigError("bare-metal mapper not supported; simulation only")
    log.info("[runtime] Initialize")
    graph = strip_boundary(load_workflow(config.dag_file))
    platform = load_platform(config)
    state = SimState.for_platform(platform)
    scheduler = make_scheduler(config.scheduler_type, graph, platform, state, config.scheduler_params)
    log.info("[runtime] Start: scheduler=%s, cores=%s", config.scheduler_type, list(platform.cores))
    simulate(graph, platform, scheduler, state=state)
    artifact = make_artifact(state, graph, platform, config.clock_frequency_hz)
    log.info("[runtime] End: makespan=%g", artifact.makespan)
    log.info("[runtime] Finalize")
    return artifact
