"""NUMA-aware dynamic schedulers.

A scheduler is polled through ``has_next()`` / ``next()``.  ``next()`` returns
a :class:`ScheduleDecision`; a missing task means nothing is ready, a missing
core means no core can take work.  The engine reports completions back via
``task_completed`` and schedulers read runtime state (core availability,
actual finish times, data locality) from a shared view.

In simulation every enabled core is a dispatch candidate; a core's backlog
enters the start-time estimate through its availability.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .platform import Platform
from .workflow import WorkflowGraph, level_order_ranks

log = logging.getLogger(__name__)

PARAM_DEFAULTS = {
    "fifo_prioritize_by_core_id": True,
    "fifo_prioritize_by_exec_order": True,
}

# relative slack under which two time estimates count as a tie
TIE_RTOL = 1e-9


class SchedulerError(ValueError):
    pass


class SchedulerView(Protocol):
    avail: dict[int, float]
    aft: dict[str, float]
    locality: dict[tuple[str, str], int]


@dataclass(frozen=True)
class ScheduleDecision:
    task: str | None = None
    core: int | None = None
    estimated_finish_time: float | None = None


def _worse(a: float, b: float) -> bool:
    """True when ``a`` is strictly greater than ``b`` beyond tie slack."""
    return a - b > TIE_RTOL * max(1.0, abs(a), abs(b))


def parse_scheduler_params(params: Iterable[str]) -> dict[str, bool]:
    out = dict(PARAM_DEFAULTS)
    for p in params:
        key, sep, value = p.partition("=")
        key, value = key.strip(), value.strip().lower()
        if not sep or key not in PARAM_DEFAULTS:
            raise SchedulerError(f"unknown scheduler parameter {p!r}")
        if value not in ("yes", "no"):
            raise SchedulerError(f"scheduler parameter {key} expects yes|no, got {value!r}")
        out[key] = value == "yes"
    return out


# --- EST / EFT ---------------------------------------------------------------

def est(task: str, core: int, view: SchedulerView, graph: WorkflowGraph) -> float:
    """Earliest start: the core's availability or the latest predecessor finish."""
    start = max(view.avail.get(core, 0.0), 0.0)
    for pred in graph.predecessors(task):
        if pred not in view.aft:
            raise SchedulerError(f"{task}: predecessor {pred} has not completed")
        start = max(start, view.aft[pred])
    return start


def read_time(task: str, core: int, view: SchedulerView, graph: WorkflowGraph, platform: Platform) -> float:
    numa = platform.numa_of(core)
    longest = 0.0
    for item in graph.inputs(task):
        if item.key not in view.locality:
            raise SchedulerError(f"{task}: input {item.label} has no known locality")
        longest = max(longest, platform.comm_cost(item.bytes, view.locality[item.key], numa))
    return longest


def write_time(task: str, core: int, graph: WorkflowGraph, platform: Platform) -> float:
    # first-touch: outputs land on the writing core's node
    numa = platform.numa_of(core)
    return max((platform.comm_cost(i.bytes, numa, numa) for i in graph.outputs(task)), default=0.0)


def eft(task: str, core: int, view: SchedulerView, graph: WorkflowGraph, platform: Platform) -> float:
    return (
        est(task, core, view, graph)
        + read_time(task, core, view, graph, platform)
        + platform.compute_cost(graph.task(task).flops, core)
        + write_time(task, core, graph, platform)
    )


def heft_ranks(graph: WorkflowGraph, platform: Platform) -> dict[str, float]:
    """Upward ranks from mean compute cost and mean communication cost."""
    cores = platform.cores
    ranks: dict[str, float] = {}
    order = sorted(graph.names, key=level_order_ranks(graph).__getitem__, reverse=True)
    for name in order:
        w = sum(platform.compute_cost(graph.task(name).flops, c) for c in cores) / len(cores)
        tail = max(
            (platform.mean_comm_cost(i.bytes) + ranks[i.consumer] for i in graph.outputs(name)),
            default=0.0,
        )
        ranks[name] = w + tail
    return ranks


# --- schedulers --------------------------------------------------------------

class Scheduler:
    """Shared bookkeeping: ready set, unscheduled set, level-order ranks."""

    name = "base"

    def __init__(self, graph: WorkflowGraph, platform: Platform, view: SchedulerView, params: Iterable[str] = ()):
        self.graph = graph
        self.platform = platform
        self.view = view
        self.params = parse_scheduler_params(params)
        self.level = level_order_ranks(graph)
        self.unscheduled = set(graph.names)
        self.ready: list[str] = sorted(graph.sources(), key=self.level.__getitem__)
        self._released = set(self.ready)

    def has_next(self) -> bool:
        return bool(self.unscheduled)

    def next(self) -> ScheduleDecision:
        raise NotImplementedError

    def _released_by(self, task: str) -> list[str]:
        out = []
        for succ in self.graph.successors(task):
            if succ in self._released:
                continue
            if all(p in self.view.aft for p in self.graph.predecessors(succ)):
                self._released.add(succ)
                out.append(succ)
        return out

    def task_completed(self, task: str) -> None:
        self.ready.extend(sorted(self._released_by(task), key=self.level.__getitem__))

    def _dispatch(self, task: str, core: int, finish: float) -> ScheduleDecision:
        self.ready.remove(task)
        self.unscheduled.discard(task)
        log.debug("selected_task: %s, selected_core_id: %d, estimated_finish_time: %f", task, core, finish)
        return ScheduleDecision(task, core, finish)

    def eft(self, task: str, core: int) -> float:
        return eft(task, core, self.view, self.graph, self.platform)


class MinMinScheduler(Scheduler):
    """Pick the (ready task, core) pair with the smallest EFT."""

    name = "min-min"

    def next(self) -> ScheduleDecision:
        if not self.ready:
            return ScheduleDecision()
        best = None
        for task in sorted(self.ready, key=self.level.__getitem__):
            for core in self.platform.cores:
                finish = self.eft(task, core)
                if best is None or _worse(best[2], finish):
                    best = (task, core, finish)
        return self._dispatch(*best)


class HeftScheduler(Scheduler):
    """Highest upward rank first, placed on the core with the smallest EFT."""

    name = "heft"

    def __init__(self, graph, platform, view, params=()):
        super().__init__(graph, platform, view, params)
        self.ranks = heft_ranks(graph, platform)

    def select_task(self) -> str:
        best = None
        for task in sorted(self.ready, key=lambda t: (self.level[t], t)):
            if best is None or _worse(self.ranks[task], self.ranks[best]):
                best = task
        return best

    def next(self) -> ScheduleDecision:
        if not self.ready:
            return ScheduleDecision()
        task = self.select_task()
        best = None
        for core in self.platform.cores:
            finish = self.eft(task, core)
            if best is None or _worse(best[1], finish):
                best = (core, finish)
        return self._dispatch(task, *best)


class FifoScheduler(Scheduler):
    """Locality-scored FIFO queue.

    Released successors are ordered by level, scored by the bytes of input
    data resident on their best NUMA node, and appended in descending score
    order.  The head task runs on the node holding most of its input, on the
    earliest available core of that node.
    """

    name = "fifo"

    def __init__(self, graph, platform, view, params=()):
        super().__init__(graph, platform, view, params)
        self.by_core_id = self.params["fifo_prioritize_by_core_id"]
        self.by_exec_order = self.params["fifo_prioritize_by_exec_order"]
        numas = sorted({platform.numa_of(c) for c in platform.cores})
        self.numas = numas
        self._node_turn = 0
        self._core_turn = {m: 0 for m in numas}
        initial = self.ready if self.by_exec_order else [t for t in graph.names if t in self._released]
        self.queue: deque[str] = deque(self._prioritize(initial))
        self.ready = list(self.queue)

    def resident_bytes(self, task: str) -> dict[int, float]:
        share = {m: 0.0 for m in self.numas}
        for item in self.graph.inputs(task):
            numa = self.view.locality.get(item.key)
            if numa in share:
                share[numa] += item.bytes
        return share

    def score(self, task: str) -> float:
        return max(self.resident_bytes(task).values(), default=0.0)

    def _prioritize(self, batch: Sequence[str]) -> list[str]:
        scored = [(t, self.score(t)) for t in batch]
        for t, s in scored:
            log.debug("priority_queued_task: %s, score: %f", t, s)
        # sort is stable, so equal scores keep level (or release) order
        return [t for t, _ in sorted(scored, key=lambda ts: -ts[1])]

    def task_completed(self, task: str) -> None:
        batch = self._released_by(task)
        if self.by_exec_order:
            batch.sort(key=self.level.__getitem__)
        batch = self._prioritize(batch)
        self.queue.extend(batch)
        self.ready.extend(batch)

    def select_numa(self, task: str) -> int:
        share = self.resident_bytes(task)
        top = max(share.values())
        tied = [m for m in self.numas if share[m] == top]
        if len(tied) == 1:
            return tied[0]
        # rotate node priority across ties
        n = self.platform.n_numa
        for step in range(n):
            m = (self._node_turn + step) % n
            if m in tied:
                self._node_turn = (m + 1) % n
                return m
        raise AssertionError("unreachable: tied nodes not found")

    def select_core(self, numa: int) -> int:
        cores = self.platform.topology.cores_on(numa)
        soonest = min(self.view.avail.get(c, 0.0) for c in cores)
        free = [c for c in cores if self.view.avail.get(c, 0.0) == soonest]
        for c in cores:
            log.debug("avail_core_id: %d, avail_core_until: %f", c, self.view.avail.get(c, 0.0))
        if self.by_core_id or len(free) == 1:
            return free[0]
        turn = self._core_turn[numa]
        pick = next((c for c in free if c >= turn), free[0])
        self._core_turn[numa] = pick + 1
        return pick

    def next(self) -> ScheduleDecision:
        if not self.queue:
            return ScheduleDecision()
        task = self.queue.popleft()
        numa = self.select_numa(task)
        core = self.select_core(numa)
        log.debug("best_core_id: %d, best_numa_id: %d", core, numa)
        return self._dispatch(task, core, self.eft(task, core))


class ReplayScheduler(Scheduler):
    """Replays a fixed sequence of (task, core) decisions."""

    name = "replay"

    def __init__(self, graph, platform, view, sequence: Sequence[tuple[str, int]]):
        super().__init__(graph, platform, view)
        self.sequence = deque(sequence)
        if sorted(t for t, _ in sequence) != sorted(graph.names):
            raise SchedulerError("replay sequence must name every task exactly once")

    def next(self) -> ScheduleDecision:
        task, core = self.sequence[0]
        if task not in self.ready:
            return ScheduleDecision()
        self.sequence.popleft()
        return self._dispatch(task, core, self.eft(task, core))


SCHEDULERS = {
    "fifo": FifoScheduler,
    "heft": HeftScheduler,
    "min-min": MinMinScheduler,
}


def make_scheduler(kind: str, graph: WorkflowGraph, platform: Platform, view: SchedulerView,
                   params: Iterable[str] = ()) -> Scheduler:
    try:
        cls = SCHEDULERS[kind]
    except KeyError:
        raise SchedulerError(f"unknown scheduler {kind!r}") from None
    return cls(graph, platform, view, params)
