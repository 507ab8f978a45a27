"""Workflow DAGs in a restricted DOT dialect.

Vertices carry a ``size`` in FLOPs, edges a ``size`` in bytes.  Every graph
must declare the boundary vertices ``root`` and ``end``; they exist only to
give the DAG a single entry and exit and are stripped before execution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

ROOT = "root"
END = "end"
BOUNDARY = (ROOT, END)


class WorkflowError(ValueError):
    """Raised for malformed or invalid workflow descriptions."""

    def __init__(self, message: str, line: int | None = None, text: str | None = None):
        self.line = line
        self.text = text
        if line is not None:
            message = f"line {line}: {message}"
            if text:
                message += f" -> {text.strip()!r}"
        super().__init__(message)


@dataclass(frozen=True)
class TaskSpec:
    name: str
    flops: float


@dataclass(frozen=True)
class DataItemSpec:
    producer: str
    consumer: str
    bytes: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.producer, self.consumer)

    @property
    def label(self) -> str:
        return f"{self.producer}->{self.consumer}"


@dataclass(frozen=True)
class WorkflowGraph:
    """Immutable task DAG.  ``tasks`` and ``items`` keep declaration order."""

    tasks: tuple[TaskSpec, ...]
    items: tuple[DataItemSpec, ...]
    _task_index: dict = field(init=False, repr=False, compare=False)
    _item_index: dict = field(init=False, repr=False, compare=False)
    _preds: dict = field(init=False, repr=False, compare=False)
    _succs: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        task_index = {}
        for t in self.tasks:
            if t.name in task_index:
                raise WorkflowError(f"duplicate vertex {t.name!r}")
            task_index[t.name] = t
        preds = {t.name: [] for t in self.tasks}
        succs = {t.name: [] for t in self.tasks}
        item_index = {}
        for item in self.items:
            if item.producer not in task_index or item.consumer not in task_index:
                raise WorkflowError(f"edge {item.label} references an unknown vertex")
            if item.producer == item.consumer:
                raise WorkflowError(f"self-loop on {item.producer!r}")
            if item.key in item_index:
                raise WorkflowError(f"duplicate edge {item.label}")
            item_index[item.key] = item
            preds[item.consumer].append(item)
            succs[item.producer].append(item)
        object.__setattr__(self, "_task_index", task_index)
        object.__setattr__(self, "_item_index", item_index)
        object.__setattr__(self, "_preds", {k: tuple(v) for k, v in preds.items()})
        object.__setattr__(self, "_succs", {k: tuple(v) for k, v in succs.items()})
        cycle = _find_cycle(self)
        if cycle:
            raise WorkflowError("cycle detected: " + " -> ".join(cycle))

    def __len__(self) -> int:
        return len(self.tasks)

    def __contains__(self, name: str) -> bool:
        return name in self._task_index

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.tasks]

    def task(self, name: str) -> TaskSpec:
        return self._task_index[name]

    def item(self, producer: str, consumer: str) -> DataItemSpec:
        return self._item_index[(producer, consumer)]

    def inputs(self, name: str) -> tuple[DataItemSpec, ...]:
        """Incoming data items of a task, in edge declaration order."""
        return self._preds[name]

    def outputs(self, name: str) -> tuple[DataItemSpec, ...]:
        """Outgoing data items of a task, in edge declaration order."""
        return self._succs[name]

    def predecessors(self, name: str) -> list[str]:
        return [i.producer for i in self._preds[name]]

    def successors(self, name: str) -> list[str]:
        return [i.consumer for i in self._succs[name]]

    def sources(self) -> list[str]:
        return [t.name for t in self.tasks if not self._preds[t.name]]

    def sinks(self) -> list[str]:
        return [t.name for t in self.tasks if not self._succs[t.name]]


def _find_cycle(g: WorkflowGraph) -> list[str] | None:
    # iterative DFS, colours: 0 white, 1 grey, 2 black
    colour = {name: 0 for name in g._task_index}
    for start in g._task_index:
        if colour[start]:
            continue
        stack = [(start, iter(g._succs[start]))]
        path = [start]
        colour[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = 2
                stack.pop()
                path.pop()
                continue
            child = nxt.consumer
            if colour[child] == 1:
                return path[path.index(child):] + [child]
            if colour[child] == 0:
                colour[child] = 1
                stack.append((child, iter(g._succs[child])))
                path.append(child)
    return None


# --- DOT dialect -------------------------------------------------------------

_ID = r'(?:[A-Za-z_][A-Za-z0-9_.]*|"[^"\n]*"|-?[0-9]+(?:\.[0-9]+)?)'
_HEADER = re.compile(r"^\s*strict\s+digraph\s*(" + _ID + r")?\s*\{\s*$")
_ATTRS = r"\[\s*(?P<attrs>[^\]]*)\]"
_NODE = re.compile(r"^(?P<name>" + _ID + r")\s*(?:" + _ATTRS + r")?$")
_EDGE = re.compile(r"^(?P<src>" + _ID + r")\s*->\s*(?P<dst>" + _ID + r")\s*(?:" + _ATTRS + r")?$")
_ATTR = re.compile(r'^\s*(?P<key>[A-Za-z_]+)\s*=\s*(?P<value>"[^"]*"|[^\s,;"]+)\s*$')


def _unquote(s: str) -> str:
    return s[1:-1] if len(s) >= 2 and s[0] == s[-1] == '"' else s


def _parse_size(attrs: str | None, what: str, line: int, text: str) -> float:
    if attrs is None or not attrs.strip():
        raise WorkflowError(f"missing size attribute on {what}", line, text)
    size = None
    for part in re.split(r"[,;]", attrs):
        if not part.strip():
            continue
        m = _ATTR.match(part)
        if not m:
            raise WorkflowError(f"malformed attribute {part.strip()!r}", line, text)
        if m["key"] != "size":
            raise WorkflowError(f"unsupported attribute {m['key']!r} on {what}", line, text)
        raw = _unquote(m["value"])
        try:
            size = float(raw)
        except ValueError:
            raise WorkflowError(f"size {raw!r} is not a number", line, text) from None
        if not size >= 0 or size == float("inf"):
            raise WorkflowError(f"size must be a finite non-negative number, got {raw}", line, text)
    if size is None:
        raise WorkflowError(f"missing size attribute on {what}", line, text)
    return size


def _statements(text: str):
    """Yield (line number, statement) pairs; ``//`` comments dropped."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        for stmt in line.split(";"):
            if stmt.strip():
                yield lineno, stmt.strip()


def parse_workflow_dot(text: str) -> WorkflowGraph:
    """Parse a ``strict digraph`` workflow including its boundary vertices."""
    stmts = list(_statements(text))
    if not stmts:
        raise WorkflowError("empty workflow description")

    # the header may share a line with the first statement: split at '{'
    first_line, first = stmts[0]
    head, brace, rest = first.partition("{")
    if not brace or not _HEADER.match(head + "{"):
        raise WorkflowError("expected 'strict digraph {'", first_line, first)
    stmts[0] = (first_line, rest.strip())
    last_line, last = stmts[-1]
    if not last.endswith("}"):
        raise WorkflowError("missing closing '}'", last_line, last)
    stmts[-1] = (last_line, last[:-1].strip())

    nodes: dict[str, TaskSpec] = {}
    edges: list[DataItemSpec] = []
    seen_edges: set[tuple[str, str]] = set()
    for lineno, stmt in stmts:
        if not stmt:
            continue
        if "{" in stmt or "}" in stmt:
            raise WorkflowError("unexpected brace", lineno, stmt)
        m = _EDGE.match(stmt)
        if m:
            src, dst = _unquote(m["src"]), _unquote(m["dst"])
            if src == dst:
                raise WorkflowError(f"self-loop on {src!r}", lineno, stmt)
            if (src, dst) in seen_edges:
                raise WorkflowError(f"duplicate edge {src}->{dst}", lineno, stmt)
            seen_edges.add((src, dst))
            size = _parse_size(m["attrs"], f"edge {src}->{dst}", lineno, stmt)
            edges.append(DataItemSpec(src, dst, size))
            continue
        m = _NODE.match(stmt)
        if m:
            name = _unquote(m["name"])
            if name in nodes:
                raise WorkflowError(f"duplicate vertex {name!r}", lineno, stmt)
            nodes[name] = TaskSpec(name, _parse_size(m["attrs"], f"vertex {name}", lineno, stmt))
            continue
        raise WorkflowError("malformed statement", lineno, stmt)

    for item in edges:
        for endpoint in (item.producer, item.consumer):
            if endpoint not in nodes:
                raise WorkflowError(f"missing size attribute on vertex {endpoint} (undeclared)")
    for name in BOUNDARY:
        if name not in nodes:
            raise WorkflowError(f"missing boundary vertex {name!r}")
    for t in nodes.values():
        if t.name not in BOUNDARY and t.flops <= 0:
            raise WorkflowError(f"vertex {t.name} must have a positive size")
    for item in edges:
        if ROOT not in item.key and END not in item.key and item.bytes <= 0:
            raise WorkflowError(f"edge {item.label} must have a positive size")
    return WorkflowGraph(tuple(nodes.values()), tuple(edges))


def _fmt_id(name: str) -> str:
    return name if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name) else f'"{name}"'


def _fmt_size(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def format_workflow_dot(g: WorkflowGraph) -> str:
    lines = ["strict digraph {"]
    lines += [f"    {_fmt_id(t.name)} [size={_fmt_size(t.flops)}];" for t in g.tasks]
    lines.append("")
    lines += [
        f"    {_fmt_id(i.producer)} -> {_fmt_id(i.consumer)} [size={_fmt_size(i.bytes)}];"
        for i in g.items
    ]
    lines.append("}")
    return "\n".join(lines) + "\n"


def strip_boundary(g: WorkflowGraph) -> WorkflowGraph:
    """Drop ``root``, ``end`` and every edge touching them."""
    tasks = tuple(t for t in g.tasks if t.name not in BOUNDARY)
    items = tuple(i for i in g.items if i.producer not in BOUNDARY and i.consumer not in BOUNDARY)
    return WorkflowGraph(tasks, items)


def level_order_ranks(g: WorkflowGraph) -> dict[str, tuple[int, int]]:
    """Map each task to ``(level, sibling index)``.

    The level is the longest-path depth from the sources (sources sit at
    level 0); siblings are numbered in vertex declaration order.
    """
    level: dict[str, int] = {}
    indeg = {name: len(g.inputs(name)) for name in g.names}
    frontier = [name for name in g.names if indeg[name] == 0]
    for name in frontier:
        level[name] = 0
    order = []
    while frontier:
        name = frontier.pop()
        order.append(name)
        for succ in g.successors(name):
            level[succ] = max(level.get(succ, 0), level[name] + 1)
            indeg[succ] -= 1
            if indeg[succ] == 0:
                frontier.append(succ)
    if len(order) != len(g):
        raise WorkflowError("cycle detected while ranking levels")
    counters: dict[int, int] = {}
    ranks = {}
    for name in g.names:
        lvl = level[name]
        ranks[name] = (lvl, counters.get(lvl, 0))
        counters[lvl] = counters.get(lvl, 0) + 1
    return ranks


def level_order(g: WorkflowGraph, names: Iterable[str] | None = None) -> list[str]:
    ranks = level_order_ranks(g)
    return sorted(g.names if names is None else names, key=ranks.__getitem__)
