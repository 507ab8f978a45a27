"""YAML execution traces.

Traces are written with a hand-rolled emitter so the layout matches the
established format line for line: inline flow mappings per entry, per-task
and per-item maps in reverse dispatch order (first dispatched last).
"""

from __future__ import annotations

import math
import re

import yaml

from .engine import RunArtifact

TRACE_MAPS = (
    "name_to_thread_locality",
    "numa_mappings_write",
    "numa_mappings_read",
    "comm_name_read_offsets",
    "comm_name_write_offsets",
    "exec_name_compute_offsets",
    "exec_name_total_offsets",
)


class TraceError(ValueError):
    pass


def format_number(x) -> str:
    """Shortest exact decimal; integers lose their fraction, and integers of
    magnitude >= 1e6 use C-style scientific notation (``1e+07``)."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    x = float(x)
    if not math.isfinite(x):
        raise TraceError(f"non-finite value {x}")
    if x.is_integer():
        if abs(x) < 1e6:
            return str(int(x))
        for digits in range(17):
            text = f"{x:.{digits}e}"
            if float(text) == x:
                return text
    text = repr(x)
    if "e" in text:
        # keep exponents C-style: two digits minimum, explicit sign
        mant, exp = text.split("e")
        sign = "-" if exp.startswith("-") else "+"
        text = f"{mant}e{sign}{int(exp.lstrip('+-')):02d}"
    return text


_PLAIN_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*(->[A-Za-z_][A-Za-z0-9_.\-]*)?")
_YAML_WORDS = {"y", "n", "yes", "no", "on", "off", "true", "false", "null", "~"}


def format_key(key) -> str:
    key = str(key)
    if _PLAIN_KEY.fullmatch(key) and key.lower() not in _YAML_WORDS:
        return key
    return '"' + key.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _flow(pairs) -> str:
    return "{" + ", ".join(f"{k}: {v}" for k, v in pairs) + "}"


def _section(lines, name, entries):
    if entries:
        lines.append(f"  {name}:")
        lines += [f"    {format_key(k)}: {v}" for k, v in entries]
    else:
        lines.append(f"  {name}: {{}}")


def _edge(key) -> str:
    return f"{key[0]}->{key[1]}"


def emit_trace_yaml(artifact: RunArtifact) -> str:
    a = artifact
    if len(a.records) != a.execs_count:
        raise TraceError(f"incomplete artifact: {len(a.records)} of {a.execs_count} tasks recorded")
    hz = a.clock_frequency_hz
    hz_text = "[" + ", ".join(map(format_number, hz)) + "]" if isinstance(hz, (list, tuple)) else format_number(hz)

    lines = ["user:"]
    lines.append(f"  flops_per_cycle: {format_number(a.flops_per_cycle)}")
    lines.append(f"  clock_frequency_type: {a.clock_frequency_type}")
    lines.append(f"  clock_frequency_hz: {hz_text}")
    for name, matrix in (("distance_lat_ns", a.latency_ns), ("distance_bw_gbps", a.bandwidth_gbps)):
        lines.append(f"  {name}:")
        lines += ["    - [" + ", ".join(map(format_number, row)) + "]" for row in matrix]

    c = a.counters
    lines += ["", "workflow:"]
    lines.append(f"  execs_count: {a.execs_count}")
    lines.append(f"  reads_count: {a.reads_count}")
    lines.append(f"  writes_count: {a.writes_count}")

    lines += ["", "runtime:"]
    lines.append(f"  threads_checksum: {c.threads_checksum}")
    lines.append(f"  threads_active: {c.threads_active}")
    lines.append(f"  tasks_active_count: {c.tasks_active_count}")
    lines.append(f"  reads_active_count: {c.reads_active_count}")
    lines.append(f"  writes_active_count: {c.writes_active_count}")
    lines.append("  core_availability:")
    for core in sorted(a.core_availability):
        lines.append(f"    {core}: {{avail_until: {format_number(a.core_availability[core])}}}")

    recs = a.records[::-1]
    writes = [(k, v, r.write_numa[k]) for r in a.records for k, v in r.writes.items()][::-1]
    reads = [(k, v, r.read_numa[k]) for r in a.records for k, v in r.reads.items()][::-1]

    def offsets(start, end, payload):
        return _flow([("start", format_number(start)), ("end", format_number(end)),
                      ("payload", format_number(payload))])

    lines += ["", "trace:"]
    _section(lines, "name_to_thread_locality", [
        (r.task, _flow([("numa_id", r.numa), ("core_id", r.core), ("voluntary_cs", r.voluntary_cs),
                        ("involuntary_cs", r.involuntary_cs), ("core_migrations", r.core_migrations)]))
        for r in recs
    ])
    lines.append("")
    _section(lines, "numa_mappings_write", [(_edge(k), f"{{numa_ids: [{m}]}}") for k, _, m in writes])
    lines.append("")
    _section(lines, "numa_mappings_read", [(_edge(k), f"{{numa_ids: [{m}]}}") for k, _, m in reads])
    lines.append("")
    _section(lines, "comm_name_read_offsets", [(_edge(k), offsets(*v)) for k, v, _ in reads])
    lines.append("")
    _section(lines, "comm_name_write_offsets", [(_edge(k), offsets(*v)) for k, v, _ in writes])
    lines.append("")
    _section(lines, "exec_name_compute_offsets", [(r.task, offsets(*r.compute, r.payload)) for r in recs])
    lines.append("")
    _section(lines, "exec_name_total_offsets", [(r.task, offsets(*r.total, r.payload)) for r in recs])
    return "\n".join(lines) + "\n"


# --- loading -----------------------------------------------------------------

class TraceLoader(yaml.SafeLoader):
    """SafeLoader that also reads exponent-only floats such as ``1e+07``."""


TraceLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


def load_trace(text: str):
    try:
        data = yaml.load(text, Loader=TraceLoader)
    except yaml.YAMLError as exc:
        raise TraceError(f"unparsable trace: {exc}") from None
    return {} if data is None else data
