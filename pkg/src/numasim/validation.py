"""Trace validators.

``validate_offsets`` checks a trace against itself: every task's total
interval must equal its longest read, plus compute, plus its longest write,
and no task may start before its producers finished.  ``compare_expected``
checks a trace against an expected pattern that lists only the fields it
cares about.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .trace import format_number, load_trace

TOLERANCE = 1e-6
DEFAULT_CHECK_ORDER = ("trace.exec_name_total_offsets",)

KINDS = (
    "value-mismatch",
    "missing-key",
    "list-length",
    "order-violation",
    "offset-violation",
    "dependency-violation",
)


@dataclass(frozen=True)
class Finding:
    path: str
    expected: Any
    actual: Any
    kind: str

    def __str__(self):
        return f"{self.kind.upper()} {self.path} expected={_show(self.expected)} actual={_show(self.actual)}"


def _show(value) -> str:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        try:
            return format_number(value)
        except ValueError:
            return str(value)
    return str(value)


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.findings

    def add(self, path, expected, actual, kind):
        self.findings.append(Finding(path, expected, actual, kind))

    def paths(self) -> set[str]:
        return {f.path for f in self.findings}

    def __str__(self):
        return "\n".join(map(str, self.findings)) if self.findings else "OK"


def _as_trace(trace):
    return load_trace(trace) if isinstance(trace, str) else trace


def _interval(entry, path):
    if not isinstance(entry, dict) or "start" not in entry or "end" not in entry:
        raise ValueError(f"{path}: expected a mapping with start and end")
    return float(entry["start"]), float(entry["end"])


def _split_edge(key) -> tuple[str, str]:
    producer, sep, consumer = str(key).partition("->")
    if not sep:
        raise ValueError(f"data item key {key!r} is not of the form producer->consumer")
    return producer, consumer


def task_duration(task: str, trace: dict) -> float:
    """Longest read + compute + longest write, from the trace's own entries."""
    t = trace["trace"]
    reads = [_interval(v, k) for k, v in (t.get("comm_name_read_offsets") or {}).items()
             if _split_edge(k)[1] == task]
    writes = [_interval(v, k) for k, v in (t.get("comm_name_write_offsets") or {}).items()
              if _split_edge(k)[0] == task]
    compute = (t.get("exec_name_compute_offsets") or {}).get(task)
    c_start, c_end = _interval(compute, f"exec_name_compute_offsets.{task}")
    return (
        max((e - s for s, e in reads), default=0.0)
        + (c_end - c_start)
        + max((e - s for s, e in writes), default=0.0)
    )


def validate_offsets(trace, tol: float = TOLERANCE) -> ValidationReport:
    trace = _as_trace(trace)
    report = ValidationReport()
    if not isinstance(trace, dict) or not isinstance(trace.get("trace"), dict):
        raise ValueError("not a trace: missing 'trace' section")
    t = trace["trace"]
    totals = {str(k): v for k, v in (t.get("exec_name_total_offsets") or {}).items()}
    compute = {str(k): v for k, v in (t.get("exec_name_compute_offsets") or {}).items()}
    t = dict(t, exec_name_compute_offsets=compute)
    trace = dict(trace, trace=t)

    for task, entry in totals.items():
        path = f"trace.exec_name_total_offsets.{task}"
        start, end = _interval(entry, path)
        if task not in compute:
            report.add(f"trace.exec_name_compute_offsets.{task}", "present", None, "missing-key")
            continue
        dur = task_duration(task, trace)
        if abs(start + dur - end) > tol:
            report.add(f"{path}.end", start + dur, end, "offset-violation")

    writes = t.get("comm_name_write_offsets") or {}
    for key, entry in (t.get("comm_name_read_offsets") or {}).items():
        producer, consumer = _split_edge(key)
        if producer in totals and consumer in totals:
            p_end = _interval(totals[producer], producer)[1]
            c_start = _interval(totals[consumer], consumer)[0]
            if c_start < p_end - tol:
                report.add(f"trace.exec_name_total_offsets.{consumer}.start",
                           f">= {p_end:g}", c_start, "dependency-violation")
        if key in writes:
            w_end = _interval(writes[key], key)[1]
            r_start = _interval(entry, key)[0]
            if r_start < w_end - tol:
                report.add(f"trace.comm_name_read_offsets.{key}.start",
                           f">= {w_end:g}", r_start, "dependency-violation")
    return report


def _equal(expected, actual, tol) -> bool:
    if isinstance(expected, bool) or isinstance(actual, bool):
        return expected == actual
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return abs(float(expected) - float(actual)) <= tol
    return expected == actual


def _find_key(mapping: dict, key):
    if key in mapping:
        return True, key
    # tolerate int/str key drift (``0`` vs ``"0"``)
    for k in mapping:
        if str(k) == str(key):
            return True, k
    return False, None


def _compare(expected, actual, path, report, tol):
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            report.add(path, "mapping", actual, "value-mismatch")
            return
        for key, value in expected.items():
            sub = f"{path}.{key}" if path else str(key)
            found, k = _find_key(actual, key)
            if not found:
                report.add(sub, "present", None, "missing-key")
            elif value is not None:
                _compare(value, actual[k], sub, report, tol)
    elif isinstance(expected, list):
        if not isinstance(actual, list):
            report.add(path, "list", actual, "value-mismatch")
            return
        if len(expected) != len(actual):
            report.add(path, len(expected), len(actual), "list-length")
            return
        for i, (e, a) in enumerate(zip(expected, actual)):
            _compare(e, a, f"{path}.{i}", report, tol)
    elif not _equal(expected, actual, tol):
        report.add(path, expected, actual, "value-mismatch")


def _lookup(data, path: str):
    node = data
    for part in path.split("."):
        if not isinstance(node, dict):
            return None
        found, k = _find_key(node, part)
        if not found:
            return None
        node = node[k]
    return node


def compare_expected(output, expected, check_order: Iterable[str] = DEFAULT_CHECK_ORDER,
                     tol: float = TOLERANCE) -> ValidationReport:
    """Check that ``output`` contains everything in the ``expected`` pattern.

    Keys only present in the output are ignored.  An expected key without a
    value only asserts presence.  For every path in ``check_order`` the
    expected keys must appear in the output in the same relative order.
    """
    output, expected = _as_trace(output), _as_trace(expected)
    report = ValidationReport()
    _compare(expected, output, "", report, tol)
    for path in check_order:
        want = _lookup(expected, path)
        got = _lookup(output, path)
        if not isinstance(want, dict) or not isinstance(got, dict):
            continue
        got_keys = [str(k) for k in got]
        positions = [got_keys.index(str(k)) for k in want if str(k) in got_keys]
        if positions != sorted(positions):
            present = [str(k) for k in want if str(k) in got_keys]
            actual = sorted(present, key=got_keys.index)
            report.add(path, " ".join(present), " ".join(actual), "order-violation")
    return report
