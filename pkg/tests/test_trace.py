import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CASES, FIFO, LISTING_19, uniform_platform
from strategies import dags, numa_platforms
from numasim.engine import make_artifact, run, simulate
from numasim.platform import load_run_config
from numasim.trace import TraceError, emit_trace_yaml, format_key, format_number, load_trace
from numasim.workflow import TaskSpec, WorkflowGraph


def golden_yaml():
    return emit_trace_yaml(run(load_run_config(CASES / "config" / FIFO / "config_4.json")))


def artifact_for(g, p, kind="fifo"):
    return make_artifact(simulate(g, p, kind), g, p)


def test_golden_trace_exact():
    assert golden_yaml() == LISTING_19


def test_total_offsets_in_reverse_dispatch_order():
    lines = golden_yaml().splitlines()
    i = lines.index("  exec_name_total_offsets:")
    assert lines[i + 1:i + 4] == [
        "    Task_3: {start: 14, end: 29, payload: 10}",
        "    Task_2: {start: 0, end: 14, payload: 10}",
        "    Task_1: {start: 0, end: 12, payload: 10}",
    ]


def test_core_availability_lines():
    text = golden_yaml()
    assert "    0: {avail_until: 12}\n    24: {avail_until: 29}\n" in text


def test_empty_workflow():
    g = WorkflowGraph((), ())
    text = emit_trace_yaml(artifact_for(g, uniform_platform((0,))))
    data = load_trace(text)
    assert data["workflow"] == {"execs_count": 0, "reads_count": 0, "writes_count": 0}
    assert data["runtime"]["core_availability"] == {0: {"avail_until": 0}}
    assert all(v == {} for v in data["trace"].values())
    assert "  exec_name_total_offsets: {}" in text


def test_incomplete_artifact_refused(test4_graph, test4_platform):
    artifact = artifact_for(test4_graph, test4_platform)
    artifact.records = artifact.records[:2]
    with pytest.raises(TraceError, match="incomplete"):
        emit_trace_yaml(artifact)


@pytest.mark.parametrize("x, text", [
    (0, "0"), (12, "12"), (29.0, "29"), (1e6, "1e+06"), (1e7, "1e+07"), (7e7, "7e+07"),
    (2.5e7, "2.5e+07"), (0.005, "0.005"), (2.857142857142857, "2.857142857142857"),
    (123456, "123456"), (-3, "-3"), (1e-7, "1e-07"), (12.5, "12.5"),
])
def test_format_number(x, text):
    assert format_number(x) == text


@pytest.mark.parametrize("x", [math.inf, math.nan])
def test_format_number_rejects_non_finite(x):
    with pytest.raises(TraceError):
        format_number(x)


FINITE = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(FINITE)
def test_format_number_parses_back(x):
    assert load_trace(f"v: {format_number(x)}")["v"] == x


@given(FINITE, FINITE)
def test_format_number_injective(a, b):
    if a != b:
        assert format_number(a) != format_number(b)


@pytest.mark.parametrize("key, text", [
    ("Task_1", "Task_1"), ("Task_1->Task_3", "Task_1->Task_3"), ("yes", '"yes"'),
    ("a b", '"a b"'), ("1x", '"1x"'), ('q"t', '"q\\"t"'),
])
def test_format_key(key, text):
    assert format_key(key) == text


def test_awkward_names_round_trip():
    g = WorkflowGraph((TaskSpec("yes", 1.0), TaskSpec("a b", 2.0)), ())
    data = load_trace(emit_trace_yaml(artifact_for(g, uniform_platform((0,)))))
    assert set(data["trace"]["exec_name_total_offsets"]) == {"yes", "a b"}


def test_per_core_frequency_list_emitted():
    from numasim.platform import build_platform
    g = WorkflowGraph((TaskSpec("a", 80.0),), ())
    p = build_platform([[0]], [[1]], (0, 1, 2, 3), flops_per_cycle=1, frequency_hz=[1, 2, 4, 8],
                       clock_frequency_type="per-core")
    text = emit_trace_yaml(artifact_for(g, p, "min-min"))
    assert "  clock_frequency_hz: [1, 2, 4, 8]\n" in text
    assert "a: {start: 0, end: 1e+07, payload: 80}" in text


@settings(max_examples=60, deadline=None)
@given(dags(max_tasks=7), numa_platforms(cores_per_node=2, hetero_freq=True),
       st.sampled_from(["fifo", "heft", "min-min"]))
def test_trace_round_trips_records(g, p, kind):
    state = simulate(g, p, kind)
    artifact = make_artifact(state, g, p)
    data = load_trace(emit_trace_yaml(artifact))
    t = data["trace"]
    assert list(t["exec_name_total_offsets"]) == [r.task for r in reversed(state.records)]
    for r in state.records:
        assert t["exec_name_total_offsets"][r.task] == {"start": r.total[0], "end": r.total[1],
                                                       "payload": r.payload}
        assert t["name_to_thread_locality"][r.task]["core_id"] == r.core
        for key, (s, e, b) in r.reads.items():
            label = f"{key[0]}->{key[1]}"
            assert t["comm_name_read_offsets"][label] == {"start": s, "end": e, "payload": b}
            assert t["numa_mappings_read"][label] == {"numa_ids": [r.read_numa[key]]}
    assert list(t["numa_mappings_read"]) == list(t["comm_name_read_offsets"])
    assert list(t["numa_mappings_write"]) == list(t["comm_name_write_offsets"])
    assert data["runtime"]["core_availability"] == {c: {"avail_until": v} for c, v in state.avail.items()}


@settings(max_examples=30, deadline=None)
@given(dags(max_tasks=6), numa_platforms())
def test_emission_is_deterministic(g, p):
    assert emit_trace_yaml(artifact_for(g, p)) == emit_trace_yaml(artifact_for(g, p))
