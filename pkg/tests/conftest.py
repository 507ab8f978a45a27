from pathlib import Path

import pytest

from numasim.platform import build_platform
from numasim.workflow import parse_workflow_dot, strip_boundary

ROOT = Path(__file__).resolve().parents[1]
CASES = ROOT / "cases" / "tests"
FIFO = "test_fifo_simulation"

LISTING_1 = """\
strict digraph {
    v1 [size=10000000];
    v2 [size=10000000];
    v3 [size=10000000];
    v4 [size=10000000];
    v5 [size=10000000];
    v6 [size=10000000];

    root [size=10];
    end [size=10];

    root -> v1 [size=10];

    v1 -> v2 [size=60000000];
    v1 -> v3 [size=50000000];
    v1 -> v4 [size=40000000];

    v2 -> v5 [size=30000000];
    v3 -> v5 [size=20000000];

    v4 -> v6 [size=10000000];

    v5 -> end [size=10];
    v6 -> end [size=10];
}
"""

LISTING_2 = """\
{
    "dag_file": "./example/sample.dot",

    "scheduler_type": "fifo",
    "scheduler_params": [
        "fifo_prioritize_by_core_id=yes",
        "fifo_prioritize_by_exec_order=yes"
    ],

    "mapper_type": "bare-metal",
    "mapper_mem_policy_type": "first-touch",
    "mapper_mem_bind_numa_node_ids": [],

    "core_avail_mask": "0x100100",
    "flops_per_cycle": 32,
    "clock_frequency_type": "static",
    "clock_frequency_hz": 1000000000,

    "distance_matrices": {
        "latency_ns": "./example/non_uniform_lat.txt",
        "bandwidth_gbps": "./example/non_uniform_bw.txt"
    },

    "out_file_name": "./example/sample.yaml"
}
"""

LISTING_14 = (CASES / "workflows" / FIFO / "config_4.dot").read_text()
LISTING_13 = (CASES / "config" / FIFO / "config_4.json").read_text()
LISTING_19 = """\
user:
  flops_per_cycle: 1e+06
  clock_frequency_type: static
  clock_frequency_hz: 1
  distance_lat_ns:
    - [0, 0]
    - [0, 0]
  distance_bw_gbps:
    - [0.005, 0.002]
    - [0.002, 0.005]

workflow:
  execs_count: 3
  reads_count: 2
  writes_count: 2

runtime:
  threads_checksum: 0
  threads_active: 0
  tasks_active_count: 3
  reads_active_count: 2
  writes_active_count: 2
  core_availability:
    0: {avail_until: 12}
    24: {avail_until: 29}

trace:
  name_to_thread_locality:
    Task_3: {numa_id: 1, core_id: 24, voluntary_cs: 0, involuntary_cs: 0, core_migrations: 0}
    Task_2: {numa_id: 1, core_id: 24, voluntary_cs: 0, involuntary_cs: 0, core_migrations: 0}
    Task_1: {numa_id: 0, core_id: 0, voluntary_cs: 0, involuntary_cs: 0, core_migrations: 0}

  numa_mappings_write:
    Task_2->Task_3: {numa_ids: [1]}
    Task_1->Task_3: {numa_ids: [0]}

  numa_mappings_read:
    Task_2->Task_3: {numa_ids: [1]}
    Task_1->Task_3: {numa_ids: [0]}

  comm_name_read_offsets:
    Task_2->Task_3: {start: 14, end: 18, payload: 20}
    Task_1->Task_3: {start: 14, end: 19, payload: 10}

  comm_name_write_offsets:
    Task_2->Task_3: {start: 10, end: 14, payload: 20}
    Task_1->Task_3: {start: 10, end: 12, payload: 10}

  exec_name_compute_offsets:
    Task_3: {start: 19, end: 29, payload: 10}
    Task_2: {start: 0, end: 10, payload: 10}
    Task_1: {start: 0, end: 10, payload: 10}

  exec_name_total_offsets:
    Task_3: {start: 14, end: 29, payload: 10}
    Task_2: {start: 0, end: 14, payload: 10}
    Task_1: {start: 0, end: 12, payload: 10}
"""

BOUNDARY_ONLY = "strict digraph { root [size=1]; end [size=1]; root -> end [size=1]; }"


def five_task_dot(t1_t5=10, t2_t4=10):
    return (CASES / "workflows" / FIFO / "config_1.dot").read_text().replace(
        "Task_1 -> Task_5  [size=10]", f"Task_1 -> Task_5  [size={t1_t5}]"
    ).replace("Task_2 -> Task_4  [size=10]", f"Task_2 -> Task_4  [size={t2_t4}]")


@pytest.fixture
def test4_graph():
    return strip_boundary(parse_workflow_dot(LISTING_14))


@pytest.fixture
def test4_platform():
    return build_platform([[0, 0], [0, 0]], [[0.005, 0.002], [0.002, 0.005]], (0, 24),
                          flops_per_cycle=1e6, frequency_hz=1, total_cores=48)


def uniform_platform(cores, bw=0.001, fpc=1e6, hz=1):
    return build_platform([[0]], [[bw]], cores, flops_per_cycle=fpc, frequency_hz=hz)


def table2_platform(remote_bw=0.002, local_bw=0.004):
    return build_platform([[0, 0], [0, 0]], [[local_bw, remote_bw], [remote_bw, local_bw]], (0, 1),
                          flops_per_cycle=1e6, frequency_hz=1, cores_per_numa=1)


def table2_graph():
    return strip_boundary(parse_workflow_dot(
        (CASES / "workflows" / "test_heft_simulation" / "config_2.dot").read_text()))


def independent_graph():
    return strip_boundary(parse_workflow_dot(
        (CASES / "workflows" / "test_min_min_simulation" / "config_1.dot").read_text()))


# --- acceptance summary ------------------------------------------------------

_acceptance_results = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    # a setup error never reaches the call phase, so record it here
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
