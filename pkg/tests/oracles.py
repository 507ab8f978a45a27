"""Brute-force reference computations, written from the formulas directly and
sharing no code with the scheduling or engine paths they check."""

import itertools


def link_time(nbytes, lat_ns, bw_gbps):
    # ns -> us, GB/s -> bytes/us
    return lat_ns * 1e-3 + nbytes / (bw_gbps * 1e3)


def eft_oracle(task, core, graph, lat, bw, numa_of, fpc, hz, avail, aft, locality):
    start = max([avail[core]] + [aft[i.producer] for i in graph.inputs(task)])
    here = numa_of(core)
    reads = [link_time(i.bytes, lat[locality[i.key]][here], bw[locality[i.key]][here])
             for i in graph.inputs(task)]
    writes = [link_time(i.bytes, lat[here][here], bw[here][here]) for i in graph.outputs(task)]
    compute = graph.task(task).flops / (fpc * hz[core]) * 1e6
    return start + max(reads, default=0) + compute + max(writes, default=0)


def argmin_pairs(candidates, rtol=1e-9):
    """candidates: iterable of (eft, tiebreak_key, pair). Minimal eft, then
    smallest tiebreak among those within tolerance of the minimum."""
    candidates = list(candidates)
    best = min(c[0] for c in candidates)
    near = [c for c in candidates if c[0] - best <= rtol * max(1.0, abs(best))]
    return min(near, key=lambda c: c[1])[2]


def all_paths(graph, start):
    succ = graph.outputs(start)
    if not succ:
        yield [start], []
        return
    for item in succ:
        for nodes, edges in all_paths(graph, item.consumer):
            yield [start] + nodes, [item] + edges


def upward_rank_oracle(graph, mean_compute, mean_comm):
    """Longest path by explicit enumeration of every path to a sink."""
    ranks = {}
    for t in graph.names:
        ranks[t] = max(
            sum(mean_compute(n) for n in nodes) + sum(mean_comm(e.bytes) for e in edges)
            for nodes, edges in all_paths(graph, t)
        )
    return ranks


def recompute_total(task, trace):
    """Longest read + compute + longest write, straight from the trace entries."""
    t = trace["trace"]
    reads = [v["end"] - v["start"] for k, v in t["comm_name_read_offsets"].items()
             if k.split("->")[1] == task]
    writes = [v["end"] - v["start"] for k, v in t["comm_name_write_offsets"].items()
              if k.split("->")[0] == task]
    c = t["exec_name_compute_offsets"][task]
    return max(reads, default=0) + (c["end"] - c["start"]) + max(writes, default=0)


def topological_orders(graph):
    for perm in itertools.permutations(graph.names):
        pos = {t: i for i, t in enumerate(perm)}
        if all(pos[i.producer] < pos[i.consumer] for i in graph.items):
            yield perm
