#!/usr/bin/env python3
"""Run FIFO, Min-Min and HEFT over seeded random layered workflows on a
two-node platform and report makespan statistics per scheduler."""

import argparse
import random
import statistics
import sys

from numasim import DataItemSpec, TaskSpec, WorkflowGraph, build_platform, simulate

SCHEDULERS = ("fifo", "min-min", "heft")


def random_workflow(rng, layers, width, edge_p):
    tasks, items, prev = [], [], []
    for layer in range(layers):
        cur = [f"L{layer}_{i}" for i in range(rng.randint(1, width))]
        for name in cur:
            tasks.append(TaskSpec(name, float(rng.randint(5, 50))))
            for src in prev:
                if rng.random() < edge_p:
                    items.append(DataItemSpec(src, name, float(rng.randint(1, 40))))
        prev = cur
    return WorkflowGraph(tuple(tasks), tuple(items))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--layers", type=int, default=4)
    ap.add_argument("--width", type=int, default=4)
    ap.add_argument("--edge-p", type=float, default=0.5)
    ap.add_argument("--cores-per-node", type=int, default=2)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    platform = build_platform([[100, 300], [300, 100]], [[0.005, 0.002], [0.002, 0.005]],
                              tuple(range(2 * args.cores_per_node)), flops_per_cycle=1e6,
                              frequency_hz=1, cores_per_numa=args.cores_per_node)
    spans = {s: [] for s in SCHEDULERS}
    wins = {s: 0 for s in SCHEDULERS}
    for _ in range(args.runs):
        graph = random_workflow(rng, args.layers, args.width, args.edge_p)
        result = {s: simulate(graph, platform, s).makespan for s in SCHEDULERS}
        best = min(result.values())
        for s, m in result.items():
            spans[s].append(m)
            wins[s] += m <= best * (1 + 1e-9)

    print(f"{'scheduler':>10}  {'mean':>10}  {'median':>10}  {'max':>10}  {'best-or-tied':>12}")
    for s in SCHEDULERS:
        v = spans[s]
        print(f"{s:>10}  {statistics.mean(v):>10.2f}  {statistics.median(v):>10.2f}  {max(v):>10.2f}  {wins[s]:>12}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
