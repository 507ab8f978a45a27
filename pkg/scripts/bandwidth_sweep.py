#!/usr/bin/env python3
"""Sweep the remote NUMA bandwidth on the two-producer/one-reducer workflow
and print the makespan each scheduler reaches.

    python3 scripts/bandwidth_sweep.py --steps 8 --csv sweep.csv
"""

import argparse
import csv
import sys
from pathlib import Path

from numasim import build_platform, parse_workflow_dot, simulate, strip_boundary

ROOT = Path(__file__).resolve().parents[1]
DOT = ROOT / "cases" / "tests" / "workflows" / "test_heft_simulation" / "config_2.dot"


def sweep(local_bw, steps, schedulers):
    graph = strip_boundary(parse_workflow_dot(DOT.read_text()))
    rows = []
    for k in range(1, steps + 1):
        remote = local_bw * k / steps
        platform = build_platform([[0, 0], [0, 0]], [[local_bw, remote], [remote, local_bw]], (0, 1),
                                  flops_per_cycle=1e6, frequency_hz=1, cores_per_numa=1)
        row = {"remote_bw_gbps": remote}
        for name in schedulers:
            row[name] = simulate(graph, platform, name).makespan
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--local-bw", type=float, default=0.004, help="local bandwidth in GB/s")
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--schedulers", nargs="+", default=["fifo", "min-min", "heft"])
    ap.add_argument("--csv", type=Path, help="also write the table here")
    args = ap.parse_args(argv)

    rows = sweep(args.local_bw, args.steps, args.schedulers)
    cols = ["remote_bw_gbps"] + args.schedulers
    print("  ".join(f"{c:>14}" for c in cols))
    for row in rows:
        print("  ".join(f"{row[c]:>14g}" for c in cols))
    if args.csv:
        with args.csv.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            writer.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
