"""Command-line entry point.

    numasim run <config.json> [--base-dir DIR] [--out FILE]
    numasim test <tests_root> [case ...]
    numasim validate-offsets <trace.yaml>
    numasim validate-output <output.yaml> <expected.yaml> [--check-order PATH]...

Exit status: 0 success/pass, 1 validation failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .engine import SimulationError, run
from .platform import ConfigError, load_run_config
from .scheduling import SchedulerError
from .trace import TraceError, emit_trace_yaml
from .validation import DEFAULT_CHECK_ORDER, compare_expected, validate_offsets
from .workflow import WorkflowError

log = logging.getLogger("numasim")

INPUT_ERRORS = (ConfigError, WorkflowError, SchedulerError, SimulationError, TraceError, OSError)


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def cmd_run(config_path, base_dir=None, out=None) -> int:
    try:
        config = load_run_config(config_path, base_dir)
        if out is not None:
            config = replace(config, out_file_name=Path(out))
        artifact = run(config)
        text = emit_trace_yaml(artifact)
        out_path = Path(config.out_file_name)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
    except INPUT_ERRORS as exc:
        return _fail(str(exc))
    print(f"makespan: {artifact.makespan:g}")
    print("dispatch order: " + " -> ".join(
        f"{r.task}@{r.core}" for r in artifact.records))
    print(f"trace: {out_path}")
    return 0


# --- test-case tree ----------------------------------------------------------

@dataclass
class TestCase:
    case: str
    name: str
    config: Path
    expected: Path
    output: Path
    log: Path

    __test__ = False  # not a pytest class


def _natural(path: Path):
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", path.name)]


def discover_cases(tests_root, case_filter=()) -> list[TestCase]:
    root = Path(tests_root)
    config_root = root / "config"
    if not config_root.is_dir():
        return []
    dirs = sorted(d for d in config_root.iterdir() if d.is_dir())
    if case_filter:
        dirs = [d for d in dirs if d.name in set(case_filter)]
    cases = []
    for d in dirs:
        for cfg in sorted(d.glob("config_*.json"), key=_natural):
            stem = cfg.stem
            cases.append(TestCase(
                case=d.name,
                name=stem,
                config=cfg,
                expected=root / "expected" / d.name / f"{stem}.yaml",
                output=root / "output" / d.name / f"{stem}.yaml",
                log=root / "log" / d.name / f"{stem}.log",
            ))
    return cases


def run_case(tc: TestCase, check_order=DEFAULT_CHECK_ORDER) -> tuple[bool, str, float | None]:
    tc.log.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(tc.log, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("[%(name)s/%(levelname)s] %(message)s"))
    handler.setLevel(logging.DEBUG)
    old_level = log.level
    log.addHandler(handler)
    log.setLevel(logging.DEBUG)
    try:
        try:
            config = replace(load_run_config(tc.config), out_file_name=tc.output)
            artifact = run(config)
            text = emit_trace_yaml(artifact)
            tc.output.parent.mkdir(parents=True, exist_ok=True)
            tc.output.write_text(text, encoding="utf-8")
        except INPUT_ERRORS as exc:
            log.error("run failed: %s", exc)
            return False, f"run failed: {exc}", None
        problems = []
        offsets = validate_offsets(text)
        for f in offsets.findings:
            log.error("validate_offsets: %s", f)
        if not offsets.passed:
            problems.append(f"offsets: {len(offsets.findings)} finding(s)")
        if not tc.expected.is_file():
            log.error("expected file missing: %s", tc.expected)
            problems.append("expected file missing")
        else:
            try:
                report = compare_expected(text, tc.expected.read_text(encoding="utf-8"), check_order)
            except TraceError as exc:
                log.error("expected file unreadable: %s", exc)
                problems.append("expected file unreadable")
            else:
                for f in report.findings:
                    log.error("validate_output: %s", f)
                if not report.passed:
                    problems.append(f"output: {len(report.findings)} finding(s)")
        if not problems:
            log.info("PASS")
        return not problems, "; ".join(problems), artifact.makespan
    finally:
        log.removeHandler(handler)
        log.setLevel(old_level)
        handler.close()


def cmd_test(tests_root, case_filter=()) -> int:
    cases = discover_cases(tests_root, case_filter)
    if not cases:
        return _fail(f"no test cases found under {tests_root}" +
                     (f" matching {', '.join(case_filter)}" if case_filter else ""))
    rows = []
    for tc in cases:
        ok, detail, makespan = run_case(tc)
        rows.append((tc.case, tc.name, "-" if makespan is None else f"{makespan:g}",
                     "PASS" if ok else "FAIL", detail))
    widths = [max(len(r[i]) for r in rows + [("case", "config", "makespan", "result", "")]) for i in range(4)]
    header = ("case", "config", "makespan", "result")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        line = "  ".join(v.ljust(w) for v, w in zip(row[:4], widths))
        print(line + (f"  {row[4]}" if row[4] else ""))
    passed = sum(r[3] == "PASS" for r in rows)
    print(f"{passed}/{len(rows)} passed")
    return 0 if passed == len(rows) else 1


# --- validators --------------------------------------------------------------

def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_validate_offsets(trace_path) -> int:
    try:
        report = validate_offsets(_read(trace_path))
    except (TraceError, ValueError, KeyError, OSError) as exc:
        return _fail(str(exc))
    if report.findings:
        print(report)
        return 1
    print("OK: offsets consistent")
    return 0


def cmd_validate_output(output_path, expected_path, check_order=None) -> int:
    try:
        report = compare_expected(_read(output_path), _read(expected_path),
                                  check_order if check_order else DEFAULT_CHECK_ORDER)
    except (TraceError, OSError) as exc:
        return _fail(str(exc))
    if report.findings:
        print(report)
        return 1
    print("OK: output matches expected")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="numasim", description="NUMA-aware workflow scheduling simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr (-vv for debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration and write its trace")
    p.add_argument("config")
    p.add_argument("--base-dir", help="directory relative config paths resolve against")
    p.add_argument("--out", help="override out_file_name")

    p = sub.add_parser("test", help="run a test-case tree (config/ system/ workflows/ expected/)")
    p.add_argument("tests_root")
    p.add_argument("cases", nargs="*", help="case directories to run, e.g. test_fifo_simulation")

    p = sub.add_parser("validate-offsets", help="check a trace's internal timing consistency")
    p.add_argument("trace")

    p = sub.add_parser("validate-output", help="check a trace against an expected pattern")
    p.add_argument("output")
    p.add_argument("expected")
    p.add_argument("--check-order", action="append", metavar="PATH",
                   help=f"dotted map path whose key order is checked (default: {DEFAULT_CHECK_ORDER[0]})")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO,
                            format="[%(name)s/%(levelname)s] %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.base_dir, args.out)
    if args.command == "test":
        return cmd_test(args.tests_root, args.cases)
    if args.command == "validate-offsets":
        return cmd_validate_offsets(args.trace)
    return cmd_validate_output(args.output, args.expected, args.check_order)


if __name__ == "__main__":
    sys.exit(main())
