"""Run configuration, NUMA distance matrices and the cost model.

All times are real-valued microseconds.  Latencies are given in ns and
bandwidths in GB/s (1 GB = 1e9 bytes), so one byte over 1 GB/s costs 1e-3 us.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

log = logging.getLogger(__name__)

SCHEDULER_TYPES = ("fifo", "heft", "min-min")
MAPPER_TYPES = ("simulation", "bare-metal")
CLOCK_TYPES = ("static", "per-core", "dynamic")
SIMULATION_MEM_POLICIES = ("first-touch", "default")

_REQUIRED_KEYS = {
    "dag_file",
    "scheduler_type",
    "mapper_type",
    "core_avail_mask",
    "flops_per_cycle",
    "clock_frequency_type",
    "clock_frequency_hz",
    "distance_matrices",
    "out_file_name",
}
_OPTIONAL_KEYS = {
    "scheduler_params",
    "mapper_mem_policy_type",
    "mapper_mem_bind_numa_node_ids",
    "cores_per_numa",
    "total_cores",
}
_MATRIX_KEYS = {"latency_ns", "bandwidth_gbps"}


class ConfigError(ValueError):
    pass


# --- distance matrices -------------------------------------------------------

def parse_distance_matrix(text: str) -> list[list[float]]:
    """Parse ``n`` followed by ``n*n`` whitespace-separated reals, row-major."""
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty distance matrix")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ConfigError(f"matrix size {tokens[0]!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"matrix size must be >= 1, got {n}")
    if len(tokens) != 1 + n * n:
        raise ConfigError(f"expected {n * n} matrix entries for n={n}, got {len(tokens) - 1}")
    try:
        values = [float(tok) for tok in tokens[1:]]
    except ValueError as exc:
        raise ConfigError(f"non-numeric matrix entry: {exc}") from None
    return [values[i * n:(i + 1) * n] for i in range(n)]


def format_distance_matrix(rows: Sequence[Sequence[float]]) -> str:
    out = [str(len(rows))]
    out += [" ".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class DistanceMatrix:
    latency_ns: tuple[tuple[float, ...], ...]
    bandwidth_gbps: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        lat = tuple(tuple(float(v) for v in row) for row in self.latency_ns)
        bw = tuple(tuple(float(v) for v in row) for row in self.bandwidth_gbps)
        n = len(lat)
        if n < 1 or any(len(r) != n for r in lat):
            raise ConfigError("latency matrix must be square and non-empty")
        if len(bw) != n or any(len(r) != n for r in bw):
            raise ConfigError("bandwidth matrix must be square with the latency matrix's size")
        if any(v <= 0 for r in bw for v in r):
            raise ConfigError("bandwidth entries must be > 0")
        if any(v < 0 for r in lat for v in r):
            raise ConfigError("latency entries must be >= 0")
        object.__setattr__(self, "latency_ns", lat)
        object.__setattr__(self, "bandwidth_gbps", bw)
        for name, m in (("latency", lat), ("bandwidth", bw)):
            asym = max_relative_asymmetry(m)
            if asym > 1e-6:
                log.warning("%s matrix is asymmetric (max relative difference %.3g)", name, asym)

    @property
    def n(self) -> int:
        return len(self.latency_ns)

    @property
    def mean_latency_ns(self) -> float:
        return sum(sum(r) for r in self.latency_ns) / self.n ** 2

    @property
    def mean_bandwidth_gbps(self) -> float:
        return sum(sum(r) for r in self.bandwidth_gbps) / self.n ** 2


def max_relative_asymmetry(m: Sequence[Sequence[float]]) -> float:
    worst = 0.0
    for i, row in enumerate(m):
        for j in range(i + 1, len(row)):
            a, b = row[j], m[j][i]
            scale = max(abs(a), abs(b))
            if scale > 0:
                worst = max(worst, abs(a - b) / scale)
    return worst


def comm_cost(nbytes: float, src: int, dst: int, dm: DistanceMatrix) -> float:
    """Transfer time in us of ``nbytes`` between NUMA nodes ``src`` and ``dst``."""
    return dm.latency_ns[src][dst] / 1000 + nbytes / (dm.bandwidth_gbps[src][dst] * 1000)


def mean_comm_cost(nbytes: float, dm: DistanceMatrix) -> float:
    """Transfer time in us under the matrix-wide mean latency and bandwidth."""
    return dm.mean_latency_ns / 1000 + nbytes / (dm.mean_bandwidth_gbps * 1000)


# --- cores -------------------------------------------------------------------

def parse_core_mask(mask: str) -> tuple[int, ...]:
    """Decode a ``0x``-prefixed hex mask; bit i set enables core i."""
    if not isinstance(mask, str) or not re.fullmatch(r"0[xX][0-9a-fA-F]+", mask.strip()):
        raise ConfigError(f"malformed core mask {mask!r}")
    value = int(mask.strip(), 16)
    if value == 0:
        raise ConfigError("core mask enables no cores")
    return tuple(i for i in range(value.bit_length()) if value >> i & 1)


def format_core_mask(cores) -> str:
    return hex(sum(1 << c for c in set(cores)))


@dataclass(frozen=True)
class CoreTopology:
    """Enabled cores grouped into contiguous, equally sized NUMA blocks."""

    enabled: tuple[int, ...]
    n_numa: int
    total_cores: int | None = None
    cores_per_numa: int | None = None

    def __post_init__(self):
        if not self.enabled:
            raise ConfigError("no enabled cores")
        enabled = tuple(sorted(set(self.enabled)))
        object.__setattr__(self, "enabled", enabled)
        total = self.total_cores
        if total is None:
            total = -(-(enabled[-1] + 1) // self.n_numa) * self.n_numa
        object.__setattr__(self, "total_cores", total)
        if enabled[-1] >= total:
            raise ConfigError(f"core {enabled[-1]} out of range for {total} cores")
        if self.cores_per_numa is None and total % self.n_numa:
            raise ConfigError(f"{total} cores cannot be split evenly into {self.n_numa} NUMA nodes")
        if self.cores_per_numa is not None and self.cores_per_numa < 1:
            raise ConfigError("cores_per_numa must be positive")
        for c in enabled:
            if self.numa_of(c) >= self.n_numa:
                raise ConfigError(f"core {c} maps to NUMA node {self.numa_of(c)} >= {self.n_numa}")

    @property
    def block(self) -> int:
        return self.cores_per_numa or self.total_cores // self.n_numa

    def numa_of(self, core: int) -> int:
        if not 0 <= core < self.total_cores:
            raise ConfigError(f"core {core} out of range for {self.total_cores} cores")
        return core // self.block

    def cores_on(self, numa: int) -> list[int]:
        return [c for c in self.enabled if self.numa_of(c) == numa]


def core_numa(core: int, topo: CoreTopology) -> int:
    return topo.numa_of(core)


# --- run configuration -------------------------------------------------------

@dataclass
class RunConfig:
    dag_file: Path
    scheduler_type: str
    mapper_type: str
    core_avail_mask: str
    flops_per_cycle: float
    clock_frequency_type: str
    clock_frequency_hz: float | list[float]
    latency_file: Path
    bandwidth_file: Path
    out_file_name: Path
    scheduler_params: list[str] = field(default_factory=list)
    mapper_mem_policy_type: str = "default"
    mapper_mem_bind_numa_node_ids: list[int] = field(default_factory=list)
    cores_per_numa: int | None = None
    total_cores: int | None = None

    @property
    def cores(self) -> tuple[int, ...]:
        return parse_core_mask(self.core_avail_mask)


def _positive(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def _positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return value


def _relative_base(cfg: dict, config_dir: Path) -> Path:
    # nearest ancestor of the config directory under which dag_file exists;
    # config_dir itself when none does
    dag = Path(cfg["dag_file"])
    if dag.is_absolute():
        return config_dir
    for base in (config_dir, *config_dir.parents):
        if (base / dag).is_file():
            return base
    return config_dir


def parse_run_config(text: str, base_dir: str | Path | None = None) -> RunConfig:
    """Parse a JSON run configuration.

    Relative paths are resolved against ``base_dir``; pass ``None`` to keep
    them as written.
    """
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(cfg) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    missing = _REQUIRED_KEYS - set(cfg)
    if missing:
        raise ConfigError(f"missing configuration keys: {', '.join(sorted(missing))}")

    sched = cfg["scheduler_type"]
    if sched not in SCHEDULER_TYPES:
        raise ConfigError(f"unknown scheduler {sched!r} (expected one of {', '.join(SCHEDULER_TYPES)})")
    mapper = cfg["mapper_type"]
    if mapper not in MAPPER_TYPES:
        raise ConfigError(f"unknown mapper {mapper!r} (expected one of {', '.join(MAPPER_TYPES)})")
    policy = cfg.get("mapper_mem_policy_type", "default")
    if mapper == "simulation" and policy not in SIMULATION_MEM_POLICIES:
        raise ConfigError(f"memory policy {policy!r} is not supported in simulation")

    parse_core_mask(cfg["core_avail_mask"])
    fpc = _positive(cfg["flops_per_cycle"], "flops_per_cycle")
    clock = cfg["clock_frequency_type"]
    if clock not in CLOCK_TYPES:
        raise ConfigError(f"unknown clock_frequency_type {clock!r}")
    hz = cfg["clock_frequency_hz"]
    if clock == "dynamic":
        if mapper == "simulation":
            raise ConfigError("dynamic clock frequency is not supported with the simulation mapper")
    elif clock == "static":
        hz = _positive(hz, "clock_frequency_hz")
    else:
        if not isinstance(hz, list) or not hz:
            raise ConfigError("per-core clock_frequency_hz must be a non-empty list")
        hz = [_positive(v, "clock_frequency_hz entry") for v in hz]

    params = cfg.get("scheduler_params", [])
    if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
        raise ConfigError("scheduler_params must be a list of 'key=value' strings")
    bind = cfg.get("mapper_mem_bind_numa_node_ids", [])
    if not isinstance(bind, list):
        raise ConfigError("mapper_mem_bind_numa_node_ids must be a list")

    matrices = cfg["distance_matrices"]
    if not isinstance(matrices, dict) or set(matrices) != _MATRIX_KEYS:
        raise ConfigError("distance_matrices must have exactly 'latency_ns' and 'bandwidth_gbps'")
    for key in ("dag_file", "out_file_name"):
        if not isinstance(cfg[key], str) or not cfg[key]:
            raise ConfigError(f"{key} must be a non-empty path")
    for key in _MATRIX_KEYS:
        if not isinstance(matrices[key], str) or not matrices[key]:
            raise ConfigError(f"distance_matrices.{key} must be a non-empty path")

    def resolve(p: str) -> Path:
        path = Path(p)
        return path if base_dir is None or path.is_absolute() else Path(base_dir) / path

    cpn = cfg.get("cores_per_numa")
    total = cfg.get("total_cores")
    return RunConfig(
        dag_file=resolve(cfg["dag_file"]),
        scheduler_type=sched,
        mapper_type=mapper,
        core_avail_mask=cfg["core_avail_mask"],
        flops_per_cycle=fpc,
        clock_frequency_type=clock,
        clock_frequency_hz=hz,
        latency_file=resolve(matrices["latency_ns"]),
        bandwidth_file=resolve(matrices["bandwidth_gbps"]),
        out_file_name=resolve(cfg["out_file_name"]),
        scheduler_params=list(params),
        mapper_mem_policy_type=policy,
        mapper_mem_bind_numa_node_ids=list(bind),
        cores_per_numa=None if cpn is None else _positive_int(cpn, "cores_per_numa"),
        total_cores=None if total is None else _positive_int(total, "total_cores"),
    )


def load_run_config(path: str | Path, base_dir: str | Path | None = None) -> RunConfig:
    """Read a config file.  Without ``base_dir``, relative paths resolve against
    the config's directory, or the nearest ancestor containing ``dag_file``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if base_dir is None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        config_dir = path.resolve().parent
        base_dir = _relative_base(raw, config_dir) if isinstance(raw, dict) and "dag_file" in raw else config_dir
    return parse_run_config(text, base_dir)


# --- platform ----------------------------------------------------------------

@dataclass(frozen=True)
class Platform:
    """Everything the cost model needs: matrices, cores, clock."""

    distances: DistanceMatrix
    topology: CoreTopology
    flops_per_cycle: float
    frequency_hz: dict[int, float]
    clock_frequency_type: str = "static"

    @property
    def cores(self) -> tuple[int, ...]:
        return self.topology.enabled

    @property
    def n_numa(self) -> int:
        return self.distances.n

    def numa_of(self, core: int) -> int:
        return self.topology.numa_of(core)

    def comm_cost(self, nbytes: float, src: int, dst: int) -> float:
        return comm_cost(nbytes, src, dst, self.distances)

    def mean_comm_cost(self, nbytes: float) -> float:
        return mean_comm_cost(nbytes, self.distances)

    def compute_cost(self, flops: float, core: int) -> float:
        return compute_cost(flops, core, self)


def compute_cost(flops: float, core: int, platform: Platform) -> float:
    """Compute time in us of ``flops`` on ``core``."""
    if platform.clock_frequency_type == "dynamic":
        raise ConfigError("dynamic clock frequency is not supported in simulation")
    hz = platform.frequency_hz[core]
    if hz <= 0:
        raise ConfigError(f"core {core} has non-positive frequency {hz}")
    return flops * 1e6 / (platform.flops_per_cycle * hz)


def per_core_frequencies(clock_type: str, hz, topo: CoreTopology) -> dict[int, float]:
    if clock_type == "static":
        return {c: float(hz) for c in topo.enabled}
    if clock_type == "per-core":
        hz = [float(v) for v in hz]
        if len(hz) == len(topo.enabled):
            return dict(zip(topo.enabled, hz))
        if len(hz) == topo.total_cores:
            return {c: hz[c] for c in topo.enabled}
        raise ConfigError(
            f"per-core frequency list has {len(hz)} entries; expected one per enabled core "
            f"({len(topo.enabled)}) or per core ({topo.total_cores})"
        )
    raise ConfigError(f"{clock_type} clock frequency is not supported in simulation")


def build_platform(
    latency: Sequence[Sequence[float]],
    bandwidth: Sequence[Sequence[float]],
    cores: Sequence[int],
    flops_per_cycle: float = 1.0,
    frequency_hz: float | Sequence[float] = 1.0,
    clock_frequency_type: str | None = None,
    total_cores: int | None = None,
    cores_per_numa: int | None = None,
) -> Platform:
    dm = DistanceMatrix(latency, bandwidth)
    topo = CoreTopology(tuple(cores), dm.n, total_cores, cores_per_numa)
    if clock_frequency_type is None:
        clock_frequency_type = "static" if isinstance(frequency_hz, (int, float)) else "per-core"
    freqs = per_core_frequencies(clock_frequency_type, frequency_hz, topo)
    return Platform(dm, topo, float(flops_per_cycle), freqs, clock_frequency_type)


def load_platform(config: RunConfig) -> Platform:
    for p in (config.latency_file, config.bandwidth_file):
        if not Path(p).is_file():
            raise ConfigError(f"distance matrix file not found: {p}")
    lat = parse_distance_matrix(Path(config.latency_file).read_text(encoding="utf-8"))
    bw = parse_distance_matrix(Path(config.bandwidth_file).read_text(encoding="utf-8"))
    return build_platform(
        lat,
        bw,
        config.cores,
        config.flops_per_cycle,
        config.clock_frequency_hz,
        config.clock_frequency_type,
        config.total_cores,
        config.cores_per_numa,
    )
