"""Per-second trace alignment: the table every downstream statistic eats.

Power, resource, and request streams are sampled/recorded independently;
analysis needs one row per second carrying all of them.  Rows exist only
where a power sample, a resource sample, and at least one completed request
share the same integer-second timestamp — seconds without completions are
excluded rather than zero-filled (a fabricated 0 ms response time would
claim perfect responsiveness), and negative power rows are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from antiwatt.errors import EmptyAlignmentError

__all__ = ["AlignedRow", "AlignedTable", "align"]


@dataclass(frozen=True)
class AlignedRow:
    t: int  # epoch second
    cpu_power_w: float
    dram_power_w: float
    rt_ms: float  # mean of completions in [t, t+1)
    req_rate: float  # completions per second
    cpu_util: float
    memory_bytes: Optional[int]


@dataclass(frozen=True)
class AlignedTable:
    rows: Tuple[AlignedRow, ...]
    exclusions: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> List[float]:
        return [getattr(row, name) for row in self.rows]

    def with_memory(self) -> "AlignedTable":
        """Rows usable by the DRAM model (memory reading present)."""
        kept = tuple(r for r in self.rows if r.memory_bytes is not None)
        if not kept:
            raise EmptyAlignmentError(
                "no aligned rows carry a memory reading; DRAM model cannot be fitted"
            )
        dropped = len(self.rows) - len(kept)
        exclusions = dict(self.exclusions)
        if dropped:
            exclusions["missing_memory"] = exclusions.get("missing_memory", 0) + dropped
        return AlignedTable(rows=kept, exclusions=exclusions)

    def extend(self, other: "AlignedTable") -> "AlignedTable":
        """Pool rows across repetitions (row order: self then other)."""
        exclusions = dict(self.exclusions)
        for key, count in other.exclusions.items():
            exclusions[key] = exclusions.get(key, 0) + count
        return AlignedTable(rows=self.rows + other.rows, exclusions=exclusions)


def _power_fields(sample) -> Tuple[float, float, float]:
    # accepts PowerSample objects or plain (t, cpu_w, dram_w) rows
    if hasattr(sample, "cpu_power_w"):
        return sample.t, sample.cpu_power_w, sample.dram_power_w
    t, cpu, dram = sample
    return float(t), float(cpu), float(dram)


def align(power: Iterable, resources: Iterable, requests: Sequence) -> AlignedTable:
    """Join the three streams on integer-second timestamps.

    ``requests`` are records with ``completion_s`` and ``response_time_ms``;
    only successful ones contribute to the per-second response-time mean and
    rate.  Raises :class:`EmptyAlignmentError` when nothing survives.
    """
    exclusions: Dict[str, int] = {
        "negative_power": 0,
        "duplicate_second": 0,
        "no_power": 0,
        "no_resource": 0,
        "no_completions": 0,
        "failed_request": 0,
    }

    power_by_s: Dict[int, Tuple[float, float]] = {}
    for sample in power:
        t, cpu, dram = _power_fields(sample)
        if cpu < 0 or dram < 0:
            exclusions["negative_power"] += 1
            continue
        second = int(t)
        if second in power_by_s:
            exclusions["duplicate_second"] += 1
            continue
        power_by_s[second] = (cpu, dram)

    res_by_s: Dict[int, Tuple[float, Optional[int]]] = {}
    for sample in resources:
        second = int(sample.t)
        if second in res_by_s:
            exclusions["duplicate_second"] += 1
            continue
        res_by_s[second] = (sample.cpu_util, sample.memory_bytes)

    rt_sum: Dict[int, float] = {}
    rt_count: Dict[int, int] = {}
    for record in requests:
        if not record.success:
            exclusions["failed_request"] += 1
            continue
        second = int(record.completion_s)
        rt_sum[second] = rt_sum.get(second, 0.0) + record.response_time_ms
        rt_count[second] = rt_count.get(second, 0) + 1

    rows: List[AlignedRow] = []
    for second in sorted(power_by_s):
        if second not in res_by_s:
            exclusions["no_resource"] += 1
            continue
        if second not in rt_count:
            exclusions["no_completions"] += 1
            continue
        cpu_w, dram_w = power_by_s[second]
        util, memory = res_by_s[second]
        count = rt_count[second]
        rows.append(
            AlignedRow(
                t=second,
                cpu_power_w=cpu_w,
                dram_power_w=dram_w,
                rt_ms=rt_sum[second] / count,
                req_rate=float(count),
                cpu_util=util,
                memory_bytes=memory,
            )
        )
    exclusions["no_power"] = sum(
        1 for second in res_by_s if second in rt_count and second not in power_by_s
    )

    if not rows:
        raise EmptyAlignmentError(
            "no second carries power, resources, and at least one completion"
        )
    return AlignedTable(rows=tuple(rows), exclusions={k: v for k, v in exclusions.items() if v})
