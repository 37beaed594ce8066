"""Shared telemetry sample types and the power-source protocol.

Power and resource samples are the 1 Hz observations the trial traces are
built from: `power.csv` rows come from :class:`PowerSample`, `resources.csv`
rows from :class:`ResourceSample`. Both carry wall-clock epoch timestamps so
they can be joined against the request log downstream; producers use the
monotonic clock internally for any delta arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

# RAPL domain labels used throughout the telemetry layer.
CPU_PACKAGE = "cpu_package"
DRAM = "dram"


@dataclass(frozen=True)
class PowerSample:
    """Instantaneous power draw (W) for the CPU package and DRAM domains."""

    t: float  # epoch seconds
    cpu_power_w: float
    dram_power_w: float

    def __post_init__(self) -> None:
        # negative readings are discarded upstream, never stored
        if self.cpu_power_w < 0 or self.dram_power_w < 0:
            raise ValueError("power samples must be non-negative")


@dataclass(frozen=True)
class ResourceSample:
    """One consistent snapshot of the target process's resource usage.

    ``cpu_util`` is a fraction of *total host capacity*: a process saturating
    one core of a 4-core host reports 0.25. Cumulative counters (disk, net)
    are raw totals; consumers difference them. Fields that could not be read
    are ``None`` — absent markers are never fabricated as zeros.
    """

    t: float  # epoch seconds
    cpu_util: float
    memory_bytes: Optional[int] = None
    disk_read_bytes: Optional[int] = None
    disk_write_bytes: Optional[int] = None
    net_rx_bytes: Optional[int] = None
    net_tx_bytes: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.cpu_util <= 1.0:
            raise ValueError(f"cpu_util must be in [0, 1], got {self.cpu_util}")


class PowerSource(Protocol):
    """A backend that yields one power sample per sampler tick.

    ``prime`` establishes the baseline for delta-based backends (RAPL) and is
    a no-op for stateless ones. ``sample`` may return ``None`` only when the
    backend has no baseline yet.
    """

    def prime(self, t: float) -> None: ...

    def sample(
        self,
        t: float,
        resource: Optional[ResourceSample],
        rt_ms: Optional[float],
    ) -> Optional[PowerSample]: ...
