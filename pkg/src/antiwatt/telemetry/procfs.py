"""Per-process resource sampling from the proc filesystem.

One :class:`ProcSampler` instance tracks one target process. CPU utilization
is computed from consecutive utime+stime readings: process CPU seconds per
wall second, divided by the host core count, so a process saturating one core
of a 4-core host reports 0.25. The sampler primes its baseline at
construction, so every ``sample()`` call yields a valid delta.

Counters that cannot be read (permissions, kernel config) become ``None``
fields — never fabricated zeros. A vanished target raises
:class:`ProcessVanishedError`.
"""
from __future__ import annotations

import logging
import os
import time
from pathlib import Path
from typing import Optional, Tuple

from ..errors import ProcessVanishedError
from .base import ResourceSample

logger = logging.getLogger(__name__)


def _proc_cpu_seconds(stat_path: Path, clk_tck: float) -> float:
    try:
        raw = stat_path.read_text()
    except (FileNotFoundError, ProcessLookupError) as exc:
        raise ProcessVanishedError(f"target process gone: {stat_path}") from exc
    rest = raw[raw.rindex(")") + 2 :].split()
    return (int(rest[11]) + int(rest[12])) / clk_tck  # utime + stime


class ProcSampler:
    """Snapshots cpu/memory/disk/net usage of one process at 1 Hz."""

    def __init__(
        self,
        pid: int,
        core_count: Optional[int] = None,
        proc_root: str = "/proc",
    ) -> None:
        self.pid = pid
        self.core_count = core_count if core_count is not None else (os.cpu_count() or 1)
        if self.core_count < 1:
            raise ValueError("core_count must be >= 1")
        self._root = Path(proc_root)
        self._proc = self._root / str(pid)
        self._clk_tck = float(os.sysconf("SC_CLK_TCK"))
        self._page_size = os.sysconf("SC_PAGE_SIZE")
        # baseline so the first sample() already has a delta
        self._prev: Tuple[float, float] = (
            time.monotonic(),
            _proc_cpu_seconds(self._proc / "stat", self._clk_tck),
        )

    # -- individual collectors; each degrades to None on failure ------------

    def _memory_bytes(self) -> Optional[int]:
        try:
            resident_pages = int((self._proc / "statm").read_text().split()[1])
            return resident_pages * self._page_size
        except (OSError, ValueError, IndexError):
            return None

    def _disk_bytes(self) -> Tuple[Optional[int], Optional[int]]:
        try:
            fields = {}
            for line in (self._proc / "io").read_text().splitlines():
                key, _, value = line.partition(":")
                fields[key] = int(value)
            return fields["read_bytes"], fields["write_bytes"]
        except (OSError, ValueError, KeyError):
            return None, None

    def _net_bytes(self) -> Tuple[Optional[int], Optional[int]]:
        # network counters are host-wide: /proc/<pid>/net shows the
        # namespace's devices, which on a non-containerized target is the host
        try:
            rx = tx = 0
            lines = (self._proc / "net" / "dev").read_text().splitlines()
            for line in lines[2:]:  # two header lines
                _, _, counters = line.partition(":")
                parts = counters.split()
                rx += int(parts[0])
                tx += int(parts[8])
            return rx, tx
        except (OSError, ValueError, IndexError):
            return None, None

    def sample(self) -> ResourceSample:
        """One consistent snapshot; raises ProcessVanishedError if the target died."""
        cpu_seconds = _proc_cpu_seconds(self._proc / "stat", self._clk_tck)
        now = time.monotonic()
        prev_t, prev_cpu = self._prev
        self._prev = (now, cpu_seconds)
        wall_delta = now - prev_t
        if wall_delta > 0:
            util = (cpu_seconds - prev_cpu) / wall_delta / self.core_count
        else:
            util = 0.0
        disk_read, disk_write = self._disk_bytes()
        net_rx, net_tx = self._net_bytes()
        return ResourceSample(
            t=time.time(),
            cpu_util=min(1.0, max(0.0, util)),
            memory_bytes=self._memory_bytes(),
            disk_read_bytes=disk_read,
            disk_write_bytes=disk_write,
            net_rx_bytes=net_rx,
            net_tx_bytes=net_tx,
        )
