"""HTTP service exposing one antipattern endpoint plus /healthz.

One process serves exactly one antipattern at /<kind-slug>; any other path is
a 404 naming the expected endpoint. Replies are JSON WorkResponse envelopes
over HTTP/1.1 keep-alive. Requests are handled by a bounded worker pool
(large enough for the experiment's 50 concurrent users; CPU-bound handler
code is serialized by the interpreter anyway on a single core).

On startup the process prints a single JSON "listening" line to stdout —
the orchestrator parses it to learn the bound port and the echoed config.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qsl, urlsplit

from ..errors import CapabilityError
from ..kernels import busy_loop, calibrate_iterations, hash_rounds, trig_loop
from .config import (
    DEFAULT_ITERATIONS,
    SLUG_TO_KIND,
    AntipatternKind,
    WorkloadConfig,
    default_config,
)
from .handlers import (
    WorkloadFailure,
    WorkResponse,
    handle_circuitous_treasure_hunt,
    handle_excessive_dynamic_allocation,
    handle_god_class,
    handle_more_is_less,
    handle_one_lane_bridge,
    handle_sisyphus_retrieval,
    handle_the_ramp,
    handle_traffic_jam,
    handle_unbalanced_processing,
    handle_unnecessary_processing,
)
from .state import ServiceState, make_state

logger = logging.getLogger(__name__)

DEFAULT_POOL_SIZE = 64


def _int_param(params: dict, name: str) -> Optional[int]:
    raw = params.get(name)
    return int(raw) if raw is not None else None


def dispatch(state: ServiceState, config: WorkloadConfig, raw_query: str) -> dict:
    """Route one request body computation to the configured handler."""
    kind = config.kind
    if kind is AntipatternKind.GOD_CLASS:
        return handle_god_class(state, config, raw_query)
    params = dict(parse_qsl(raw_query)) if raw_query else {}
    if kind is AntipatternKind.UNBALANCED_PROCESSING:
        return handle_unbalanced_processing(state, config)
    if kind is AntipatternKind.UNNECESSARY_PROCESSING:
        return handle_unnecessary_processing(state, config, _int_param(params, "iterations"))
    if kind is AntipatternKind.THE_RAMP:
        return handle_the_ramp(state, config)
    if kind is AntipatternKind.SISYPHUS_RETRIEVAL:
        return handle_sisyphus_retrieval(
            state,
            config,
            page=_int_param(params, "page") or 0,
            page_size=_int_param(params, "page_size") or 10,
        )
    if kind is AntipatternKind.MORE_IS_LESS:
        return handle_more_is_less(
            state,
            config,
            workers=_int_param(params, "workers"),
            iterations=_int_param(params, "iterations"),
        )
    if kind is AntipatternKind.EXCESSIVE_DYNAMIC_ALLOCATION:
        return handle_excessive_dynamic_allocation(state, config, _int_param(params, "iterations"))
    if kind is AntipatternKind.CIRCUITOUS_TREASURE_HUNT:
        return handle_circuitous_treasure_hunt(state, config, _int_param(params, "customer_id"))
    if kind is AntipatternKind.ONE_LANE_BRIDGE:
        return handle_one_lane_bridge(state, config)
    if kind is AntipatternKind.TRAFFIC_JAM:
        return handle_traffic_jam(state, config)
    raise ValueError(f"no handler for {kind}")  # pragma: no cover - enum is closed


def execute(state: ServiceState, config: WorkloadConfig, raw_query: str):
    """Run the handler under a timer; map outcomes to (http_code, WorkResponse)."""
    t0 = time.perf_counter()
    try:
        body = dispatch(state, config, raw_query)
        status, code = "success", 200
    except WorkloadFailure as exc:
        body, status, code = exc.summary, "failure", 507
    except Exception as exc:  # noqa: BLE001 - handler bug must not kill the server
        logger.exception("handler error")
        body = {"error": f"{type(exc).__name__}: {exc}"}
        status, code = "failure", 500
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return code, WorkResponse(status=status, body_summary=body, server_elapsed_ms=elapsed_ms)


class _PooledHTTPServer(ThreadingHTTPServer):
    """ThreadingHTTPServer whose connections run on a bounded pool."""

    daemon_threads = True

    def __init__(self, addr, handler_cls, state: ServiceState, pool_size: int):
        # pool first: a failed bind makes socketserver call server_close()
        self._pool = ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="req")
        self.state = state
        self.config = state.config
        try:
            super().__init__(addr, handler_cls)
        except OSError:
            self._pool.shutdown(wait=False)
            raise

    def process_request(self, request, client_address):
        self._pool.submit(self.process_request_thread, request, client_address)

    def server_close(self):
        super().server_close()
        self._pool.shutdown(wait=False)


class WorkloadHTTPHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    # without TCP_NODELAY, Nagle + delayed ACK stalls every keep-alive
    # response by ~40 ms, burying the workloads' own timing signal
    disable_nagle_algorithm = True

    def _send_json(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):  # noqa: N802 - stdlib naming
        parts = urlsplit(self.path)
        if parts.path == "/healthz":
            body = b"ok"
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        expected = "/" + self.server.config.kind.slug
        if parts.path != expected:
            self._send_json(
                404, {"error": f"unknown endpoint {parts.path!r}", "expected": expected}
            )
            return
        code, response = execute(self.server.state, self.server.config, parts.query)
        self._send_json(code, response.to_dict())

    def log_message(self, fmt, *args):
        logger.debug("http: " + fmt, *args)


def serve(
    config: WorkloadConfig,
    host: str = "127.0.0.1",
    port: int = 0,
    pool_size: int = DEFAULT_POOL_SIZE,
    state: Optional[ServiceState] = None,
) -> _PooledHTTPServer:
    """Bind and return the server (caller drives serve_forever)."""
    if state is None:
        state = make_state(config)
    try:
        return _PooledHTTPServer((host, port), WorkloadHTTPHandler, state, pool_size)
    except OSError as exc:
        raise CapabilityError(
            f"cannot bind {host}:{port} ({exc}); pick a free port with --port or "
            "stop the process holding it"
        ) from exc


# ------------------------------------------------------------- startup chores


def pin_to_core(choice: str) -> Optional[int]:
    """Restrict this process to one CPU core; None when unsupported/off."""
    if choice == "off":
        return None
    if not hasattr(os, "sched_setaffinity"):
        logger.warning("CPU pinning unsupported on this platform; running unpinned")
        return None
    try:
        allowed = sorted(os.sched_getaffinity(0))
        core = allowed[0] if choice == "auto" else int(choice)
        os.sched_setaffinity(0, {core})
        return core
    except (OSError, ValueError) as exc:
        logger.warning("CPU pinning failed (%s); running unpinned", exc)
        return None


def _eda_probe(n: int) -> int:
    crc = 0
    for i in range(n):
        parts = ["%06d" % ((i * j) & 0xFFFF) for j in range(16)]
        crc = zlib.crc32(("".join(parts)).encode("ascii"), crc)
    return crc


# per-kind calibration recipe: (kernel, handler work units per iteration unit)
_CALIBRATION = {
    AntipatternKind.UNBALANCED_PROCESSING: (hash_rounds, 0.5),
    AntipatternKind.UNNECESSARY_PROCESSING: (trig_loop, 1.0),
    AntipatternKind.MORE_IS_LESS: (trig_loop, 1.0),
    AntipatternKind.GOD_CLASS: (hash_rounds, 1.0),
    AntipatternKind.EXCESSIVE_DYNAMIC_ALLOCATION: (_eda_probe, 1.0),
    AntipatternKind.CIRCUITOUS_TREASURE_HUNT: (hash_rounds, 28.0),
    AntipatternKind.ONE_LANE_BRIDGE: (hash_rounds, 1.0),
    AntipatternKind.TRAFFIC_JAM: (busy_loop, 1.0),
}


def calibrate_config(config: WorkloadConfig, target_ms: float) -> WorkloadConfig:
    """Rescale config.iterations so one request costs ~target_ms here.

    Data-driven handlers (TheRamp, Sisyphus) take their cost from state size
    or fixture scale, not iterations; they are left untouched.
    """
    recipe = _CALIBRATION.get(config.kind)
    if recipe is None:
        logger.info("%s is not iteration-calibratable; leaving defaults", config.kind.value)
        return config
    kernel, units_per_iteration = recipe
    kernel_iters = calibrate_iterations(kernel, target_ms, probe=2000)
    scaled = max(1, int(kernel_iters / units_per_iteration))
    logger.info(
        "calibrated %s iterations: %d (target %.0f ms)", config.kind.value, scaled, target_ms
    )
    return replace(config, iterations=scaled)


# ----------------------------------------------------------------- entrypoint


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antiwatt-service", description="serve one antipattern endpoint"
    )
    parser.add_argument("--antipattern", required=True, choices=sorted(SLUG_TO_KIND))
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0, help="0 picks a free port")
    parser.add_argument("--seed", type=int, default=1, help="dataset/rng seed")
    parser.add_argument("--scale", type=int, default=1, help="fixture scale multiplier")
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--payload-size", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None, help="MoreIsLess worker count")
    parser.add_argument("--window-period-s", type=float, default=None, help="TrafficJam period")
    parser.add_argument("--heavy-fraction", type=float, default=None)
    parser.add_argument("--pin-core", default="auto", help="core id, 'auto', or 'off'")
    parser.add_argument(
        "--calibrate-target-ms",
        type=float,
        default=None,
        help="rescale iterations so one request costs about this many ms",
    )
    parser.add_argument("--pool-size", type=int, default=DEFAULT_POOL_SIZE)
    return parser


def config_from_args(args: argparse.Namespace) -> WorkloadConfig:
    overrides = {"dataset_seed": args.seed, "dataset_scale": args.scale}
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    if args.payload_size is not None:
        overrides["payload_size"] = args.payload_size
    if args.workers is not None:
        overrides["worker_count"] = args.workers
    if args.window_period_s is not None:
        overrides["window_period_s"] = args.window_period_s
    if args.heavy_fraction is not None:
        overrides["heavy_fraction"] = args.heavy_fraction
    return default_config(SLUG_TO_KIND[args.antipattern], **overrides)


def run_service(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    args = build_arg_parser().parse_args(argv)
    config = config_from_args(args)
    pinned = pin_to_core(args.pin_core)
    if args.calibrate_target_ms is not None:
        config = calibrate_config(config, args.calibrate_target_ms)
    try:
        server = serve(config, host=args.host, port=args.port, pool_size=args.pool_size)
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    announce = {
        "event": "listening",
        "host": server.server_address[0],
        "port": server.server_address[1],
        "pid": os.getpid(),
        "antipattern": config.kind.value,
        "pinned_core": pinned,
        "config": config.to_dict(),
    }
    print(json.dumps(announce), flush=True)

    def _graceful(signum, frame):
        logger.info("signal %d: shutting down", signum)
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, _graceful)
    signal.signal(signal.SIGINT, _graceful)
    try:
        server.serve_forever(poll_interval=0.2)
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":  # pragma: no cover - exercised via subprocess
    sys.exit(run_service())
