"""Antipattern workload suite: config, shared state, handlers, HTTP service."""
from .config import (
    DEFAULT_ITERATIONS,
    DEFAULT_USERS,
    SLUG_TO_KIND,
    AntipatternKind,
    WorkloadConfig,
    config_from_dict,
    default_config,
)
from .handlers import WorkloadFailure, WorkResponse
from .state import ServiceState, make_state
from .service import calibrate_config, dispatch, execute, run_service, serve

__all__ = [
    "AntipatternKind",
    "DEFAULT_ITERATIONS",
    "DEFAULT_USERS",
    "SLUG_TO_KIND",
    "ServiceState",
    "WorkResponse",
    "WorkloadConfig",
    "WorkloadFailure",
    "calibrate_config",
    "config_from_dict",
    "default_config",
    "dispatch",
    "execute",
    "make_state",
    "run_service",
    "serve",
]
