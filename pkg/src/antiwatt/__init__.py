"""antiwatt: a workbench for measuring the power cost of performance antipatterns.

Ten classic performance antipatterns (Smith & Williams catalog) served as
load-testable HTTP endpoints, a closed-loop load driver, 1 Hz power and
resource telemetry (RAPL/powercap or a seeded simulated backend), a trial
orchestrator, and the statistical pipeline that relates response time to
CPU/DRAM power via robust regression.
"""

__version__ = "0.1.0"
