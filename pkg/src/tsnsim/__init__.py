"""Discrete-event simulator for gPTP time distribution in TSN and 5G-TSN
networks, with hot-standby grandmaster failover."""

from .clock import Clock, ClockParams, PhaseGlitch
from .metrics import MetricsTrace, convergence_time, failover_report, max_abs_error
from .scenario import FaultKind, FaultSpec, GptpParams, Scenario, load_scenario
from .sim import Simulation, run

__all__ = [
    "Clock", "ClockParams", "FaultKind", "FaultSpec", "GptpParams", "MetricsTrace",
    "PhaseGlitch", "Scenario", "Simulation", "convergence_time", "failover_report",
    "load_scenario", "max_abs_error", "run",
]
__version__ = "0.1.0"
