"""Time-error trace and report quantities."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .errors import ContractError, NoSamples, NotConverged
from .scenario import FaultSpec


@dataclass(frozen=True)
class TimeErrorSample:
    node: int
    at: int
    domain: int
    error: int


@dataclass(frozen=True)
class SwitchEvent:
    """A receiver changed the (domain, GM) it takes time from."""

    node: int
    at: int
    from_domain: int
    to_domain: int
    from_gm: int
    to_gm: int


@dataclass(frozen=True)
class HealthEvent:
    node: int
    at: int
    domain: int
    synced: bool


@dataclass(frozen=True)
class ValidityEvent:
    node: int
    at: int
    valid: bool


@dataclass(frozen=True)
class FailoverReport:
    switch_at: int | None
    latency: int | None
    discontinuity: int
    gap: int


@dataclass
class MetricsTrace:
    start: int = 0
    end: int = 0
    samples: list[TimeErrorSample] = field(default_factory=list)
    switches: list[SwitchEvent] = field(default_factory=list)
    health: list[HealthEvent] = field(default_factory=list)
    validity: list[ValidityEvent] = field(default_factory=list)
    faults: list[FaultSpec] = field(default_factory=list)
    annotations: Counter = field(default_factory=Counter)
    elections: dict[int, dict[int, int | None]] = field(default_factory=dict)

    def node_samples(self, node: int) -> list[TimeErrorSample]:
        return [s for s in self.samples if s.node == node]

    def nodes(self) -> list[int]:
        return sorted({s.node for s in self.samples})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "at_ps", "domain", "error_ps"])
        for s in sorted(self.samples, key=lambda s: (s.node, s.at)):
            w.writerow([s.node, s.at, s.domain, s.error])
        return buf.getvalue()


def _window(samples, window):
    if window is None:
        return samples
    lo, hi = window
    return [s for s in samples if lo <= s.at <= hi]


def max_abs_error(trace: MetricsTrace, node: int, window: tuple[int, int] | None = None) -> int:
    picked = _window(trace.node_samples(node), window)
    if not picked:
        raise NoSamples(f"no samples for node {node} in window {window}")
    return max(abs(s.error) for s in picked)


def convergence_time(trace: MetricsTrace, node: int, threshold: int, start: int | None = None) -> int:
    """Time from ``start`` (default: first Sync emission) to the first sample
    after which every sample of the node stays within ``threshold``."""
    if threshold <= 0:
        raise ContractError("threshold must be > 0")
    start = trace.start if start is None else start
    samples = [s for s in trace.node_samples(node) if s.at >= start]
    if not samples:
        raise NotConverged(f"node {node} has no samples")
    settled = None
    for s in reversed(samples):
        if abs(s.error) > threshold:
            break
        settled = s
    if settled is None:
        raise NotConverged(f"node {node} ends outside {threshold} ps")
    return settled.at - start


def _discontinuity(trace: MetricsTrace, sw: SwitchEvent) -> int:
    at_switch = [s for s in trace.node_samples(sw.node) if s.at == sw.at]
    before = [s for s in at_switch if s.domain == sw.from_domain]
    after = [s for s in at_switch if s.domain == sw.to_domain]
    if not before or not after:
        return 0
    # samples at the switch instant are written old-source first, new-source last
    return abs(after[-1].error - before[0].error)


def _gap(trace: MetricsTrace, node: int, fault_at: int) -> int:
    events = [v for v in trace.validity if v.node == node]
    valid = False
    lost_at = None
    for v in events:
        if v.at < fault_at:
            valid = v.valid
            continue
        if not v.valid and valid:
            lost_at = v.at if lost_at is None else lost_at
        if v.valid and lost_at is not None:
            return v.at - fault_at
        valid = v.valid
    if lost_at is not None:
        # never recovered before the end of the trace
        return max(trace.end, lost_at) - fault_at
    return 0


def failover_report(trace: MetricsTrace, fault: FaultSpec, node: int | None = None) -> FailoverReport:
    """Failover figures for one receiver, or the worst case over all receivers.

    ``gap`` runs from the fault to the moment the receiver again has a live,
    synchronized time source; zero when it never lost one.
    """
    if fault not in trace.faults:
        raise ContractError(f"fault {fault} is not part of this trace")
    nodes = [node] if node is not None else sorted(
        {s.node for s in trace.samples} | {v.node for v in trace.validity}
    )
    reports = []
    for n in nodes:
        sw = next((s for s in trace.switches if s.node == n and s.at >= fault.at), None)
        reports.append(FailoverReport(
            switch_at=sw.at if sw else None,
            latency=sw.at - fault.at if sw else None,
            discontinuity=_discontinuity(trace, sw) if sw else 0,
            gap=_gap(trace, n, fault.at),
        ))
    if node is not None:
        return reports[0]
    if not reports:
        return FailoverReport(None, None, 0, 0)
    switched = [r for r in reports if r.switch_at is not None]
    return FailoverReport(
        switch_at=max((r.switch_at for r in switched), default=None),
        latency=max((r.latency for r in switched), default=None),
        discontinuity=max(r.discontinuity for r in reports),
        gap=max(r.gap for r in reports),
    )


def report_json(trace: MetricsTrace, threshold: int = 1_000_000) -> str:
    """Summary report: per-node error figures plus one failover block per fault."""
    per_node = {}
    for n in trace.nodes():
        entry = {"max_abs_error_ps": max_abs_error(trace, n)}
        try:
            entry["convergence_ps"] = convergence_time(trace, n, threshold)
        except NotConverged:
            entry["convergence_ps"] = None
        entry["switches"] = sum(1 for s in trace.switches if s.node == n)
        per_node[str(n)] = entry
    failovers = []
    for f in trace.faults:
        rep = failover_report(trace, f)
        failovers.append({
            "fault": {"kind": f.kind.value, "at_ps": f.at, "node": f.node},
            **{k: v for k, v in asdict(rep).items()},
        })
    doc = {
        "start_ps": trace.start,
        "samples": len(trace.samples),
        "nodes": per_node,
        "failover": failovers,
        "annotations": dict(sorted(trace.annotations.items())),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
