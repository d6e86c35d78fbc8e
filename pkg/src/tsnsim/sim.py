"""Deterministic discrete-event engine.

Events are processed in (true time, insertion sequence) order. Every node
reads only its own clock; the metrics side compares node readings against
the GM's true timescale. All randomness comes from per-node streams derived
from the run seed, so adding or editing one node never perturbs another
node's noise.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .clock import Clock
from .errors import ContractError
from .fiveg import (
    FiveGSClock,
    FiveGSMode,
    apply_mode,
    residence_time,
    set_service,
)
from .gptp import (
    Announce,
    AnnounceDataset,
    BmcaResult,
    FollowUpMatcher,
    GmEstimate,
    PortRole,
    SyncEvent,
    announce_to_send,
    estimate_rate_ratio,
    forward_sync,
    pdelay_from_timestamps,
    receive_sync,
    run_bmca,
)
from .hot_standby import (
    DomainHealth,
    GateDecision,
    SelectorState,
    is_synced,
    select_domain,
    standby_gate,
)
from .metrics import HealthEvent, MetricsTrace, SwitchEvent, TimeErrorSample, ValidityEvent
from .network import NodeSpec, spanning_tree
from .scenario import FaultKind, FaultSpec, Scenario

log = logging.getLogger(__name__)

__all__ = ["Event", "EventQueue", "FaultKind", "FaultSpec", "Simulation", "run"]

# stream ids for SeedSequence([seed, node, stream])
_CLOCK_STREAM, _PROC_STREAM, _FIVEG_STREAM = 0, 1, 2


class Event(NamedTuple):
    at: int
    seq: int
    kind: str
    payload: tuple


class EventQueue:
    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0
        self.now = 0

    def __len__(self):
        return len(self._heap)

    def schedule(self, at: int, kind: str, *payload) -> Event:
        if at < self.now:
            raise ContractError(f"cannot schedule {kind} at {at}, now is {self.now}")
        ev = Event(at, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event | None:
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self.now = ev.at
        return ev

    def peek_time(self) -> int | None:
        return self._heap[0].at if self._heap else None


@dataclass
class PortState:
    neighbor: int
    link: object
    mean_delay: int | None = None
    nrr: float = 1.0
    last_pair: tuple[int, int] | None = None
    pending_req: tuple[int, int] | None = None


@dataclass
class DomainState:
    id: int
    static_gm: int | None
    roles: dict[int, PortRole] = field(default_factory=dict)
    bmca: BmcaResult | None = None
    announces: dict[int, Announce | None] = field(default_factory=dict)
    ann_version: dict[int, int] = field(default_factory=dict)
    best_path: tuple[int, ...] = ()
    sync_seq: int = 0
    estimate: GmEstimate | None = None
    health: DomainHealth | None = None
    health_version: int = 0
    synced: bool = False
    # estimate accepted while healthy; a standby GM derives its time from it
    lock: GmEstimate | None = None
    gate_open: bool = False
    forwarding: dict = field(default_factory=dict)

    @property
    def is_bmca(self) -> bool:
        return self.static_gm is None

    def is_gm(self, node: int) -> bool:
        if self.static_gm is not None:
            return self.static_gm == node
        return self.bmca is not None and self.bmca.is_grandmaster

    def grandmaster(self, nodes) -> int | None:
        if self.static_gm is not None:
            return self.static_gm
        gm = self.bmca.grandmaster if self.bmca else None
        return gm if gm is not None and nodes[gm].spec.gm_capable else None

    def tx_ports(self) -> list[int]:
        return [p for p, r in self.roles.items() if r is PortRole.TIME_TRANSMITTER]


@dataclass
class NodeState:
    spec: NodeSpec
    clock: Clock
    rng: np.random.Generator
    ports: dict[int, PortState]
    domains: dict[int, DomainState]
    matcher: FollowUpMatcher = field(default_factory=FollowUpMatcher)
    pdelay_seq: int = 0
    selector: SelectorState | None = None
    source: tuple[int, int] | None = None
    valid: bool = False

    @property
    def id(self) -> int:
        return self.spec.id

    def dataset(self, domain: int) -> AnnounceDataset:
        # a node that cannot be GM still announces itself with priority1 255, so
        # its neighbors overwrite stale port information without waiting for timeouts
        s = self.spec
        return AnnounceDataset(
            s.priority1 if s.gm_capable else 255, s.clock_class, s.clock_accuracy,
            s.variance, s.priority2, clock_identity=s.id, steps_removed=0, domain=domain,
        )


class Simulation:
    """One simulation instance. Build, then call :meth:`run`."""

    def __init__(self, scenario: Scenario, seed: int | None = None, until: int | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.until = scenario.duration if until is None else until
        self.topology = scenario.validate()
        self.params = scenario.gptp
        self.hs = scenario.effective_hot_standby()
        self.health_cfg = scenario.sync_health_config()
        self.domain_specs = scenario.effective_domains()
        self.queue = EventQueue()
        self.trace = MetricsTrace(start=self.params.sync_offset)
        self.failed_at: dict[int, int] = {}
        self.fiveg = scenario.fiveg
        self.fiveg_mode: FiveGSMode | None = None
        self.fiveg_clock: FiveGSClock | None = None
        self._build_nodes()
        self._handlers = {
            "announce_tick": self._on_announce_tick,
            "sync_tick": self._on_sync_tick,
            "pdelay_tick": self._on_pdelay_tick,
            "pdelay_resp": self._on_pdelay_resp,
            "deliver": self._on_deliver,
            "egress": self._on_egress,
            "announce_timeout": self._on_announce_timeout,
            "health_timer": self._on_health_timer,
            "wander": self._on_wander,
            "sample": self._on_sample,
            "fault": self._on_fault,
            "recheck": self._on_recheck,
        }

    # ------------------------------------------------------------ set-up

    def _stream(self, node: int, stream: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, node, stream]))

    def _build_nodes(self):
        topo = self.topology
        trees = {
            d.id: spanning_tree(topo, d.gm) for d in self.domain_specs if d.gm is not None
        }
        self.nodes: dict[int, NodeState] = {}
        for nid in sorted(topo.nodes):
            spec = topo.nodes[nid]
            clock = Clock(spec.clock, self._stream(nid, _CLOCK_STREAM))
            ports = {nb: PortState(nb, ln) for nb, ln in topo.adjacency[nid]}
            domains = {}
            for d in self.domain_specs:
                ds = DomainState(d.id, d.gm)
                if d.gm is not None:
                    ds.roles = self._static_roles(nid, ports, trees[d.id])
                else:
                    ds.announces = {p: None for p in ports}
                    ds.ann_version = {p: 0 for p in ports}
                domains[d.id] = ds
            node = NodeState(spec, clock, self._stream(nid, _PROC_STREAM), ports, domains)
            if self.hs is not None:
                node.selector = SelectorState(active=self.hs.primary_domain)
            self.nodes[nid] = node
            for d in node.domains.values():
                if d.is_bmca:
                    self._apply_bmca(node, d, run_bmca(nid, node.dataset(d.id), d.announces), 0, announce=False)

        for f in self.scenario.faults:
            if f.kind is FaultKind.PHASE_GLITCH:
                from .clock import PhaseGlitch
                self.nodes[f.node].clock.inject_glitch(PhaseGlitch(f.at, f.magnitude))
            elif f.kind is FaultKind.GM_HARD_FAILURE:
                prev = self.failed_at.get(f.node)
                self.failed_at[f.node] = f.at if prev is None else min(prev, f.at)

        if self.fiveg is not None:
            cfg = self.fiveg
            self.fiveg_mode = FiveGSMode(cfg.mode, cfg.service_active, cfg.direction)
            self.fiveg_clock = FiveGSClock(
                internal=self.nodes[cfg.node].clock,
                ue_sync_error_min=cfg.ue_sync_error_min,
                ue_sync_error_max=cfg.ue_sync_error_max,
                error_model=cfg.error_model,
                rng=self._stream(cfg.node, _FIVEG_STREAM),
            )

    @staticmethod
    def _static_roles(nid, ports, parent) -> dict[int, PortRole]:
        roles = {}
        for p in ports:
            if parent.get(nid) == p:
                roles[p] = PortRole.TIME_RECEIVER
            elif parent.get(p) == nid:
                roles[p] = PortRole.TIME_TRANSMITTER
            else:
                roles[p] = PortRole.PASSIVE
        return roles

    def _schedule_initial(self):
        q, p = self.queue, self.params
        for nid, node in self.nodes.items():
            if node.ports:
                q.schedule(0, "pdelay_tick", nid)
            if any(d.is_bmca for d in node.domains.values()):
                q.schedule(0, "announce_tick", nid)
            if node.spec.gm_capable:
                for d in node.domains.values():
                    if d.is_bmca or d.static_gm == nid:
                        q.schedule(p.sync_offset, "sync_tick", nid, d.id)
            if node.spec.clock.wander_sigma > 0:
                q.schedule(p.wander_step, "wander", nid)
        for f in self.scenario.faults:
            q.schedule(f.at, "fault", f)
        q.schedule(p.sync_offset, "sample")

    # ------------------------------------------------------------ helpers

    def alive(self, nid: int, t: int) -> bool:
        f = self.failed_at.get(nid)
        return f is None or t <= f

    def _send(self, src: int, dst: int, msg: tuple, t: int):
        if not self.alive(src, t):
            return
        link = self.nodes[src].ports[dst].link
        self.queue.schedule(t + link.delay(src), "deliver", dst, src, msg)

    def _apply_bmca(self, node: NodeState, ds: DomainState, result: BmcaResult, t: int, announce=True):
        if result == ds.bmca:
            return
        ds.bmca = result
        ds.roles = dict(result.roles)
        if result.receiver_port is not None:
            ann = ds.announces[result.receiver_port]
            ds.best_path = ann.path_trace if ann is not None else ()
        else:
            ds.best_path = ()
        if announce:
            if ds.grandmaster(self.nodes) is None:
                self.trace.annotations["no_grandmaster"] += 1
            self._send_announces(node, ds, t)
            self._evaluate(t, node)

    def _send_announces(self, node: NodeState, ds: DomainState, t: int):
        ann = announce_to_send(node.id, ds.bmca, ds.best_path)
        if ann is None:
            return
        for p in ds.tx_ports():
            self._send(node.id, p, ("ann", ds.id, ann), t)

    def _gm_origin(self, node: NodeState, domain: int, local: int) -> int | None:
        hs = self.hs
        if hs is not None and node.id == hs.standby_gm and domain == hs.standby_domain:
            lock = node.domains[hs.primary_domain].lock
            return None if lock is None else lock.gm_time(local)
        return local

    def gm_reference(self, gm: int, domain: int, t: int) -> int:
        """True time of GM ``gm`` in ``domain`` at true time ``t`` (noise-free)."""
        node = self.nodes[gm]
        ref = self._gm_origin(node, domain, node.clock.phase(t))
        if ref is None:
            raise ContractError(f"standby GM {gm} has no time yet")
        return ref

    def _is_receiver(self, node: NodeState) -> bool:
        hs = self.hs
        if hs is not None:
            return node.id not in (hs.primary_gm, hs.standby_gm)
        return True

    def _active_domain(self, node: NodeState) -> int:
        if node.selector is not None:
            return node.selector.active
        return self.domain_specs[0].id

    # ------------------------------------------------------------ run

    def run(self) -> MetricsTrace:
        self._schedule_initial()
        q = self.queue
        handlers = self._handlers
        until = self.until
        last = 0
        while True:
            ev = q.pop()
            if ev is None or ev.at > until:
                break
            if ev.at < last:
                raise AssertionError("event time went backwards")
            last = ev.at
            handlers[ev.kind](ev.at, *ev.payload)
        self.trace.end = until
        self.trace.faults = list(self.scenario.faults)
        for nid, node in self.nodes.items():
            self.trace.elections[nid] = {d.id: d.grandmaster(self.nodes) for d in node.domains.values()}
        self.trace.annotations["orphan_follow_up"] += sum(n.matcher.orphans for n in self.nodes.values())
        self.trace.annotations = +self.trace.annotations
        return self.trace

    # ------------------------------------------------------------ announce / BMCA

    def _on_announce_tick(self, t, nid):
        node = self.nodes[nid]
        if not self.alive(nid, t):
            return
        for ds in node.domains.values():
            if ds.is_bmca and ds.bmca is not None:
                self._send_announces(node, ds, t)
        self.queue.schedule(t + self.params.announce_interval, "announce_tick", nid)

    def _on_announce(self, t, node: NodeState, port: int, domain: int, ann: Announce):
        ds = node.domains.get(domain)
        if ds is None or not ds.is_bmca:
            return
        ds.ann_version[port] += 1
        if node.id in ann.path_trace or ann.dataset.steps_removed >= 255:
            # the neighbor's best path runs through us: nothing usable on this port
            ds.announces[port] = None
        else:
            ds.announces[port] = ann
            timeout = self.params.announce_timeout * self.params.announce_interval
            self.queue.schedule(t + timeout, "announce_timeout", node.id, domain, port, ds.ann_version[port])
        self._apply_bmca(node, ds, run_bmca(node.id, node.dataset(domain), ds.announces), t)

    def _on_announce_timeout(self, t, nid, domain, port, version):
        node = self.nodes[nid]
        ds = node.domains[domain]
        if ds.ann_version[port] != version or not self.alive(nid, t):
            return
        ds.announces[port] = None
        self._apply_bmca(node, ds, run_bmca(nid, node.dataset(domain), ds.announces), t)

    # ------------------------------------------------------------ peer delay

    def _on_pdelay_tick(self, t, nid):
        if not self.alive(nid, t):
            return
        node = self.nodes[nid]
        for p, ps in node.ports.items():
            node.pdelay_seq += 1
            ps.pending_req = (node.pdelay_seq, node.clock.timestamp(t))
            self._send(nid, p, ("preq", node.pdelay_seq), t)
        self.queue.schedule(t + self.params.pdelay_interval, "pdelay_tick", nid)

    def _on_pdelay_resp(self, t, nid, port, seq, t2):
        t3 = self.nodes[nid].clock.timestamp(t)
        self._send(nid, port, ("presp", seq, t2, t3), t)

    def _on_presp(self, t, node: NodeState, port: int, seq: int, t2: int, t3: int):
        ps = node.ports[port]
        if ps.pending_req is None or ps.pending_req[0] != seq:
            return
        t1 = ps.pending_req[1]
        ps.pending_req = None
        t4 = node.clock.timestamp(t)
        if self.params.rate_ratio and ps.last_pair is not None and t4 > ps.last_pair[1]:
            ps.nrr = estimate_rate_ratio(ps.last_pair, (t3, t4))
        ps.last_pair = (t3, t4)
        ps.mean_delay = pdelay_from_timestamps(t1, t2, t3, t4, ps.nrr)

    # ------------------------------------------------------------ sync

    def _on_sync_tick(self, t, nid, domain):
        if not self.alive(nid, t):
            return
        self.queue.schedule(t + self.params.sync_interval, "sync_tick", nid, domain)
        node = self.nodes[nid]
        ds = node.domains[domain]
        if not ds.is_gm(nid):
            return
        hs = self.hs
        if hs is not None and nid == hs.standby_gm and domain == hs.standby_domain and not ds.gate_open:
            prim = node.domains[hs.primary_domain]
            offset = None
            local = node.clock.phase(t)
            if prim.health is not None and prim.lock is not None and is_synced(prim.health, hs, local):
                offset = prim.health.last_offset
            if standby_gate(offset, hs) is GateDecision.HOLD:
                return
            ds.gate_open = True
            self.trace.annotations["standby_gate_open"] += 1
        egress = node.clock.timestamp(t)
        origin = self._gm_origin(node, domain, egress)
        if origin is None:
            return
        ratio = 1.0
        if hs is not None and nid == hs.standby_gm and domain == hs.standby_domain:
            # derived time runs at the primary's rate, not at the local oscillator's
            ratio = node.domains[hs.primary_domain].lock.rate_ratio
        ds.sync_seq += 1
        sync = SyncEvent(domain, origin, 0, ratio, ds.sync_seq, gm=nid)
        for p in ds.tx_ports():
            self._send(nid, p, ("sync", domain, ds.sync_seq), t)
            self._send(nid, p, ("fu", sync), t)

    def _on_sync(self, t, node: NodeState, port: int, domain: int, seq: int):
        ds = node.domains.get(domain)
        if ds is None or ds.roles.get(port) is not PortRole.TIME_RECEIVER:
            self.trace.annotations["sync_not_on_receiver_port"] += 1
            return
        if node.ports[port].mean_delay is None:
            self.trace.annotations["sync_before_pdelay"] += 1
            return
        ingress = node.clock.timestamp(t)
        node.matcher.on_sync(domain, seq, ingress)
        tx = ds.tx_ports()
        if not tx:
            return
        key = (domain, seq)
        fg = self.fiveg
        if fg is not None and node.id == fg.node:
            tsi = self.fiveg_clock.ingress_stamp(
                key, t, ue_side=port in fg.ds_tt_ports, active=self.fiveg_mode.service_active,
            )
            hold = fg.transit
            if fg.transit_jitter:
                hold += int(node.rng.integers(-fg.transit_jitter, fg.transit_jitter, endpoint=True))
        else:
            tsi = None
            hold = node.spec.residence
            if node.spec.residence_jitter:
                j = node.spec.residence_jitter
                hold += int(node.rng.integers(-j, j, endpoint=True))
            hold = max(hold, 0)
        ds.forwarding[key] = [port, ingress, None, tsi]
        self.queue.schedule(t + hold, "egress", node.id, domain, seq)

    def _on_follow_up(self, t, node: NodeState, port: int, sync: SyncEvent):
        ingress = node.matcher.on_follow_up(sync)
        if ingress is None:
            return
        ds = node.domains[sync.domain]
        ps = node.ports[port]
        est = receive_sync(sync, ingress, ps.mean_delay, ps.nrr if self.params.rate_ratio else 1.0)
        fwd = ds.forwarding.get((sync.domain, sync.seq))
        if fwd is not None:
            fwd[2] = sync
        self._update_estimate(t, node, ds, est)

    def _on_egress(self, t, nid, domain, seq):
        node = self.nodes[nid]
        ds = node.domains[domain]
        key = (domain, seq)
        fwd = ds.forwarding.pop(key, None)
        if fwd is None or not self.alive(nid, t):
            return
        in_port, ingress, sync_in, tsi = fwd
        if sync_in is None:
            self.trace.annotations["egress_without_follow_up"] += 1
            return
        ps = node.ports[in_port]
        nrr = ps.nrr if self.params.rate_ratio else 1.0
        fg = self.fiveg
        is_5gs = fg is not None and nid == fg.node
        egress = None if is_5gs else node.clock.timestamp(t)
        for p in ds.tx_ports():
            if is_5gs:
                out = self._fiveg_egress(t, node, ps, p, key, sync_in, tsi, nrr)
            else:
                out = forward_sync(sync_in, ingress, egress, nrr, ps.mean_delay)
            self._send(nid, p, ("sync", domain, seq), t)
            self._send(nid, p, ("fu", out), t)
        if is_5gs:
            self.fiveg_clock.release(key)

    def _fiveg_egress(self, t, node, in_ps, out_port, key, sync_in, tsi, nrr) -> SyncEvent:
        mode, fg = self.fiveg_mode, self.fiveg
        if not mode.service_active or tsi is None:
            self.trace.annotations["fiveg_uncorrected"] += 1
            return sync_in
        tse = self.fiveg_clock.egress_stamp(key, t, ue_side=out_port in fg.ds_tt_ports)
        residence = residence_time(tsi, tse)
        ratio = sync_in.rate_ratio * nrr
        link = in_ps.mean_delay if ratio == 1.0 else int(round(in_ps.mean_delay * ratio))
        folded = SyncEvent(sync_in.domain, sync_in.precise_origin, sync_in.correction + link,
                           sync_in.rate_ratio, sync_in.seq, sync_in.gm)
        return apply_mode(folded, mode, residence, ratio, origin=tse.value)

    # ------------------------------------------------------------ estimates and health

    def _update_estimate(self, t, node: NodeState, ds: DomainState, est: GmEstimate):
        prev = ds.estimate
        ds.estimate = est
        ds.health_version += 1
        if prev is not None and prev.gm == est.gm:
            residual = (est.last_update - est.offset) - prev.gm_time(est.last_update)
            ds.health = DomainHealth(ds.id, residual, est.last_update)
            self.queue.schedule(
                t + self.health_cfg.is_synced_staleness + 1, "health_timer", node.id, ds.id, ds.health_version,
            )
        else:
            ds.health = None
        local = node.clock.phase(t)
        healthy = is_synced(ds.health, self.health_cfg, local)
        hs = self.hs
        if hs is not None and node.id == hs.standby_gm and ds.id == hs.primary_domain and healthy:
            ds.lock = est
        self._evaluate(t, node)

    def _on_health_timer(self, t, nid, domain, version):
        node = self.nodes[nid]
        ds = node.domains[domain]
        if ds.health_version != version or not self.alive(nid, t):
            return
        local = node.clock.phase(t)
        remaining = ds.health.last_update + self.health_cfg.is_synced_staleness - local
        if remaining >= 0:
            # slow local clock: staleness not reached yet on the node's own timebase
            self.queue.schedule(t + remaining + 1, "health_timer", nid, domain, version)
            return
        self._evaluate(t, node)

    def _on_recheck(self, t, nid):
        if self.alive(nid, t):
            self._evaluate(t, self.nodes[nid])

    def _evaluate(self, t, node: NodeState):
        """Refresh health flags, run the domain selector, track the time source."""
        local = node.clock.phase(t)
        for ds in node.domains.values():
            ok = is_synced(ds.health, self.health_cfg, local)
            if ok != ds.synced:
                ds.synced = ok
                self.trace.health.append(HealthEvent(node.id, t, ds.id, ok))
        if not self._is_receiver(node):
            return
        if node.selector is not None:
            hs = self.hs
            doms = node.domains
            node.selector = select_domain(
                doms[hs.primary_domain].health, doms[hs.standby_domain].health,
                node.selector, hs, local,
            )
        active = self._active_domain(node)
        est = node.domains[active].estimate
        if est is not None and not node.domains[active].is_gm(node.id):
            source = (active, est.gm)
            if node.source is not None and source != node.source:
                self._record_switch(t, node, node.source, source)
            node.source = source
        valid = any(
            ds.estimate is not None and ds.synced and self.alive(ds.estimate.gm, t)
            for ds in node.domains.values()
        ) or (node.spec.gm_capable and node.domains[active].is_gm(node.id))
        if valid != node.valid:
            node.valid = valid
            self.trace.validity.append(ValidityEvent(node.id, t, valid))

    def _record_switch(self, t, node: NodeState, old, new):
        self.trace.switches.append(SwitchEvent(node.id, t, old[0], new[0], old[1], new[1]))
        old_est = node.domains[old[0]].estimate
        if old_est is not None and old_est.gm != old[1]:
            old_est = None
        local = node.clock.phase(t)
        if old_est is not None:
            err = old_est.gm_time(local) - self.gm_reference(old[1], old[0], t)
            self.trace.samples.append(TimeErrorSample(node.id, t, old[0], err))
        new_est = node.domains[new[0]].estimate
        err = new_est.gm_time(local) - self.gm_reference(new[1], new[0], t)
        self.trace.samples.append(TimeErrorSample(node.id, t, new[0], err))

    # ------------------------------------------------------------ misc events

    def _on_deliver(self, t, dst, src, msg):
        if not self.alive(dst, t):
            return
        node = self.nodes[dst]
        kind = msg[0]
        if kind == "sync":
            self._on_sync(t, node, src, msg[1], msg[2])
        elif kind == "fu":
            self._on_follow_up(t, node, src, msg[1])
        elif kind == "ann":
            self._on_announce(t, node, src, msg[1], msg[2])
        elif kind == "preq":
            t2 = node.clock.timestamp(t)
            self.queue.schedule(t + self.params.pdelay_turnaround, "pdelay_resp", dst, src, msg[1], t2)
        elif kind == "presp":
            self._on_presp(t, node, src, msg[1], msg[2], msg[3])

    def _on_wander(self, t, nid):
        node = self.nodes[nid]
        node.clock.advance_wander(t - node.clock.eval_point)
        self.queue.schedule(t + self.params.wander_step, "wander", nid)

    def _on_sample(self, t):
        for node in self.nodes.values():
            if not self.alive(node.id, t) or not self._is_receiver(node):
                continue
            active = self._active_domain(node)
            ds = node.domains[active]
            est = ds.estimate
            if est is None or ds.is_gm(node.id):
                continue
            err = est.gm_time(node.clock.phase(t)) - self.gm_reference(est.gm, active, t)
            self.trace.samples.append(TimeErrorSample(node.id, t, active, err))
        self.queue.schedule(t + self.params.sync_interval, "sample")

    def _on_fault(self, t, fault: FaultSpec):
        log.debug("fault %s at %d", fault.kind.value, t)
        if fault.kind is FaultKind.SERVICE_TOGGLE:
            self.fiveg_mode = set_service(self.fiveg_mode, fault.active)
        elif fault.kind is FaultKind.GM_HARD_FAILURE:
            # the node still emits at exactly t; sources are re-judged right after
            for nid in self.nodes:
                self.queue.schedule(t + 1, "recheck", nid)


def run(scenario: Scenario, seed: int | None = None, until: int | None = None) -> MetricsTrace:
    return Simulation(scenario, seed=seed, until=until).run()
