"""gPTP building blocks: BMCA, two-step Sync/Follow_Up handling, peer delay.

These are pure functions over small immutable records. The simulator in
:mod:`tsnsim.sim` wires them to message events.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .clock import Clock
from .errors import ContractError
from .network import Link


@dataclass(frozen=True)
class AnnounceDataset:
    priority1: int
    clock_class: int
    clock_accuracy: int
    variance: int
    priority2: int
    clock_identity: int
    steps_removed: int = 0
    domain: int = 0

    def key(self) -> tuple:
        return (
            self.priority1,
            self.clock_class,
            self.clock_accuracy,
            self.variance,
            self.priority2,
            self.clock_identity,
            self.steps_removed,
        )


class Comparison(Enum):
    A_BETTER = "ABetter"
    B_BETTER = "BBetter"
    SAME = "Same"


def bmca_compare(a: AnnounceDataset, b: AnnounceDataset) -> Comparison:
    """Lower tuple wins: priority1, clockClass, clockAccuracy, variance,
    priority2, clockIdentity, stepsRemoved."""
    if a.domain != b.domain:
        raise ContractError(f"cannot compare datasets of domains {a.domain} and {b.domain}")
    ka, kb = a.key(), b.key()
    if ka < kb:
        return Comparison.A_BETTER
    if kb < ka:
        return Comparison.B_BETTER
    return Comparison.SAME


class PortRole(str, Enum):
    TIME_TRANSMITTER = "TimeTransmitter"
    TIME_RECEIVER = "TimeReceiver"
    PASSIVE = "Passive"
    DISABLED = "Disabled"


@dataclass(frozen=True)
class Announce:
    """Announce message as received on a port."""

    dataset: AnnounceDataset
    sender: int
    path_trace: tuple[int, ...] = ()


@dataclass(frozen=True)
class BmcaResult:
    roles: dict[int, PortRole]
    grandmaster: int | None
    best: AnnounceDataset | None
    receiver_port: int | None

    @property
    def is_grandmaster(self) -> bool:
        return self.best is not None and self.receiver_port is None


def _rank(ds: AnnounceDataset, sender: int) -> tuple:
    # sender identity separates equal datasets reaching a node over different paths
    return ds.key() + (sender,)


def run_bmca(
    identity: int,
    own: AnnounceDataset | None,
    announces_per_port: dict[int, Announce | None],
) -> BmcaResult:
    """Elect the best clock from the node's own dataset and current announces.

    ``announces_per_port`` maps each port (neighbor id) to its latest
    unexpired announce, or None. ``own`` is None for nodes that cannot be GM.
    When neither exists the result has ``grandmaster=None`` (NoGrandmaster)
    and every port is Passive.
    """
    candidates: list[tuple[tuple, int | None, AnnounceDataset]] = []
    if own is not None:
        candidates.append((_rank(own, identity), None, own))
    for port in sorted(announces_per_port):
        ann = announces_per_port[port]
        if ann is not None:
            candidates.append((_rank(ann.dataset, ann.sender), port, ann.dataset))

    if not candidates:
        roles = {p: PortRole.PASSIVE for p in announces_per_port}
        return BmcaResult(roles, None, None, None)

    _, best_port, best = min(candidates, key=lambda c: (c[0], -1 if c[1] is None else c[1]))
    roles: dict[int, PortRole] = {}
    if best_port is None:
        for p in announces_per_port:
            roles[p] = PortRole.TIME_TRANSMITTER
        return BmcaResult(roles, best.clock_identity, best, None)

    mine = _rank(replace(best, steps_removed=best.steps_removed + 1), identity)
    for p, ann in announces_per_port.items():
        if p == best_port:
            roles[p] = PortRole.TIME_RECEIVER
        elif ann is not None and _rank(ann.dataset, ann.sender) < mine:
            roles[p] = PortRole.PASSIVE
        else:
            roles[p] = PortRole.TIME_TRANSMITTER
    return BmcaResult(roles, best.clock_identity, best, best_port)


def announce_to_send(identity: int, result: BmcaResult, path: tuple[int, ...]) -> Announce | None:
    if result.best is None:
        return None
    ds = result.best
    if not result.is_grandmaster:
        ds = replace(ds, steps_removed=ds.steps_removed + 1)
    return Announce(ds, identity, path + (identity,))


@dataclass(frozen=True)
class SyncEvent:
    """Timing content of a Sync/Follow_Up pair.

    ``rate_ratio`` is GM frequency over the sending node's frequency.
    """

    domain: int
    precise_origin: int
    correction: int
    rate_ratio: float
    seq: int
    gm: int = -1


@dataclass(frozen=True)
class GmEstimate:
    """Receiver view of the GM after a complete Sync/Follow_Up.

    ``offset`` is local minus GM time at ``last_update`` (local ingress time),
    ``rate_ratio`` is GM frequency over local frequency.
    """

    domain: int
    offset: int
    rate_ratio: float
    last_update: int
    gm: int = -1

    def gm_time(self, local: int) -> int:
        return local - self.offset + int(round((local - self.last_update) * (self.rate_ratio - 1.0)))


def receive_sync(
    sync: SyncEvent,
    ingress_local: int,
    path_delay: int,
    neighbor_rate_ratio: float = 1.0,
) -> GmEstimate:
    """GM time at ingress is origin + correction + path delay (converted to
    GM units through the cumulative rate ratio)."""
    ratio = sync.rate_ratio * neighbor_rate_ratio
    gm_at_ingress = sync.precise_origin + sync.correction + int(round(path_delay * ratio))
    return GmEstimate(
        domain=sync.domain,
        offset=ingress_local - gm_at_ingress,
        rate_ratio=ratio,
        last_update=ingress_local,
        gm=sync.gm,
    )


class FollowUpMatcher:
    """Pairs Follow_Up messages with the Sync ingress timestamp of the same seq."""

    def __init__(self):
        self._pending: dict[tuple[int, int], int] = {}
        self.orphans = 0

    def on_sync(self, domain: int, seq: int, ingress_local: int):
        self._pending[(domain, seq)] = ingress_local

    def on_follow_up(self, sync: SyncEvent) -> int | None:
        ingress = self._pending.pop((sync.domain, sync.seq), None)
        if ingress is None:
            self.orphans += 1
        return ingress


def forward_sync(
    sync: SyncEvent,
    ingress_local: int,
    egress_local: int,
    neighbor_rate_ratio: float,
    link_delay: int,
) -> SyncEvent:
    """Add the bridge residence time and upstream link delay to the correction.

    Both intervals are measured on the bridge's clock and converted to GM
    units with the bridge's cumulative ratio (incoming ratio times the
    neighbor ratio of the upstream link).
    """
    if egress_local < ingress_local:
        raise ContractError("egress timestamp precedes ingress timestamp")
    ratio = sync.rate_ratio * neighbor_rate_ratio
    added = (egress_local - ingress_local) + link_delay
    if ratio != 1.0:
        added = int(round(added * ratio))
    return replace(sync, correction=sync.correction + added, rate_ratio=ratio)


def estimate_rate_ratio(prev: tuple[int, int], curr: tuple[int, int]) -> float:
    """Remote-over-local frequency ratio from two (remote, local) timestamp pairs."""
    d_local = curr[1] - prev[1]
    if d_local <= 0:
        raise ContractError("rate ratio needs a positive local interval")
    return (curr[0] - prev[0]) / d_local


def pdelay_from_timestamps(t1: int, t2: int, t3: int, t4: int, neighbor_rate_ratio: float = 1.0) -> int:
    """Mean link delay in the initiator's time units.

    t1/t4 are the initiator's request egress and response ingress, t2/t3 the
    responder's request ingress and response egress.
    """
    turnaround = t3 - t2
    if neighbor_rate_ratio != 1.0:
        turnaround = turnaround / neighbor_rate_ratio
    return int(round(((t4 - t1) - turnaround) / 2))


def measure_pdelay(
    link: Link,
    clock_a: Clock,
    clock_b: Clock,
    at: int = 0,
    turnaround: int = 0,
    neighbor_rate_ratio: float = 1.0,
) -> int:
    """One peer-delay exchange initiated by ``link.a`` at true time ``at``."""
    d_ab = link.delay(link.a)
    d_ba = link.delay(link.b)
    t1 = clock_a.timestamp(at)
    t2 = clock_b.timestamp(at + d_ab)
    t3 = clock_b.timestamp(at + d_ab + turnaround)
    t4 = clock_a.timestamp(at + d_ab + turnaround + d_ba)
    return pdelay_from_timestamps(t1, t2, t3, t4, neighbor_rate_ratio)
