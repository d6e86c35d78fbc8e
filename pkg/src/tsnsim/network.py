"""Topology description and validation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .clock import ClockParams
from .errors import TopologyError


class NodeKind(str, Enum):
    END_STATION = "EndStation"
    BRIDGE = "Bridge"
    FIVEGS_BRIDGE = "FiveGSBridge"


class StaticRole(str, Enum):
    PRIMARY_GM = "PrimaryGM"
    HOT_STANDBY_GM = "HotStandbyGM"


@dataclass(frozen=True)
class NodeSpec:
    """One simulated device.

    The BMCA quality fields are only consulted when ``gm_capable`` is set.
    ``residence`` and ``residence_jitter`` describe how long a bridge holds a
    Sync between ingress and egress (uniform jitter, +/-).
    """

    id: int
    label: str = ""
    kind: NodeKind = NodeKind.BRIDGE
    clock: ClockParams = field(default_factory=ClockParams)
    gm_capable: bool = False
    static_role: StaticRole | None = None
    priority1: int = 248
    clock_class: int = 248
    clock_accuracy: int = 0xFE
    variance: int = 0x4100
    priority2: int = 248
    residence: int = 10_000_000
    residence_jitter: int = 0

    @property
    def name(self) -> str:
        return self.label or f"n{self.id}"


@dataclass(frozen=True)
class Link:
    """Bidirectional link. ``latency`` is the mean one-way delay and
    ``asymmetry`` is (b->a delay) minus (a->b delay)."""

    a: int
    b: int
    latency: int
    asymmetry: int = 0

    def delay(self, src: int) -> int:
        ab = self.latency - self.asymmetry // 2
        return ab if src == self.a else ab + self.asymmetry

    def other(self, node: int) -> int:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class Topology:
    nodes: dict[int, NodeSpec]
    links: tuple[Link, ...]
    adjacency: dict[int, tuple[tuple[int, Link], ...]]

    def neighbors(self, node: int) -> list[tuple[int, Link]]:
        return neighbors(self, node)


def validate_topology(nodes, links) -> Topology:
    nodes = list(nodes)
    links = list(links)
    by_id: dict[int, NodeSpec] = {}
    for n in nodes:
        if n.id in by_id:
            raise TopologyError(f"duplicate node id {n.id}", n)
        by_id[n.id] = n

    roles: dict[StaticRole, int] = {}
    for n in nodes:
        if n.static_role is None:
            continue
        if not n.gm_capable:
            raise TopologyError(f"node {n.id} has a static GM role but is not gm_capable", n)
        if n.static_role in roles:
            raise TopologyError(
                f"two {n.static_role.value} nodes: {roles[n.static_role]} and {n.id}", n
            )
        roles[n.static_role] = n.id

    adj: dict[int, list[tuple[int, Link]]] = {i: [] for i in by_id}
    seen_pairs = set()
    for ln in links:
        for end in (ln.a, ln.b):
            if end not in by_id:
                raise TopologyError(f"link references unknown node {end}", ln)
        if ln.a == ln.b:
            raise TopologyError(f"self-loop on node {ln.a}", ln)
        pair = frozenset((ln.a, ln.b))
        if pair in seen_pairs:
            raise TopologyError(f"parallel link between {ln.a} and {ln.b}", ln)
        seen_pairs.add(pair)
        if ln.latency < 0:
            raise TopologyError("link latency must be >= 0", ln)
        if min(ln.delay(ln.a), ln.delay(ln.b)) < 0:
            raise TopologyError("asymmetry exceeds twice the latency", ln)
        adj[ln.a].append((ln.b, ln))
        adj[ln.b].append((ln.a, ln))

    if by_id:
        start = min(by_id)
        reached = {start}
        queue = deque([start])
        while queue:
            for nb, _ in adj[queue.popleft()]:
                if nb not in reached:
                    reached.add(nb)
                    queue.append(nb)
        missing = sorted(set(by_id) - reached)
        if missing:
            raise TopologyError(f"graph is disconnected; unreachable nodes {missing}", missing)

    adjacency = {i: tuple(sorted(v, key=lambda e: e[0])) for i, v in adj.items()}
    return Topology(nodes=by_id, links=tuple(links), adjacency=adjacency)


def neighbors(topology: Topology, node: int) -> list[tuple[int, Link]]:
    if node not in topology.adjacency:
        raise KeyError(f"unknown node {node}")
    return list(topology.adjacency[node])


def spanning_tree(topology: Topology, root: int) -> dict[int, int | None]:
    """Parent map of the BFS tree from ``root`` (ties broken by lower node id)."""
    parent: dict[int, int | None] = {root: None}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for nb, _ in topology.adjacency[cur]:
            if nb not in parent:
                parent[nb] = cur
                queue.append(nb)
    return parent
