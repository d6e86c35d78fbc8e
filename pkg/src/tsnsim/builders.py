"""Small topology constructors used by the shipped scenarios, tests and scripts."""

from __future__ import annotations

from dataclasses import replace

from .clock import ClockParams
from .network import Link, NodeKind, NodeSpec, StaticRole
from .timebase import US

IDEAL = ClockParams.ideal()


def gm(id: int, clock: ClockParams = IDEAL, priority1: int = 128, **kw) -> NodeSpec:
    return NodeSpec(id=id, kind=NodeKind.END_STATION, clock=clock, gm_capable=True,
                    priority1=priority1, **kw)


def bridge(id: int, clock: ClockParams = IDEAL, **kw) -> NodeSpec:
    return NodeSpec(id=id, kind=NodeKind.BRIDGE, clock=clock, **kw)


def station(id: int, clock: ClockParams = IDEAL, **kw) -> NodeSpec:
    return NodeSpec(id=id, kind=NodeKind.END_STATION, clock=clock, **kw)


def chain(n_bridges: int, *, latency: int = 1 * US, residence: int = 10 * US,
          clock: ClockParams = IDEAL, gm_clock: ClockParams = IDEAL,
          end_clock: ClockParams | None = None):
    """GM(0) - bridge(1) - ... - bridge(n) - end station(n+1)."""
    nodes = [gm(0, gm_clock)]
    nodes += [bridge(i, clock, residence=residence) for i in range(1, n_bridges + 1)]
    nodes.append(station(n_bridges + 1, end_clock or clock))
    links = [Link(i, i + 1, latency) for i in range(n_bridges + 1)]
    return tuple(nodes), tuple(links)


def with_roles(nodes, primary: int, standby: int):
    out = []
    for n in nodes:
        if n.id == primary:
            n = replace(n, gm_capable=True, static_role=StaticRole.PRIMARY_GM)
        elif n.id == standby:
            n = replace(n, gm_capable=True, static_role=StaticRole.HOT_STANDBY_GM)
        out.append(n)
    return tuple(out)
