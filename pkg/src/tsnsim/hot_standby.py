"""Two statically configured GM domains with receiver-side failover.

Domain health is judged per Sync: ``last_offset`` is the residual between
the GM time carried by the newest Sync/Follow_Up and the time predicted by
extrapolating the previous estimate. A healthy domain has a small residual
and a recent update; a phase glitch at the GM shows up as a residual equal
to the glitch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import NotYetSynchronized
from .gptp import GmEstimate
from .timebase import MS, US


@dataclass(frozen=True)
class HotStandbyConfig:
    primary_domain: int = 0
    standby_domain: int = 1
    primary_gm: int | None = None
    standby_gm: int | None = None
    is_synced_offset_threshold: int = 1 * US
    is_synced_staleness: int = 375 * MS
    standby_sync_gate_threshold: int = 1 * US

    def __post_init__(self):
        if self.primary_domain == self.standby_domain:
            raise ValueError("primary and standby domains must differ")
        if self.primary_gm is not None and self.primary_gm == self.standby_gm:
            raise ValueError("primary and standby GM must be different nodes")
        for name in ("is_synced_offset_threshold", "is_synced_staleness", "standby_sync_gate_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    def other(self, domain: int) -> int:
        return self.standby_domain if domain == self.primary_domain else self.primary_domain


@dataclass(frozen=True)
class DomainHealth:
    domain: int
    last_offset: int
    last_update: int


@dataclass(frozen=True)
class SelectorState:
    active: int
    switch_count: int = 0
    last_switch: int | None = None
    holdover: bool = False


class GateDecision(str, Enum):
    TRANSMIT = "Transmit"
    HOLD = "Hold"


def is_synced(health: DomainHealth | None, cfg: HotStandbyConfig, now: int) -> bool:
    if health is None:
        return False
    return (
        abs(health.last_offset) <= cfg.is_synced_offset_threshold
        and now - health.last_update <= cfg.is_synced_staleness
    )


def standby_gate(standby_offset_to_primary: int | None, cfg: HotStandbyConfig) -> GateDecision:
    if standby_offset_to_primary is None:
        return GateDecision.HOLD
    if abs(standby_offset_to_primary) <= cfg.standby_sync_gate_threshold:
        return GateDecision.TRANSMIT
    return GateDecision.HOLD


def select_domain(
    h_primary: DomainHealth | None,
    h_standby: DomainHealth | None,
    state: SelectorState,
    cfg: HotStandbyConfig,
    now: int,
) -> SelectorState:
    """Stay on a healthy active domain; otherwise move to the healthy other one.

    A healthy active domain is never left, so a receiver running on the
    standby returns to the primary only once the standby itself degrades.
    With neither domain healthy the active one is kept and ``holdover`` is set.
    """
    ok = {
        cfg.primary_domain: is_synced(h_primary, cfg, now),
        cfg.standby_domain: is_synced(h_standby, cfg, now),
    }
    if ok[state.active]:
        return replace(state, holdover=False) if state.holdover else state
    target = cfg.other(state.active)
    if not ok[target]:
        return state if state.holdover else replace(state, holdover=True)
    return SelectorState(
        active=target,
        switch_count=state.switch_count + 1,
        last_switch=now,
        holdover=False,
    )


def receiver_time(estimate: GmEstimate | None, local_now: int) -> int:
    """Project local time into the GM timescale of ``estimate``."""
    if estimate is None:
        raise NotYetSynchronized("no Sync/Follow_Up received in this domain yet")
    return estimate.gm_time(local_now)
