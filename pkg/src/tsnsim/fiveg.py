"""5G system modeled as a single TSN bridge.

The NW-TT (UPF side) and DS-TT (UE side) translators stamp gPTP messages on
the 5GS-internal clock. The stamp taken at the DS-TT additionally carries the
UE-gNB synchronization error, drawn with a magnitude inside
``[ue_sync_error_min, ue_sync_error_max]`` and a random sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .clock import Clock
from .errors import ContractError
from .gptp import SyncEvent
from .timebase import NS


class BridgeMode(str, Enum):
    BOUNDARY_CLOCK = "BoundaryClock"
    P2P_TRANSPARENT = "P2PTransparent"
    E2E_TRANSPARENT = "E2ETransparent"
    TIME_AWARE_SYSTEM = "TimeAwareSystem"


class Direction(str, Enum):
    DOWNLINK = "Downlink"
    UPLINK = "Uplink"


class ErrorModel(str, Enum):
    PER_MESSAGE = "PerMessage"
    SLOW_VARYING = "SlowVarying"


class StampKind(str, Enum):
    TSI = "TSi"
    TSE = "TSe"


@dataclass(frozen=True)
class FiveGSMode:
    mode: BridgeMode = BridgeMode.E2E_TRANSPARENT
    service_active: bool = True
    direction: Direction = Direction.DOWNLINK


@dataclass(frozen=True)
class TTStamp:
    kind: StampKind
    value: int
    msg_seq: object


def set_service(mode: FiveGSMode, active: bool) -> FiveGSMode:
    if mode.service_active == active:
        return mode
    return replace(mode, service_active=active)


@dataclass
class FiveGSClock:
    internal: Clock
    ue_sync_error_min: int = 470 * NS
    ue_sync_error_max: int = 540 * NS
    error_model: ErrorModel = ErrorModel.PER_MESSAGE
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    _pending: dict = field(default_factory=dict, repr=False)
    _walk: tuple[float, int] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 <= self.ue_sync_error_min <= self.ue_sync_error_max:
            raise ValueError("need 0 <= ue_sync_error_min <= ue_sync_error_max")

    def sample_ue_error(self, rng: np.random.Generator | None = None) -> int:
        rng = rng if rng is not None else self.rng
        lo, hi = self.ue_sync_error_min, self.ue_sync_error_max
        if hi == 0:
            return 0
        if self.error_model is ErrorModel.PER_MESSAGE:
            mag = int(rng.integers(lo, hi, endpoint=True))
            return mag if rng.random() < 0.5 else -mag
        # reflected random walk of the magnitude; the sign flips rarely
        if self._walk is None:
            self._walk = (float(rng.uniform(lo, hi)), 1 if rng.random() < 0.5 else -1)
        mag, sign = self._walk
        mag += rng.normal(0.0, (hi - lo) / 20 or 1.0)
        while not lo <= mag <= hi:
            mag = 2 * lo - mag if mag < lo else 2 * hi - mag
            if lo == hi:
                mag = lo
        if rng.random() < 0.01:
            sign = -sign
        self._walk = (mag, sign)
        return sign * int(round(mag))

    def ingress_stamp(self, msg_seq, true_time: int, *, ue_side: bool = False,
                      active: bool = True, rng=None) -> TTStamp | None:
        """TSi on the internal clock; None when the time sync service is off."""
        if not active:
            return None
        value = self.internal.timestamp(true_time)
        if ue_side:
            value += self.sample_ue_error(rng)
        stamp = TTStamp(StampKind.TSI, value, msg_seq)
        self._pending[msg_seq] = stamp
        return stamp

    def egress_stamp(self, msg_seq, true_time: int, rng=None, *, ue_side: bool = True) -> TTStamp:
        if msg_seq not in self._pending:
            raise ContractError(f"no TSi recorded for message {msg_seq!r}")
        value = self.internal.timestamp(true_time)
        if ue_side:
            value += self.sample_ue_error(rng)
        return TTStamp(StampKind.TSE, value, msg_seq)

    def pending_tsi(self, msg_seq) -> TTStamp | None:
        return self._pending.get(msg_seq)

    def release(self, msg_seq):
        self._pending.pop(msg_seq, None)


def residence_time(tsi: TTStamp, tse: TTStamp) -> int:
    if tsi.kind is not StampKind.TSI or tse.kind is not StampKind.TSE:
        raise ContractError("residence_time needs a TSi and a TSe stamp")
    if tsi.msg_seq != tse.msg_seq:
        raise ContractError(f"stamps belong to different messages: {tsi.msg_seq!r} / {tse.msg_seq!r}")
    if tse.value < tsi.value:
        raise ContractError(f"TSe {tse.value} precedes TSi {tsi.value}")
    return tse.value - tsi.value


def apply_mode(
    sync: SyncEvent,
    mode: FiveGSMode,
    residence: int,
    rate_ratio: float,
    origin: int | None = None,
) -> SyncEvent:
    """Account for the 5GS hop according to the operating mode.

    Transparent modes (and the time-aware-system mode) add the residence in
    GM units. Boundary-clock mode regenerates the Sync from the 5GS clock:
    ``origin`` is the internal-clock egress time and the correction restarts
    at zero. With the service inactive the Sync passes through unchanged.
    """
    if not mode.service_active:
        return sync
    if mode.mode is BridgeMode.BOUNDARY_CLOCK:
        if origin is None:
            raise ContractError("boundary-clock mode needs the 5GS origin timestamp")
        return replace(sync, precise_origin=origin, correction=0, rate_ratio=1.0)
    added = residence if rate_ratio == 1.0 else int(round(residence * rate_ratio))
    return replace(sync, correction=sync.correction + added, rate_ratio=rate_ratio)
