"""Scenario description, JSON loading and canonical serialization.

Durations may be written as integer picoseconds or with a unit suffix
("125ms", "-250ns"); they are normalized to integers at load time and
always serialized back as integer picoseconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .clock import ClockParams, Timescale, as_fraction
from .errors import TopologyError
from .fiveg import BridgeMode, Direction, ErrorModel
from .hot_standby import HotStandbyConfig
from .network import Link, NodeKind, NodeSpec, StaticRole, Topology, validate_topology
from .timebase import MS, NS, S, US, parse_duration


class ScenarioError(ValueError):
    pass


class FaultKind(str, Enum):
    GM_HARD_FAILURE = "GmHardFailure"
    PHASE_GLITCH = "PhaseGlitch"
    SERVICE_TOGGLE = "ServiceToggle"


@dataclass(frozen=True)
class FaultSpec:
    kind: FaultKind
    at: int
    node: int | None = None
    magnitude: int | None = None
    active: bool | None = None

    def __post_init__(self):
        if self.kind in (FaultKind.GM_HARD_FAILURE, FaultKind.PHASE_GLITCH) and self.node is None:
            raise ValueError(f"{self.kind.value} needs a target node")
        if self.kind is FaultKind.PHASE_GLITCH and not self.magnitude:
            raise ValueError("PhaseGlitch needs a non-zero magnitude")
        if self.kind is FaultKind.SERVICE_TOGGLE and self.active is None:
            raise ValueError("ServiceToggle needs 'active'")


@dataclass(frozen=True)
class GptpParams:
    sync_interval: int = 125 * MS
    announce_interval: int = 1 * S
    announce_timeout: int = 3
    pdelay_interval: int = 1 * S
    pdelay_turnaround: int = 10 * US
    # first Sync goes out after link delays have been measured
    sync_offset: int = 1 * MS
    rate_ratio: bool = True
    wander_step: int = 125 * MS

    def __post_init__(self):
        for name in ("sync_interval", "announce_interval", "pdelay_interval", "wander_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.announce_timeout < 1:
            raise ValueError("announce_timeout must be >= 1 interval")
        if self.pdelay_turnaround < 0 or self.sync_offset < 0:
            raise ValueError("pdelay_turnaround and sync_offset must be >= 0")


@dataclass(frozen=True)
class DomainSpec:
    """A gPTP domain. ``gm`` set means a statically configured GM (no BMCA)."""

    id: int
    gm: int | None = None


@dataclass(frozen=True)
class FiveGConfig:
    node: int
    ds_tt_ports: tuple[int, ...]
    mode: BridgeMode = BridgeMode.E2E_TRANSPARENT
    service_active: bool = True
    direction: Direction = Direction.DOWNLINK
    ue_sync_error_min: int = 470 * NS
    ue_sync_error_max: int = 540 * NS
    error_model: ErrorModel = ErrorModel.PER_MESSAGE
    transit: int = 1 * MS
    transit_jitter: int = 100 * US

    def __post_init__(self):
        if not 0 <= self.ue_sync_error_min <= self.ue_sync_error_max:
            raise ValueError("need 0 <= ue_sync_error_min <= ue_sync_error_max")
        if self.transit < 0 or self.transit_jitter < 0 or self.transit_jitter > self.transit:
            raise ValueError("need 0 <= transit_jitter <= transit")


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[NodeSpec, ...] = ()
    links: tuple[Link, ...] = ()
    gptp: GptpParams = field(default_factory=GptpParams)
    domains: tuple[DomainSpec, ...] = (DomainSpec(0),)
    hot_standby: HotStandbyConfig | None = None
    fiveg: FiveGConfig | None = None
    faults: tuple[FaultSpec, ...] = ()
    duration: int = 60 * S
    seed: int = 0
    name: str = ""

    def node(self, node_id: int) -> NodeSpec:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def effective_hot_standby(self) -> HotStandbyConfig | None:
        hs = self.hot_standby
        if hs is None:
            return None
        roles = {n.static_role: n.id for n in self.nodes if n.static_role is not None}
        return replace(
            hs,
            primary_gm=roles.get(StaticRole.PRIMARY_GM, hs.primary_gm),
            standby_gm=roles.get(StaticRole.HOT_STANDBY_GM, hs.standby_gm),
        )

    def effective_domains(self) -> tuple[DomainSpec, ...]:
        doms = {d.id: d for d in self.domains}
        hs = self.effective_hot_standby()
        if hs is not None:
            doms[hs.primary_domain] = DomainSpec(hs.primary_domain, hs.primary_gm)
            doms[hs.standby_domain] = DomainSpec(hs.standby_domain, hs.standby_gm)
        return tuple(doms[k] for k in sorted(doms))

    def sync_health_config(self) -> HotStandbyConfig:
        """Thresholds used for isSynced, also when hot standby is off."""
        hs = self.effective_hot_standby()
        if hs is not None:
            return hs
        return HotStandbyConfig(is_synced_staleness=3 * self.gptp.sync_interval)

    def validate(self) -> Topology:
        topo = validate_topology(self.nodes, self.links)
        ids = set(topo.nodes)
        seen = set()
        for d in self.domains:
            if d.id in seen:
                raise TopologyError(f"duplicate domain {d.id}", d)
            seen.add(d.id)
            if d.gm is not None and (d.gm not in ids or not topo.nodes[d.gm].gm_capable):
                raise TopologyError(f"domain {d.id} GM {d.gm} is not a gm_capable node", d)
        hs = self.effective_hot_standby()
        if hs is not None:
            if hs.primary_gm is None or hs.standby_gm is None:
                raise TopologyError("hot standby needs one PrimaryGM and one HotStandbyGM node", hs)
            if hs.primary_gm == hs.standby_gm:
                raise TopologyError("primary and standby GM must differ", hs)
            for gm in (hs.primary_gm, hs.standby_gm):
                if gm not in ids or not topo.nodes[gm].gm_capable:
                    raise TopologyError(f"hot standby GM {gm} is not a gm_capable node", hs)
        if self.fiveg is not None:
            f = self.fiveg
            if f.node not in ids or topo.nodes[f.node].kind is not NodeKind.FIVEGS_BRIDGE:
                raise TopologyError(f"fiveg.node {f.node} is not a FiveGSBridge", f)
            nbs = {nb for nb, _ in topo.adjacency[f.node]}
            for p in f.ds_tt_ports:
                if p not in nbs:
                    raise TopologyError(f"DS-TT port {p} is not a neighbor of node {f.node}", f)
        for fault in self.faults:
            if fault.node is not None and fault.node not in ids:
                raise TopologyError(f"fault targets unknown node {fault.node}", fault)
            if fault.kind is FaultKind.SERVICE_TOGGLE and self.fiveg is None:
                raise TopologyError("ServiceToggle fault without a fiveg section", fault)
            if fault.at < 0:
                raise TopologyError("fault time must be >= 0", fault)
        if self.duration < 0:
            raise TopologyError("duration must be >= 0", self.duration)
        return topo


# ---------------------------------------------------------------- parsing

_DURATION_FIELDS = {
    "offset0", "granularity", "latency", "asymmetry", "residence", "residence_jitter",
    "sync_interval", "announce_interval", "pdelay_interval", "pdelay_turnaround",
    "sync_offset", "wander_step", "is_synced_offset_threshold", "is_synced_staleness",
    "standby_sync_gate_threshold", "ue_sync_error_min", "ue_sync_error_max", "transit",
    "transit_jitter", "at", "magnitude", "duration",
}


class _Reader:
    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ScenarioError(f"{path or 'scenario'}: expected an object")
        self.data = data
        self.path = path

    def where(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def check_keys(self, allowed):
        unknown = sorted(set(self.data) - set(allowed))
        if unknown:
            raise ScenarioError(f"{self.where(unknown[0])}: unknown key")

    def has(self, key):
        return key in self.data

    def get(self, key, conv=None, default=None, required=False):
        if key not in self.data:
            if required:
                raise ScenarioError(f"{self.where(key)}: required key missing")
            return default
        raw = self.data[key]
        try:
            if key in _DURATION_FIELDS and conv is None:
                return parse_duration(raw)
            return conv(raw) if conv else raw
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"{self.where(key)}: {exc}") from None


def _int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"expected an integer, got {v!r}")
    return v


def _bool(v) -> bool:
    if not isinstance(v, bool):
        raise ValueError(f"expected true/false, got {v!r}")
    return v


def _drift(v):
    if isinstance(v, bool):
        raise ValueError(f"bad drift {v!r}")
    if isinstance(v, str):
        return Fraction(v)
    as_fraction(v)
    return v


def _float(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _names(cls):
    return [f.name for f in fields(cls)]


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where or cls.__name__}: {exc}") from None


def _clock(data, path) -> ClockParams:
    r = _Reader(data, path)
    r.check_keys(_names(ClockParams))
    kw = {}
    for k in ("offset0", "granularity"):
        if r.has(k):
            kw[k] = r.get(k)
    if r.has("drift_ppm"):
        kw["drift_ppm"] = r.get("drift_ppm", _drift)
    for k in ("wander_sigma", "jitter_sigma"):
        if r.has(k):
            kw[k] = r.get(k, _float)
    if r.has("timescale"):
        kw["timescale"] = r.get("timescale", Timescale)
    return _build(ClockParams, kw, path)


def _node(data, path) -> NodeSpec:
    r = _Reader(data, path)
    r.check_keys(_names(NodeSpec))
    kw = {"id": r.get("id", _int, required=True)}
    if r.has("label"):
        kw["label"] = r.get("label", str)
    if r.has("kind"):
        kw["kind"] = r.get("kind", NodeKind)
    if r.has("clock"):
        kw["clock"] = _clock(data["clock"], r.where("clock"))
    if r.has("gm_capable"):
        kw["gm_capable"] = r.get("gm_capable", _bool)
    if r.has("static_role"):
        kw["static_role"] = r.get("static_role", lambda v: None if v is None else StaticRole(v))
    for k in ("priority1", "clock_class", "clock_accuracy", "priority2"):
        if r.has(k):
            kw[k] = r.get(k, _int)
            if not 0 <= kw[k] <= 255:
                raise ScenarioError(f"{r.where(k)}: must be in 0..255")
    if r.has("variance"):
        kw["variance"] = r.get("variance", _int)
        if not 0 <= kw["variance"] <= 0xFFFF:
            raise ScenarioError(f"{r.where('variance')}: must be in 0..65535")
    for k in ("residence", "residence_jitter"):
        if r.has(k):
            kw[k] = r.get(k)
    return _build(NodeSpec, kw, path)


def _link(data, path) -> Link:
    r = _Reader(data, path)
    r.check_keys(_names(Link))
    return _build(Link, {
        "a": r.get("a", _int, required=True),
        "b": r.get("b", _int, required=True),
        "latency": r.get("latency", required=True),
        "asymmetry": r.get("asymmetry", default=0),
    }, path)


def _simple(cls, data, path, convs):
    r = _Reader(data, path)
    r.check_keys(_names(cls))
    kw = {}
    for name in _names(cls):
        if r.has(name) and data[name] is not None:
            kw[name] = r.get(name, convs.get(name))
    return _build(cls, kw, path)


def _fault(data, path) -> FaultSpec:
    return _simple(FaultSpec, data, path, {
        "kind": FaultKind, "node": _int, "active": _bool,
    })


def scenario_from_dict(data: dict) -> Scenario:
    r = _Reader(data, "")
    r.check_keys(_names(Scenario))
    kw = {}
    if r.has("name"):
        kw["name"] = r.get("name", str)
    if r.has("seed"):
        kw["seed"] = r.get("seed", _int)
    if r.has("duration"):
        kw["duration"] = r.get("duration")
    nodes = r.get("nodes", default=[])
    links = r.get("links", default=[])
    if not isinstance(nodes, list) or not isinstance(links, list):
        raise ScenarioError("nodes and links must be lists")
    kw["nodes"] = tuple(_node(n, f"nodes[{i}]") for i, n in enumerate(nodes))
    kw["links"] = tuple(_link(ln, f"links[{i}]") for i, ln in enumerate(links))
    if r.has("gptp"):
        kw["gptp"] = _simple(GptpParams, data["gptp"], "gptp", {
            "announce_timeout": _int, "rate_ratio": _bool,
        })
    if r.has("domains"):
        doms = data["domains"]
        if not isinstance(doms, list) or not doms:
            raise ScenarioError("domains: expected a non-empty list")
        kw["domains"] = tuple(
            _simple(DomainSpec, d, f"domains[{i}]", {"id": _int, "gm": lambda v: None if v is None else _int(v)})
            for i, d in enumerate(doms)
        )
    if r.has("hot_standby") and data["hot_standby"] is not None:
        hs_data = dict(data["hot_standby"]) if isinstance(data["hot_standby"], dict) else data["hot_standby"]
        hs = _simple(HotStandbyConfig, hs_data, "hot_standby", {
            "primary_domain": _int, "standby_domain": _int,
            "primary_gm": _int, "standby_gm": _int,
        })
        if "is_synced_staleness" not in hs_data:
            sync_interval = kw.get("gptp", GptpParams()).sync_interval
            hs = replace(hs, is_synced_staleness=3 * sync_interval)
        kw["hot_standby"] = hs
    if r.has("fiveg") and data["fiveg"] is not None:
        kw["fiveg"] = _simple(FiveGConfig, data["fiveg"], "fiveg", {
            "node": _int,
            "ds_tt_ports": lambda v: tuple(_int(x) for x in v),
            "mode": BridgeMode, "service_active": _bool, "direction": Direction,
            "error_model": ErrorModel,
        })
    faults = r.get("faults", default=[])
    if not isinstance(faults, list):
        raise ScenarioError("faults: expected a list")
    kw["faults"] = tuple(_fault(f, f"faults[{i}]") for i, f in enumerate(faults))
    sc = _build(Scenario, kw, "scenario")
    try:
        sc.validate()
    except TopologyError as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from None
    return sc


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


SHIPPED_DIR = Path(__file__).parent / "scenarios"


def resolve_scenario_path(path: str | Path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    shipped = SHIPPED_DIR / p.name
    if not p.parent.parts and shipped.exists():
        return shipped
    raise FileNotFoundError(f"scenario file not found: {path}")


def load_scenario(path: str | Path) -> Scenario:
    p = resolve_scenario_path(path)
    return loads_scenario(p.read_text(encoding="utf-8"), str(p))


# ---------------------------------------------------------- serialization

def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    return value


def scenario_to_dict(sc: Scenario) -> dict:
    return _plain(sc)


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, ensure_ascii=False) + "\n"
