from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from tsnsim.clock import Clock, ClockParams
from tsnsim.errors import ContractError
from tsnsim.gptp import (
    Announce, AnnounceDataset, Comparison, FollowUpMatcher, PortRole, SyncEvent,
    bmca_compare, estimate_rate_ratio, forward_sync, measure_pdelay, receive_sync, run_bmca,
)
from tsnsim.network import Link
from tsnsim.timebase import MS, NS, S, US


def ds(identity, p1=128, **kw):
    base = dict(priority1=p1, clock_class=248, clock_accuracy=0xFE, variance=0x4100, priority2=128,
                clock_identity=identity)
    base.update(kw)
    return AnnounceDataset(**base)


def oracle(a, b):
    ka = (a.priority1, a.clock_class, a.clock_accuracy, a.variance, a.priority2, a.clock_identity, a.steps_removed)
    kb = (b.priority1, b.clock_class, b.clock_accuracy, b.variance, b.priority2, b.clock_identity, b.steps_removed)
    return Comparison.A_BETTER if ka < kb else Comparison.B_BETTER if kb < ka else Comparison.SAME


# --- BMCA comparison

def test_priority1_decides():
    assert bmca_compare(ds(5, p1=10), ds(1, p1=20)) is Comparison.A_BETTER


def test_reflexive_same():
    assert bmca_compare(ds(3), ds(3)) is Comparison.SAME


def test_identity_tie_break():
    assert bmca_compare(ds(0x01), ds(0x02)) is Comparison.A_BETTER


def test_cross_domain_rejected():
    with pytest.raises(ContractError):
        bmca_compare(ds(1, domain=0), ds(1, domain=1))


datasets = st.builds(
    AnnounceDataset,
    priority1=st.integers(0, 255), clock_class=st.integers(0, 255), clock_accuracy=st.integers(0, 255),
    variance=st.integers(0, 0xFFFF), priority2=st.integers(0, 255),
    clock_identity=st.integers(0, 2**64 - 1), steps_removed=st.integers(0, 255),
)


@given(datasets, datasets)
def test_compare_matches_tuple_oracle(a, b):
    assert bmca_compare(a, b) is oracle(a, b)


@given(datasets, datasets)
def test_antisymmetric(a, b):
    flip = {Comparison.A_BETTER: Comparison.B_BETTER, Comparison.B_BETTER: Comparison.A_BETTER,
            Comparison.SAME: Comparison.SAME}
    assert bmca_compare(b, a) is flip[bmca_compare(a, b)]


@given(datasets, datasets, datasets)
def test_transitive(a, b, c):
    if bmca_compare(a, b) is Comparison.A_BETTER and bmca_compare(b, c) is Comparison.A_BETTER:
        assert bmca_compare(a, c) is Comparison.A_BETTER


# --- port roles

def test_alone_elects_itself():
    res = run_bmca(7, ds(7), {})
    assert res.grandmaster == 7 and res.is_grandmaster


def test_no_candidates_is_no_grandmaster():
    res = run_bmca(4, None, {1: None, 2: None})
    assert res.grandmaster is None
    assert set(res.roles.values()) == {PortRole.PASSIVE}


def test_receiver_port_and_passive():
    # node 9 (not gm capable) hears GM 1 on both ports; the longer path goes passive
    near = Announce(replace(ds(1), steps_removed=1), sender=2, path_trace=(1, 2))
    far = Announce(replace(ds(1), steps_removed=2), sender=3, path_trace=(1, 4, 3))
    res = run_bmca(9, None, {2: near, 3: far, 5: None})
    assert res.grandmaster == 1 and res.receiver_port == 2
    assert res.roles == {2: PortRole.TIME_RECEIVER, 3: PortRole.PASSIVE, 5: PortRole.TIME_TRANSMITTER}


def test_chain_elects_unique_best():
    # three nodes A(1) - B(2) - C(3); A has the best dataset
    dsets = {1: ds(1, p1=10), 2: ds(2, p1=20), 3: ds(3, p1=30)}
    ports = {1: [2], 2: [1, 3], 3: [2]}
    best = min(dsets.values(), key=lambda d: d.key())
    announces = {n: {p: None for p in ps} for n, ps in ports.items()}
    results = {}
    for _ in range(4):
        for node in ports:
            results[node] = res = run_bmca(node, dsets[node], announces[node])
            for p in ports[node]:
                if res.roles[p] is PortRole.TIME_TRANSMITTER:
                    ds_out = res.best if res.is_grandmaster else replace(res.best, steps_removed=res.best.steps_removed + 1)
                    announces[p][node] = Announce(ds_out, node, (node,))
    assert {r.grandmaster for r in results.values()} == {best.clock_identity}


def test_timeout_reelects_next_best():
    a1 = Announce(replace(ds(1, p1=10), steps_removed=0), 1, (1,))
    a2 = Announce(replace(ds(2, p1=20), steps_removed=0), 2, (2,))
    assert run_bmca(5, ds(5, p1=30), {1: a1, 2: a2}).grandmaster == 1
    assert run_bmca(5, ds(5, p1=30), {1: None, 2: a2}).grandmaster == 2


# --- timing arithmetic

def test_perfect_sync_zero_offset():
    est = receive_sync(SyncEvent(0, 10 * S, 0, 1.0, 1), 10 * S, 0)
    assert est.offset == 0


def test_receive_sync_arithmetic():
    est = receive_sync(SyncEvent(0, 10 * S, US, 1.0, 1), 10 * S + 2 * US, 500 * NS)
    assert est.offset == 500 * NS


def test_follow_up_seq_mismatch_discarded():
    m = FollowUpMatcher()
    m.on_sync(0, 1, 123)
    assert m.on_follow_up(SyncEvent(0, 0, 0, 1.0, 2)) is None
    assert m.orphans == 1
    assert m.on_follow_up(SyncEvent(0, 0, 0, 1.0, 1)) == 123


def test_forward_residence():
    out = forward_sync(SyncEvent(0, S, 0, 1.0, 1), 0, 250 * US, 1.0, 0)
    assert out.correction == 250 * US


def test_forward_identity_hop():
    sync = SyncEvent(0, S, 17, 1.0, 1)
    assert forward_sync(sync, 5, 5, 1.0, 0) == sync


def test_forward_rate_ratio_scaling():
    out = forward_sync(SyncEvent(0, S, 0, 1.0001, 1), 0, MS, 1.0, 0)
    assert out.correction == 1_000_100_000


def test_forward_egress_before_ingress():
    with pytest.raises(ContractError):
        forward_sync(SyncEvent(0, 0, 0, 1.0, 1), 10, 5, 1.0, 0)


@given(st.integers(0, 10**12), st.integers(0, 10**12), st.integers(0, 10**9), st.integers(0, 10**9),
       st.integers(-10**12, 10**12))
def test_correction_additivity(r1, r2, d1, d2, corr):
    sync = SyncEvent(0, 0, corr, 1.0, 1)
    two = forward_sync(forward_sync(sync, 0, r1, 1.0, d1), 0, r2, 1.0, d2)
    one = forward_sync(sync, 0, r1 + r2, 1.0, d1 + d2)
    assert two == one


def test_rate_ratio_identical_clocks():
    assert estimate_rate_ratio((0, 0), (S, S)) == 1.0


def test_rate_ratio_fast_local():
    local = Clock(ClockParams(drift_ppm=100))
    remote = Clock(ClockParams())
    r = estimate_rate_ratio((remote.timestamp(0), local.timestamp(0)), (remote.timestamp(S), local.timestamp(S)))
    assert r == pytest.approx(1 / (1 + 1e-4), abs=16 * NS / S)


def test_rate_ratio_zero_interval():
    with pytest.raises(ContractError):
        estimate_rate_ratio((0, 5), (10, 5))


def test_pdelay_symmetric():
    a, b = Clock(ClockParams.ideal()), Clock(ClockParams.ideal())
    assert measure_pdelay(Link(0, 1, 500 * NS), a, b, at=S, turnaround=10 * US) == 500 * NS


def test_pdelay_asymmetry_bias():
    a, b = Clock(ClockParams.ideal()), Clock(ClockParams.ideal())
    ln = Link(0, 1, 500 * NS, asymmetry=100 * NS)
    measured = measure_pdelay(ln, a, b, at=S, turnaround=10 * US)
    assert measured == 500 * NS
    assert measured - ln.delay(0) == 50 * NS


@settings(max_examples=50)
@given(st.integers(0, 10**6), st.integers(0, 10**12))
def test_pdelay_quantized(latency, at):
    a, b = Clock(ClockParams(granularity=8 * NS)), Clock(ClockParams(granularity=8 * NS, offset0=3 * NS))
    got = measure_pdelay(Link(0, 1, latency), a, b, at=at, turnaround=10 * US)
    assert abs(got - latency) <= 8 * NS
