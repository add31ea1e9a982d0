"""Simulator laws: configuration, determinism, conservation, serialization."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnsids.errors import InvalidConfig, ParseError
from dnsids.simnet import (AttackKind, Disposition, PacketKind, ScenarioConfig,
                           make_scenario, read_trace, run, write_trace)


def drops(trace):
    return [e for e in trace.events if e.disposition is Disposition.DROPPED_AT_QUEUE]


def server_deliveries(trace):
    return [e for e in trace.events if e.disposition is Disposition.DELIVERED_TO_SERVER]


class TestMakeScenario:
    def test_defaults_match_reference_constants(self):
        cfg = make_scenario()
        assert cfg.queue_capacity == 100
        assert cfg.bottleneck_rate == 10_000_000
        assert cfg.edge_rate == 100_000_000
        assert cfg.bottleneck_delay == 0.010
        assert cfg.retransmit_max == 3
        assert cfg.retransmit_timeout == 5.0
        assert cfg.legit_interarrival == 10.0
        assert cfg.request_size == 60
        assert cfg.normal_response_size == 512
        assert cfg.amp_response_size == 4000

    def test_amp_response_must_exceed_standard_size(self):
        with pytest.raises(InvalidConfig):
            make_scenario(attack_kind="amplification", amp_response_size=400)

    def test_zero_attack_rate_rejected_for_attacks(self):
        with pytest.raises(InvalidConfig):
            make_scenario(attack_kind="direct_dos", attack_rate=0)

    def test_attack_rate_zero_fine_without_attack(self):
        cfg = make_scenario(attack_kind="none")
        assert cfg.attack_rate == 0.0

    def test_derived_direct_rate_offers_overload(self):
        cfg = make_scenario(attack_kind="direct_dos")
        assert cfg.attack_rate * cfg.attack_packet_size * 8 == pytest.approx(
            1.2 * cfg.bottleneck_rate)

    def test_derived_amp_rate_uses_reflected_size(self):
        cfg = make_scenario(attack_kind="amplification")
        assert cfg.attack_rate * cfg.amp_response_size * 8 == pytest.approx(
            1.2 * cfg.bottleneck_rate)

    def test_jitter_must_fit_duration(self):
        with pytest.raises(InvalidConfig):
            make_scenario(duration=100, attack_start_jitter=(0, 100))

    def test_queue_capacity_positive(self):
        with pytest.raises(InvalidConfig):
            make_scenario(queue_capacity=0)

    def test_unknown_field_rejected(self):
        with pytest.raises(InvalidConfig):
            make_scenario(not_a_field=1)


class TestNoAttackRun:
    # Offered legitimate load is 60 B / 10 s = 48 bit/s, far below the
    # 10 Mbit/s bottleneck, so nothing can ever queue up.
    def test_zero_drops_and_full_delivery(self):
        trace = run(make_scenario(duration=200), seed=1)
        assert drops(trace) == []
        requests = [e for e in server_deliveries(trace)
                    if e.kind is PacketKind.LEGIT_REQUEST]
        responses = [e for e in trace.events
                     if e.disposition is Disposition.DELIVERED_TO_CLIENT]
        # 20 emissions at t = 0, 10, ..., 190; each answered once
        assert len(requests) == 20
        assert len(responses) == 20
        assert trace.in_flight_at_end == 0
        assert trace.packets_generated == 40

    def test_no_attack_purity(self):
        trace = run(make_scenario(duration=200), seed=5)
        assert all(e.kind is not PacketKind.ATTACK for e in trace.events)
        assert trace.truth.attack_kind is AttackKind.NONE
        assert trace.truth.interval is None

    def test_single_flow_emission_without_loss(self):
        trace = run(make_scenario(duration=200), seed=2)
        per_flow = {}
        for e in trace.events:
            if e.kind is PacketKind.LEGIT_REQUEST:
                per_flow[e.flow_id] = per_flow.get(e.flow_id, 0) + 1
        assert set(per_flow.values()) == {1}


class TestOverloadRun:
    # 2929.6875 pkt/s of 512 B is 12 Mbit/s offered against a 10 Mbit/s
    # link: sustained 1.2x overload must overflow a 100-packet queue.
    def test_direct_overload_drops_within_attack_interval(self):
        cfg = make_scenario(attack_kind="direct_dos", duration=40,
                            attack_start_jitter=(0.0, 0.0), attack_duration=30)
        trace = run(cfg, seed=3)
        dropped = drops(trace)
        assert dropped
        start, end = trace.truth.interval
        assert all(start <= e.timestamp <= end + 1.0 for e in dropped)

    def test_queue_never_exceeds_capacity(self):
        cfg = make_scenario(attack_kind="direct_dos", duration=40,
                            attack_start_jitter=(0.0, 0.0), attack_duration=30)
        trace = run(cfg, seed=3)
        assert trace.max_queue_occupancy == cfg.queue_capacity

    def test_retransmission_bound_under_loss(self):
        cfg = make_scenario(attack_kind="direct_dos", duration=120,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 0.0), attack_duration=120)
        trace = run(cfg, seed=9)
        per_flow = {}
        for e in trace.events:
            if e.kind is PacketKind.LEGIT_REQUEST:
                per_flow.setdefault(e.flow_id, 0)
                per_flow[e.flow_id] += 1
        assert per_flow
        assert max(per_flow.values()) <= 1 + cfg.retransmit_max

    def test_amplification_delivers_oversized_packets_inbound(self):
        cfg = make_scenario(attack_kind="amplification", duration=60,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 0.0), attack_duration=60)
        trace = run(cfg, seed=4)
        amp = [e for e in server_deliveries(trace) if e.kind is PacketKind.ATTACK]
        assert amp
        assert all(e.size == cfg.amp_response_size for e in amp)


class TestTraceLaws:
    def test_determinism_bit_identical(self):
        cfg = make_scenario(attack_kind="amplification", duration=80,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 20.0), attack_duration=60)
        assert run(cfg, seed=11) == run(cfg, seed=11)

    def test_different_seeds_move_attack_start(self):
        cfg = make_scenario(attack_kind="direct_dos", duration=80,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 20.0), attack_duration=60)
        starts = {run(cfg, seed=s).truth.interval[0] for s in range(5)}
        assert len(starts) > 1
        assert all(0.0 <= s < 20.0 for s in starts)

    def test_conservation(self):
        cfg = make_scenario(attack_kind="direct_dos", duration=60,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 5.0), attack_duration=60)
        trace = run(cfg, seed=21)
        assert trace.packets_generated == len(trace.events) + trace.in_flight_at_end

    def test_causality_response_follows_delivered_request(self):
        trace = run(make_scenario(duration=200), seed=6)
        delivered_requests = set()
        for e in trace.events:
            if (e.kind is PacketKind.LEGIT_REQUEST
                    and e.disposition is Disposition.DELIVERED_TO_SERVER):
                delivered_requests.add(e.flow_id)
            elif e.kind is PacketKind.LEGIT_RESPONSE:
                assert e.flow_id in delivered_requests

    def test_events_sorted_with_stable_ties(self):
        trace = run(make_scenario(attack_kind="direct_dos", duration=30,
                                  attack_start_jitter=(0.0, 0.0),
                                  attack_duration=20), seed=8)
        stamps = [(e.timestamp, e.seq) for e in trace.events]
        assert stamps == sorted(stamps)

    def test_in_flight_packets_counted(self):
        # A request emitted at t=10 cannot reach the server by t=10.005.
        cfg = make_scenario(duration=10.005)
        trace = run(cfg, seed=1)
        assert trace.in_flight_at_end >= 1
        assert trace.packets_generated == len(trace.events) + trace.in_flight_at_end


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    kind=st.sampled_from(["none", "direct_dos", "amplification"]),
    duration=st.floats(20.0, 80.0),
    queue=st.integers(1, 40),
)
def test_core_laws_hold_everywhere(seed, kind, duration, queue):
    params = dict(duration=duration, bottleneck_rate=50_000, queue_capacity=queue,
                  attack_kind=kind)
    if kind != "none":
        params.update(attack_start_jitter=(0.0, duration / 4),
                      attack_duration=duration)
    cfg = make_scenario(**params)
    trace = run(cfg, seed)
    assert trace.packets_generated == len(trace.events) + trace.in_flight_at_end
    assert trace.max_queue_occupancy <= cfg.queue_capacity
    assert all(0 <= e.timestamp <= cfg.duration for e in trace.events)
    if kind == "none":
        assert not drops(trace)


class TestTraceSerialization:
    def test_empty_trace_round_trips_header_only(self):
        # Duration shorter than the first router hop: no event can land.
        trace = run(make_scenario(duration=0.005), seed=7)
        assert trace.events == ()
        text = write_trace(trace)
        assert all(line.startswith("#") for line in text.splitlines())
        assert read_trace(text) == trace

    def test_generated_trace_round_trips_exactly(self):
        cfg = make_scenario(attack_kind="amplification", duration=60,
                            bottleneck_rate=100_000,
                            attack_start_jitter=(0.0, 10.0), attack_duration=50)
        trace = run(cfg, seed=13)
        assert read_trace(write_trace(trace)) == trace

    def test_truncated_file_rejected(self):
        trace = run(make_scenario(duration=200), seed=1)
        text = write_trace(trace)
        truncated = "\n".join(text.splitlines()[:-3]) + "\n"
        with pytest.raises(ParseError):
            read_trace(truncated)

    def test_garbage_row_rejected(self):
        trace = run(make_scenario(duration=200), seed=1)
        text = write_trace(trace) + "0,not-a-number,legit_request,60,delivered_to_server,q0\n"
        with pytest.raises(ParseError):
            read_trace(text)

    def test_missing_header_key_rejected(self):
        trace = run(make_scenario(duration=0.005), seed=7)
        lines = [l for l in write_trace(trace).splitlines() if not l.startswith("#seed=")]
        with pytest.raises(ParseError):
            read_trace("\n".join(lines) + "\n")

    def test_unknown_header_keys_ignored(self):
        trace = run(make_scenario(duration=200), seed=1)
        text = "#master_seed=42\n#config_digest=deadbeef\n" + write_trace(trace)
        assert read_trace(text) == trace

    def test_timestamps_have_microsecond_resolution(self):
        trace = run(make_scenario(duration=200), seed=1)
        for e in trace.events:
            assert e.timestamp == round(e.timestamp, 6)
