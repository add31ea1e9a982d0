"""Discrete-event simulation of DoS traffic against a DNS server.

Models the smallest topology that reproduces the phenomena the detector
relies on: a legitimate client and an attack source both route through a
router to the target name server. The router->server link is the single
contested resource; it serializes packets at a configured bit rate behind
a drop-tail FIFO queue. Every other hop is uncongested and contributes
only serialization plus propagation delay.

Traffic sources:

* the legitimate client sends fixed-size queries at a fixed interarrival
  and retransmits on timeout until a response arrives or the retry budget
  is exhausted;
* a direct flood sends constant-bit-rate packets toward the server;
* an amplification flood delivers oversized reflected responses to the
  server's inbound path.

Traces serialize to UTF-8 text: ``#key=value`` header lines followed by
one ``seq,timestamp,kind,size,disposition,flow_id`` row per packet event.
Event timestamps are recorded at microsecond resolution so the text form
round-trips exactly.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, fields, replace
from enum import Enum

from .errors import InvalidConfig, ParseError


class AttackKind(Enum):
    NONE = "none"
    DIRECT_DOS = "direct_dos"
    AMPLIFICATION = "amplification"


class PacketKind(Enum):
    LEGIT_REQUEST = "legit_request"
    LEGIT_RESPONSE = "legit_response"
    ATTACK = "attack_packet"


class Disposition(Enum):
    DELIVERED_TO_SERVER = "delivered_to_server"
    DROPPED_AT_QUEUE = "dropped_at_queue"
    DELIVERED_TO_CLIENT = "delivered_to_client"


# Ratio of offered attack load to bottleneck capacity when no explicit
# attack_rate is configured.
DEFAULT_OVERLOAD = 1.2

# All rates in bits/second, sizes in bytes, times in seconds.


@dataclass(frozen=True)
class ScenarioConfig:
    duration: float = 200.0
    window_len: float = 20.0
    legit_interarrival: float = 10.0
    request_size: int = 60
    normal_response_size: int = 512
    amp_response_size: int = 4000
    retransmit_max: int = 3
    retransmit_timeout: float = 5.0
    bottleneck_rate: float = 10_000_000.0
    bottleneck_delay: float = 0.010
    edge_rate: float = 100_000_000.0
    edge_delay: float = 0.010
    queue_capacity: int = 100
    attack_kind: AttackKind = AttackKind.NONE
    attack_rate: float = 0.0
    attack_packet_size: int = 512
    attack_start_jitter: tuple[float, float] = (0.0, 0.0)
    attack_duration: float = 200.0


@dataclass(frozen=True)
class PacketEvent:
    seq: int
    timestamp: float
    kind: PacketKind
    size: int
    disposition: Disposition
    flow_id: str


@dataclass(frozen=True)
class GroundTruth:
    attack_kind: AttackKind
    interval: tuple[float, float] | None  # None when attack_kind is NONE


@dataclass(frozen=True)
class PacketTrace:
    config: ScenarioConfig
    seed: int
    events: tuple[PacketEvent, ...]
    truth: GroundTruth
    packets_generated: int
    in_flight_at_end: int
    max_queue_occupancy: int


def _check(cond: bool, constraint: str) -> None:
    if not cond:
        raise InvalidConfig(constraint)


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every configuration invariant; name the first violated one."""
    _check(cfg.duration > 0, "duration must be > 0")
    _check(cfg.window_len > 0, "window_len must be > 0")
    _check(cfg.legit_interarrival > 0, "legit_interarrival must be > 0")
    _check(cfg.request_size >= 1, "request_size must be >= 1")
    _check(cfg.normal_response_size >= 1, "normal_response_size must be >= 1")
    _check(cfg.amp_response_size > 512,
           "amp_response_size must exceed the 512-byte standard response")
    _check(cfg.retransmit_max >= 0, "retransmit_max must be >= 0")
    _check(cfg.retransmit_timeout > 0, "retransmit_timeout must be > 0")
    _check(cfg.bottleneck_rate > 0, "bottleneck_rate must be > 0")
    _check(cfg.bottleneck_delay > 0, "bottleneck_delay must be > 0")
    _check(cfg.edge_rate > 0, "edge_rate must be > 0")
    _check(cfg.edge_delay > 0, "edge_delay must be > 0")
    _check(cfg.queue_capacity >= 1, "queue_capacity must be >= 1")
    lo, hi = cfg.attack_start_jitter
    _check(0.0 <= lo <= hi < cfg.duration,
           "attack_start_jitter must lie within [0, duration)")
    if cfg.attack_kind is not AttackKind.NONE:
        _check(cfg.attack_rate > 0, "attack_rate must be > 0 for attack scenarios")
        _check(cfg.attack_packet_size >= 1, "attack_packet_size must be >= 1")
        _check(cfg.attack_duration > 0, "attack_duration must be > 0")
    return cfg


def make_scenario(**params) -> ScenarioConfig:
    """Build a validated ScenarioConfig from partial parameters.

    Unset fields take the defaults above. For attack scenarios with no
    explicit rate, the constant-bit-rate source is sized to offer
    DEFAULT_OVERLOAD times the bottleneck capacity: a direct flood of
    standard-size packets, or an amplification flood of oversized
    reflected responses.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(params) - known
    if unknown:
        raise InvalidConfig(f"unknown field {sorted(unknown)[0]!r}")

    if "attack_kind" in params and isinstance(params["attack_kind"], str):
        try:
            params["attack_kind"] = AttackKind(params["attack_kind"])
        except ValueError:
            raise InvalidConfig(f"unknown attack_kind {params['attack_kind']!r}") from None
    if "attack_start_jitter" in params:
        lo, hi = params["attack_start_jitter"]
        params["attack_start_jitter"] = (float(lo), float(hi))

    cfg = ScenarioConfig(**params)
    if "attack_duration" not in params:
        cfg = replace(cfg, attack_duration=cfg.duration)
    if cfg.attack_kind is not AttackKind.NONE and "attack_rate" not in params:
        size = (cfg.amp_response_size if cfg.attack_kind is AttackKind.AMPLIFICATION
                else cfg.attack_packet_size)
        cfg = replace(cfg, attack_rate=DEFAULT_OVERLOAD * cfg.bottleneck_rate / (8 * size))
    return validate_config(cfg)


# Calendar event tags.
_EMIT_REQ, _EMIT_ATK, _ARRIVE, _TX_DONE, _DELIVER, _RESPOND, _TIMEOUT = range(7)


def run(config: ScenarioConfig, seed: int) -> PacketTrace:
    """Simulate one scenario; identical (config, seed) gives identical traces.

    The only random draw is the attack start offset, taken uniformly from
    the configured jitter range. Calendar ties break by insertion order.
    """
    validate_config(config)
    cfg = config
    rng = random.Random(seed)

    if cfg.attack_kind is not AttackKind.NONE:
        lo, hi = cfg.attack_start_jitter
        attack_start = round(lo + rng.random() * (hi - lo), 6)
        emit_end = min(attack_start + cfg.attack_duration, cfg.duration)
        truth = GroundTruth(cfg.attack_kind, (attack_start, round(emit_end, 6)))
        attack_size = (cfg.amp_response_size
                       if cfg.attack_kind is AttackKind.AMPLIFICATION
                       else cfg.attack_packet_size)
    else:
        attack_start = 0.0
        emit_end = 0.0
        truth = GroundTruth(AttackKind.NONE, None)
        attack_size = 0

    def edge_latency(size: int) -> float:
        return size * 8 / cfg.edge_rate + cfg.edge_delay

    def tx_time(size: int) -> float:
        return size * 8 / cfg.bottleneck_rate

    # Uncontested return path: serialize on both links, no queueing.
    def reverse_latency(size: int) -> float:
        return tx_time(size) + cfg.bottleneck_delay + edge_latency(size)

    heap: list[tuple[float, int, int, object]] = []
    push_count = 0

    def push(t: float, tag: int, payload: object) -> None:
        nonlocal push_count
        heapq.heappush(heap, (t, push_count, tag, payload))
        push_count += 1

    events: list[PacketEvent] = []

    def record(t: float, kind: PacketKind, size: int, disp: Disposition, flow: str) -> None:
        events.append(PacketEvent(len(events), round(t, 6), kind, size, disp, flow))

    queue: deque[tuple[int, PacketKind, str]] = deque()
    busy = False
    max_occupancy = 0
    generated = 0
    delivered = 0
    dropped = 0
    # flow -> [answered, request emissions so far]
    flows: dict[str, list] = {}

    push(0.0, _EMIT_REQ, 0)
    if cfg.attack_kind is not AttackKind.NONE and attack_start < emit_end:
        push(attack_start, _EMIT_ATK, 0)

    while heap and heap[0][0] <= cfg.duration:
        t, _, tag, payload = heapq.heappop(heap)

        if tag == _EMIT_REQ:
            n = payload
            flow = f"q{n}"
            flows[flow] = [False, 1]
            generated += 1
            push(t + edge_latency(cfg.request_size), _ARRIVE,
                 (cfg.request_size, PacketKind.LEGIT_REQUEST, flow))
            push(t + cfg.retransmit_timeout, _TIMEOUT, flow)
            nxt = t + cfg.legit_interarrival
            if nxt < cfg.duration:
                push(nxt, _EMIT_REQ, n + 1)

        elif tag == _EMIT_ATK:
            i = payload
            generated += 1
            push(t + edge_latency(attack_size), _ARRIVE,
                 (attack_size, PacketKind.ATTACK, "atk"))
            nxt = attack_start + (i + 1) / cfg.attack_rate
            if nxt < emit_end:
                push(nxt, _EMIT_ATK, i + 1)

        elif tag == _ARRIVE:
            size, kind, flow = payload
            if not busy:
                busy = True
                push(t + tx_time(size), _TX_DONE, payload)
            elif len(queue) < cfg.queue_capacity:
                queue.append(payload)
                if len(queue) > max_occupancy:
                    max_occupancy = len(queue)
            else:
                dropped += 1
                record(t, kind, size, Disposition.DROPPED_AT_QUEUE, flow)

        elif tag == _TX_DONE:
            push(t + cfg.bottleneck_delay, _DELIVER, payload)
            if queue:
                nxt_payload = queue.popleft()
                push(t + tx_time(nxt_payload[0]), _TX_DONE, nxt_payload)
            else:
                busy = False

        elif tag == _DELIVER:
            size, kind, flow = payload
            delivered += 1
            record(t, kind, size, Disposition.DELIVERED_TO_SERVER, flow)
            if kind is PacketKind.LEGIT_REQUEST:
                generated += 1
                push(t + reverse_latency(cfg.normal_response_size), _RESPOND, flow)

        elif tag == _RESPOND:
            flow = payload
            delivered += 1
            record(t, PacketKind.LEGIT_RESPONSE, cfg.normal_response_size,
                   Disposition.DELIVERED_TO_CLIENT, flow)
            flows[flow][0] = True

        elif tag == _TIMEOUT:
            flow = payload
            state = flows[flow]
            if not state[0] and state[1] <= cfg.retransmit_max:
                state[1] += 1
                generated += 1
                push(t + edge_latency(cfg.request_size), _ARRIVE,
                     (cfg.request_size, PacketKind.LEGIT_REQUEST, flow))
                push(t + cfg.retransmit_timeout, _TIMEOUT, flow)

    return PacketTrace(
        config=cfg,
        seed=seed,
        events=tuple(events),
        truth=truth,
        packets_generated=generated,
        in_flight_at_end=generated - delivered - dropped,
        max_queue_occupancy=max_occupancy,
    )


# --- trace serialization ---------------------------------------------------

_CONFIG_FIELDS = [f.name for f in fields(ScenarioConfig)]
_INT_CONFIG_FIELDS = {"request_size", "normal_response_size", "amp_response_size",
                      "retransmit_max", "queue_capacity", "attack_packet_size"}


def write_trace(trace: PacketTrace) -> str:
    """Render a trace as UTF-8 text; `read_trace` inverts it exactly."""
    lines = []
    cfg = trace.config
    for name in _CONFIG_FIELDS:
        value = getattr(cfg, name)
        if name == "attack_kind":
            value = value.value
        elif name == "attack_start_jitter":
            value = f"{value[0]!r},{value[1]!r}"
        lines.append(f"#{name}={value!r}" if isinstance(value, float) else f"#{name}={value}")
    lines.append(f"#seed={trace.seed}")
    if trace.truth.interval is None:
        lines.append("#attack_start=")
        lines.append("#attack_end=")
    else:
        lines.append(f"#attack_start={trace.truth.interval[0]!r}")
        lines.append(f"#attack_end={trace.truth.interval[1]!r}")
    lines.append(f"#packets_generated={trace.packets_generated}")
    lines.append(f"#in_flight_at_end={trace.in_flight_at_end}")
    lines.append(f"#max_queue_occupancy={trace.max_queue_occupancy}")
    for ev in trace.events:
        lines.append(f"{ev.seq},{ev.timestamp:.6f},{ev.kind.value},{ev.size},"
                     f"{ev.disposition.value},{ev.flow_id}")
    return "\n".join(lines) + "\n"


def _parse_header_value(key: str, raw: str, line_no: int):
    try:
        if key == "attack_kind":
            return AttackKind(raw)
        if key == "attack_start_jitter":
            lo, hi = raw.split(",")
            return (float(lo), float(hi))
        if key in _INT_CONFIG_FIELDS or key in ("seed", "packets_generated",
                                                "in_flight_at_end", "max_queue_occupancy"):
            return int(raw)
        return float(raw)
    except (ValueError, TypeError):
        raise ParseError(f"bad value {raw!r}", line=line_no, field=key) from None


def read_trace(text: str) -> PacketTrace:
    """Parse the text form produced by `write_trace`.

    Unknown header keys are ignored so writers may annotate traces; all
    config fields, the seed, and the bookkeeping counters are required.
    """
    header: dict[str, object] = {}
    attack_start_raw: str | None = None
    attack_end_raw: str | None = None
    rows: list[PacketEvent] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if rows:
                raise ParseError("header line after event rows", line=line_no)
            body = line[1:]
            if "=" not in body:
                raise ParseError("header line without '='", line=line_no)
            key, _, raw = body.partition("=")
            if key == "attack_start":
                attack_start_raw = raw
            elif key == "attack_end":
                attack_end_raw = raw
            elif key in _CONFIG_FIELDS or key in ("seed", "packets_generated",
                                                  "in_flight_at_end", "max_queue_occupancy"):
                header[key] = _parse_header_value(key, raw, line_no)
            continue

        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(f"expected 6 fields, got {len(parts)}", line=line_no)
        seq_s, ts_s, kind_s, size_s, disp_s, flow = parts
        try:
            seq = int(seq_s)
            ts = float(ts_s)
            kind = PacketKind(kind_s)
            size = int(size_s)
            disp = Disposition(disp_s)
        except ValueError as exc:
            raise ParseError(f"bad event row: {exc}", line=line_no) from None
        if seq != len(rows):
            raise ParseError(f"sequence gap: expected {len(rows)}, got {seq}", line=line_no)
        if size < 1:
            raise ParseError("size must be >= 1", line=line_no)
        rows.append(PacketEvent(seq, ts, kind, size, disp, flow))

    for key in _CONFIG_FIELDS + ["seed", "packets_generated", "in_flight_at_end",
                                 "max_queue_occupancy"]:
        if key not in header:
            raise ParseError("missing header key", field=key)
    if attack_start_raw is None or attack_end_raw is None:
        raise ParseError("missing header key", field="attack_start/attack_end")

    cfg = ScenarioConfig(**{name: header[name] for name in _CONFIG_FIELDS})
    if cfg.attack_kind is AttackKind.NONE:
        truth = GroundTruth(AttackKind.NONE, None)
    else:
        if not attack_start_raw or not attack_end_raw:
            raise ParseError("attack scenario without interval", field="attack_start")
        truth = GroundTruth(cfg.attack_kind, (float(attack_start_raw), float(attack_end_raw)))

    expected_events = header["packets_generated"] - header["in_flight_at_end"]
    if len(rows) != expected_events:
        raise ParseError(
            f"event count {len(rows)} does not match header ({expected_events}); "
            "file truncated or corrupt")

    return PacketTrace(
        config=cfg,
        seed=header["seed"],
        events=tuple(rows),
        truth=truth,
        packets_generated=header["packets_generated"],
        in_flight_at_end=header["in_flight_at_end"],
        max_queue_occupancy=header["max_queue_occupancy"],
    )
