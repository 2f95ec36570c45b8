"""Synthetic audit-log corpora with known ground truth.

Real investigation corpora are proprietary, so test and demo data are
generated: background activity reproducing the published client-occurrence
distribution, plus optional injected scenarios (a periodic after-hours
fraud, an unauthorized action, a client split between two employees and
legitimate monitoring look-alikes) whose expected scoring outcomes are
recorded in a manifest.  Everything is driven by one seeded RNG, so a
given spec and seed always produce byte-identical output.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Any, Mapping

from .events import AuthEvent, Event
from .scoring import Profiles

BUCKETS = ("1", "2-5", "6-10", ">10")

DEFAULT_HISTOGRAM: Mapping[str, float] = {
    "1": 0.662,
    "2-5": 0.316,
    "6-10": 0.014,
    ">10": 0.008,
}

HOME_SYSTEM_POOL = ("CRM", "BILLING", "ERP", "TICKETS", "DWH")
RARE_SYSTEM_POOL = ("AUDIT-ARCHIVE", "LEGACY-LEDGER")
FMS_SYSTEM = "FMS"
COMMON_ACTIONS = ("VIEW", "UPDATE", "EXPORT", "NOTE", "REPORT")
EXOTIC_ACTION = "MANUAL-ADJUST"
FORBIDDEN_ACTION = "ACCOUNT-DELETE"

SCENARIO_KINDS = (
    "monthly_fraud",
    "unauthorized_action",
    "split_client",
    "monitoring_lookalike",
)

# Months needed by the periodic scenarios, with slack for day-of-month drift.
SCENARIO_SPAN_MIN_DAYS = 165


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """Shape of a generated corpus; defaults mirror the study corpus at 1/100."""

    employees: int = 7
    clients: int = 830
    span_days: int = 180
    start_day: date = date(2024, 1, 8)
    occurrence_histogram: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_HISTOGRAM)
    )
    scenarios: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.employees < 1 or self.clients < 1 or self.span_days < 1:
            raise SynthError("employees, clients and span_days must be positive")
        if set(self.occurrence_histogram) != set(BUCKETS):
            raise SynthError(f"histogram must use exactly the buckets {BUCKETS}")
        if any(v < 0 for v in self.occurrence_histogram.values()):
            raise SynthError("histogram fractions must be non-negative")
        total = sum(self.occurrence_histogram.values())
        if abs(total - 1.0) > 1e-9:
            raise SynthError(f"histogram fractions must sum to 1, got {total}")
        unknown = [k for k in self.scenarios if k not in SCENARIO_KINDS]
        if unknown:
            raise SynthError(f"unknown scenario kind(s): {unknown}")
        if self.scenarios and self.span_days < SCENARIO_SPAN_MIN_DAYS:
            raise SynthError(
                f"injected scenarios need span_days >= {SCENARIO_SPAN_MIN_DAYS}"
            )

    def to_doc(self) -> dict[str, Any]:
        return {
            "employees": self.employees,
            "clients": self.clients,
            "span_days": self.span_days,
            "start_day": self.start_day.isoformat(),
            "occurrence_histogram": {k: self.occurrence_histogram[k] for k in BUCKETS},
            "scenarios": list(self.scenarios),
            "seed": self.seed,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "SynthSpec":
        return cls(
            employees=int(doc.get("employees", 7)),
            clients=int(doc.get("clients", 830)),
            span_days=int(doc.get("span_days", 180)),
            start_day=date.fromisoformat(doc["start_day"]) if doc.get("start_day") else date(2024, 1, 8),
            occurrence_histogram=dict(doc.get("occurrence_histogram") or DEFAULT_HISTOGRAM),
            scenarios=tuple(doc.get("scenarios") or ()),
            seed=int(doc.get("seed", 0)),
        )


@dataclass
class SynthResult:
    events: list[Event]
    auth_events: list[AuthEvent]
    profiles: Profiles
    manifest: dict[str, Any]

    def manifest_text(self) -> str:
        return json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"


def allocate_buckets(n: int, fractions: Mapping[str, float]) -> dict[str, int]:
    """Integer bucket sizes summing to n, largest-remainder apportionment."""
    quotas = [(bucket, n * fractions[bucket]) for bucket in BUCKETS]
    counts = {bucket: int(q) for bucket, q in quotas}
    leftover = n - sum(counts.values())
    # Stable: biggest fractional part first, bucket order breaking ties.
    by_remainder = sorted(quotas, key=lambda bq: (-(bq[1] - int(bq[1])), BUCKETS.index(bq[0])))
    for bucket, _ in by_remainder[:leftover]:
        counts[bucket] += 1
    return counts


def _bucket_event_count(bucket: str, rng: random.Random) -> int:
    if bucket == "1":
        return 1
    if bucket == "2-5":
        return rng.randint(2, 5)
    if bucket == "6-10":
        return rng.randint(6, 10)
    return rng.randint(11, 25)


def _month_day(base: date, months_ahead: int, day: int) -> date:
    y = base.year + (base.month - 1 + months_ahead) // 12
    m = (base.month - 1 + months_ahead) % 12 + 1
    return date(y, m, day)


def _scenario_anchor(start: date) -> date:
    """First month whose day-10 falls on or after the corpus start."""
    if start.day <= 10:
        return start.replace(day=10)
    return _month_day(start, 1, 10)


def _utc(d: date, hh: int, mm: int, ss: int = 0) -> datetime:
    return datetime.combine(d, time(hh, mm, ss), tzinfo=timezone.utc)


def _draw_background_ts(rng: random.Random, start: date, span_days: int) -> datetime:
    d = start + timedelta(days=rng.randrange(span_days))
    for _ in range(3):  # weekday bias, bounded so generation always terminates
        if d.weekday() < 5 or rng.random() >= 0.8:
            break
        d = start + timedelta(days=rng.randrange(span_days))
    if rng.random() < 0.9:
        hh = rng.randint(9, 17)
    else:
        hh = rng.randrange(24)
    return _utc(d, hh, rng.randrange(60), rng.randrange(60))


@dataclass
class _Builder:
    spec: SynthSpec
    rng: random.Random
    events: list[Event] = field(default_factory=list)
    auth_events: list[AuthEvent] = field(default_factory=list)
    scenario_records: list[dict[str, Any]] = field(default_factory=list)
    next_employee: int = 0
    next_client: int = 0
    homes: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def new_employee(self) -> str:
        ident = f"E{self.next_employee:04d}"
        self.next_employee += 1
        self.homes[ident] = tuple(self.rng.sample(HOME_SYSTEM_POOL, 2))
        return ident

    def new_client(self) -> str:
        ident = f"C{self.next_client:05d}"
        self.next_client += 1
        return ident

    def add(self, ts: datetime, employee: str, client: str, action: str, system: str) -> None:
        self.events.append(
            Event(ts=ts, employee=employee, client=client, action=action, system=system)
        )


def _generate_background(b: _Builder) -> dict[str, Any]:
    spec, rng = b.spec, b.rng
    employees = [b.new_employee() for _ in range(spec.employees)]
    counts = allocate_buckets(spec.clients, spec.occurrence_histogram)
    buckets: list[str] = []
    for bucket in BUCKETS:
        buckets.extend([bucket] * counts[bucket])
    rng.shuffle(buckets)

    produced = 0
    for bucket in buckets:
        client = b.new_client()
        n = _bucket_event_count(bucket, rng)
        primary = rng.choice(employees)
        for _ in range(n):
            employee = primary if rng.random() < 0.8 else rng.choice(employees)
            system = (
                rng.choice(b.homes[employee])
                if rng.random() < 0.97
                else rng.choice(RARE_SYSTEM_POOL)
            )
            b.add(
                _draw_background_ts(rng, spec.start_day, spec.span_days),
                employee,
                client,
                rng.choice(COMMON_ACTIONS),
                system,
            )
            produced += 1
    return {"events": produced, "bucket_counts": counts, "employees": employees}


def _inject_monthly_fraud(b: _Builder) -> dict[str, Any]:
    """All five layers fire: gated monthly off-hours use of a rarely touched
    system with an action outside the role's common set, so the severity is
    exactly 1.0 without any authorization breach."""
    rng = b.rng
    employee = b.new_employee()
    client = b.new_client()
    anchor = _scenario_anchor(b.spec.start_day)
    fraud_events = 0
    for m in range(6):
        d = _month_day(anchor, m, 10 + m)  # days 10..15 across consecutive months
        b.add(_utc(d, 22, 30), employee, client, EXOTIC_ACTION, "LEGACY-LEDGER")
        b.add(_utc(d, 23, 10), employee, client, EXOTIC_ACTION, "LEGACY-LEDGER")
        fraud_events += 2

    # Routine workload so the scenario system stays under the frequent-share
    # floor: 12 / (12 + 260) < 0.05.
    padding = 0
    for _ in range(65):
        pad_client = b.new_client()
        for _ in range(4):
            b.add(
                _draw_background_ts(rng, b.spec.start_day, b.spec.span_days),
                employee,
                pad_client,
                rng.choice(COMMON_ACTIONS),
                rng.choice(b.homes[employee]),
            )
            padding += 1
    return {
        "kind": "monthly_fraud",
        "employee": employee,
        "client": client,
        "events": fraud_events,
        "padding_events": padding,
        "expected": {"employee_severity": 1.0, "vector": [1, 1, 1, 1, 1]},
    }


def _inject_unauthorized_action(b: _Builder) -> dict[str, Any]:
    employee = b.new_employee()
    client = b.new_client()
    for offset in (40, 70, 100):
        d = b.spec.start_day + timedelta(days=offset)
        b.add(_utc(d, 11, 0), employee, client, FORBIDDEN_ACTION, b.homes[employee][0])
    return {
        "kind": "unauthorized_action",
        "employee": employee,
        "client": client,
        "events": 3,
        "expected": {"employee_severity": 1.0, "short_circuit": "unauthorized_action"},
    }


def _inject_split_client(b: _Builder) -> dict[str, Any]:
    """Two employees each feed 6 monthly events to one client; the merged
    series passes the volume gate and alternates 15-day gaps, while neither
    pair alone reaches the gate."""
    first = b.new_employee()
    second = b.new_employee()
    client = b.new_client()
    anchor = _scenario_anchor(b.spec.start_day)
    for m in range(6):
        b.add(_utc(_month_day(anchor, m, 10), 10, 15), first, client, "UPDATE", b.homes[first][0])
        b.add(_utc(_month_day(anchor, m, 25), 11, 40), second, client, "UPDATE", b.homes[second][0])
    return {
        "kind": "split_client",
        "employee": first,
        "employees": [first, second],
        "client": client,
        "events": 12,
        "expected": {"client_gated": True, "client_periodic": True, "pair_gated": False},
    }


def _inject_monitoring_lookalike(b: _Builder, heavy: bool) -> dict[str, Any]:
    """Recurring monthly monitoring through the fraud-management system:
    periodic and, when heavy, gated even after FMS down-weighting, but never
    off-hours or otherwise unusual."""
    employee = b.new_employee()
    client = b.new_client()
    anchor = _scenario_anchor(b.spec.start_day)
    hours = (9, 11, 14, 16) if heavy else (10, 15)
    day = 12 if heavy else 20
    n = 0
    for m in range(6):
        d = _month_day(anchor, m, day)
        for hh in hours:
            b.add(_utc(d, hh, 5), employee, client, "REPORT", FMS_SYSTEM)
            n += 1
    return {
        "kind": "monitoring_lookalike",
        "variant": "heavy" if heavy else "light",
        "employee": employee,
        "client": client,
        "events": n,
        "expected": {"gated": heavy, "max_severity_lt": 1.0},
    }


def _generate_auth(b: _Builder, fraud_employee: str | None) -> None:
    rng = b.rng
    for idx, employee in enumerate(sorted(b.homes)):
        ip = f"10.0.{idx // 250}.{idx % 250 + 1}"
        computer = f"WS-{idx:04d}"
        for _ in range(rng.randint(1, 3)):
            ts = _draw_background_ts(rng, b.spec.start_day, b.spec.span_days)
            b.auth_events.append(
                AuthEvent(ts=ts, employee=employee, ip=ip, computer=computer, action="login")
            )
    if fraud_employee is not None:
        burst_day = b.spec.start_day + timedelta(days=30)
        for k in range(6):
            b.auth_events.append(
                AuthEvent(
                    ts=_utc(burst_day, 2, 5 * k),
                    employee=fraud_employee,
                    ip="203.0.113.7",
                    computer="WS-UNKNOWN",
                    action="login_failure",
                )
            )


def _derive_profiles(b: _Builder) -> Profiles:
    """Reference data consistent with the realized corpus: every system an
    employee actually used is authorized, the background action pool is the
    common set, and only the injected forbidden action is unauthorized."""
    authorized: dict[str, set[str]] = {}
    for e in b.events:
        authorized.setdefault(e.employee, set()).add(e.system)
    return Profiles(
        authorized_systems={k: frozenset(v) for k, v in authorized.items()},
        unauthorized_actions=frozenset({FORBIDDEN_ACTION}),
        common_actions={"default": frozenset(COMMON_ACTIONS)},
        roles={},
        fms_systems=frozenset({FMS_SYSTEM}),
    )


def generate_corpus(spec: SynthSpec) -> SynthResult:
    """Build the full corpus: background, scenarios, auth log, profiles, manifest."""
    b = _Builder(spec=spec, rng=random.Random(spec.seed))
    background = _generate_background(b)

    fraud_employee: str | None = None
    for kind in spec.scenarios:
        if kind == "monthly_fraud":
            record = _inject_monthly_fraud(b)
            fraud_employee = record["employee"]
        elif kind == "unauthorized_action":
            record = _inject_unauthorized_action(b)
        elif kind == "split_client":
            record = _inject_split_client(b)
        else:
            heavy = not any(
                r["kind"] == "monitoring_lookalike" for r in b.scenario_records
            )
            record = _inject_monitoring_lookalike(b, heavy=heavy)
        b.scenario_records.append(record)

    _generate_auth(b, fraud_employee)
    profiles = _derive_profiles(b)

    manifest = {
        "spec": spec.to_doc(),
        "background": {
            "events": background["events"],
            "bucket_counts": background["bucket_counts"],
        },
        "scenarios": b.scenario_records,
        "totals": {
            "events": len(b.events),
            "auth_events": len(b.auth_events),
            "employees": b.next_employee,
            "clients": b.next_client,
        },
    }
    return SynthResult(
        events=b.events, auth_events=b.auth_events, profiles=profiles, manifest=manifest
    )
