"""Severity scoring of employee/client activity.

Each (employee, client) series is checked against five layered
patterns: activity volume inside a sliding window, periodicity,
off-hours activity, use of systems the employee rarely touches and
actions unusual for the employee's role.  Unauthorized actions or
systems bypass the layers entirely and force the maximum severity.
The remaining vector is condensed to one value with a normalized
weighted Euclidean distance from the all-clear reference, weighted so
that a mismatch on a higher layer always outweighs any combination of
deeper ones.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .events import Event, EventSeries, EventStore
from .periodicity import (
    LcssParams,
    PatternSeries,
    SimilarityReport,
    default_pattern_library,
    similarity_profile,
)

logger = logging.getLogger(__name__)

LAYERS = ("volume", "periodicity", "off_hours", "infrequent_system", "uncommon_action")

WEEKDAY_KEYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


@dataclass(frozen=True)
class PatternVector:
    """Five binary layer outcomes; all zeros is the non-suspicious reference."""

    components: tuple[int, int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.components) != 5 or any(c not in (0, 1) for c in self.components):
            raise ValueError("pattern vector needs five binary components")

    @classmethod
    def zeros(cls) -> "PatternVector":
        return cls((0, 0, 0, 0, 0))


@dataclass(frozen=True)
class LayerWeights:
    """Per-layer weights, strictly decreasing and higher-layer dominant."""

    w: tuple[float, float, float, float, float] = (16.0, 8.0, 4.0, 2.0, 1.0)

    def __post_init__(self) -> None:
        if len(self.w) != 5 or any(x <= 0 for x in self.w):
            raise ValueError("five positive weights required")
        for i in range(5):
            tail = sum(self.w[i + 1 :])
            if self.w[i] <= tail:
                raise ValueError(
                    f"weight {i + 1} must dominate the deeper layers ({self.w[i]} <= {tail})"
                )


@dataclass
class ScoringConfig:
    gate_x: int = 10
    gate_y_days: int = 180
    off_hours_fraction_min: float = 0.5
    theta: float = 0.5
    frequent_share_min: float = 0.05
    fms_event_weight: float = 0.5
    lcss: LcssParams = field(default_factory=LcssParams)

    def __post_init__(self) -> None:
        if self.gate_x < 1 or self.gate_y_days < 1:
            raise ValueError("gate thresholds must be at least 1")
        for name in ("off_hours_fraction_min", "theta", "frequent_share_min"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.fms_event_weight <= 1.0:
            raise ValueError("fms_event_weight must lie in (0, 1]")

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "ScoringConfig":
        lcss = doc.get("lcss", {})
        return cls(
            gate_x=int(doc.get("gate_x", 10)),
            gate_y_days=int(doc.get("gate_y_days", 180)),
            off_hours_fraction_min=float(doc.get("off_hours_fraction_min", 0.5)),
            theta=float(doc.get("theta", 0.5)),
            frequent_share_min=float(doc.get("frequent_share_min", 0.05)),
            fms_event_weight=float(doc.get("fms_event_weight", 0.5)),
            lcss=LcssParams(
                epsilon_days=int(lcss.get("epsilon_days", 2)),
                delta=lcss.get("delta"),
            ),
        )


def _parse_minute(text: str) -> int:
    hh, mm = text.split(":")
    minute = int(hh) * 60 + int(mm)
    if not 0 <= minute <= 24 * 60:
        raise ValueError(f"minute-of-day out of range: {text}")
    return minute


@dataclass(frozen=True)
class WorkingCalendar:
    """Weekly on-duty intervals (UTC minutes of day, end exclusive) plus holidays."""

    weekly: tuple[tuple[tuple[int, int], ...], ...]  # indexed by weekday, Monday=0
    holidays: frozenset[date] = frozenset()

    def __post_init__(self) -> None:
        if len(self.weekly) != 7:
            raise ValueError("weekly schedule needs seven entries")
        for intervals in self.weekly:
            for start, end in intervals:
                if not start < end:
                    raise ValueError("calendar intervals need start < end")

    def in_hours(self, ts: datetime) -> bool:
        utc = ts.astimezone(timezone.utc)
        if utc.date() in self.holidays:
            return False
        minute = utc.hour * 60 + utc.minute
        return any(start <= minute < end for start, end in self.weekly[utc.weekday()])

    @classmethod
    def default(cls) -> "WorkingCalendar":
        workday = ((9 * 60, 18 * 60),)
        return cls(weekly=(workday, workday, workday, workday, workday, (), ()))

    def to_doc(self) -> dict[str, Any]:
        return {
            "weekly": {
                WEEKDAY_KEYS[i]: [
                    [f"{s // 60:02d}:{s % 60:02d}", f"{e // 60:02d}:{e % 60:02d}"]
                    for s, e in intervals
                ]
                for i, intervals in enumerate(self.weekly)
                if intervals
            },
            "holidays": sorted(d.isoformat() for d in self.holidays),
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "WorkingCalendar":
        weekly: list[tuple[tuple[int, int], ...]] = [() for _ in range(7)]
        for key, intervals in (doc.get("weekly") or {}).items():
            idx = WEEKDAY_KEYS.index(key.lower()[:3])
            weekly[idx] = tuple((_parse_minute(s), _parse_minute(e)) for s, e in intervals)
        holidays = frozenset(date.fromisoformat(d) for d in doc.get("holidays", ()))
        return cls(weekly=tuple(weekly), holidays=holidays)


@dataclass
class Profiles:
    """Auditor-maintained reference data the patterns are judged against."""

    working_calendar: WorkingCalendar = field(default_factory=WorkingCalendar.default)
    authorized_systems: dict[str, frozenset[str]] = field(default_factory=dict)
    unauthorized_actions: frozenset[str] = frozenset()
    common_actions: dict[str, frozenset[str]] = field(default_factory=dict)  # keyed by role
    roles: dict[str, str] = field(default_factory=dict)  # employee -> role
    fms_systems: frozenset[str] = frozenset()

    def authorized_for(self, employee: str) -> frozenset[str] | None:
        """Authorized system set, or None when the employee has no profile entry."""
        return self.authorized_systems.get(employee)

    def common_actions_for(self, employee: str) -> frozenset[str] | None:
        """Common-action set for the employee's role; None when no data exists."""
        role = self.roles.get(employee, "default")
        if role in self.common_actions:
            return self.common_actions[role]
        return self.common_actions.get("default")

    def to_doc(self) -> dict[str, Any]:
        return {
            "working_calendar": self.working_calendar.to_doc(),
            "authorized_systems": {k: sorted(v) for k, v in sorted(self.authorized_systems.items())},
            "unauthorized_actions": sorted(self.unauthorized_actions),
            "common_actions": {k: sorted(v) for k, v in sorted(self.common_actions.items())},
            "roles": dict(sorted(self.roles.items())),
            "fms_systems": sorted(self.fms_systems),
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Profiles":
        calendar = (
            WorkingCalendar.from_doc(doc["working_calendar"])
            if doc.get("working_calendar")
            else WorkingCalendar.default()
        )
        return cls(
            working_calendar=calendar,
            authorized_systems={
                k: frozenset(v) for k, v in (doc.get("authorized_systems") or {}).items()
            },
            unauthorized_actions=frozenset(doc.get("unauthorized_actions") or ()),
            common_actions={k: frozenset(v) for k, v in (doc.get("common_actions") or {}).items()},
            roles=dict(doc.get("roles") or {}),
            fms_systems=frozenset(doc.get("fms_systems") or ()),
        )


def load_profiles(path: str | Path) -> Profiles:
    return Profiles.from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def save_profiles(profiles: Profiles, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profiles.to_doc(), indent=2, sort_keys=True), encoding="utf-8")


@dataclass(frozen=True)
class ShortCircuit:
    reason: str  # "unauthorized_action" | "unauthorized_system"
    employee: str
    offending: str

    def to_doc(self) -> dict[str, str]:
        return {"reason": self.reason, "employee": self.employee, "offending": self.offending}


@dataclass
class Evidence:
    """What produced a severity value, for display and X-marking."""

    similarity: SimilarityReport | None = None
    off_hours_fraction: float = 0.0
    event_count: int = 0
    infrequent_systems: list[str] = field(default_factory=list)
    uncommon_actions: list[str] = field(default_factory=list)

    def to_doc(self) -> dict[str, Any]:
        return {
            "similarity": self.similarity.to_doc() if self.similarity else None,
            "off_hours_fraction": self.off_hours_fraction,
            "event_count": self.event_count,
            "infrequent_systems": self.infrequent_systems,
            "uncommon_actions": self.uncommon_actions,
        }


@dataclass
class SeverityScore:
    value: float
    vector: PatternVector | None
    short_circuit: ShortCircuit | None
    evidence: Evidence
    anchor_client: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("severity must lie in [0, 1]")
        if self.short_circuit is not None and self.value != 1.0:
            raise ValueError("short-circuited severity must equal 1")

    def to_doc(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "vector": list(self.vector.components) if self.vector else None,
            "short_circuit": self.short_circuit.to_doc() if self.short_circuit else None,
            "evidence": self.evidence.to_doc(),
            "anchor_client": self.anchor_client,
        }


@dataclass
class UsageStats:
    """Corpus-wide per-employee system usage, the baseline for 'frequent user'."""

    system_counts: dict[str, dict[str, int]] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "UsageStats":
        stats = cls()
        for e in events:
            per = stats.system_counts.setdefault(e.employee, {})
            per[e.system] = per.get(e.system, 0) + 1
            stats.totals[e.employee] = stats.totals.get(e.employee, 0) + 1
        return stats

    def share(self, employee: str, system: str) -> float:
        total = self.totals.get(employee, 0)
        if total == 0:
            return 0.0
        return self.system_counts.get(employee, {}).get(system, 0) / total


def is_infrequent(usage: UsageStats, employee: str, system: str, cfg: ScoringConfig) -> bool:
    return usage.share(employee, system) < cfg.frequent_share_min


def is_uncommon(profiles: Profiles, employee: str, action: str) -> bool:
    common = profiles.common_actions_for(employee)
    if common is None:
        return False  # no role data: absence of evidence, not evidence
    return action not in common


def weighted_distance(y: PatternVector, w: LayerWeights | None = None) -> float:
    """Normalized weighted Euclidean distance from the all-zeros reference."""
    w = w or LayerWeights()
    num = sum((c * c) * wi for c, wi in zip(y.components, w.w))
    return math.sqrt(num) / math.sqrt(sum(w.w))


def off_hours_fraction(events: Sequence[Event], calendar: WorkingCalendar) -> float:
    if not events:
        return 0.0
    outside = sum(1 for e in events if not calendar.in_hours(e.ts))
    return outside / len(events)


def volume_gate(series: EventSeries, cfg: ScoringConfig, profiles: Profiles) -> bool:
    """True iff some window of gate_y_days holds weighted count > gate_x.

    Events from fraud-management systems count ``fms_event_weight`` because
    recurring monitoring of a flagged client is expected there.
    """
    events = series.events
    if not events:
        return False
    weights = [cfg.fms_event_weight if e.system in profiles.fms_systems else 1.0 for e in events]
    times = [e.ts.timestamp() for e in events]
    horizon = cfg.gate_y_days * 86400.0
    acc = 0.0
    left = 0
    for right in range(len(events)):
        acc += weights[right]
        while times[right] - times[left] > horizon:
            acc -= weights[left]
            left += 1
        if acc > cfg.gate_x:
            return True
    return False


def _examine(
    series: EventSeries,
    cfg: ScoringConfig,
    profiles: Profiles,
    library: Sequence[PatternSeries],
    usage: UsageStats,
) -> tuple[PatternVector | ShortCircuit, Evidence]:
    """Walk the layered checks for one series (pair or client-wide).

    The per-employee layers (infrequent system, uncommon action) are evaluated
    for every employee contributing to the series and OR-ed, so a flag raised
    by any contributor marks the series.
    """
    events = series.events
    if not events:
        return PatternVector.zeros(), Evidence()

    for e in events:
        if e.action in profiles.unauthorized_actions:
            return (
                ShortCircuit("unauthorized_action", e.employee, e.action),
                Evidence(event_count=len(events)),
            )
        allowed = profiles.authorized_for(e.employee)
        if allowed is None:
            logger.warning("profile gap: employee %s has no authorization entry", e.employee)
            allowed = frozenset()
        if e.system not in allowed:
            return (
                ShortCircuit("unauthorized_system", e.employee, e.system),
                Evidence(event_count=len(events)),
            )

    report = similarity_profile(series, library, cfg.lcss, cfg.theta)
    frac = off_hours_fraction(events, profiles.working_calendar)

    by_employee: dict[str, tuple[set[str], set[str]]] = {}
    for e in events:
        systems, actions = by_employee.setdefault(e.employee, (set(), set()))
        systems.add(e.system)
        actions.add(e.action)
    infrequent: set[str] = set()
    uncommon: set[str] = set()
    for employee, (systems, actions) in by_employee.items():
        infrequent.update(s for s in systems if is_infrequent(usage, employee, s, cfg))
        uncommon.update(a for a in actions if is_uncommon(profiles, employee, a))

    vector = PatternVector(
        (
            int(volume_gate(series, cfg, profiles)),
            int(report.periodic),
            int(frac >= cfg.off_hours_fraction_min),
            int(bool(infrequent)),
            int(bool(uncommon)),
        )
    )
    evidence = Evidence(
        similarity=report,
        off_hours_fraction=frac,
        event_count=len(events),
        infrequent_systems=sorted(infrequent),
        uncommon_actions=sorted(uncommon),
    )
    return vector, evidence


def evaluate_pair_vector(
    series: EventSeries,
    cfg: ScoringConfig,
    profiles: Profiles,
    library: Sequence[PatternSeries],
    usage: UsageStats,
) -> PatternVector | ShortCircuit:
    outcome, _ = _examine(series, cfg, profiles, library, usage)
    return outcome


def pair_severity(
    series: EventSeries,
    cfg: ScoringConfig,
    profiles: Profiles,
    library: Sequence[PatternSeries],
    weights: LayerWeights,
    usage: UsageStats,
) -> SeverityScore:
    outcome, evidence = _examine(series, cfg, profiles, library, usage)
    if isinstance(outcome, ShortCircuit):
        return SeverityScore(value=1.0, vector=None, short_circuit=outcome, evidence=evidence)
    return SeverityScore(
        value=weighted_distance(outcome, weights),
        vector=outcome,
        short_circuit=None,
        evidence=evidence,
    )


@dataclass
class SeverityTables:
    """Published result of one scoring run over the corpus."""

    pair_scores: dict[tuple[str, str], SeverityScore]
    employee_scores: dict[str, SeverityScore]
    client_scores: dict[str, SeverityScore]

    def etag(self) -> str:
        import hashlib

        payload = json.dumps(
            {
                "pairs": {f"{u}\x00{c}": s.to_doc() for (u, c), s in sorted(self.pair_scores.items())},
                "employees": {k: s.to_doc() for k, s in sorted(self.employee_scores.items())},
                "clients": {k: s.to_doc() for k, s in sorted(self.client_scores.items())},
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def export_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["entity_type", "id", "severity", "short_circuit", "y1", "y2", "y3", "y4", "y5"]
        )

        def row(kind: str, ident: str, score: SeverityScore) -> list[str]:
            comps = score.vector.components if score.vector else ("", "", "", "", "")
            sc = score.short_circuit.reason if score.short_circuit else ""
            return [kind, ident, f"{score.value:.6f}", sc, *[str(c) for c in comps]]

        for emp, score in sorted(self.employee_scores.items()):
            writer.writerow(row("employee", emp, score))
        for cli, score in sorted(self.client_scores.items()):
            writer.writerow(row("client", cli, score))
        for (emp, cli), score in sorted(self.pair_scores.items()):
            writer.writerow(row("pair", f"{emp}->{cli}", score))
        return buf.getvalue()


class CorpusScorer:
    """Binds a store to scoring configuration and aggregates severities."""

    def __init__(
        self,
        store: EventStore,
        cfg: ScoringConfig | None = None,
        profiles: Profiles | None = None,
        library: Sequence[PatternSeries] | None = None,
        weights: LayerWeights | None = None,
    ):
        self.store = store
        self.cfg = cfg or ScoringConfig()
        self.profiles = profiles or Profiles()
        self.library = list(library) if library is not None else default_pattern_library()
        self.weights = weights or LayerWeights()
        self.usage = UsageStats.from_events(store.query_events())

    def refresh_usage(self) -> None:
        self.usage = UsageStats.from_events(self.store.query_events())

    def pair_severity(self, employee: str, client: str) -> SeverityScore:
        series = self.store.series_for_pair(employee, client)
        return pair_severity(series, self.cfg, self.profiles, self.library, self.weights, self.usage)

    def employee_severity(self, employee: str) -> SeverityScore:
        """Maximum severity over the employee's related clients (0 with none)."""
        related = sorted(self.store.clients_of(employee))
        best: SeverityScore | None = None
        for client in related:
            score = self.pair_severity(employee, client)
            if best is None or score.value > best.value:
                score.anchor_client = client
                best = score
        if best is None:
            return SeverityScore(0.0, PatternVector.zeros(), None, Evidence())
        return best

    def client_severity(self, client: str) -> SeverityScore:
        series = self.store.series_for_client(client)
        return pair_severity(series, self.cfg, self.profiles, self.library, self.weights, self.usage)

    def score_corpus(self) -> SeverityTables:
        """Score every pair, employee and client with at least one event."""
        self.refresh_usage()
        events = self.store.query_events()
        by_pair: dict[tuple[str, str], list[Event]] = {}
        by_client: dict[str, list[Event]] = {}
        for e in events:
            by_pair.setdefault((e.employee, e.client), []).append(e)
            by_client.setdefault(e.client, []).append(e)

        pair_scores: dict[tuple[str, str], SeverityScore] = {}
        for (emp, cli), evs in by_pair.items():
            series = EventSeries(client=cli, employee=emp, events=tuple(evs))
            pair_scores[(emp, cli)] = pair_severity(
                series, self.cfg, self.profiles, self.library, self.weights, self.usage
            )

        employee_scores: dict[str, SeverityScore] = {}
        for (emp, cli), score in sorted(pair_scores.items()):
            cur = employee_scores.get(emp)
            if cur is None or score.value > cur.value:
                anchored = SeverityScore(
                    value=score.value,
                    vector=score.vector,
                    short_circuit=score.short_circuit,
                    evidence=score.evidence,
                    anchor_client=cli,
                )
                employee_scores[emp] = anchored

        client_scores: dict[str, SeverityScore] = {}
        for cli, evs in by_client.items():
            series = EventSeries(client=cli, employee=None, events=tuple(evs))
            client_scores[cli] = pair_severity(
                series, self.cfg, self.profiles, self.library, self.weights, self.usage
            )

        return SeverityTables(pair_scores, employee_scores, client_scores)
