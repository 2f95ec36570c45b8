"""Uniform event model and the append-only audit-log store.

Heterogeneous control-system logs are parsed into a single canonical
record shape (one JSON object per line) and kept in an embeddable,
diff-able store: line-delimited files plus a sidecar index keyed by
employee and by client.  Queries, per-pair series extraction and
exports all run against that store.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping
from zoneinfo import ZoneInfo

logger = logging.getLogger(__name__)

EVENT_FIELDS = ("ts", "employee", "client", "action", "system")
AUTH_FIELDS = ("ts", "employee", "ip", "computer", "action")

HISTOGRAM_BUCKETS = ("1", "2-5", "6-10", ">10")


class StoreError(Exception):
    """Base error for the event store."""


class ConfigError(StoreError):
    """Bad adapter / generator configuration."""


class IngestError(StoreError):
    """The source stream itself could not be read."""


def parse_ts(text: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime (second precision)."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Event:
    """One audit record: who did what to which client account, where and when."""

    ts: datetime
    employee: str
    client: str
    action: str
    system: str
    extras: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.ts.tzinfo is None:
            raise ValueError("event timestamp must be timezone-aware")
        for name in ("employee", "client", "action", "system"):
            if not getattr(self, name):
                raise ValueError(f"event field {name!r} must be non-empty")

    @property
    def day(self) -> int:
        """UTC calendar day as an ordinal (shared epoch across the corpus)."""
        return self.ts.astimezone(timezone.utc).date().toordinal()

    def to_line(self) -> str:
        doc: dict[str, Any] = {
            "ts": format_ts(self.ts),
            "employee": self.employee,
            "client": self.client,
            "action": self.action,
            "system": self.system,
        }
        if self.extras:
            doc["extras"] = dict(self.extras)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Event":
        missing = [k for k in EVENT_FIELDS if not doc.get(k)]
        if missing:
            raise ValueError(f"missing field(s): {', '.join(missing)}")
        extras = doc.get("extras") or {}
        if not isinstance(extras, Mapping):
            raise ValueError("extras must be an object")
        return cls(
            ts=parse_ts(str(doc["ts"])),
            employee=str(doc["employee"]),
            client=str(doc["client"]),
            action=str(doc["action"]),
            system=str(doc["system"]),
            extras=dict(extras),
        )


@dataclass(frozen=True)
class AuthEvent:
    """A login-monitoring record: employee, source address, machine and outcome."""

    ts: datetime
    employee: str
    ip: str
    computer: str
    action: str

    def __post_init__(self) -> None:
        if self.ts.tzinfo is None:
            raise ValueError("auth event timestamp must be timezone-aware")
        for name in ("employee", "ip", "computer", "action"):
            if not getattr(self, name):
                raise ValueError(f"auth event field {name!r} must be non-empty")

    def to_line(self) -> str:
        return json.dumps(
            {
                "ts": format_ts(self.ts),
                "employee": self.employee,
                "ip": self.ip,
                "computer": self.computer,
                "action": self.action,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "AuthEvent":
        missing = [k for k in AUTH_FIELDS if not doc.get(k)]
        if missing:
            raise ValueError(f"missing field(s): {', '.join(missing)}")
        return cls(
            ts=parse_ts(str(doc["ts"])),
            employee=str(doc["employee"]),
            ip=str(doc["ip"]),
            computer=str(doc["computer"]),
            action=str(doc["action"]),
        )


@dataclass(frozen=True)
class EventSeries:
    """Time-ordered events for one (employee, client) pair, or client-wide."""

    client: str
    events: tuple[Event, ...]
    employee: str | None = None  # absent for client-wide series

    def __post_init__(self) -> None:
        prev: datetime | None = None
        for e in self.events:
            if prev is not None and e.ts < prev:
                raise ValueError("series events must be non-decreasing by ts")
            prev = e.ts
            if e.client != self.client:
                raise ValueError("series event does not match client key")
            if self.employee is not None and e.employee != self.employee:
                raise ValueError("series event does not match employee key")

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class QueryFilter:
    """Conjunctive event filter; every present clause must hold."""

    employees: set[str] | None = None
    clients: set[str] | None = None
    systems: set[str] | None = None
    actions: set[str] | None = None
    from_ts: datetime | None = None
    to_ts: datetime | None = None

    def __post_init__(self) -> None:
        if self.from_ts and self.to_ts and self.from_ts > self.to_ts:
            raise ValueError("from_ts must not exceed to_ts")

    def matches(self, e: Event) -> bool:
        if self.employees is not None and e.employee not in self.employees:
            return False
        if self.clients is not None and e.client not in self.clients:
            return False
        if self.systems is not None and e.system not in self.systems:
            return False
        if self.actions is not None and e.action not in self.actions:
            return False
        if self.from_ts is not None and e.ts < self.from_ts:
            return False
        if self.to_ts is not None and e.ts > self.to_ts:
            return False
        return True

    def matches_auth(self, e: AuthEvent) -> bool:
        if self.employees is not None and e.employee not in self.employees:
            return False
        if self.actions is not None and e.action not in self.actions:
            return False
        if self.from_ts is not None and e.ts < self.from_ts:
            return False
        if self.to_ts is not None and e.ts > self.to_ts:
            return False
        return True


@dataclass
class CorpusStats:
    total_events: int
    distinct_employees: int
    distinct_clients: int
    client_occurrence_histogram: dict[str, float]

    def to_doc(self) -> dict[str, Any]:
        return {
            "total_events": self.total_events,
            "distinct_employees": self.distinct_employees,
            "distinct_clients": self.distinct_clients,
            "client_occurrence_histogram": self.client_occurrence_histogram,
        }


def occurrence_bucket(count: int) -> str:
    if count <= 1:
        return "1"
    if count <= 5:
        return "2-5"
    if count <= 10:
        return "6-10"
    return ">10"


@dataclass
class IngestReport:
    ingested: int
    errors: list[tuple[int, str]] = field(default_factory=list)

    def to_doc(self) -> dict[str, Any]:
        return {
            "ingested": self.ingested,
            "errors": [{"line": n, "message": m} for n, m in self.errors],
        }


@dataclass
class CsvAdapterConfig:
    """Column-to-field mapping for foreign CSV logs.

    ``mapping`` keys are column positions (int) or header names (str); values
    are canonical field names.  Unmapped columns land in ``extras`` keyed by
    header name (or ``col<i>`` without a header).  A column mapped to
    ``extras`` is parsed as a JSON object.
    """

    mapping: dict[int | str, str]
    timestamp_format: str | None = None
    timezone: str | None = None
    delimiter: str = ","
    has_header: bool = False

    def __post_init__(self) -> None:
        targets = set(self.mapping.values())
        required = {"ts", "employee", "client", "action", "system"}
        missing = required - targets
        if missing:
            raise ConfigError(f"csv mapping lacks field(s): {', '.join(sorted(missing))}")
        unknown = targets - required - {"extras"}
        if unknown:
            raise ConfigError(f"csv mapping names unknown field(s): {', '.join(sorted(unknown))}")

    def tzinfo(self):
        if not self.timezone or self.timezone.upper() == "UTC":
            return timezone.utc
        try:
            return ZoneInfo(self.timezone)
        except Exception as exc:
            raise ConfigError(f"unknown timezone {self.timezone!r}") from exc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "CsvAdapterConfig":
        raw = doc.get("mapping")
        if not isinstance(raw, Mapping):
            raise ConfigError("csv adapter config needs a 'mapping' object")
        mapping: dict[int | str, str] = {}
        for key, val in raw.items():
            col: int | str
            if isinstance(key, int):
                col = key
            elif isinstance(key, str) and key.isdigit():
                col = int(key)
            else:
                col = key
            mapping[col] = str(val)
        return cls(
            mapping=mapping,
            timestamp_format=doc.get("timestamp_format"),
            timezone=doc.get("timezone"),
            delimiter=doc.get("delimiter", ","),
            has_header=bool(doc.get("has_header", False)),
        )


def _iter_lines(source: Any) -> Iterator[str]:
    """Normalize the accepted source shapes to an iterator of text lines."""
    if hasattr(source, "read"):
        try:
            source = source.read()
        except Exception as exc:
            raise IngestError(f"unreadable stream: {exc}") from exc
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    if isinstance(source, str):
        yield from source.splitlines()
        return
    if isinstance(source, Iterable):
        for line in source:
            if isinstance(line, bytes):
                line = line.decode("utf-8", errors="replace")
            yield line.rstrip("\r\n")
        return
    raise IngestError(f"unsupported source type: {type(source).__name__}")


def _parse_csv_row(row: list[str], header: list[str] | None, cfg: CsvAdapterConfig) -> Event:
    fields: dict[str, str] = {}
    extras: dict[str, Any] = {}
    col_of: dict[int, str] = {}
    for key, target in cfg.mapping.items():
        if isinstance(key, int):
            idx = key
        else:
            if header is None:
                raise ValueError(f"column {key!r} needs a header row")
            if key not in header:
                raise ValueError(f"column {key!r} not in header")
            idx = header.index(key)
        col_of[idx] = target
    for idx, cell in enumerate(row):
        target = col_of.get(idx)
        if target is None:
            name = header[idx] if header and idx < len(header) else f"col{idx}"
            if cell != "":
                extras[name] = cell
            continue
        if target == "extras":
            if cell:
                parsed = json.loads(cell)
                if not isinstance(parsed, dict):
                    raise ValueError("extras column must hold a JSON object")
                extras.update(parsed)
            continue
        fields[target] = cell
    missing = [f for f in EVENT_FIELDS if not fields.get(f)]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    if cfg.timestamp_format:
        dt = datetime.strptime(fields["ts"], cfg.timestamp_format)
    else:
        raw = fields["ts"].strip()
        if raw.endswith(("Z", "z")):
            raw = raw[:-1] + "+00:00"
        dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=cfg.tzinfo())  # naive stamps live in the source tz
    ts = dt.astimezone(timezone.utc).replace(microsecond=0)
    return Event(
        ts=ts,
        employee=fields["employee"],
        client=fields["client"],
        action=fields["action"],
        system=fields["system"],
        extras=extras,
    )


class EventStore:
    """Append-only event store with per-employee / per-client postings.

    Concurrency: many readers, one writer.  A whole ingest batch is
    published under the write lock, so a concurrent query sees either
    none of the batch or all of it.
    """

    INDEX_VERSION = 1

    def __init__(self, data_dir: str | Path | None = None):
        self._lock = threading.RLock()
        self._events: list[Event] = []
        self._auth: list[AuthEvent] = []
        self._by_employee: dict[str, list[int]] = {}
        self._by_client: dict[str, list[int]] = {}
        self.data_dir = Path(data_dir) if data_dir is not None else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # -- persistence ------------------------------------------------------

    @property
    def _events_path(self) -> Path:
        assert self.data_dir is not None
        return self.data_dir / "events.jsonl"

    @property
    def _auth_path(self) -> Path:
        assert self.data_dir is not None
        return self.data_dir / "auth.jsonl"

    @property
    def _index_path(self) -> Path:
        assert self.data_dir is not None
        return self.data_dir / "index.json"

    def _load(self) -> None:
        if self._events_path.exists():
            with self._events_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    self._events.append(Event.from_doc(json.loads(line)))
        if self._auth_path.exists():
            with self._auth_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    self._auth.append(AuthEvent.from_doc(json.loads(line)))
        index = None
        if self._index_path.exists():
            try:
                index = json.loads(self._index_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                index = None
        if index and index.get("event_count") == len(self._events):
            self._by_employee = {k: list(v) for k, v in index.get("by_employee", {}).items()}
            self._by_client = {k: list(v) for k, v in index.get("by_client", {}).items()}
        else:
            self._rebuild_postings()
            if self._events and self.data_dir is not None:
                self._write_index()

    def _rebuild_postings(self) -> None:
        self._by_employee = {}
        self._by_client = {}
        for i, e in enumerate(self._events):
            self._by_employee.setdefault(e.employee, []).append(i)
            self._by_client.setdefault(e.client, []).append(i)

    def _write_index(self) -> None:
        doc = {
            "version": self.INDEX_VERSION,
            "event_count": len(self._events),
            "auth_count": len(self._auth),
            "by_employee": self._by_employee,
            "by_client": self._by_client,
        }
        tmp = self._index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
        tmp.replace(self._index_path)

    # -- ingestion --------------------------------------------------------

    def add_events(self, events: Iterable[Event]) -> int:
        """Append a pre-parsed batch atomically (used by ingest and the generator)."""
        batch = list(events)
        with self._lock:
            start = len(self._events)
            if self.data_dir is not None:
                with self._events_path.open("a", encoding="utf-8") as fh:
                    for e in batch:
                        fh.write(e.to_line() + "\n")
            self._events.extend(batch)
            for i, e in enumerate(batch, start=start):
                self._by_employee.setdefault(e.employee, []).append(i)
                self._by_client.setdefault(e.client, []).append(i)
            if self.data_dir is not None:
                self._write_index()
        return len(batch)

    def add_auth_events(self, events: Iterable[AuthEvent]) -> int:
        batch = list(events)
        with self._lock:
            if self.data_dir is not None:
                with self._auth_path.open("a", encoding="utf-8") as fh:
                    for e in batch:
                        fh.write(e.to_line() + "\n")
            self._auth.extend(batch)
            if self.data_dir is not None:
                self._write_index()
        return len(batch)

    def ingest_records(
        self,
        source: Any,
        format: str = "canonical-jsonl",
        csv_config: CsvAdapterConfig | None = None,
    ) -> IngestReport:
        """Parse a line-delimited source and persist every well-formed record.

        Malformed lines are reported with their line numbers and never abort
        the batch.  Supported formats: ``canonical-jsonl``, ``csv``
        (requires ``csv_config``) and ``auth-jsonl``.
        """
        if format in ("canonical-jsonl", "jsonl"):
            events, errors = self._parse_canonical(source)
            self.add_events(events)
            return IngestReport(len(events), errors)
        if format in ("csv", "csv-adapter"):
            if csv_config is None:
                raise ConfigError("csv format requires an adapter config")
            events, errors = self._parse_csv(source, csv_config)
            self.add_events(events)
            return IngestReport(len(events), errors)
        if format in ("auth-jsonl", "auth"):
            auth, errors = self._parse_auth(source)
            self.add_auth_events(auth)
            return IngestReport(len(auth), errors)
        raise ConfigError(f"unknown ingest format {format!r}")

    def _parse_canonical(self, source: Any) -> tuple[list[Event], list[tuple[int, str]]]:
        events: list[Event] = []
        errors: list[tuple[int, str]] = []
        for lineno, line in enumerate(_iter_lines(source), start=1):
            if not line.strip():
                continue
            try:
                events.append(Event.from_doc(json.loads(line)))
            except (ValueError, TypeError) as exc:
                errors.append((lineno, str(exc)))
        return events, errors

    def _parse_auth(self, source: Any) -> tuple[list[AuthEvent], list[tuple[int, str]]]:
        events: list[AuthEvent] = []
        errors: list[tuple[int, str]] = []
        for lineno, line in enumerate(_iter_lines(source), start=1):
            if not line.strip():
                continue
            try:
                events.append(AuthEvent.from_doc(json.loads(line)))
            except (ValueError, TypeError) as exc:
                errors.append((lineno, str(exc)))
        return events, errors

    def _parse_csv(
        self, source: Any, cfg: CsvAdapterConfig
    ) -> tuple[list[Event], list[tuple[int, str]]]:
        events: list[Event] = []
        errors: list[tuple[int, str]] = []
        lines = list(_iter_lines(source))
        header: list[str] | None = None
        start = 0
        if cfg.has_header and lines:
            header = next(csv.reader([lines[0]], delimiter=cfg.delimiter))
            start = 1
        for lineno, line in enumerate(lines[start:], start=start + 1):
            if not line.strip():
                continue
            try:
                row = next(csv.reader([line], delimiter=cfg.delimiter))
                events.append(_parse_csv_row(row, header, cfg))
            except (ValueError, TypeError, json.JSONDecodeError, StopIteration) as exc:
                errors.append((lineno, str(exc)))
        return events, errors

    # -- queries ----------------------------------------------------------

    def _snapshot(self) -> list[Event]:
        with self._lock:
            return self._events[:]

    def query_events(self, flt: QueryFilter | None = None, dedupe: bool = False) -> list[Event]:
        """Events satisfying every present filter clause, by ts then insertion order."""
        flt = flt or QueryFilter()
        with self._lock:
            picked = [
                (self._events[i].ts, i, self._events[i])
                for i in self._candidate_indexes(flt)
                if flt.matches(self._events[i])
            ]
        picked.sort(key=lambda p: (p[0], p[1]))
        out: list[Event] = []
        seen: set[str] = set()
        for _, _, e in picked:
            if dedupe:
                key = e.to_line()
                if key in seen:
                    continue
                seen.add(key)
            out.append(e)
        return out

    def _candidate_indexes(self, flt: QueryFilter) -> Iterable[int]:
        if flt.employees is not None and len(flt.employees) < 20:
            idxs: list[int] = []
            for emp in sorted(flt.employees):
                idxs.extend(self._by_employee.get(emp, ()))
            return sorted(set(idxs))
        if flt.clients is not None and len(flt.clients) < 20:
            idxs = []
            for cli in sorted(flt.clients):
                idxs.extend(self._by_client.get(cli, ()))
            return sorted(set(idxs))
        return range(len(self._events))

    def query_auth(self, flt: QueryFilter | None = None) -> list[AuthEvent]:
        flt = flt or QueryFilter()
        with self._lock:
            picked = [(e.ts, i, e) for i, e in enumerate(self._auth) if flt.matches_auth(e)]
        picked.sort(key=lambda p: (p[0], p[1]))
        return [e for _, _, e in picked]

    def series_for_pair(self, employee: str, client: str) -> EventSeries:
        with self._lock:
            idxs = [i for i in self._by_employee.get(employee, ()) if self._events[i].client == client]
            events = sorted((self._events[i] for i in idxs), key=lambda e: e.ts)
        return EventSeries(client=client, employee=employee, events=tuple(events))

    def series_for_client(self, client: str) -> EventSeries:
        with self._lock:
            events = sorted((self._events[i] for i in self._by_client.get(client, ())), key=lambda e: e.ts)
        return EventSeries(client=client, employee=None, events=tuple(events))

    def employees(self) -> list[str]:
        with self._lock:
            return sorted(self._by_employee)

    def clients(self) -> list[str]:
        with self._lock:
            return sorted(self._by_client)

    def pairs(self) -> list[tuple[str, str]]:
        """All (employee, client) pairs with at least one event."""
        with self._lock:
            seen = {(e.employee, e.client) for e in self._events}
        return sorted(seen)

    def clients_of(self, employee: str) -> dict[str, int]:
        """Related clients of an employee with pair event counts."""
        out: dict[str, int] = {}
        with self._lock:
            for i in self._by_employee.get(employee, ()):
                out[self._events[i].client] = out.get(self._events[i].client, 0) + 1
        return out

    def employees_of(self, client: str) -> dict[str, int]:
        out: dict[str, int] = {}
        with self._lock:
            for i in self._by_client.get(client, ()):
                out[self._events[i].employee] = out.get(self._events[i].employee, 0) + 1
        return out

    def auth_events(self) -> list[AuthEvent]:
        with self._lock:
            return self._auth[:]

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)

    # -- stats and export -------------------------------------------------

    def stats(self) -> CorpusStats:
        with self._lock:
            per_client = {c: len(v) for c, v in self._by_client.items()}
            total = len(self._events)
            employees = len(self._by_employee)
        histogram = {b: 0.0 for b in HISTOGRAM_BUCKETS}
        if per_client:
            for count in per_client.values():
                histogram[occurrence_bucket(count)] += 1
            n = len(per_client)
            histogram = {b: v / n for b, v in histogram.items()}
        return CorpusStats(
            total_events=total,
            distinct_employees=employees,
            distinct_clients=len(per_client),
            client_occurrence_histogram=histogram,
        )

    def export_records(self, flt: QueryFilter | None = None, format: str = "canonical-jsonl") -> str:
        """Serialize the filtered events; ingesting the output reproduces them."""
        events = self.query_events(flt)
        if format in ("canonical-jsonl", "jsonl"):
            return "".join(e.to_line() + "\n" for e in events)
        if format == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["ts", "employee", "client", "action", "system", "extras"])
            for e in events:
                writer.writerow(
                    [
                        format_ts(e.ts),
                        e.employee,
                        e.client,
                        e.action,
                        e.system,
                        json.dumps(dict(e.extras), sort_keys=True) if e.extras else "",
                    ]
                )
            return buf.getvalue()
        raise ConfigError(f"unknown export format {format!r}")


EXPORT_CSV_MAPPING = CsvAdapterConfig(
    mapping={0: "ts", 1: "employee", 2: "client", 3: "action", 4: "system", 5: "extras"},
    has_header=True,
)
