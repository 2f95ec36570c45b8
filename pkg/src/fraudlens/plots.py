"""Companion plot datasets: timeline, periodicity scatter, login parallel coordinates.

These are data products, not drawings; the web UI and the SVG exporter
render them. All derivations are pure functions over store queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .events import AuthEvent, EventStore, QueryFilter

PARALLEL_AXES = ("employee", "ip", "computer", "action")


@dataclass(frozen=True)
class TimelinePlotData:
    points: tuple[tuple[date, int], ...]
    billing_dates: tuple[date, ...] = ()

    def total(self) -> int:
        return sum(n for _, n in self.points)

    def to_doc(self) -> dict[str, Any]:
        return {
            "points": [[d.isoformat(), n] for d, n in self.points],
            "billing_dates": [d.isoformat() for d in self.billing_dates],
        }


@dataclass(frozen=True)
class PeriodicityPlotData:
    """Per action: points (k, day-of-month), k counting deduped occurrences."""

    series: Mapping[str, tuple[tuple[int, int], ...]]

    def to_doc(self) -> dict[str, Any]:
        return {"series": {a: [list(p) for p in pts] for a, pts in sorted(self.series.items())}}


@dataclass(frozen=True)
class AuthFlag:
    employee: str
    kind: str  # burst_failures | multi_ip | multi_computer
    detail: Mapping[str, Any]

    def to_doc(self) -> dict[str, Any]:
        return {"employee": self.employee, "kind": self.kind, "detail": dict(self.detail)}


@dataclass(frozen=True)
class ParallelCoordsData:
    axes: Mapping[str, tuple[tuple[str, int], ...]]  # axis -> (label, count) desc
    edges: Mapping[str, tuple[tuple[str, str, int], ...]]  # "axis0-axis1" -> co-occurrence
    flags: tuple[AuthFlag, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "axes": {a: [[label, n] for label, n in nodes] for a, nodes in self.axes.items()},
            "edges": {k: [[a, b, n] for a, b, n in v] for k, v in self.edges.items()},
            "flags": [f.to_doc() for f in self.flags],
        }


@dataclass
class AuthRuleConfig:
    fail_x: int = 5
    fail_y_days: int = 1

    def __post_init__(self) -> None:
        if self.fail_x < 1 or self.fail_y_days < 1:
            raise ValueError("auth rule thresholds must be positive")


def timeline_data(
    store: EventStore,
    employee: str,
    client: str,
    billing: Sequence[date] = (),
) -> TimelinePlotData:
    """One point per distinct UTC date with its event count; billing dates
    are echoed verbatim (no guessing when the cycle is unknown)."""
    series = store.series_for_pair(employee, client)
    counts: dict[date, int] = {}
    for e in series.events:
        d = e.ts.date()
        counts[d] = counts.get(d, 0) + 1
    points = tuple(sorted(counts.items()))
    return TimelinePlotData(points=points, billing_dates=tuple(billing))


def periodicity_plot_data(store: EventStore, employee: str, client: str) -> PeriodicityPlotData:
    """Per-action scatter: same-day repeats of an action collapse to one
    occurrence, then occurrences are numbered k=1.. with y = day of month."""
    series = store.series_for_pair(employee, client)
    days_by_action: dict[str, list[date]] = {}
    for e in series.events:  # ts-ascending, so appended days stay sorted
        d = e.ts.date()
        seen = days_by_action.setdefault(e.action, [])
        if not seen or seen[-1] != d:
            seen.append(d)
    out: dict[str, tuple[tuple[int, int], ...]] = {}
    for action, days in days_by_action.items():
        out[action] = tuple((k, d.day) for k, d in enumerate(days, start=1))
    return PeriodicityPlotData(series=out)


def parallel_coords_data(
    store: EventStore,
    flt: QueryFilter | None = None,
    rules: AuthRuleConfig | None = None,
) -> ParallelCoordsData:
    """Axes employee/ip/computer/action ordered by occurrence count, edges
    between adjacent axes carrying co-occurrence counts."""
    auth = store.query_auth(flt)
    axes: dict[str, tuple[tuple[str, int], ...]] = {}
    for axis in PARALLEL_AXES:
        counts: dict[str, int] = {}
        for e in auth:
            label = getattr(e, axis)
            counts[label] = counts.get(label, 0) + 1
        axes[axis] = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    edges: dict[str, tuple[tuple[str, str, int], ...]] = {}
    for left, right in zip(PARALLEL_AXES, PARALLEL_AXES[1:]):
        co: dict[tuple[str, str], int] = {}
        for e in auth:
            key = (getattr(e, left), getattr(e, right))
            co[key] = co.get(key, 0) + 1
        edges[f"{left}-{right}"] = tuple(
            (a, b, n) for (a, b), n in sorted(co.items(), key=lambda kv: (-kv[1], kv[0]))
        )
    flags = auth_pattern_flags(store, rules or AuthRuleConfig(), events=auth)
    return ParallelCoordsData(axes=axes, edges=edges, flags=tuple(flags))


def _burst_window(
    failures: Sequence[AuthEvent], fail_x: int, fail_y_days: int
) -> tuple[int, AuthEvent, AuthEvent] | None:
    """Largest strict-exceedance window, or None when never > fail_x."""
    horizon = fail_y_days * 86400.0
    times = [e.ts.timestamp() for e in failures]
    best: tuple[int, AuthEvent, AuthEvent] | None = None
    left = 0
    for right in range(len(failures)):
        while times[right] - times[left] > horizon:
            left += 1
        count = right - left + 1
        if count > fail_x and (best is None or count > best[0]):
            best = (count, failures[left], failures[right])
    return best


def auth_pattern_flags(
    store: EventStore,
    cfg: AuthRuleConfig | None = None,
    events: Sequence[AuthEvent] | None = None,
) -> list[AuthFlag]:
    """Login anomalies per employee: failure bursts (strictly more than
    fail_x failures inside a fail_y_days window) and activity spanning two
    or more IPs or computers."""
    cfg = cfg or AuthRuleConfig()
    auth = list(events) if events is not None else store.query_auth()
    by_employee: dict[str, list[AuthEvent]] = {}
    for e in auth:
        by_employee.setdefault(e.employee, []).append(e)

    flags: list[AuthFlag] = []
    for employee in sorted(by_employee):
        records = by_employee[employee]  # query order is ts-ascending
        failures = [e for e in records if e.action == "login_failure"]
        burst = _burst_window(failures, cfg.fail_x, cfg.fail_y_days)
        if burst is not None:
            count, first, last = burst
            flags.append(
                AuthFlag(
                    employee=employee,
                    kind="burst_failures",
                    detail={
                        "count": count,
                        "window_days": cfg.fail_y_days,
                        "from": first.ts.isoformat(),
                        "to": last.ts.isoformat(),
                    },
                )
            )
        ips = sorted({e.ip for e in records})
        if len(ips) >= 2:
            flags.append(AuthFlag(employee=employee, kind="multi_ip", detail={"ips": ips}))
        computers = sorted({e.computer for e in records})
        if len(computers) >= 2:
            flags.append(
                AuthFlag(employee=employee, kind="multi_computer", detail={"computers": computers})
            )
    return flags


# ---------------------------------------------------------------------------
# billing-date input


@dataclass(frozen=True)
class BillingSpec:
    """Either a fixed day-of-month cycle or an explicit date list."""

    client: str
    day_of_month: int | None = None
    dates: tuple[date, ...] = ()

    def materialize(self, start: date, end: date) -> tuple[date, ...]:
        if self.dates:
            return tuple(d for d in self.dates if start <= d <= end)
        if self.day_of_month is None:
            return ()
        out = []
        cursor = date(start.year, start.month, 1)
        while cursor <= end:
            try:
                d = cursor.replace(day=self.day_of_month)
            except ValueError:
                d = None  # short month without that day
            if d is not None and start <= d <= end:
                out.append(d)
            cursor = (cursor.replace(day=28) + timedelta(days=4)).replace(day=1)
        return tuple(out)


def load_billing(path: str | Path) -> dict[str, BillingSpec]:
    """Line-delimited records: {client, day_of_month} or {client, dates}."""
    specs: dict[str, BillingSpec] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        doc = json.loads(line)
        client = str(doc["client"])
        dates = tuple(date.fromisoformat(d) for d in doc.get("dates", ()))
        day = doc.get("day_of_month")
        if day is not None and not 1 <= int(day) <= 31:
            raise ValueError(f"line {lineno}: day_of_month out of range")
        specs[client] = BillingSpec(
            client=client,
            day_of_month=int(day) if day is not None else None,
            dates=dates,
        )
    return specs


def billing_dates_for(
    specs: Mapping[str, BillingSpec], client: str, points: Iterable[tuple[date, int]]
) -> tuple[date, ...]:
    """Billing dates covering the plotted span; empty when unknown."""
    spec = specs.get(client)
    if spec is None:
        return ()
    days = [d for d, _ in points]
    if not days:
        return ()
    return spec.materialize(min(days), max(days))
