from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import HealthCheck, settings

from fraudlens.events import AuthEvent, Event, EventStore
from fraudlens.scoring import Profiles, WorkingCalendar

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def ev(
    day: float,
    employee: str = "E1",
    client: str = "C1",
    action: str = "VIEW",
    system: str = "CRM",
) -> Event:
    """Event at EPOCH + day (fractional days give an intra-day time)."""
    return Event(
        ts=EPOCH + timedelta(days=day),
        employee=employee,
        client=client,
        action=action,
        system=system,
    )


def auth_ev(
    minutes: float,
    employee: str = "E1",
    ip: str = "10.0.0.1",
    computer: str = "PC-1",
    action: str = "login_failure",
) -> AuthEvent:
    return AuthEvent(
        ts=EPOCH + timedelta(minutes=minutes),
        employee=employee,
        ip=ip,
        computer=computer,
        action=action,
    )


@pytest.fixture
def store(tmp_path) -> EventStore:
    return EventStore(tmp_path / "data")


@pytest.fixture
def mem_store() -> EventStore:
    return EventStore(None)


def open_profiles(
    employees=("E1", "E2", "E3"),
    systems=("CRM", "BILLING", "FMS", "LEGACY"),
    **overrides,
) -> Profiles:
    """Profiles where the given employees may use the given systems."""
    defaults = dict(
        working_calendar=WorkingCalendar.default(),
        authorized_systems={e: frozenset(systems) for e in employees},
        unauthorized_actions=frozenset(),
        common_actions={},
        fms_systems=frozenset(),
    )
    defaults.update(overrides)
    return Profiles(**defaults)
