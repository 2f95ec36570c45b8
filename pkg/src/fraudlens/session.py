"""The investigation state machine.

A session walks employees in severity order (most suspicious first),
one detail frame at a time.  Pausing lets the auditor expand the frame:
selecting a client pulls its other employees in as gray nodes, selecting
an employee refocuses attention and grays out the rest, selecting a
cluster marks its members in the client heat-map.  Too many additions
flip the view to the overview drawing.  Resuming clears the gray
post-processing state and continues after the last visualized employee.

Commands are serialized per session; the severity tables and store the
session reads are never mutated here.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Any, Mapping

from .layout import (
    FrameContext,
    FrameScene,
    SceneOverrides,
    build_frame_scene,
    build_overview_scene,
    partition_clients,
)


class SessionError(Exception):
    """Invalid command for the current state; code is 'conflict' or 'not_found'."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def build_playlist(ctx: FrameContext, threshold: float) -> list[str]:
    """Employees meeting the threshold, severity descending, id ascending."""
    eligible = [
        (ident, score.value)
        for ident, score in ctx.tables.employee_scores.items()
        if score.value >= threshold
    ]
    eligible.sort(key=lambda kv: (-kv[1], kv[0]))
    return [ident for ident, _ in eligible]


@dataclass
class InvestigationSession:
    ctx: FrameContext
    threshold: float
    addition_cap: int = 10
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self) -> None:
        if self.addition_cap < 0:
            raise ValueError("addition_cap must be non-negative")
        self._lock = threading.RLock()
        self.playlist: list[str] = build_playlist(self.ctx, self.threshold)
        self.cursor: int = -1
        self.status: str = "paused"
        self.additions: int = 0
        self.mode: str = "detail"
        self.selected: str | None = None
        self.gray_employees: list[str] = []
        self.gray_clients: list[str] = []
        self.gray_existing: set[str] = set()
        self.marked_clients: set[str] = set()
        self.enlarged: set[str] = set()
        self.active_scene: FrameScene | None = None

    # -- helpers ------------------------------------------------------------

    def _overrides(self) -> SceneOverrides:
        return SceneOverrides(
            gray_employees=tuple(self.gray_employees),
            gray_clients=tuple(self.gray_clients),
            gray_existing=frozenset(self.gray_existing),
            selected=self.selected,
            marked_clients=frozenset(self.marked_clients),
            enlarged=frozenset(self.enlarged),
        )

    def _focus(self) -> str:
        return self.playlist[self.cursor]

    def _clear_postprocessing(self) -> None:
        self.gray_employees.clear()
        self.gray_clients.clear()
        self.gray_existing.clear()
        self.enlarged.clear()
        self.selected = None
        self.additions = 0

    def _drawn_entities(self) -> tuple[list[str], list[str]]:
        focus = self._focus()
        individual, _, _ = partition_clients(self.ctx, focus)
        employees = [focus, *self.gray_employees]
        clients = [*individual, *self.gray_clients]
        return employees, clients

    def _rebuild_scene(self) -> FrameScene:
        if self.mode == "overview":
            employees, clients = self._drawn_entities()
            self.active_scene = build_overview_scene(
                self.ctx, employees, clients, self._overrides()
            )
        else:
            self.active_scene = build_frame_scene(self.ctx, self._focus(), self._overrides())
        return self.active_scene

    def _require(self, condition: bool, message: str) -> None:
        if not condition:
            raise SessionError("conflict", message)

    # -- commands -----------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            self._require(self.status == "paused", f"cannot start while {self.status}")
            self._require(self.cursor == -1, "session already started; use resume")
            self.status = "playing"

    def pause(self) -> None:
        with self._lock:
            self._require(self.status == "playing", f"cannot pause while {self.status}")
            self.status = "paused"

    def resume(self) -> FrameScene | None:
        """Continue after the last visualized employee, dropping gray state."""
        with self._lock:
            self._require(self.status == "paused", f"cannot resume while {self.status}")
            self.status = "playing"
            self._clear_postprocessing()
            self.mode = "detail"
            if self.cursor >= 0:
                return self._rebuild_scene()
            return None

    def stop(self) -> None:
        with self._lock:
            self._require(self.status != "stopped", "session already stopped")
            self.status = "stopped"

    def next_frame(self) -> FrameScene | None:
        """Advance to the next employee; None when the playlist is exhausted
        (the session stops)."""
        with self._lock:
            self._require(self.status == "playing", f"cannot advance while {self.status}")
            if self.cursor + 1 >= len(self.playlist):
                self.status = "stopped"
                return None
            self.cursor += 1
            self._clear_postprocessing()
            self.mode = "detail"
            return self._rebuild_scene()

    def select_node(self, node_id: str) -> FrameScene:
        with self._lock:
            if self.status == "playing":
                self.status = "paused"  # selection implies processing
            self._require(self.status == "paused", f"cannot select while {self.status}")
            self._require(self.active_scene is not None, "no frame visualized yet")
            node = next((n for n in self.active_scene.nodes if n.id == node_id), None)
            if node is None:
                raise SessionError("not_found", f"node not in scene: {node_id}")

            if self.mode == "overview":
                self.enlarged.add(node_id)
                self.selected = node_id
                return self._rebuild_scene()

            if node.kind in ("cluster_low", "cluster_medium"):
                self.marked_clients.update(node.members)
                self.selected = node_id
            elif node.kind == "client":
                self._expand_client(node_id)
            else:
                self._expand_employee(node_id)

            if self.additions > self.addition_cap and self.mode == "detail":
                self.mode = "overview"
            return self._rebuild_scene()

    def _expand_client(self, client: str) -> None:
        drawn = {self._focus(), *self.gray_employees}
        related = sorted(self.ctx.store.employees_of(client))
        added = [u for u in related if u not in drawn]
        self.gray_employees.extend(added)
        self.additions += len(added)
        self.selected = client

    def _expand_employee(self, employee: str) -> None:
        focus = self._focus()
        individual, _, _ = partition_clients(self.ctx, focus)
        drawn_clients = {*individual, *self.gray_clients}
        related = sorted(self.ctx.store.clients_of(employee))
        added = [c for c in related if c not in drawn_clients]
        self.gray_clients.extend(added)
        self.additions += len(added)
        # Non-selected employees go gray, as do drawn clients exclusive to them.
        others = {u for u in (focus, *self.gray_employees) if u != employee}
        related_set = set(related)
        exclusive = {c for c in individual if c not in related_set}
        self.gray_existing = others | exclusive
        self.selected = employee

    def set_mode(self, mode: str) -> FrameScene:
        with self._lock:
            if mode not in ("detail", "overview"):
                raise ValueError(f"unknown mode: {mode}")
            self._require(self.cursor >= 0, "no frame visualized yet")
            if mode == "detail" and self.mode != "detail":
                self._clear_postprocessing()
            self.mode = mode
            return self._rebuild_scene()

    def set_threshold(self, threshold: float) -> None:
        """Only before the first frame; afterwards create a fresh session so
        the cursor never moves backwards."""
        with self._lock:
            self._require(self.cursor == -1, "threshold is fixed once the animation started")
            self.threshold = threshold
            self.playlist = build_playlist(self.ctx, threshold)

    def scene(self) -> FrameScene:
        with self._lock:
            if self.active_scene is None:
                raise SessionError("conflict", "no frame visualized yet")
            return self.active_scene

    # -- checkpointing ------------------------------------------------------

    def checkpoint(self) -> dict[str, Any]:
        with self._lock:
            return {
                "session_id": self.session_id,
                "threshold": self.threshold,
                "playlist": list(self.playlist),
                "cursor": self.cursor,
                "status": self.status,
                "additions": self.additions,
                "addition_cap": self.addition_cap,
                "mode": self.mode,
                "selected": self.selected,
                "gray_employees": list(self.gray_employees),
                "gray_clients": list(self.gray_clients),
                "gray_existing": sorted(self.gray_existing),
                "marked_clients": sorted(self.marked_clients),
                "enlarged": sorted(self.enlarged),
            }

    @classmethod
    def restore(cls, ctx: FrameContext, doc: Mapping[str, Any]) -> "InvestigationSession":
        session = cls(
            ctx=ctx,
            threshold=float(doc["threshold"]),
            addition_cap=int(doc.get("addition_cap", 10)),
            session_id=str(doc.get("session_id") or uuid.uuid4().hex),
        )
        session.playlist = [str(u) for u in doc["playlist"]]
        session.cursor = int(doc["cursor"])
        session.status = str(doc["status"])
        session.additions = int(doc.get("additions", 0))
        session.mode = str(doc.get("mode", "detail"))
        session.selected = doc.get("selected")
        session.gray_employees = [str(u) for u in doc.get("gray_employees", ())]
        session.gray_clients = [str(c) for c in doc.get("gray_clients", ())]
        session.gray_existing = {str(x) for x in doc.get("gray_existing", ())}
        session.marked_clients = {str(c) for c in doc.get("marked_clients", ())}
        session.enlarged = {str(x) for x in doc.get("enlarged", ())}
        if session.cursor >= 0:
            session._rebuild_scene()
        return session

    def summary(self) -> dict[str, Any]:
        with self._lock:
            return {
                "session_id": self.session_id,
                "threshold": self.threshold,
                "playlist_length": len(self.playlist),
                "cursor": self.cursor,
                "status": self.status,
                "mode": self.mode,
                "additions": self.additions,
                "focus": self.playlist[self.cursor] if self.cursor >= 0 else None,
            }
