"""Radial scene and heat-map layout.

Scores become pictures here: heat-map grids ordered by severity, and the
five-layer radial frame around one focus employee.  Employees occupy the
left half-plane and clients the right; low/medium-severity clients
collapse into cluster wedges pinned at the vertical axis.  Every node
carries concentric bands, one per pattern layer, each split into a heat
cell (region A, the pattern verdict) and proportional segments (region B,
the underlying usage shares).  Gray post-processing additions are placed
in reserved margins at the angular extremes so existing nodes never move.

All geometry lives on the unit circle: angles in radians (0 at the
positive x-axis, counterclockwise), radii in [0, 1].
"""

from __future__ import annotations

import colorsys
import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .events import Event, EventStore, QueryFilter
from .scoring import (
    Profiles,
    ScoringConfig,
    SeverityScore,
    SeverityTables,
    UsageStats,
    is_infrequent,
    is_uncommon,
)

RGB = tuple[int, int, int]

TAU = 2.0 * math.pi
HALF_PI = math.pi / 2.0

GRAY_RGB: RGB = (160, 160, 160)
CLUSTER_LOW_RGB: RGB = (165, 210, 255)
CLUSTER_MED_RGB: RGB = (120, 200, 120)
WITHIN_HOURS_RGB: RGB = (150, 200, 235)
OFF_HOURS_RGB: RGB = (240, 130, 120)
OTHER_SEGMENT_RGB: RGB = (125, 125, 125)

COLOR_STOPS: tuple[tuple[float, RGB], ...] = (
    (0.00, (0, 0, 255)),
    (0.25, (0, 255, 255)),
    (0.50, (0, 255, 0)),
    (0.75, (255, 255, 0)),
    (1.00, (255, 0, 0)),
)

L1_RING = (0.30, 0.42)
ENLARGED_RING = (0.26, 0.46)
BAND_RINGS: dict[str, tuple[float, float]] = {
    "L2_systems": (0.44, 0.56),
    "L3_actions": (0.58, 0.70),
    "L4_hours": (0.72, 0.84),
    "L5_periodicity": (0.86, 0.98),
}
EMPLOYEE_LAYERS = ("L2_systems", "L3_actions", "L4_hours")
CLIENT_LAYERS = ("L2_systems", "L3_actions", "L4_hours", "L5_periodicity")


def severity_color(s: float) -> RGB:
    """Blue-to-red heat gradient, piecewise linear over the declared stops."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"severity out of range: {s}")
    for (s0, c0), (s1, c1) in zip(COLOR_STOPS, COLOR_STOPS[1:]):
        if s <= s1:
            t = (s - s0) / (s1 - s0)
            return tuple(round(a + t * (b - a)) for a, b in zip(c0, c1))  # type: ignore[return-value]
    return COLOR_STOPS[-1][1]


def color_hex(rgb: RGB) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def label_color(label: str) -> RGB:
    """Stable per-label color so a system keeps its color across frames."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    hue = digest[0] / 255.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.55, 0.85)
    return (round(r * 255), round(g * 255), round(b * 255))


@dataclass
class LayoutConfig:
    t_low: float = 0.3
    t_med: float = 0.6
    cluster_half_width: float = 0.12
    gray_margin: float = 0.30
    heat_columns: int = 12
    edge_base_thickness: float = 0.05
    other_share_min: float = 0.001
    edge_style: str = "arc"

    def __post_init__(self) -> None:
        if not 0.0 <= self.t_low <= self.t_med <= 1.0:
            raise ValueError("cluster thresholds need 0 <= t_low <= t_med <= 1")
        if self.heat_columns < 1:
            raise ValueError("heat_columns must be positive")
        if self.edge_style not in ("arc", "straight"):
            raise ValueError("edge_style must be 'arc' or 'straight'")


@dataclass(frozen=True)
class HeatCell:
    id: str
    severity: float
    color: RGB
    marked_x: bool = False

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "severity": self.severity,
            "color": list(self.color),
            "marked_x": self.marked_x,
        }


@dataclass(frozen=True)
class HeatMapGrid:
    cells: tuple[HeatCell, ...]
    columns: int

    def to_doc(self) -> dict[str, Any]:
        return {"columns": self.columns, "cells": [c.to_doc() for c in self.cells]}


@dataclass(frozen=True)
class Segment:
    label: str
    color: RGB
    fraction: float
    marked_x: bool = False

    def to_doc(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "color": list(self.color),
            "fraction": self.fraction,
            "marked_x": self.marked_x,
        }


@dataclass(frozen=True)
class LayerBand:
    owner: str
    layer: str
    region_a: tuple[HeatCell, ...]
    region_b: tuple[Segment, ...]

    def to_doc(self) -> dict[str, Any]:
        return {
            "owner": self.owner,
            "layer": self.layer,
            "region_a": [c.to_doc() for c in self.region_a],
            "region_b": [s.to_doc() for s in self.region_b],
        }


@dataclass(frozen=True)
class SceneNode:
    id: str
    kind: str  # employee | client | cluster_low | cluster_medium
    angular_span: tuple[float, float]
    radial_span: tuple[float, float]
    color: RGB
    gray: bool = False
    enlarged: bool = False
    members: tuple[str, ...] = ()  # cluster nodes only

    def __post_init__(self) -> None:
        if not self.angular_span[0] < self.angular_span[1]:
            raise ValueError("degenerate angular span")
        if not self.radial_span[0] < self.radial_span[1]:
            raise ValueError("degenerate radial span")

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "id": self.id,
            "kind": self.kind,
            "angular_span": list(self.angular_span),
            "radial_span": list(self.radial_span),
            "color": list(self.color),
            "gray": self.gray,
            "enlarged": self.enlarged,
        }
        if self.kind.startswith("cluster"):
            doc["members"] = list(self.members)
        return doc


@dataclass(frozen=True)
class SceneEdge:
    source: str
    target: str
    thickness: float
    color: RGB
    gray: bool = False
    style: str = "arc"

    def __post_init__(self) -> None:
        if self.thickness <= 0:
            raise ValueError("edge thickness must be positive")

    def to_doc(self) -> dict[str, Any]:
        return {
            "from": self.source,
            "to": self.target,
            "thickness": self.thickness,
            "color": list(self.color),
            "gray": self.gray,
            "style": self.style,
        }


@dataclass(frozen=True)
class FrameScene:
    mode: str  # detail | overview
    focus_employee: str | None
    nodes: tuple[SceneNode, ...]
    edges: tuple[SceneEdge, ...]
    bands: tuple[LayerBand, ...]
    heatmaps: Mapping[str, HeatMapGrid]
    arcs: Mapping[str, Any]

    def to_doc(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "focus": self.focus_employee,
            "nodes": [n.to_doc() for n in self.nodes],
            "edges": [e.to_doc() for e in self.edges],
            "bands": [b.to_doc() for b in self.bands],
            "heatmaps": {k: g.to_doc() for k, g in self.heatmaps.items()},
            "arcs": dict(self.arcs),
        }


@dataclass
class SceneOverrides:
    """Session-driven post-processing state applied on top of a base frame."""

    gray_employees: tuple[str, ...] = ()
    gray_clients: tuple[str, ...] = ()
    gray_existing: frozenset[str] = frozenset()
    selected: str | None = None
    marked_employees: frozenset[str] = frozenset()
    marked_clients: frozenset[str] = frozenset()
    enlarged: frozenset[str] = frozenset()


@dataclass
class FrameContext:
    """Everything a frame needs: the store, published tables, reference data."""

    store: EventStore
    tables: SeverityTables
    profiles: Profiles
    scoring: ScoringConfig
    usage: UsageStats
    library_names: tuple[str, ...]
    config: LayoutConfig = field(default_factory=LayoutConfig)


def build_heatmap(
    scores: Mapping[str, SeverityScore],
    columns: int,
    marked: frozenset[str] = frozenset(),
) -> HeatMapGrid:
    """Grid cells ordered severity descending, id ascending on ties."""
    if columns < 1:
        raise ValueError("columns must be positive")
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1].value, kv[0]))
    cells = tuple(
        HeatCell(
            id=ident,
            severity=score.value,
            color=severity_color(score.value),
            marked_x=ident in marked,
        )
        for ident, score in ordered
    )
    return HeatMapGrid(cells=cells, columns=columns)


# ---------------------------------------------------------------------------
# angular bookkeeping


def _arcs_meta(cfg: LayoutConfig) -> dict[str, Any]:
    cw, margin = cfg.cluster_half_width, cfg.gray_margin
    return {
        "left": {
            "base": [HALF_PI + cw + margin, 3 * HALF_PI - cw - margin],
            "margins": {
                "top": [HALF_PI + cw, HALF_PI + cw + margin],
                "bottom": [3 * HALF_PI - cw - margin, 3 * HALF_PI - cw],
            },
        },
        "right": {
            "base": [-HALF_PI + cw + margin, HALF_PI - cw - margin],
            "margins": {
                "top": [HALF_PI - cw - margin, HALF_PI - cw],
                "bottom": [-HALF_PI + cw, -HALF_PI + cw + margin],
            },
        },
        "clusters": {
            "low": [HALF_PI - cw, HALF_PI + cw],
            "medium": [3 * HALF_PI - cw, 3 * HALF_PI + cw],
        },
        # Radial frame for clients that draw from the document alone.
        "rings": {"L1": list(L1_RING), **{k: list(v) for k, v in BAND_RINGS.items()}},
    }


def _partition(span: Sequence[float], n: int, top_down: bool) -> list[tuple[float, float]]:
    """Split [span] into n equal sectors; top_down yields them from the
    high-angle end first (the end nearest the top of the drawing)."""
    lo, hi = span
    width = (hi - lo) / n
    spans = [(lo + i * width, lo + (i + 1) * width) for i in range(n)]
    return list(reversed(spans)) if top_down else spans


# ---------------------------------------------------------------------------
# band construction


def _events_for(store: EventStore, *, employee: str | None = None, client: str | None = None) -> list[Event]:
    flt = QueryFilter(
        employees={employee} if employee else None,
        clients={client} if client else None,
    )
    return store.query_events(flt)


def _verdict_cell(owner: str, layer: str, suspicious: bool) -> HeatCell:
    sev = 1.0 if suspicious else 0.0
    return HeatCell(id=f"{owner}:{layer}", severity=sev, color=severity_color(sev))


def _share_segments(
    ctx: FrameContext,
    events: Sequence[Event],
    key: str,  # "system" | "action"
) -> tuple[Segment, ...]:
    """Proportional usage segments with X-marks on flagged labels."""
    if not events:
        return (Segment(label="none", color=OTHER_SEGMENT_RGB, fraction=1.0),)
    counts: Counter[str] = Counter(getattr(e, key) for e in events)
    flagged: set[str] = set()
    for e in events:
        label = getattr(e, key)
        if label in flagged:
            continue
        if key == "system":
            allowed = ctx.profiles.authorized_for(e.employee) or frozenset()
            if label not in allowed or is_infrequent(ctx.usage, e.employee, label, ctx.scoring):
                flagged.add(label)
        else:
            if label in ctx.profiles.unauthorized_actions or is_uncommon(
                ctx.profiles, e.employee, label
            ):
                flagged.add(label)
    total = sum(counts.values())
    segments: list[Segment] = []
    tiny: list[tuple[str, int]] = []
    for label, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        share = n / total
        if key == "action" and share < ctx.config.other_share_min:
            tiny.append((label, n))
        else:
            segments.append(
                Segment(label=label, color=label_color(label), fraction=share, marked_x=label in flagged)
            )
    if tiny:
        segments.append(
            Segment(
                label="other",
                color=OTHER_SEGMENT_RGB,
                fraction=sum(n for _, n in tiny) / total,
                marked_x=any(label in flagged for label, _ in tiny),
            )
        )
    return tuple(segments)


def _hours_segments(ctx: FrameContext, events: Sequence[Event]) -> tuple[Segment, ...]:
    if not events:
        return (
            Segment(label="within_hours", color=WITHIN_HOURS_RGB, fraction=1.0),
            Segment(label="off_hours", color=OFF_HOURS_RGB, fraction=0.0),
        )
    calendar = ctx.profiles.working_calendar
    outside = sum(1 for e in events if not calendar.in_hours(e.ts))
    frac_out = outside / len(events)
    return (
        Segment(label="within_hours", color=WITHIN_HOURS_RGB, fraction=1.0 - frac_out),
        Segment(label="off_hours", color=OFF_HOURS_RGB, fraction=frac_out),
    )


def _similarity_cells(ctx: FrameContext, score: SeverityScore) -> tuple[HeatCell, ...]:
    by_name: dict[str, float] = {}
    if score.evidence.similarity is not None:
        by_name = dict(score.evidence.similarity.per_pattern)
    cells = []
    for name in ctx.library_names:
        sim = by_name.get(name, 0.0)
        cells.append(HeatCell(id=name, severity=sim, color=severity_color(sim)))
    return tuple(cells)


def _node_bands(
    ctx: FrameContext,
    node_id: str,
    kind: str,
    score: SeverityScore,
    relevant: Sequence[Event],
) -> list[LayerBand]:
    """L2-L4 for employees, plus L5 for clients; verdicts from the score
    vector (short-circuit renders every verdict cell suspicious)."""
    if score.short_circuit is not None:
        verdicts = {"L2_systems": True, "L3_actions": True, "L4_hours": True}
    else:
        vec = score.vector.components if score.vector else (0, 0, 0, 0, 0)
        verdicts = {
            "L2_systems": bool(vec[3]),
            "L3_actions": bool(vec[4]),
            "L4_hours": bool(vec[2]),
        }
    bands = [
        LayerBand(
            owner=node_id,
            layer="L2_systems",
            region_a=(_verdict_cell(node_id, "L2_systems", verdicts["L2_systems"]),),
            region_b=_share_segments(ctx, relevant, "system"),
        ),
        LayerBand(
            owner=node_id,
            layer="L3_actions",
            region_a=(_verdict_cell(node_id, "L3_actions", verdicts["L3_actions"]),),
            region_b=_share_segments(ctx, relevant, "action"),
        ),
        LayerBand(
            owner=node_id,
            layer="L4_hours",
            region_a=(_verdict_cell(node_id, "L4_hours", verdicts["L4_hours"]),),
            region_b=_hours_segments(ctx, relevant),
        ),
    ]
    if kind == "client":
        bands.append(
            LayerBand(
                owner=node_id,
                layer="L5_periodicity",
                region_a=_similarity_cells(ctx, score),
                region_b=(
                    Segment(
                        label="periodic" if (score.vector and score.vector.components[1]) else "aperiodic",
                        color=OFF_HOURS_RGB
                        if (score.vector and score.vector.components[1])
                        else WITHIN_HOURS_RGB,
                        fraction=1.0,
                    ),
                ),
            )
        )
    return bands


# ---------------------------------------------------------------------------
# scenes


def _margin_spans(
    margin: Sequence[float], count: int, adjacent_high_end: bool
) -> list[tuple[float, float]]:
    """Equal slots inside one margin, filling from the end that touches the
    base arc (the high end or the low end) outwards."""
    lo, hi = margin
    if count == 0:
        return []
    width = min(0.08, (hi - lo) / count)
    spans = []
    for i in range(count):
        if adjacent_high_end:
            spans.append((hi - (i + 1) * width, hi - i * width))
        else:
            spans.append((lo + i * width, lo + (i + 1) * width))
    return spans


def _place_grays(
    ids: Sequence[str], margins: Mapping[str, Sequence[float]], half: str
) -> dict[str, tuple[float, float]]:
    """Alternate gray additions between the top and bottom margins.

    On the left half the base arc touches the top margin's high end and the
    bottom margin's low end; on the right half it is the other way around.
    """
    top_ids = [g for i, g in enumerate(ids) if i % 2 == 0]
    bottom_ids = [g for i, g in enumerate(ids) if i % 2 == 1]
    top_adjacent_high = half == "left"
    spans: dict[str, tuple[float, float]] = {}
    for ident, span in zip(
        top_ids, _margin_spans(margins["top"], len(top_ids), adjacent_high_end=top_adjacent_high)
    ):
        spans[ident] = span
    for ident, span in zip(
        bottom_ids,
        _margin_spans(margins["bottom"], len(bottom_ids), adjacent_high_end=not top_adjacent_high),
    ):
        spans[ident] = span
    return spans


def _edge(
    ctx: FrameContext,
    source: str,
    target: str,
    count: int,
    max_count: int,
    target_color: RGB,
    gray: bool,
) -> SceneEdge:
    thickness = ctx.config.edge_base_thickness * (count / max_count)
    return SceneEdge(
        source=source,
        target=target,
        thickness=thickness,
        color=GRAY_RGB if gray else target_color,
        gray=gray,
        style=ctx.config.edge_style,
    )


def partition_clients(ctx: FrameContext, focus: str) -> tuple[list[str], list[str], list[str]]:
    """Split the focus employee's related clients into individually drawn
    (severity desc, id asc), low-cluster and medium-cluster groups."""
    cfg = ctx.config
    related = sorted(ctx.store.clients_of(focus))
    sev = {c: ctx.tables.client_scores[c].value for c in related}
    low = [c for c in related if sev[c] < cfg.t_low]
    medium = [c for c in related if cfg.t_low <= sev[c] < cfg.t_med]
    individual = sorted((c for c in related if sev[c] >= cfg.t_med), key=lambda c: (-sev[c], c))
    return individual, low, medium


def build_frame_scene(
    ctx: FrameContext,
    focus: str,
    overrides: SceneOverrides | None = None,
) -> FrameScene:
    """Detail frame: the focus employee, her clients (clustered when mild),
    gray post-processing additions, edges, bands and both heat-maps."""
    ov = overrides or SceneOverrides()
    cfg = ctx.config
    if focus not in ctx.tables.employee_scores:
        raise LookupError(f"unknown employee: {focus}")
    arcs = _arcs_meta(cfg)

    individual, low, medium = partition_clients(ctx, focus)
    client_sev = {c: ctx.tables.client_scores[c].value for c in [*individual, *low, *medium]}

    is_grayed = lambda ident: ident in ov.gray_existing  # noqa: E731

    nodes: list[SceneNode] = []
    focus_score = ctx.tables.employee_scores[focus]
    nodes.append(
        SceneNode(
            id=focus,
            kind="employee",
            angular_span=tuple(arcs["left"]["base"]),
            radial_span=L1_RING,
            color=GRAY_RGB if is_grayed(focus) else severity_color(focus_score.value),
            gray=is_grayed(focus),
        )
    )
    gray_emp_spans = _place_grays(ov.gray_employees, arcs["left"]["margins"], half="left")
    for ident in ov.gray_employees:
        nodes.append(
            SceneNode(
                id=ident,
                kind="employee",
                angular_span=gray_emp_spans[ident],
                radial_span=L1_RING,
                color=GRAY_RGB,
                gray=ident != ov.selected,
            )
        )

    client_spans = _partition(arcs["right"]["base"], len(individual), top_down=True) if individual else []
    for c, span in zip(individual, client_spans):
        nodes.append(
            SceneNode(
                id=c,
                kind="client",
                angular_span=span,
                radial_span=L1_RING,
                color=GRAY_RGB if is_grayed(c) else severity_color(client_sev[c]),
                gray=is_grayed(c),
            )
        )
    gray_cli_spans = _place_grays(ov.gray_clients, arcs["right"]["margins"], half="right")
    for ident in ov.gray_clients:
        nodes.append(
            SceneNode(
                id=ident,
                kind="client",
                angular_span=gray_cli_spans[ident],
                radial_span=L1_RING,
                color=GRAY_RGB,
                gray=True,
            )
        )
    if low:
        nodes.append(
            SceneNode(
                id="cluster:low",
                kind="cluster_low",
                angular_span=tuple(arcs["clusters"]["low"]),
                radial_span=L1_RING,
                color=CLUSTER_LOW_RGB,
                members=tuple(low),
            )
        )
    if medium:
        nodes.append(
            SceneNode(
                id="cluster:medium",
                kind="cluster_medium",
                angular_span=tuple(arcs["clusters"]["medium"]),
                radial_span=L1_RING,
                color=CLUSTER_MED_RGB,
                members=tuple(medium),
            )
        )

    # Edges: every drawn employee to every drawn client it touched, plus the
    # focus employee to each cluster wedge. Grayness follows the endpoints.
    node_gray = {n.id: n.gray for n in nodes}
    drawn_employees = [focus, *ov.gray_employees]
    drawn_clients = [*individual, *ov.gray_clients]
    drawn_client_set = set(drawn_clients)
    pair_counts: dict[tuple[str, str], int] = {}
    for emp in drawn_employees:
        for cli, n in ctx.store.clients_of(emp).items():
            if cli in drawn_client_set:
                pair_counts[(emp, cli)] = n
    focus_by_client = ctx.store.clients_of(focus)
    cluster_counts = {
        "cluster:low": sum(focus_by_client.get(c, 0) for c in low),
        "cluster:medium": sum(focus_by_client.get(c, 0) for c in medium),
    }
    max_count = max(
        [*pair_counts.values(), *[n for n in cluster_counts.values() if n > 0]] or [1]
    )

    edges: list[SceneEdge] = []
    for (emp, cli), n in sorted(pair_counts.items()):
        gray = node_gray[emp] or node_gray[cli]
        sev = ctx.tables.client_scores[cli].value
        edges.append(_edge(ctx, emp, cli, n, max_count, severity_color(sev), gray))
    for cluster_id, n in cluster_counts.items():
        if n > 0:
            color = CLUSTER_LOW_RGB if cluster_id == "cluster:low" else CLUSTER_MED_RGB
            edges.append(_edge(ctx, focus, cluster_id, n, max_count, color, node_gray[focus]))

    # Bands for every non-cluster node; shares aggregate over what is drawn
    # (cluster members count as drawn for the employee's own aggregation).
    band_client_set = drawn_client_set | set(low) | set(medium)
    bands: list[LayerBand] = []
    for emp in drawn_employees:
        all_events = _events_for(ctx.store, employee=emp)
        events = [e for e in all_events if e.client in band_client_set]
        bands.extend(
            _node_bands(ctx, emp, "employee", ctx.tables.employee_scores[emp], events or all_events)
        )
    drawn_emp_set = set(drawn_employees)
    for cli in drawn_clients:
        all_events = _events_for(ctx.store, client=cli)
        events = [e for e in all_events if e.employee in drawn_emp_set]
        bands.extend(
            _node_bands(ctx, cli, "client", ctx.tables.client_scores[cli], events or all_events)
        )

    heatmaps = {
        "employees": build_heatmap(ctx.tables.employee_scores, cfg.heat_columns, ov.marked_employees),
        "clients": build_heatmap(ctx.tables.client_scores, cfg.heat_columns, ov.marked_clients),
    }
    return FrameScene(
        mode="detail",
        focus_employee=focus,
        nodes=tuple(nodes),
        edges=tuple(edges),
        bands=tuple(bands),
        heatmaps=heatmaps,
        arcs=arcs,
    )


def build_overview_scene(
    ctx: FrameContext,
    employees: Sequence[str],
    clients: Sequence[str],
    overrides: SceneOverrides | None = None,
) -> FrameScene:
    """Inner-layer-only view of many entities; bands appear only on nodes
    enlarged through selection."""
    ov = overrides or SceneOverrides()
    cfg = ctx.config
    arcs = _arcs_meta(cfg)

    emp_sev = {u: ctx.tables.employee_scores[u].value for u in employees}
    cli_sev = {c: ctx.tables.client_scores[c].value for c in clients}
    emp_order = sorted(employees, key=lambda u: (-emp_sev[u], u))
    cli_order = sorted(clients, key=lambda c: (-cli_sev[c], c))

    nodes: list[SceneNode] = []
    for u, span in zip(emp_order, _partition(arcs["left"]["base"], len(emp_order), top_down=False)):
        enlarged = u in ov.enlarged
        nodes.append(
            SceneNode(
                id=u,
                kind="employee",
                angular_span=span,
                radial_span=ENLARGED_RING if enlarged else L1_RING,
                color=severity_color(emp_sev[u]),
                enlarged=enlarged,
            )
        )
    for c, span in zip(cli_order, _partition(arcs["right"]["base"], len(cli_order), top_down=True)):
        enlarged = c in ov.enlarged
        nodes.append(
            SceneNode(
                id=c,
                kind="client",
                angular_span=span,
                radial_span=ENLARGED_RING if enlarged else L1_RING,
                color=severity_color(cli_sev[c]),
                enlarged=enlarged,
            )
        )

    client_set = set(clients)
    pair_counts: dict[tuple[str, str], int] = {}
    for u in employees:
        for e in _events_for(ctx.store, employee=u):
            if e.client in client_set:
                pair_counts[(u, e.client)] = pair_counts.get((u, e.client), 0) + 1
    max_count = max(pair_counts.values(), default=1)
    edges = [
        _edge(ctx, u, c, n, max_count, severity_color(cli_sev[c]), gray=False)
        for (u, c), n in sorted(pair_counts.items())
    ]

    bands: list[LayerBand] = []
    for u in emp_order:
        if u in ov.enlarged:
            events = [e for e in _events_for(ctx.store, employee=u) if e.client in client_set]
            bands.extend(
                _node_bands(ctx, u, "employee", ctx.tables.employee_scores[u], events or _events_for(ctx.store, employee=u))
            )
    emp_set = set(employees)
    for c in cli_order:
        if c in ov.enlarged:
            events = [e for e in _events_for(ctx.store, client=c) if e.employee in emp_set]
            bands.extend(
                _node_bands(ctx, c, "client", ctx.tables.client_scores[c], events or _events_for(ctx.store, client=c))
            )

    heatmaps = {
        "employees": build_heatmap(ctx.tables.employee_scores, cfg.heat_columns, ov.marked_employees),
        "clients": build_heatmap(ctx.tables.client_scores, cfg.heat_columns, ov.marked_clients),
    }
    return FrameScene(
        mode="overview",
        focus_employee=None,
        nodes=tuple(nodes),
        edges=tuple(edges),
        bands=tuple(bands),
        heatmaps=heatmaps,
        arcs=arcs,
    )
