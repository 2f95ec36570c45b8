from __future__ import annotations

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraudlens.events import EventStore
from fraudlens.layout import (
    CLUSTER_LOW_RGB,
    CLUSTER_MED_RGB,
    GRAY_RGB,
    HALF_PI,
    L1_RING,
    FrameContext,
    LayoutConfig,
    SceneOverrides,
    build_frame_scene,
    build_heatmap,
    build_overview_scene,
    color_hex,
    label_color,
    partition_clients,
    severity_color,
)
from fraudlens.scoring import CorpusScorer

from conftest import ev, open_profiles
from oracles import color_bruteforce, rank_bruteforce

APERIODIC_DAYS = (0, 4, 14, 18, 28, 32, 42, 46, 56, 60, 70)


# -- colors -------------------------------------------------------------------


def test_severity_color_stops():
    assert severity_color(0.0) == (0, 0, 255)
    assert severity_color(0.25) == (0, 255, 255)
    assert severity_color(0.5) == (0, 255, 0)
    assert severity_color(0.75) == (255, 255, 0)
    assert severity_color(1.0) == (255, 0, 0)
    assert color_hex(severity_color(0.0)) == "#0000FF"
    assert color_hex(severity_color(1.0)) == "#FF0000"


@given(st.floats(0, 1, allow_nan=False))
def test_severity_color_matches_oracle(s):
    assert severity_color(s) == color_bruteforce(s)


def test_severity_color_rejects_out_of_range():
    with pytest.raises(ValueError):
        severity_color(-0.1)
    with pytest.raises(ValueError):
        severity_color(1.1)


def test_label_color_is_stable_and_in_range():
    a = label_color("CRM")
    assert a == label_color("CRM")
    assert a != label_color("BILLING")
    assert all(0 <= v <= 255 for v in a)


# -- heat-map -----------------------------------------------------------------


def scores_of(store, profiles):
    return CorpusScorer(store, profiles=profiles).score_corpus()


def test_heatmap_ordering_matches_rank_oracle(mem_store):
    mem_store.add_events(
        [ev(d + 22 / 24, client="C1") for d in APERIODIC_DAYS]
        + [ev(30 * i + 10 / 24, client="C2") for i in range(6)]
        + [ev(0 + 10 / 24, client="C3")]
    )
    tables = scores_of(mem_store, open_profiles())
    grid = build_heatmap(tables.client_scores, columns=5, marked=frozenset({"C2"}))
    values = {c: s.value for c, s in tables.client_scores.items()}
    assert [c.id for c in grid.cells] == rank_bruteforce(values)
    assert grid.columns == 5
    for cell in grid.cells:
        assert cell.color == severity_color(cell.severity)
    assert [c.id for c in grid.cells if c.marked_x] == ["C2"]


# -- frame geometry -------------------------------------------------------------


def frame_ctx(cfg: LayoutConfig | None = None):
    """Corpus with one busy employee and severity spread across the groups.

    Client severities:  C1 0.80, C4 0.72 (individual at t_med=0.6),
    C2 0.51 (medium), C3/C5 ~0 (low).  E2 shares C1, E3 only has C6.
    """
    store = EventStore(None)
    store.add_events([ev(d + 22 / 24, client="C1") for d in APERIODIC_DAYS])
    store.add_events([ev(30 * i + 10 / 24, client="C2") for i in range(6)])
    store.add_events([ev(0 + 10 / 24, client="C3")])
    store.add_events([ev(d + 10 / 24, client="C4") for d in APERIODIC_DAYS])
    store.add_events([ev(3 + i * 20 + 10 / 24, client="C5") for i in range(3)])
    store.add_events([ev(2 + 10 / 24, employee="E2", client="C1")])
    store.add_events([ev(5 + 10 / 24, employee="E3", client="C6")])
    # spare entities for gray-addition placement tests
    spares = [(f"E{i}", f"C{i + 3}") for i in range(4, 9)]
    for i, (emp, cli) in enumerate(spares):
        store.add_events([ev(6 + i + 10 / 24, employee=emp, client=cli)])
    profiles = open_profiles(employees=[f"E{i}" for i in range(1, 9)])
    scorer = CorpusScorer(store, profiles=profiles)
    return FrameContext(
        store=store,
        tables=scorer.score_corpus(),
        profiles=profiles,
        scoring=scorer.cfg,
        usage=scorer.usage,
        library_names=tuple(p.name for p in scorer.library),
        config=cfg or LayoutConfig(),
    )


def span_width(span):
    return span[1] - span[0]


def test_partition_clients_groups_by_threshold():
    ctx = frame_ctx()
    individual, low, medium = partition_clients(ctx, "E1")
    assert individual == ["C1", "C4"]  # severity desc
    assert set(medium) == {"C2"}
    assert set(low) == {"C3", "C5"}


def test_focus_occupies_full_left_base():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    focus = next(n for n in scene.nodes if n.id == "E1")
    assert focus.kind == "employee"
    assert focus.angular_span == tuple(scene.arcs["left"]["base"])
    assert focus.radial_span == L1_RING
    assert focus.color == severity_color(ctx.tables.employee_scores["E1"].value)


def test_clients_partition_right_base_top_down():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    drawn = [n for n in scene.nodes if n.kind == "client"]
    assert [n.id for n in drawn] == ["C1", "C4"]
    base = scene.arcs["right"]["base"]
    widths = [span_width(n.angular_span) for n in drawn]
    assert all(w == pytest.approx(widths[0]) for w in widths)
    assert sum(widths) == pytest.approx(span_width(base))
    # highest severity sits nearest the top (higher angle within the right base)
    assert drawn[0].angular_span[0] >= drawn[1].angular_span[1] - 1e-12
    lo = min(n.angular_span[0] for n in drawn)
    hi = max(n.angular_span[1] for n in drawn)
    assert lo == pytest.approx(base[0]) and hi == pytest.approx(base[1])


def test_cluster_wedges_straddle_vertical_axis():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    low = next(n for n in scene.nodes if n.kind == "cluster_low")
    med = next(n for n in scene.nodes if n.kind == "cluster_medium")
    cw = ctx.config.cluster_half_width
    assert low.angular_span == (pytest.approx(HALF_PI - cw), pytest.approx(HALF_PI + cw))
    assert med.angular_span == (pytest.approx(3 * HALF_PI - cw), pytest.approx(3 * HALF_PI + cw))
    assert set(low.members) == {"C3", "C5"}
    assert set(med.members) == {"C2"}
    assert low.color == CLUSTER_LOW_RGB and med.color == CLUSTER_MED_RGB


def test_all_sectors_disjoint_within_ring():
    ctx = frame_ctx()
    scene = build_frame_scene(
        ctx, "E1", SceneOverrides(gray_employees=("E2",), gray_clients=("C6",))
    )
    ring_nodes = [n for n in scene.nodes if n.radial_span == L1_RING]
    for i, a in enumerate(ring_nodes):
        for b in ring_nodes[i + 1 :]:
            lo = max(a.angular_span[0], b.angular_span[0])
            hi = min(a.angular_span[1], b.angular_span[1])
            assert hi - lo <= 1e-12, f"{a.id} overlaps {b.id}"


def test_gray_additions_fill_margins_alternately():
    ctx = frame_ctx()
    grays = tuple(f"E{i}" for i in range(4, 9))
    scene = build_frame_scene(ctx, "E1", SceneOverrides(gray_employees=grays))
    margins = scene.arcs["left"]["margins"]
    placed = {n.id: n for n in scene.nodes if n.id in grays}
    assert len(placed) == 5
    in_top = [g for g in grays if margins["top"][0] - 1e-9 <= placed[g].angular_span[0] <= margins["top"][1]]
    in_bottom = [g for g in grays if margins["bottom"][0] - 1e-9 <= placed[g].angular_span[0] <= margins["bottom"][1]]
    assert in_top == list(grays[0::2])  # even positions alternate to the top margin
    assert in_bottom == list(grays[1::2])
    for n in placed.values():
        assert n.gray and n.color == GRAY_RGB
        assert span_width(n.angular_span) <= 0.08 + 1e-12
    # first addition occupies the base-adjacent slot: the top margin's high end
    first = placed[grays[0]]
    assert first.angular_span[1] == pytest.approx(margins["top"][1])


def test_gray_margin_additions_never_displace_base_nodes():
    ctx = frame_ctx()
    plain = build_frame_scene(ctx, "E1")
    with_grays = build_frame_scene(
        ctx, "E1", SceneOverrides(gray_employees=("E4",), gray_clients=("C6", "C7"))
    )
    base_before = {n.id: n.angular_span for n in plain.nodes}
    for node in with_grays.nodes:
        if node.id in base_before:
            assert node.angular_span == base_before[node.id]


def test_edges_thickness_proportional_and_colored():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    by_pair = {(e.source, e.target): e for e in scene.edges}
    base = ctx.config.edge_base_thickness
    # E1xC1 and E1xC4 both carry 11 events, the corpus maximum
    assert by_pair[("E1", "C1")].thickness == pytest.approx(base)
    assert by_pair[("E1", "C4")].thickness == pytest.approx(base)
    c2_count = 6
    assert by_pair[("E1", "cluster:medium")].thickness == pytest.approx(base * c2_count / 11)
    assert by_pair[("E1", "C1")].color == severity_color(ctx.tables.client_scores["C1"].value)
    assert by_pair[("E1", "cluster:low")].color == CLUSTER_LOW_RGB
    assert not any(e.gray for e in scene.edges)


def test_edge_gray_follows_endpoints():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1", SceneOverrides(gray_employees=("E2",)))
    by_pair = {(e.source, e.target): e for e in scene.edges}
    assert by_pair[("E2", "C1")].gray
    assert by_pair[("E2", "C1")].color == GRAY_RGB
    assert not by_pair[("E1", "C1")].gray


def test_focus_edges_share_source_and_disjoint_targets():
    # all focus edges leave one sector toward pairwise-disjoint sectors, so
    # drawn radially they cannot cross
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    focus_edges = [e for e in scene.edges if e.source == "E1"]
    assert len(focus_edges) == len({e.target for e in focus_edges})
    spans = []
    node_by_id = {n.id: n for n in scene.nodes}
    for e in focus_edges:
        spans.append(node_by_id[e.target].angular_span)
    spans.sort()
    for (l0, h0), (l1, h1) in zip(spans, spans[1:]):
        assert h0 <= l1 + 1e-12


def test_band_fractions_sum_to_one():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1", SceneOverrides(gray_employees=("E2",)))
    assert scene.bands, "expected bands on a detail frame"
    for band in scene.bands:
        total = sum(seg.fraction for seg in band.region_b)
        assert total == pytest.approx(1.0, abs=1e-9), band.layer


def test_band_sets_for_each_drawn_node():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    owners = {}
    for band in scene.bands:
        owners.setdefault(band.owner, []).append(band.layer)
    assert owners["E1"] == ["L2_systems", "L3_actions", "L4_hours"]
    assert owners["C1"] == ["L2_systems", "L3_actions", "L4_hours", "L5_periodicity"]
    assert "cluster:low" not in owners  # clusters carry no layer bands


def test_client_l5_cells_follow_library_order():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    l5 = next(b for b in scene.bands if b.owner == "C1" and b.layer == "L5_periodicity")
    assert [c.id for c in l5.region_a] == list(ctx.library_names)
    for cell in l5.region_a:
        assert 0.0 <= cell.severity <= 1.0
        assert cell.color == severity_color(cell.severity)


def test_hours_band_mirrors_off_hours_split():
    ctx = frame_ctx()
    # with only E1 drawn the client band covers E1's 11 late-night events
    scene = build_frame_scene(ctx, "E1")
    l4 = next(b for b in scene.bands if b.owner == "C1" and b.layer == "L4_hours")
    assert [s.label for s in l4.region_b] == ["within_hours", "off_hours"]
    assert l4.region_b[1].fraction == pytest.approx(1.0)
    # graying E2 in widens the aggregation to its one morning event
    scene = build_frame_scene(ctx, "E1", SceneOverrides(gray_employees=("E2",)))
    l4 = next(b for b in scene.bands if b.owner == "C1" and b.layer == "L4_hours")
    assert l4.region_b[1].fraction == pytest.approx(11 / 12)


def test_unknown_focus_raises_lookup_error():
    ctx = frame_ctx()
    with pytest.raises(LookupError):
        build_frame_scene(ctx, "E999")


def test_scene_doc_is_deterministic():
    ctx = frame_ctx()
    a = build_frame_scene(ctx, "E1").to_doc()
    b = build_frame_scene(ctx, "E1").to_doc()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_overview_scene_shape():
    ctx = frame_ctx()
    scene = build_overview_scene(ctx, ["E1", "E2", "E3"], ["C1", "C2", "C4"])
    assert scene.mode == "overview"
    assert scene.focus_employee is None
    assert not scene.bands
    emp_nodes = [n for n in scene.nodes if n.kind == "employee"]
    widths = {span_width(n.angular_span) for n in emp_nodes}
    assert len(emp_nodes) == 3
    assert max(widths) - min(widths) < 1e-9
    # enlarged selection grows the ring and grows bands
    enlarged = build_overview_scene(
        ctx, ["E1", "E2", "E3"], ["C1"], SceneOverrides(enlarged=frozenset({"E1"}))
    )
    node = next(n for n in enlarged.nodes if n.id == "E1")
    assert node.enlarged and node.radial_span != L1_RING
    assert {b.owner for b in enlarged.bands} == {"E1"}


def test_band_shares_aggregate_only_drawn_clients():
    ctx = frame_ctx()
    scene = build_frame_scene(ctx, "E1")
    l2 = next(b for b in scene.bands if b.owner == "E1" and b.layer == "L2_systems")
    # every event in this corpus uses CRM, so one full-width segment
    assert len(l2.region_b) == 1
    assert l2.region_b[0].label == "CRM"
    assert l2.region_b[0].fraction == pytest.approx(1.0)
