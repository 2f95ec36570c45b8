from __future__ import annotations

import random

import pytest

from fraudlens.events import EventStore
from fraudlens.layout import ENLARGED_RING, FrameContext, LayoutConfig, build_frame_scene
from fraudlens.scoring import CorpusScorer
from fraudlens.session import InvestigationSession, SessionError, build_playlist

from conftest import ev, open_profiles
from oracles import rank_bruteforce

APERIODIC_DAYS = (0, 4, 14, 18, 28, 32, 42, 46, 56, 60, 70)


def session_ctx(cfg: LayoutConfig | None = None) -> FrameContext:
    """Corpus with a severity ladder and a shared client for expansion tests.

    Employee severities: E1 0.80 (via C1), E2 0.72 (C4), E3 == E5 0.51
    (monthly on C5/C6), E7/E8/E9 ~0.  C1 is shared by E1, E7, E8, E9 and
    E7 additionally owns C7, so refocusing can pull a fresh client in.
    """
    store = EventStore(None)
    store.add_events([ev(d + 22 / 24, client="C1") for d in APERIODIC_DAYS])
    store.add_events([ev(30 * i + 10 / 24, client="C2") for i in range(6)])
    store.add_events([ev(0 + 10 / 24, client="C3")])
    store.add_events([ev(d + 10 / 24, employee="E2", client="C4") for d in APERIODIC_DAYS])
    store.add_events([ev(30 * i + 10 / 24, employee="E3", client="C5") for i in range(6)])
    store.add_events([ev(30 * i + 10 / 24, employee="E5", client="C6") for i in range(6)])
    for i, emp in enumerate(("E7", "E8", "E9")):
        store.add_events([ev(40 + i + 10 / 24, employee=emp, client="C1")])
    store.add_events([ev(50 + 10 / 24, employee="E7", client="C7")])
    profiles = open_profiles(employees=("E1", "E2", "E3", "E5", "E7", "E8", "E9"))
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


@pytest.fixture(scope="module")
def ctx() -> FrameContext:
    return session_ctx()


def started(ctx, threshold=0.5, **kw) -> InvestigationSession:
    s = InvestigationSession(ctx=ctx, threshold=threshold, **kw)
    s.start()
    s.next_frame()
    return s


# -- playlist -------------------------------------------------------------------


def test_playlist_order_matches_rank_oracle(ctx):
    values = {u: s.value for u, s in ctx.tables.employee_scores.items()}
    expected = [u for u in rank_bruteforce(values) if values[u] >= 0.5]
    assert build_playlist(ctx, 0.5) == expected == ["E1", "E2", "E3", "E5"]


def test_playlist_threshold_is_inclusive(ctx):
    exact = ctx.tables.employee_scores["E3"].value
    assert "E3" in build_playlist(ctx, exact)
    assert "E3" not in build_playlist(ctx, exact + 1e-9)


def test_playlist_tie_breaks_by_id(ctx):
    values = ctx.tables.employee_scores
    assert values["E3"].value == values["E5"].value
    playlist = build_playlist(ctx, 0.5)
    assert playlist.index("E3") < playlist.index("E5")


def test_empty_playlist_above_max(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.99)
    assert s.playlist == []
    s.start()
    assert s.next_frame() is None
    assert s.status == "stopped"


# -- lifecycle ------------------------------------------------------------------


def test_initial_state_is_paused_before_first_frame(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    assert (s.status, s.cursor, s.mode) == ("paused", -1, "detail")
    with pytest.raises(SessionError) as err:
        s.scene()
    assert err.value.code == "conflict"


def test_advance_requires_playing(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    with pytest.raises(SessionError) as err:
        s.next_frame()
    assert err.value.code == "conflict"


def test_frames_follow_severity_order(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    s.start()
    assert s.next_frame().focus_employee == "E1"
    assert s.next_frame().focus_employee == "E2"
    assert s.summary()["focus"] == "E2"
    assert s.summary()["cursor"] == 1


def test_start_is_only_for_fresh_sessions(ctx):
    s = started(ctx)
    s.pause()
    with pytest.raises(SessionError) as err:
        s.start()
    assert err.value.code == "conflict"


def test_pause_requires_playing_and_resume_requires_paused(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    with pytest.raises(SessionError):
        s.pause()
    assert s.resume() is None  # nothing visualized yet
    assert s.status == "playing"
    with pytest.raises(SessionError):
        s.resume()


def test_exhaustion_stops_the_session(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.75)
    s.start()
    assert s.next_frame() is not None  # only E1 qualifies
    assert s.next_frame() is None
    assert s.status == "stopped"
    for command in (s.next_frame, s.pause, s.resume, s.stop):
        with pytest.raises(SessionError):
            command()


def test_stop_from_any_live_state(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    s.stop()
    assert s.status == "stopped"
    s2 = started(ctx)
    s2.stop()
    assert s2.status == "stopped"


# -- selection ------------------------------------------------------------------


def test_select_unknown_node_is_not_found(ctx):
    s = started(ctx)
    with pytest.raises(SessionError) as err:
        s.select_node("nope")
    assert err.value.code == "not_found"


def test_select_before_any_frame_conflicts(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    with pytest.raises(SessionError) as err:
        s.select_node("C1")
    assert err.value.code == "conflict"


def test_select_client_pauses_and_grays_in_co_employees(ctx):
    s = started(ctx)
    assert s.status == "playing"
    scene = s.select_node("C1")
    assert s.status == "paused"
    assert s.gray_employees == ["E7", "E8", "E9"]
    assert s.additions == 3
    assert s.selected == "C1"
    assert s.mode == "detail"
    added = {n.id: n for n in scene.nodes if n.id in ("E7", "E8", "E9")}
    assert set(added) == {"E7", "E8", "E9"}
    assert all(n.gray for n in added.values())
    assert not next(n for n in scene.nodes if n.id == "E1").gray


def test_select_client_twice_adds_nothing_new(ctx):
    s = started(ctx)
    s.select_node("C1")
    s.select_node("C1")
    assert s.gray_employees == ["E7", "E8", "E9"]
    assert s.additions == 3


def test_select_employee_refocuses_and_grays_the_rest(ctx):
    s = started(ctx)
    s.select_node("C1")
    scene = s.select_node("E7")
    assert s.selected == "E7"
    assert s.gray_clients == ["C7"]
    assert s.additions == 4
    assert s.gray_existing == {"E1", "E8", "E9"}
    by_id = {n.id: n for n in scene.nodes}
    assert by_id["E1"].gray and by_id["E8"].gray
    assert not by_id["E7"].gray
    assert by_id["C7"].gray  # addition stays gray even while selected employee is not


def test_select_cluster_marks_members_in_heatmap(ctx):
    s = started(ctx)
    scene = s.scene()
    low = next(n for n in scene.nodes if n.kind == "cluster_low")
    assert set(low.members) == {"C3"}
    scene = s.select_node("cluster:low")
    assert s.marked_clients == {"C3"}
    marked = [c.id for c in scene.heatmaps["clients"].cells if c.marked_x]
    assert marked == ["C3"]
    assert s.additions == 0  # marking is not an addition


def test_marks_persist_across_frames(ctx):
    s = started(ctx)
    s.select_node("cluster:low")
    s.resume()
    scene = s.next_frame()
    assert s.marked_clients == {"C3"}
    assert [c.id for c in scene.heatmaps["clients"].cells if c.marked_x] == ["C3"]


def test_addition_cap_flips_to_overview(ctx):
    s = started(ctx, addition_cap=2)
    scene = s.select_node("C1")
    assert s.additions == 3 > s.addition_cap
    assert s.mode == "overview"
    assert scene.mode == "overview"
    assert {n.id for n in scene.nodes} >= {"E1", "E7", "E8", "E9", "C1"}


def test_overview_selection_enlarges(ctx):
    s = started(ctx, addition_cap=2)
    s.select_node("C1")
    scene = s.select_node("E7")
    node = next(n for n in scene.nodes if n.id == "E7")
    assert node.enlarged and node.radial_span == ENLARGED_RING
    assert s.enlarged == {"E7"}
    assert s.selected == "E7"


def test_set_mode_detail_clears_postprocessing(ctx):
    s = started(ctx, addition_cap=2)
    s.select_node("C1")
    assert s.mode == "overview"
    scene = s.set_mode("detail")
    assert (s.mode, s.additions, s.gray_employees, s.selected) == ("detail", 0, [], None)
    pristine = build_frame_scene(ctx, "E1")
    assert scene.to_doc() == pristine.to_doc()


def test_set_mode_validates_input(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    with pytest.raises(ValueError):
        s.set_mode("zoom")
    with pytest.raises(SessionError):
        s.set_mode("overview")  # no frame yet


def test_resume_drops_gray_state_and_replays_current_frame(ctx):
    s = started(ctx)
    s.select_node("C1")
    s.select_node("E7")
    scene = s.resume()
    assert s.status == "playing"
    assert (s.additions, s.gray_employees, s.gray_clients) == (0, [], [])
    assert s.gray_existing == set() and s.selected is None
    assert scene.to_doc() == build_frame_scene(ctx, "E1").to_doc()


def test_next_frame_clears_postprocessing(ctx):
    s = started(ctx)
    s.select_node("C1")
    s.resume()
    scene = s.next_frame()
    assert scene.focus_employee == "E2"
    assert s.additions == 0 and s.gray_employees == []
    assert scene.to_doc() == build_frame_scene(ctx, "E2").to_doc()


# -- threshold ------------------------------------------------------------------


def test_set_threshold_rebuilds_playlist_before_start(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    s.set_threshold(0.7)
    assert s.playlist == ["E1", "E2"]
    s.start()
    s.next_frame()
    with pytest.raises(SessionError) as err:
        s.set_threshold(0.5)
    assert err.value.code == "conflict"
    assert s.playlist == ["E1", "E2"]


def test_negative_addition_cap_rejected(ctx):
    with pytest.raises(ValueError):
        InvestigationSession(ctx=ctx, threshold=0.5, addition_cap=-1)


# -- checkpointing --------------------------------------------------------------


def test_checkpoint_roundtrip_preserves_scene_and_state(ctx):
    s = started(ctx)
    s.select_node("C1")
    s.select_node("cluster:medium")
    doc = s.checkpoint()
    restored = InvestigationSession.restore(ctx, doc)
    assert restored.checkpoint() == doc
    assert restored.scene().to_doc() == s.scene().to_doc()
    assert restored.summary() == s.summary()


def test_checkpoint_before_first_frame_restores_without_scene(ctx):
    s = InvestigationSession(ctx=ctx, threshold=0.5)
    restored = InvestigationSession.restore(ctx, s.checkpoint())
    assert restored.cursor == -1 and restored.active_scene is None
    with pytest.raises(SessionError):
        restored.scene()


def test_restored_session_accepts_further_commands(ctx):
    s = started(ctx)
    s.select_node("C1")
    restored = InvestigationSession.restore(ctx, s.checkpoint())
    restored.resume()
    scene = restored.next_frame()
    assert scene.focus_employee == "E2"


def test_checkpoint_restore_missing_field_raises_keyerror(ctx):
    with pytest.raises(KeyError):
        InvestigationSession.restore(ctx, {"threshold": 0.5})


# -- command fuzz ---------------------------------------------------------------


def check_invariants(s: InvestigationSession) -> None:
    assert s.status in ("paused", "playing", "stopped")
    assert -1 <= s.cursor <= max(len(s.playlist) - 1, -1)
    assert s.mode in ("detail", "overview")
    if s.mode == "detail":
        assert s.additions <= s.addition_cap
    assert s.additions == len(s.gray_employees) + len(s.gray_clients)
    assert (s.active_scene is not None) == (s.cursor >= 0)
    if s.active_scene is not None:
        s.active_scene.to_doc()  # always serializable


def run_random_commands(ctx, seed: int, steps: int = 12) -> None:
    rng = random.Random(seed)
    s = InvestigationSession(ctx=ctx, threshold=rng.choice((0.3, 0.5, 0.75)), addition_cap=rng.choice((0, 2, 10)))
    commands = ("start", "pause", "resume", "stop", "next", "select", "mode", "threshold")
    for _ in range(steps):
        name = rng.choice(commands)
        try:
            if name == "start":
                s.start()
            elif name == "pause":
                s.pause()
            elif name == "resume":
                s.resume()
            elif name == "stop":
                s.stop()
            elif name == "next":
                s.next_frame()
            elif name == "select":
                if s.active_scene is not None and rng.random() < 0.9:
                    target = rng.choice(s.active_scene.nodes).id
                else:
                    target = "missing-node"
                s.select_node(target)
            elif name == "mode":
                s.set_mode(rng.choice(("detail", "overview")))
            else:
                s.set_threshold(rng.choice((0.3, 0.5, 0.75)))
        except SessionError:
            pass
        check_invariants(s)
    doc = s.checkpoint()
    restored = InvestigationSession.restore(ctx, doc)
    check_invariants(restored)
    assert restored.checkpoint() == doc
    if s.cursor >= 0:
        assert restored.scene().to_doc() == s.scene().to_doc()


def test_random_command_sequences_hold_invariants(ctx):
    for seed in range(120):
        run_random_commands(ctx, seed)
