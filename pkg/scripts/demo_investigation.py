"""Walk one investigation end to end on a synthetic corpus.

Generates a seeded corpus with injected scenarios, scores it, then plays
an investigation session frame by frame, printing what an auditor would
see and exporting each frame as SVG.

Usage: python3 scripts/demo_investigation.py --out demo_frames --seed 7
"""

from __future__ import annotations

import argparse
from pathlib import Path

from fraudlens.events import EventStore
from fraudlens.layout import FrameContext, LayoutConfig
from fraudlens.periodicity import default_pattern_library
from fraudlens.scoring import CorpusScorer
from fraudlens.session import InvestigationSession
from fraudlens.svg import render_svg
from fraudlens.synth import SynthSpec, generate_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_frames", help="directory for SVG frames")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--clients", type=int, default=830)
    parser.add_argument("--threshold", type=float, default=0.5)
    args = parser.parse_args()

    spec = SynthSpec(
        clients=args.clients,
        scenarios=(
            "monthly_fraud",
            "unauthorized_action",
            "split_client",
            "monitoring_lookalike",
        ),
        seed=args.seed,
    )
    result = generate_corpus(spec)
    print(f"corpus: {len(result.events)} events, {len(result.auth_events)} auth events")
    for record in result.manifest["scenarios"]:
        print(f"  injected {record['kind']}: employee {record['employee']} client {record['client']}")

    store = EventStore(None)
    store.add_events(result.events)
    store.add_auth_events(result.auth_events)
    scorer = CorpusScorer(store, profiles=result.profiles)
    tables = scorer.score_corpus()
    ctx = FrameContext(
        store=store,
        tables=tables,
        profiles=result.profiles,
        scoring=scorer.cfg,
        usage=scorer.usage,
        library_names=tuple(p.name for p in default_pattern_library()),
        config=LayoutConfig(),
    )

    session = InvestigationSession(ctx=ctx, threshold=args.threshold)
    print(f"\nplaylist ({len(session.playlist)} employees at threshold {args.threshold}):")
    for ident in session.playlist:
        score = tables.employee_scores[ident]
        marker = f" [{score.short_circuit.reason}]" if score.short_circuit else ""
        print(f"  {ident}  severity {score.value:.4f}{marker}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    session.start()
    frame_no = 0
    while True:
        scene = session.next_frame()
        if scene is None:
            break
        frame_no += 1
        focus = scene.focus_employee
        clients = [n.id for n in scene.nodes if n.kind == "client"]
        clusters = {n.kind: len(n.members) for n in scene.nodes if n.kind.startswith("cluster")}
        print(
            f"frame {frame_no}: focus {focus}, {len(clients)} clients drawn individually, "
            f"clustered {clusters or 'none'}"
        )
        path = out / f"frame_{frame_no:02d}_{focus}.svg"
        path.write_text(render_svg(scene), encoding="utf-8")
    print(f"\nwrote {frame_no} frames to {out}/ (session {session.session_id[:8]})")


if __name__ == "__main__":
    main()
