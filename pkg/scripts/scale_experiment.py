"""Measure generation and scoring cost as the corpus grows.

Prints one row per scale: client count, realized events, wall time to
generate, ingest and score, and the resulting table sizes.  The largest
default scale lands above 50k events.

Usage: python3 scripts/scale_experiment.py [--scales 1000 5000 26000]
"""

from __future__ import annotations

import argparse
import time

from fraudlens.events import EventStore
from fraudlens.scoring import CorpusScorer
from fraudlens.synth import SynthSpec, generate_corpus


def run_scale(clients: int, seed: int) -> dict:
    t0 = time.monotonic()
    spec = SynthSpec(
        employees=30,
        clients=clients,
        scenarios=("monthly_fraud", "unauthorized_action", "split_client"),
        seed=seed,
    )
    result = generate_corpus(spec)
    t_gen = time.monotonic() - t0

    t0 = time.monotonic()
    store = EventStore(None)
    store.add_events(result.events)
    t_ingest = time.monotonic() - t0

    t0 = time.monotonic()
    tables = CorpusScorer(store, profiles=result.profiles).score_corpus()
    t_score = time.monotonic() - t0

    return {
        "clients": clients,
        "events": len(result.events),
        "gen_s": t_gen,
        "ingest_s": t_ingest,
        "score_s": t_score,
        "pairs": len(tables.pair_scores),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scales", type=int, nargs="+", default=[1000, 5000, 26000])
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    print(f"{'clients':>8} {'events':>8} {'pairs':>8} {'gen':>7} {'ingest':>7} {'score':>7} {'total':>7}")
    for clients in args.scales:
        row = run_scale(clients, args.seed)
        total = row["gen_s"] + row["ingest_s"] + row["score_s"]
        print(
            f"{row['clients']:>8} {row['events']:>8} {row['pairs']:>8} "
            f"{row['gen_s']:>6.2f}s {row['ingest_s']:>6.2f}s {row['score_s']:>6.2f}s {total:>6.2f}s"
        )


if __name__ == "__main__":
    main()
