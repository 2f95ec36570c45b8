"""Command-line entry points for batch operation."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .events import CsvAdapterConfig, EventStore
from .layout import build_frame_scene
from .scoring import save_profiles
from .service import ServiceConfig, ServiceState, serve
from .svg import render_svg
from .synth import SynthSpec, generate_corpus

FORMATS = ("canonical-jsonl", "csv", "auth-jsonl")


@click.group()
def main() -> None:
    """Occupational-fraud investigation toolkit."""


def _state(data_dir: str, profiles: str | None, billing: str | None = None) -> ServiceState:
    return ServiceState(
        ServiceConfig(data_dir=data_dir, profiles_path=profiles, billing_path=billing)
    )


@main.command()
@click.argument("sources", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", default="canonical-jsonl", type=click.Choice(FORMATS))
@click.option("--csv-config", type=click.Path(exists=True, dir_okay=False), default=None)
def ingest(sources: tuple[str, ...], data_dir: str, fmt: str, csv_config: str | None) -> None:
    """Parse log files into the canonical store."""
    store = EventStore(data_dir)
    adapter = None
    if csv_config:
        adapter = CsvAdapterConfig.from_doc(json.loads(Path(csv_config).read_text(encoding="utf-8")))
    failures = 0
    for src in sources:
        with open(src, "r", encoding="utf-8") as fh:
            report = store.ingest_records(fh, format=fmt, csv_config=adapter)
        click.echo(f"{src}: ingested {report.ingested}, errors {len(report.errors)}")
        for lineno, message in report.errors[:20]:
            click.echo(f"  line {lineno}: {message}", err=True)
        failures += len(report.errors)
    if failures:
        sys.exit(1)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--top", default=10, show_default=True)
def score(data_dir: str, profiles: str | None, top: int) -> None:
    """Score the corpus and print the most severe employees and clients."""
    if profiles is None:
        click.echo("note: no profiles given; unknown employees score as unauthorized", err=True)
    state = _state(data_dir, profiles)
    tables = state.tables
    click.echo(
        f"scored {len(tables.pair_scores)} pairs, {len(tables.employee_scores)} employees, "
        f"{len(tables.client_scores)} clients (etag {state.etag})"
    )
    ranked = sorted(tables.employee_scores.items(), key=lambda kv: (-kv[1].value, kv[0]))
    for ident, s in ranked[:top]:
        marker = f" [{s.short_circuit.reason}]" if s.short_circuit else ""
        click.echo(f"employee {ident}  severity {s.value:.4f}{marker}")
    ranked_c = sorted(tables.client_scores.items(), key=lambda kv: (-kv[1].value, kv[0]))
    for ident, s in ranked_c[:top]:
        click.echo(f"client   {ident}  severity {s.value:.4f}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default="severity_report.csv", show_default=True, type=click.Path(dir_okay=False))
def report(data_dir: str, profiles: str | None, out: str) -> None:
    """Write the full severity tables as CSV."""
    state = _state(data_dir, profiles)
    Path(out).write_text(state.tables.export_csv(), encoding="utf-8")
    click.echo(f"wrote {out}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--employee", "employees", multiple=True, help="Render these employees.")
@click.option("--threshold", type=float, default=None, help="Render all at or above this severity.")
@click.option("--out-dir", default="frames", show_default=True, type=click.Path(file_okay=False))
@click.option("--viewport", default=900, show_default=True)
def render(
    data_dir: str,
    profiles: str | None,
    employees: tuple[str, ...],
    threshold: float | None,
    out_dir: str,
    viewport: int,
) -> None:
    """Export static SVG frames."""
    state = _state(data_dir, profiles)
    chosen = list(employees)
    if threshold is not None:
        chosen.extend(
            ident
            for ident, s in state.tables.employee_scores.items()
            if s.value >= threshold and ident not in chosen
        )
    if not chosen:
        raise click.UsageError("nothing to render: pass --employee or --threshold")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for ident in sorted(chosen):
        scene = build_frame_scene(state.ctx, ident)
        path = out / f"{ident}.svg"
        path.write_text(render_svg(scene, viewport), encoding="utf-8")
        click.echo(f"wrote {path}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--employees", default=7, show_default=True)
@click.option("--clients", default=830, show_default=True)
@click.option("--span-days", default=180, show_default=True)
@click.option("--start-day", default="2024-01-08", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option(
    "--scenario",
    "scenarios",
    multiple=True,
    type=click.Choice(["monthly_fraud", "unauthorized_action", "split_client", "monitoring_lookalike"]),
)
def synth(
    out_dir: str,
    employees: int,
    clients: int,
    span_days: int,
    start_day: str,
    seed: int,
    scenarios: tuple[str, ...],
) -> None:
    """Generate a synthetic corpus with a ground-truth manifest."""
    from datetime import date

    spec = SynthSpec(
        employees=employees,
        clients=clients,
        span_days=span_days,
        start_day=date.fromisoformat(start_day),
        scenarios=scenarios,
        seed=seed,
    )
    result = generate_corpus(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = EventStore(out)
    store.add_events(result.events)
    store.add_auth_events(result.auth_events)
    save_profiles(result.profiles, out / "profiles.json")
    (out / "manifest.json").write_text(result.manifest_text(), encoding="utf-8")
    click.echo(
        f"generated {len(result.events)} events, {len(result.auth_events)} auth events, "
        f"{result.manifest['totals']['employees']} employees, "
        f"{result.manifest['totals']['clients']} clients -> {out}"
    )


@main.command("serve")
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--billing", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--port", default=8710, show_default=True)
def serve_cmd(data_dir: str, profiles: str | None, billing: str | None, port: int) -> None:
    """Run the HTTP service."""
    serve(
        ServiceConfig(
            data_dir=data_dir, profiles_path=profiles, billing_path=billing, port=port
        )
    )


if __name__ == "__main__":
    main()
