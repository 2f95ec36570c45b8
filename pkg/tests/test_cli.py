from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from fraudlens.cli import main
from fraudlens.events import EventStore

from conftest import ev


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def write_jsonl(path, events) -> None:
    path.write_text("".join(e.to_line() + "\n" for e in events), encoding="utf-8")


def test_all_subcommands_registered():
    assert set(main.commands) == {"ingest", "score", "report", "render", "synth", "serve"}
    assert any(p.name == "port" for p in main.commands["serve"].params)


def test_ingest_reports_counts_and_persists(runner, tmp_path):
    src = tmp_path / "events.jsonl"
    write_jsonl(src, [ev(0.5), ev(1.5, client="C2")])
    data_dir = tmp_path / "store"
    result = runner.invoke(main, ["ingest", str(src), "--data-dir", str(data_dir)])
    assert result.exit_code == 0, result.output
    assert "ingested 2, errors 0" in result.output
    assert len(EventStore(data_dir)) == 2


def test_ingest_fails_on_malformed_lines(runner, tmp_path):
    src = tmp_path / "events.jsonl"
    src.write_text('{"nope": true}\n' + ev(0.5).to_line() + "\n", encoding="utf-8")
    result = runner.invoke(main, ["ingest", str(src), "--data-dir", str(tmp_path / "store")])
    assert result.exit_code == 1
    assert "ingested 1, errors 1" in result.output
    assert "line 1" in result.output


def test_ingest_csv_with_adapter_file(runner, tmp_path):
    src = tmp_path / "log.csv"
    src.write_text("2024-03-01T10:00:00Z;E1;C1;VIEW;CRM\n", encoding="utf-8")
    adapter = tmp_path / "adapter.json"
    adapter.write_text(
        json.dumps(
            {
                "mapping": {"0": "ts", "1": "employee", "2": "client", "3": "action", "4": "system"},
                "delimiter": ";",
            }
        ),
        encoding="utf-8",
    )
    result = runner.invoke(
        main,
        [
            "ingest",
            str(src),
            "--data-dir",
            str(tmp_path / "store"),
            "--format",
            "csv",
            "--csv-config",
            str(adapter),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "ingested 1, errors 0" in result.output


def test_score_without_profiles_warns_and_short_circuits(runner, tmp_path):
    data_dir = tmp_path / "store"
    store = EventStore(data_dir)
    store.add_events([ev(0.5), ev(30.5)])
    result = runner.invoke(main, ["score", "--data-dir", str(data_dir)])
    assert result.exit_code == 0, result.output
    assert "no profiles given" in result.output
    assert "employee E1  severity 1.0000 [unauthorized_system]" in result.output


def test_synth_score_report_render_pipeline(runner, tmp_path):
    corpus = tmp_path / "corpus"
    result = runner.invoke(
        main,
        [
            "synth",
            "--out",
            str(corpus),
            "--employees",
            "6",
            "--clients",
            "60",
            "--span-days",
            "180",
            "--seed",
            "5",
            "--scenario",
            "monthly_fraud",
            "--scenario",
            "unauthorized_action",
        ],
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((corpus / "manifest.json").read_text(encoding="utf-8"))
    assert {r["kind"] for r in manifest["scenarios"]} == {"monthly_fraud", "unauthorized_action"}
    assert (corpus / "profiles.json").exists()

    result = runner.invoke(
        main,
        ["score", "--data-dir", str(corpus), "--profiles", str(corpus / "profiles.json"), "--top", "3"],
    )
    assert result.exit_code == 0, result.output
    fraud = next(r for r in manifest["scenarios"] if r["kind"] == "monthly_fraud")
    assert f"employee {fraud['employee']}" in result.output

    out_csv = tmp_path / "severity.csv"
    result = runner.invoke(
        main,
        [
            "report",
            "--data-dir",
            str(corpus),
            "--profiles",
            str(corpus / "profiles.json"),
            "--out",
            str(out_csv),
        ],
    )
    assert result.exit_code == 0, result.output
    lines = out_csv.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "entity_type,id,severity,short_circuit,y1,y2,y3,y4,y5"
    assert any(line.startswith(f"employee,{fraud['employee']},") for line in lines)

    frames = tmp_path / "frames"
    result = runner.invoke(
        main,
        [
            "render",
            "--data-dir",
            str(corpus),
            "--profiles",
            str(corpus / "profiles.json"),
            "--employee",
            fraud["employee"],
            "--out-dir",
            str(frames),
        ],
    )
    assert result.exit_code == 0, result.output
    svg = (frames / f"{fraud['employee']}.svg").read_text(encoding="utf-8")
    assert svg.startswith("<svg")


def test_render_threshold_selects_employees(runner, tmp_path):
    corpus = tmp_path / "corpus"
    runner.invoke(
        main,
        ["synth", "--out", str(corpus), "--employees", "5", "--clients", "40", "--seed", "9",
         "--scenario", "monthly_fraud"],
    )
    frames = tmp_path / "frames"
    result = runner.invoke(
        main,
        [
            "render",
            "--data-dir",
            str(corpus),
            "--profiles",
            str(corpus / "profiles.json"),
            "--threshold",
            "0.5",
            "--out-dir",
            str(frames),
        ],
    )
    assert result.exit_code == 0, result.output
    assert list(frames.glob("*.svg"))


def test_render_without_subject_is_usage_error(runner, tmp_path):
    data_dir = tmp_path / "store"
    EventStore(data_dir).add_events([ev(0.5)])
    result = runner.invoke(main, ["render", "--data-dir", str(data_dir)])
    assert result.exit_code == 2
    assert "nothing to render" in result.output
