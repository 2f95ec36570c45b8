"""HTTP service: ingestion, queries, scoring, plots, sessions and rendering.

One process owns one store. Severity tables are computed at startup and
after explicit rescores, then shared read-only with every session. Ingest
batches and rescoring exclude each other; sessions serialize their own
commands.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .events import (
    ConfigError,
    CsvAdapterConfig,
    EventStore,
    IngestError,
    QueryFilter,
    parse_ts,
)
from .layout import FrameContext, LayoutConfig, build_frame_scene, build_heatmap
from .periodicity import default_pattern_library
from .plots import (
    AuthRuleConfig,
    BillingSpec,
    auth_pattern_flags,
    billing_dates_for,
    load_billing,
    parallel_coords_data,
    periodicity_plot_data,
    timeline_data,
)
from .scoring import CorpusScorer, Profiles, ScoringConfig, load_profiles
from .session import InvestigationSession, SessionError
from .svg import render_svg

logger = logging.getLogger(__name__)


@dataclass
class ServiceConfig:
    data_dir: str | Path | None = None
    profiles_path: str | Path | None = None
    billing_path: str | Path | None = None
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    auth_rules: AuthRuleConfig = field(default_factory=AuthRuleConfig)
    port: int = 8710


class ServiceState:
    """Store, cached severity tables, frame context and the session registry."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = EventStore(config.data_dir)
        self.profiles: Profiles = (
            load_profiles(config.profiles_path) if config.profiles_path else Profiles()
        )
        self.billing: Mapping[str, BillingSpec] = (
            load_billing(config.billing_path) if config.billing_path else {}
        )
        self.library = default_pattern_library()
        self.scorer = CorpusScorer(
            self.store, cfg=config.scoring, profiles=self.profiles, library=self.library
        )
        self.sessions: dict[str, InvestigationSession] = {}
        self.lock = threading.Lock()  # ingest exclusive with rescore
        self.tables = None
        self.ctx: FrameContext | None = None
        self.etag = ""
        self.rescore()

    def rescore(self) -> str:
        tables = self.scorer.score_corpus()
        ctx = FrameContext(
            store=self.store,
            tables=tables,
            profiles=self.profiles,
            scoring=self.scorer.cfg,
            usage=self.scorer.usage,
            library_names=tuple(p.name for p in self.library),
            config=self.config.layout,
        )
        self.tables = tables
        self.ctx = ctx
        self.etag = tables.etag()
        return self.etag

    def session(self, sid: str) -> InvestigationSession:
        try:
            return self.sessions[sid]
        except KeyError:
            raise SessionError("not_found", f"unknown session: {sid}") from None


def _error(code: str, message: str, status: int) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _filter_from_params(
    employee: str | None,
    client: str | None,
    system: str | None,
    action: str | None,
    from_ts: str | None,
    to_ts: str | None,
) -> QueryFilter:
    def split(raw: str | None) -> set[str] | None:
        if raw is None or raw == "":
            return None
        return {part for part in raw.split(",") if part}

    return QueryFilter(
        employees=split(employee),
        clients=split(client),
        systems=split(system),
        actions=split(action),
        from_ts=parse_ts(from_ts) if from_ts else None,
        to_ts=parse_ts(to_ts) if to_ts else None,
    )


def _scene_doc(scene) -> dict[str, Any] | None:
    return scene.to_doc() if scene is not None else None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="fraudlens", docs_url=None, redoc_url=None)
    # The console may be served from a separate static host during review.
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(SessionError)
    async def _session_error(_req: Request, exc: SessionError):
        status = 404 if exc.code == "not_found" else 409
        return _error(exc.code, exc.message, status)

    @app.exception_handler(LookupError)
    async def _lookup_error(_req: Request, exc: LookupError):
        return _error("not_found", str(exc), 404)

    @app.exception_handler(ConfigError)
    async def _config_error(_req: Request, exc: ConfigError):
        return _error("bad_request", str(exc), 400)

    @app.exception_handler(IngestError)
    async def _ingest_error(_req: Request, exc: IngestError):
        return _error("bad_request", str(exc), 400)

    @app.exception_handler(ValueError)
    async def _value_error(_req: Request, exc: ValueError):
        return _error("bad_request", str(exc), 400)

    # -- ingestion / queries -------------------------------------------------

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {"status": "ok", "stats": state.store.stats().to_doc()}

    @app.post("/ingest")
    def ingest(payload: dict = Body(...)) -> dict[str, Any]:
        fmt = payload.get("format", "canonical-jsonl")
        csv_config = (
            CsvAdapterConfig.from_doc(payload["csv_config"])
            if payload.get("csv_config")
            else None
        )
        if "records" in payload:
            source = "\n".join(json.dumps(r, sort_keys=True) for r in payload["records"])
        elif "text" in payload:
            source = payload["text"]
        else:
            raise ValueError("ingest body needs 'records' or 'text'")
        with state.lock:
            report = state.store.ingest_records(source, format=fmt, csv_config=csv_config)
        return report.to_doc()

    @app.post("/ingest/auth")
    def ingest_auth(payload: dict = Body(...)) -> dict[str, Any]:
        if "records" in payload:
            source = "\n".join(json.dumps(r, sort_keys=True) for r in payload["records"])
        elif "text" in payload:
            source = payload["text"]
        else:
            raise ValueError("ingest body needs 'records' or 'text'")
        with state.lock:
            report = state.store.ingest_records(source, format="auth-jsonl")
        return report.to_doc()

    @app.get("/events")
    def events(
        employee: str | None = None,
        client: str | None = None,
        system: str | None = None,
        action: str | None = None,
        from_ts: str | None = None,
        to_ts: str | None = None,
        dedupe: bool = False,
        limit: int = Query(default=1000, ge=1, le=100_000),
    ) -> dict[str, Any]:
        flt = _filter_from_params(employee, client, system, action, from_ts, to_ts)
        found = state.store.query_events(flt, dedupe=dedupe)
        return {
            "count": len(found),
            "events": [json.loads(e.to_line()) for e in found[:limit]],
        }

    @app.get("/stats")
    def stats() -> dict[str, Any]:
        return state.store.stats().to_doc()

    @app.get("/export")
    def export(
        format: str = "canonical-jsonl",
        employee: str | None = None,
        client: str | None = None,
        system: str | None = None,
        action: str | None = None,
        from_ts: str | None = None,
        to_ts: str | None = None,
    ) -> PlainTextResponse:
        flt = _filter_from_params(employee, client, system, action, from_ts, to_ts)
        text = state.store.export_records(flt, format=format)
        media = "text/csv" if format == "csv" else "application/x-ndjson"
        return PlainTextResponse(content=text, media_type=media)

    # -- scoring ---------------------------------------------------------------

    @app.post("/rescore")
    def rescore(response: Response) -> dict[str, Any]:
        with state.lock:
            etag = state.rescore()
        response.headers["ETag"] = etag
        return {
            "etag": etag,
            "employees": len(state.tables.employee_scores),
            "clients": len(state.tables.client_scores),
            "pairs": len(state.tables.pair_scores),
        }

    @app.get("/scores/employees")
    def scores_employees(response: Response) -> dict[str, Any]:
        response.headers["ETag"] = state.etag
        return {
            "etag": state.etag,
            "scores": {k: v.to_doc() for k, v in sorted(state.tables.employee_scores.items())},
        }

    @app.get("/scores/clients")
    def scores_clients(response: Response) -> dict[str, Any]:
        response.headers["ETag"] = state.etag
        return {
            "etag": state.etag,
            "scores": {k: v.to_doc() for k, v in sorted(state.tables.client_scores.items())},
        }

    @app.get("/heatmap/employees")
    def heatmap_employees() -> dict[str, Any]:
        grid = build_heatmap(state.tables.employee_scores, state.config.layout.heat_columns)
        return grid.to_doc()

    @app.get("/heatmap/clients")
    def heatmap_clients() -> dict[str, Any]:
        grid = build_heatmap(state.tables.client_scores, state.config.layout.heat_columns)
        return grid.to_doc()

    # -- sessions ---------------------------------------------------------------

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)) -> dict[str, Any]:
        threshold = float(payload.get("threshold", 0.5))
        cap = int(payload.get("addition_cap", 10))
        session = InvestigationSession(ctx=state.ctx, threshold=threshold, addition_cap=cap)
        state.sessions[session.session_id] = session
        out = session.summary()
        out["playlist"] = list(session.playlist)
        return out

    @app.post("/sessions/restore")
    def restore_session(payload: dict = Body(...)) -> dict[str, Any]:
        try:
            session = InvestigationSession.restore(state.ctx, payload)
        except KeyError as exc:
            raise ValueError(f"checkpoint missing field {exc.args[0]!r}") from exc
        state.sessions[session.session_id] = session
        return session.summary()

    @app.get("/sessions/{sid}")
    def session_summary(sid: str) -> dict[str, Any]:
        return state.session(sid).summary()

    @app.get("/sessions/{sid}/checkpoint")
    def session_checkpoint(sid: str) -> dict[str, Any]:
        return state.session(sid).checkpoint()

    @app.post("/sessions/{sid}/start")
    def session_start(sid: str) -> dict[str, Any]:
        state.session(sid).start()
        return state.session(sid).summary()

    @app.post("/sessions/{sid}/pause")
    def session_pause(sid: str) -> dict[str, Any]:
        state.session(sid).pause()
        return state.session(sid).summary()

    @app.post("/sessions/{sid}/resume")
    def session_resume(sid: str) -> dict[str, Any]:
        session = state.session(sid)
        scene = session.resume()
        out = session.summary()
        out["scene"] = _scene_doc(scene)
        return out

    @app.post("/sessions/{sid}/stop")
    def session_stop(sid: str) -> dict[str, Any]:
        state.session(sid).stop()
        return state.session(sid).summary()

    @app.post("/sessions/{sid}/next")
    def session_next(sid: str) -> dict[str, Any]:
        session = state.session(sid)
        scene = session.next_frame()
        out = session.summary()
        out["scene"] = _scene_doc(scene)
        out["exhausted"] = scene is None
        return out

    @app.post("/sessions/{sid}/select")
    def session_select(sid: str, payload: dict = Body(...)) -> dict[str, Any]:
        node = payload.get("node")
        if not node:
            raise ValueError("select body needs 'node'")
        session = state.session(sid)
        scene = session.select_node(str(node))
        out = session.summary()
        out["scene"] = _scene_doc(scene)
        return out

    @app.post("/sessions/{sid}/mode")
    def session_mode(sid: str, payload: dict = Body(...)) -> dict[str, Any]:
        mode = payload.get("mode")
        if not mode:
            raise ValueError("mode body needs 'mode'")
        session = state.session(sid)
        scene = session.set_mode(str(mode))
        out = session.summary()
        out["scene"] = _scene_doc(scene)
        return out

    @app.post("/sessions/{sid}/threshold")
    def session_threshold(sid: str, payload: dict = Body(...)) -> dict[str, Any]:
        session = state.session(sid)
        session.set_threshold(float(payload.get("threshold", 0.5)))
        out = session.summary()
        out["playlist"] = list(session.playlist)
        return out

    @app.get("/sessions/{sid}/scene")
    def session_scene(sid: str) -> dict[str, Any]:
        return state.session(sid).scene().to_doc()

    # -- plots -------------------------------------------------------------------

    @app.get("/plots/timeline")
    def plots_timeline(employee: str, client: str) -> dict[str, Any]:
        data = timeline_data(state.store, employee, client)
        billing = billing_dates_for(state.billing, client, data.points)
        if billing:
            data = timeline_data(state.store, employee, client, billing=billing)
        return data.to_doc()

    @app.get("/plots/periodicity")
    def plots_periodicity(employee: str, client: str) -> dict[str, Any]:
        return periodicity_plot_data(state.store, employee, client).to_doc()

    @app.get("/plots/parallel")
    def plots_parallel(
        employee: str | None = None,
        from_ts: str | None = None,
        to_ts: str | None = None,
    ) -> dict[str, Any]:
        flt = _filter_from_params(employee, None, None, None, from_ts, to_ts)
        return parallel_coords_data(state.store, flt, state.config.auth_rules).to_doc()

    @app.get("/plots/auth-flags")
    def plots_auth_flags(
        fail_x: int | None = None, fail_y_days: int | None = None
    ) -> dict[str, Any]:
        rules = AuthRuleConfig(
            fail_x=fail_x if fail_x is not None else state.config.auth_rules.fail_x,
            fail_y_days=fail_y_days
            if fail_y_days is not None
            else state.config.auth_rules.fail_y_days,
        )
        return {"flags": [f.to_doc() for f in auth_pattern_flags(state.store, rules)]}

    # -- rendering ----------------------------------------------------------------

    @app.get("/render/svg")
    def render(
        employee: str | None = None,
        session: str | None = None,
        viewport: int = Query(default=900, ge=100, le=4000),
    ) -> Response:
        if session is not None:
            scene = state.session(session).scene()
        elif employee is not None:
            scene = build_frame_scene(state.ctx, employee)
        else:
            raise ValueError("render needs 'employee' or 'session'")
        return Response(content=render_svg(scene, viewport), media_type="image/svg+xml")

    return app


def serve(config: ServiceConfig) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    state = ServiceState(config)
    app = create_app(state)
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="info")
