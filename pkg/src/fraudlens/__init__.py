"""Occupational-fraud investigation engine.

Audit logs from heterogeneous business systems are normalized into one
event store, every (employee, client) series is scored against layered
fraud patterns, and the results feed severity heat-maps, a radial
investigation drawing, companion plots and an animated review session,
all exposed over HTTP and a CLI.
"""

from .events import (
    AuthEvent,
    CorpusStats,
    CsvAdapterConfig,
    Event,
    EventSeries,
    EventStore,
    QueryFilter,
)
from .layout import (
    FrameContext,
    FrameScene,
    LayoutConfig,
    SceneOverrides,
    build_frame_scene,
    build_heatmap,
    build_overview_scene,
    severity_color,
)
from .periodicity import (
    LcssParams,
    default_pattern_library,
    lcss_similarity,
    similarity_profile,
    to_interval_series,
)
from .plots import (
    AuthRuleConfig,
    auth_pattern_flags,
    parallel_coords_data,
    periodicity_plot_data,
    timeline_data,
)
from .scoring import (
    CorpusScorer,
    LayerWeights,
    PatternVector,
    Profiles,
    ScoringConfig,
    SeverityScore,
    load_profiles,
    save_profiles,
    weighted_distance,
)
from .service import ServiceConfig, ServiceState, create_app, serve
from .session import InvestigationSession, SessionError, build_playlist
from .svg import render_svg
from .synth import SynthSpec, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "AuthEvent",
    "AuthRuleConfig",
    "CorpusScorer",
    "CorpusStats",
    "CsvAdapterConfig",
    "Event",
    "EventSeries",
    "EventStore",
    "FrameContext",
    "FrameScene",
    "InvestigationSession",
    "LayerWeights",
    "LayoutConfig",
    "LcssParams",
    "PatternVector",
    "Profiles",
    "QueryFilter",
    "SceneOverrides",
    "ScoringConfig",
    "ServiceConfig",
    "ServiceState",
    "SessionError",
    "SeverityScore",
    "SynthSpec",
    "auth_pattern_flags",
    "build_frame_scene",
    "build_heatmap",
    "build_overview_scene",
    "build_playlist",
    "create_app",
    "default_pattern_library",
    "generate_corpus",
    "lcss_similarity",
    "load_profiles",
    "parallel_coords_data",
    "periodicity_plot_data",
    "render_svg",
    "save_profiles",
    "serve",
    "severity_color",
    "similarity_profile",
    "timeline_data",
    "to_interval_series",
    "weighted_distance",
    "__version__",
]
