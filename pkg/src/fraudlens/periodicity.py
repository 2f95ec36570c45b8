"""Regular-time-basis detection over inter-event day gaps.

An event series is reduced to the gaps (in whole days) between its
distinct UTC calendar days, then compared against a library of pattern
series with a tolerant longest-common-subsequence similarity.  The gap
representation makes the ideal daily/weekly/fortnightly/monthly
patterns constant sequences and keeps matching phase-invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .events import EventSeries

IDEAL_INTERVALS_DAYS = (30, 15, 7, 1)  # monthly pattern first, by convention


@dataclass(frozen=True)
class IntervalSeries:
    """Day gaps between the distinct calendar days of one event series."""

    values: tuple[int, ...]
    origin_days: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v < 1 for v in self.values):
            raise ValueError("gaps must be at least one day")
        if self.origin_days and len(self.values) != len(self.origin_days) - 1:
            raise ValueError("gap count must be distinct-day count minus one")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PatternSeries:
    """A reference activity shape: ideal constant interval or a recorded gap list."""

    name: str
    kind: str  # "ideal" | "historical"
    interval_days: int | None = None
    gaps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "ideal":
            if not self.interval_days or self.interval_days < 1:
                raise ValueError("ideal pattern needs a positive interval")
        elif self.kind == "historical":
            if not self.gaps:
                raise ValueError("historical pattern needs an explicit gap list")
        else:
            raise ValueError(f"unknown pattern kind {self.kind!r}")

    def materialize(self, length: int) -> tuple[int, ...]:
        """Concrete gap list to compare against an observed list of ``length`` gaps."""
        if self.kind == "ideal":
            return (self.interval_days,) * max(length, 1)
        return self.gaps


@dataclass(frozen=True)
class LcssParams:
    epsilon_days: int = 2
    delta: int | None = None  # matching-index window; None = unbounded

    def __post_init__(self) -> None:
        if self.epsilon_days < 0:
            raise ValueError("epsilon_days must be non-negative")
        if self.delta is not None and self.delta < 1:
            raise ValueError("delta must be positive when bounded")


@dataclass
class SimilarityReport:
    per_pattern: list[tuple[str, float]]
    max_similarity: float
    periodic: bool

    def to_doc(self) -> dict:
        return {
            "per_pattern": [{"pattern": n, "similarity": s} for n, s in self.per_pattern],
            "max_similarity": self.max_similarity,
            "periodic": self.periodic,
        }


def default_pattern_library(historical: Iterable[PatternSeries] = ()) -> list[PatternSeries]:
    """Ideal 30/15/7/1-day patterns (monthly first) plus registered historical shapes."""
    library = [
        PatternSeries(name=f"every-{d}-days", kind="ideal", interval_days=d)
        for d in IDEAL_INTERVALS_DAYS
    ]
    library.extend(historical)
    return library


def load_pattern_registry(path: str | Path) -> list[PatternSeries]:
    """Read historical fraud shapes from a line-delimited registry file."""
    patterns: list[PatternSeries] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        patterns.append(
            PatternSeries(name=str(doc["name"]), kind="historical", gaps=tuple(int(g) for g in doc["gaps"]))
        )
    return patterns


def to_interval_series(series: EventSeries) -> IntervalSeries:
    """Collapse a series to distinct UTC days and take successive differences."""
    days = sorted({e.day for e in series.events})
    gaps = tuple(b - a for a, b in zip(days, days[1:]))
    return IntervalSeries(values=gaps, origin_days=tuple(days))


def lcss_length(a: Sequence[int], b: Sequence[int], params: LcssParams) -> int:
    """Longest common subsequence length where a_i matches b_j iff
    |a_i - b_j| <= epsilon and |i - j| <= delta."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    eps = params.epsilon_days
    delta = params.delta
    prev = [0] * (m + 1)
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            if abs(ai - b[j - 1]) <= eps and (delta is None or abs(i - j) <= delta):
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
        prev, cur = cur, prev
    return prev[m]


def lcss_similarity(
    a: IntervalSeries | Sequence[int],
    b: IntervalSeries | Sequence[int],
    params: LcssParams | None = None,
) -> float:
    """Normalized LCSS similarity in [0, 1]; 0 when either side is empty."""
    params = params or LcssParams()
    va = a.values if isinstance(a, IntervalSeries) else tuple(a)
    vb = b.values if isinstance(b, IntervalSeries) else tuple(b)
    if not va or not vb:
        return 0.0
    return lcss_length(va, vb, params) / min(len(va), len(vb))


def similarity_profile(
    series: EventSeries,
    library: Sequence[PatternSeries],
    params: LcssParams | None = None,
    theta: float = 0.5,
) -> SimilarityReport:
    """Similarity of one event series against every pattern in library order."""
    if not library:
        raise ValueError("pattern library must be non-empty")
    params = params or LcssParams()
    observed = to_interval_series(series)
    per_pattern: list[tuple[str, float]] = []
    for pattern in library:
        if len(observed) == 0:
            per_pattern.append((pattern.name, 0.0))
            continue
        reference = pattern.materialize(len(observed))
        per_pattern.append((pattern.name, lcss_similarity(observed.values, reference, params)))
    max_similarity = max(s for _, s in per_pattern)
    return SimilarityReport(
        per_pattern=per_pattern,
        max_similarity=max_similarity,
        periodic=max_similarity >= theta,
    )
