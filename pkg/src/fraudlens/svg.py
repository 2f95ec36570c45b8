"""Static SVG rendering of a FrameScene.

Pure text generation: the scene already carries all geometry on the unit
circle, so rendering is a deterministic mapping to SVG paths.  Every node,
edge, band and heat cell becomes one addressable element whose ``data-id``
(and a sanitized ``id``) carry the entity identifier.
"""

from __future__ import annotations

import math
from typing import Iterable
from xml.sax.saxutils import escape, quoteattr

from .layout import BAND_RINGS, FrameScene, HeatMapGrid, LayerBand, SceneEdge, SceneNode, color_hex

HEAT_CELL_PX = 14
HEAT_GAP_PX = 2


def _sanitize(ident: str) -> str:
    safe = []
    for ch in ident:
        safe.append(ch if ch.isalnum() or ch in "_.:-" else f"_{ord(ch):02x}")
    return "".join(safe)


def _fmt(v: float) -> str:
    return f"{v:.4f}"


class _Canvas:
    """Shared transform: unit circle -> viewport pixels, y axis flipped."""

    def __init__(self, viewport: int):
        self.scale = viewport / 2.0
        self.cx = viewport / 2.0
        self.cy = viewport / 2.0

    def point(self, angle: float, radius: float) -> tuple[float, float]:
        return (
            self.cx + self.scale * radius * math.cos(angle),
            self.cy - self.scale * radius * math.sin(angle),
        )

    def sector_path(self, a0: float, a1: float, r0: float, r1: float) -> str:
        """Annular sector from angle a0 to a1 between radii r0 < r1."""
        large = 1 if (a1 - a0) > math.pi else 0
        x0, y0 = self.point(a0, r1)
        x1, y1 = self.point(a1, r1)
        x2, y2 = self.point(a1, r0)
        x3, y3 = self.point(a0, r0)
        ro = _fmt(self.scale * r1)
        ri = _fmt(self.scale * r0)
        return (
            f"M {_fmt(x0)} {_fmt(y0)} "
            f"A {ro} {ro} 0 {large} 0 {_fmt(x1)} {_fmt(y1)} "
            f"L {_fmt(x2)} {_fmt(y2)} "
            f"A {ri} {ri} 0 {large} 1 {_fmt(x3)} {_fmt(y3)} Z"
        )


def _node_elements(canvas: _Canvas, node: SceneNode) -> Iterable[str]:
    a0, a1 = node.angular_span
    r0, r1 = node.radial_span
    path = canvas.sector_path(a0, a1, r0, r1)
    fill = color_hex(node.color)
    yield (
        f'<path id="node-{_sanitize(node.id)}" data-id={quoteattr(node.id)} '
        f'data-kind="{node.kind}" class="node{" gray" if node.gray else ""}" '
        f'd="{path}" fill="{fill}" stroke="#333333" stroke-width="0.6">'
        f"<title>{escape(node.id)} ({node.kind})</title></path>"
    )


def _edge_elements(canvas: _Canvas, edge: SceneEdge, anchors: dict[str, tuple[float, float]]) -> Iterable[str]:
    if edge.source not in anchors or edge.target not in anchors:
        return
    sa, sr = anchors[edge.source]
    ta, tr = anchors[edge.target]
    x0, y0 = canvas.point(sa, sr)
    x1, y1 = canvas.point(ta, tr)
    stroke = color_hex(edge.color)
    width = _fmt(max(edge.thickness * canvas.scale, 0.5))
    ident = f"{edge.source}->{edge.target}"
    if edge.style == "arc":
        # Control point pulled toward the center bows the edge inwards.
        cx, cy = canvas.point((sa + ta) / 2.0, 0.08)
        d = f"M {_fmt(x0)} {_fmt(y0)} Q {_fmt(cx)} {_fmt(cy)} {_fmt(x1)} {_fmt(y1)}"
    else:
        d = f"M {_fmt(x0)} {_fmt(y0)} L {_fmt(x1)} {_fmt(y1)}"
    yield (
        f'<path id="edge-{_sanitize(ident)}" data-id={quoteattr(ident)} class="edge" '
        f'd="{d}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-linecap="round"/>'
    )


def _x_mark(canvas: _Canvas, angle: float, radius: float, size: float) -> str:
    x, y = canvas.point(angle, radius)
    s = size * canvas.scale
    return (
        f'<path class="xmark" d="M {_fmt(x - s)} {_fmt(y - s)} L {_fmt(x + s)} {_fmt(y + s)} '
        f'M {_fmt(x - s)} {_fmt(y + s)} L {_fmt(x + s)} {_fmt(y - s)}" '
        f'stroke="#222222" stroke-width="1.4" fill="none"/>'
    )


def _band_elements(canvas: _Canvas, band: LayerBand, owner_span: tuple[float, float]) -> Iterable[str]:
    a0, a1 = owner_span
    r0, r1 = BAND_RINGS[band.layer]
    split = r0 + (r1 - r0) * 0.3  # region A inner, region B outer
    ident = f"{band.owner}:{band.layer}"
    yield f'<g id="band-{_sanitize(ident)}" data-id={quoteattr(ident)} class="band">'
    if band.region_a:
        width = (a1 - a0) / len(band.region_a)
        for i, cell in enumerate(band.region_a):
            ca0 = a0 + i * width
            yield (
                f'<path data-id={quoteattr(cell.id)} class="region-a" '
                f'd="{canvas.sector_path(ca0, ca0 + width, r0, split)}" '
                f'fill="{color_hex(cell.color)}" stroke="#444444" stroke-width="0.3"/>'
            )
    cursor = a0
    for seg in band.region_b:
        sweep = (a1 - a0) * seg.fraction
        if sweep <= 0:
            continue
        yield (
            f'<path data-label={quoteattr(seg.label)} class="region-b" '
            f'd="{canvas.sector_path(cursor, cursor + sweep, split, r1)}" '
            f'fill="{color_hex(seg.color)}" stroke="#444444" stroke-width="0.3"/>'
        )
        if seg.marked_x:
            yield _x_mark(canvas, cursor + sweep / 2.0, (split + r1) / 2.0, 0.012)
        cursor += sweep
    yield "</g>"


def _heatmap_elements(grid: HeatMapGrid, name: str, x0: float, y0: float) -> Iterable[str]:
    yield f'<g id="heatmap-{name}" class="heatmap">'
    step = HEAT_CELL_PX + HEAT_GAP_PX
    for i, cell in enumerate(grid.cells):
        col = i % grid.columns
        row = i // grid.columns
        x = x0 + col * step
        y = y0 + row * step
        yield (
            f'<rect data-id={quoteattr(cell.id)} class="heat-cell" x="{_fmt(x)}" y="{_fmt(y)}" '
            f'width="{HEAT_CELL_PX}" height="{HEAT_CELL_PX}" fill="{color_hex(cell.color)}">'
            f"<title>{escape(cell.id)}: {cell.severity:.3f}</title></rect>"
        )
        if cell.marked_x:
            yield (
                f'<path class="xmark" d="M {_fmt(x)} {_fmt(y)} L {_fmt(x + HEAT_CELL_PX)} {_fmt(y + HEAT_CELL_PX)} '
                f'M {_fmt(x)} {_fmt(y + HEAT_CELL_PX)} L {_fmt(x + HEAT_CELL_PX)} {_fmt(y)}" '
                f'stroke="#222222" stroke-width="1.2"/>'
            )
    yield "</g>"


def _heatmap_height(grid: HeatMapGrid) -> float:
    rows = math.ceil(len(grid.cells) / grid.columns) if grid.cells else 0
    return rows * (HEAT_CELL_PX + HEAT_GAP_PX)


def render_svg(scene: FrameScene, viewport: int = 900) -> str:
    """Deterministic standalone SVG for one scene."""
    canvas = _Canvas(viewport)
    anchors = {
        n.id: ((n.angular_span[0] + n.angular_span[1]) / 2.0, n.radial_span[0])
        for n in scene.nodes
    }
    owner_spans = {n.id: n.angular_span for n in scene.nodes}

    parts: list[str] = []
    hm_y = viewport + 20.0
    hm_height = 0.0
    for name in ("employees", "clients"):
        grid = scene.heatmaps.get(name)
        if grid is not None:
            hm_height = max(hm_height, _heatmap_height(grid))
    total_height = viewport + (40 + hm_height if hm_height else 0)

    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {viewport} {_fmt(total_height)}" '
        f'width="{viewport}" height="{_fmt(total_height)}">'
    )
    parts.append(f'<rect class="backdrop" width="{viewport}" height="{_fmt(total_height)}" fill="#FAFAFA"/>')
    focus = scene.focus_employee or ""
    parts.append(
        f'<g class="frame" data-mode="{scene.mode}" data-focus={quoteattr(focus)}>'
        f'<circle cx="{_fmt(canvas.cx)}" cy="{_fmt(canvas.cy)}" r="{_fmt(canvas.scale * 0.99)}" '
        f'fill="none" stroke="#DDDDDD"/></g>'
    )

    parts.append('<g class="edges">')
    for edge in scene.edges:
        parts.extend(_edge_elements(canvas, edge, anchors))
    parts.append("</g>")

    parts.append('<g class="nodes">')
    for node in scene.nodes:
        parts.extend(_node_elements(canvas, node))
    parts.append("</g>")

    parts.append('<g class="bands">')
    for band in scene.bands:
        span = owner_spans.get(band.owner)
        if span is not None:
            parts.extend(_band_elements(canvas, band, span))
    parts.append("</g>")

    if hm_height:
        emp = scene.heatmaps.get("employees")
        cli = scene.heatmaps.get("clients")
        if emp is not None:
            parts.extend(_heatmap_elements(emp, "employees", 20.0, hm_y))
        if cli is not None:
            parts.extend(_heatmap_elements(cli, "clients", viewport / 2.0 + 20.0, hm_y))

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
