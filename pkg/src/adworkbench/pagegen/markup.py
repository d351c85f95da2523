"""Simplified markup model: a static geometry tree standing in for the DOM.

Nodes are containers, images, iframes or textblocks with integer pixel
rects, optional image sources (with crop views for sprites), z order and
opacity. Rendering paints back-to-front; obfuscation transforms rewrite the
tree without changing the render, which is the property the segmentation
attacks exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from adworkbench.imaging import Image, composite_over, constant

ELEMENT_LIMIT = 512  # image elements per page before over-segmentation triggers

KINDS = ("container", "image", "iframe", "textblock")


class MarkupError(ValueError):
    pass


class OverSegmentationError(RuntimeError):
    """Raised when a page exceeds the element-count limit (resource exhaustion)."""


@dataclass
class Node:
    id: str
    kind: str
    rect: tuple  # (x, y, w, h) in px, relative to the canvas
    fill: tuple | None = None  # flat RGB(A) color for containers/textblocks
    source: str | None = None  # source image id for image nodes
    crop: tuple | None = None  # (x, y, w, h) sub-rect of the source
    z: int = 0
    opacity: float = 1.0
    children: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MarkupError(f"unknown node kind {self.kind!r}")
        x, y, w, h = self.rect
        if w <= 0 or h <= 0:
            raise MarkupError(f"empty rect on node {self.id}")

    def walk(self):
        yield self
        for child in sorted(self.children, key=lambda n: (n.z, n.id)):
            yield from child.walk()


@dataclass
class MarkupDoc:
    root: Node
    sources: dict  # source id -> Image
    canvas: tuple  # (w, h)

    def node(self, node_id: str) -> Node:
        for n in self.root.walk():
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def parent_of(self, node_id: str) -> Node | None:
        for n in self.root.walk():
            if any(c.id == node_id for c in n.children):
                return n
        return None

    def image_nodes(self):
        return [n for n in self.root.walk() if n.kind == "image"]

    def iframe_nodes(self):
        return [n for n in self.root.walk() if n.kind == "iframe"]


def _node_source_image(doc: MarkupDoc, node: Node, cropped: bool) -> Image:
    if node.source is None:
        raise MarkupError(f"dangling image node {node.id} (no source)")
    if node.source not in doc.sources:
        raise MarkupError(f"dangling image reference {node.source!r} on {node.id}")
    img = doc.sources[node.source]
    if cropped and node.crop is not None:
        cx, cy, cw, ch = node.crop
        if cx < 0 or cy < 0 or cx + cw > img.width or cy + ch > img.height:
            raise MarkupError(f"crop outside source on node {node.id}")
        img = Image(img.data[cy : cy + ch, cx : cx + cw])
    return img


def _paint(canvas: Image, doc: MarkupDoc, node: Node, offset=(0, 0)) -> Image:
    from adworkbench.imaging import resize

    x, y, w, h = node.rect
    x += offset[0]
    y += offset[1]
    if node.kind in ("container", "textblock") and node.fill is not None:
        patch = constant(h, w, node.fill)
        canvas = composite_over(canvas, patch, origin=(x, y), opacity=node.opacity)
    elif node.kind == "image":
        img = _node_source_image(doc, node, cropped=True)
        if (img.width, img.height) != (w, h):
            img = resize(img, w, h, "nearest")
        canvas = composite_over(canvas, img, origin=(x, y), opacity=node.opacity)
    elif node.kind == "iframe":
        # iframes render standalone on their own canvas, then paste
        shot = render_subtree(doc, node)
        canvas = composite_over(canvas, shot, origin=(x, y), opacity=node.opacity)
        return canvas
    for child in sorted(node.children, key=lambda n: (n.z, n.id)):
        canvas = _paint(canvas, doc, child, offset)
    return canvas


def render_subtree(doc: MarkupDoc, node: Node) -> Image:
    """Render a node's subtree on its own rect-sized canvas (iframe isolation)."""
    x, y, w, h = node.rect
    canvas = constant(h, w, (1.0, 1.0, 1.0))
    if node.fill is not None:
        canvas = constant(h, w, node.fill)
    for child in sorted(node.children, key=lambda n: (n.z, n.id)):
        canvas = _paint(canvas, doc, child, offset=(-x, -y))
    return canvas


def render(doc: MarkupDoc):
    """Back-to-front paint by z-order. Returns (Image, element map of node id
    -> absolute rect)."""
    w, h = doc.canvas
    rx, ry, rw, rh = doc.root.rect
    if (rx, ry, rw, rh) != (0, 0, w, h):
        raise MarkupError("root must cover the canvas")
    canvas = _paint(constant(h, w, (1.0, 1.0, 1.0)), doc, doc.root)
    element_map = {n.id: n.rect for n in doc.root.walk()}
    return canvas, element_map


def segment_elements(doc: MarkupDoc, granularity: str = "element"):
    """Segment a page the way an element- or frame-based ad-blocker would.

    element: every image node's raw source file (crops NOT applied, the
    DOM-level view that sprite/fragment obfuscation exploits). iframe: each
    iframe subtree's rendered screenshot. Raises OverSegmentationError past
    the element-count limit.
    """
    if granularity == "element":
        nodes = doc.image_nodes()
        if len(nodes) > ELEMENT_LIMIT:
            raise OverSegmentationError(f"{len(nodes)} image elements exceed the limit of {ELEMENT_LIMIT}")
        return [(n.id, _node_source_image(doc, n, cropped=False)) for n in nodes]
    if granularity == "iframe":
        return [(n.id, render_subtree(doc, n)) for n in doc.iframe_nodes()]
    raise MarkupError(f"unknown granularity {granularity!r}")


# ---------------------------------------------------------------------------
# obfuscation transforms (render-preserving by construction)


def sprite_merge(doc: MarkupDoc, node_ids) -> MarkupDoc:
    """Pack the nodes' sources into one sheet and rewrite them as crop views.

    The rendered page is pixel-identical; element segmentation now sees only
    the sheet.
    """
    nodes = [doc.node(nid) for nid in node_ids]
    if any(n.kind != "image" for n in nodes):
        raise MarkupError("sprite_merge targets must be image nodes")
    fulls = [_node_source_image(doc, n, cropped=True) for n in nodes]
    channels = 4 if any(f.channels == 4 for f in fulls) else 3
    height = max(f.height for f in fulls)
    width = sum(f.width for f in fulls)
    sheet = np.zeros((height, width, channels))
    if channels == 3:
        sheet[:] = 1.0  # white filler
    offsets = []
    x = 0
    for f in fulls:
        arr = f.data
        if f.channels != channels:
            if channels == 4:
                pad = np.ones((f.height, f.width, 1))
                arr = np.concatenate([f.rgb(), pad], axis=2)
            else:
                arr = f.rgb()
        sheet[: f.height, x : x + f.width] = arr
        offsets.append(x)
        x += f.width
    sheet_id = "sprite:" + "+".join(n.id for n in nodes)
    new_sources = dict(doc.sources)
    new_sources[sheet_id] = Image(sheet)
    for n, f, off in zip(nodes, fulls, offsets):
        n.source = sheet_id
        n.crop = (off, 0, f.width, f.height)
    for old in {s for s in new_sources if s != sheet_id}:
        if not any(n.source == old for n in doc.root.walk() if n.kind == "image"):
            del new_sources[old]
    doc.sources = new_sources
    return doc


def fragment(doc: MarkupDoc, node_id: str, rows: int, cols: int) -> MarkupDoc:
    """Split one image node into rows x cols physical tiles with adjacent
    rects. The render is pixel-identical; each tile is its own source file."""
    node = doc.node(node_id)
    if node.kind != "image":
        raise MarkupError("fragment target must be an image node")
    img = _node_source_image(doc, node, cropped=True)
    x, y, w, h = node.rect
    if (img.width, img.height) != (w, h):
        raise MarkupError("fragment requires the node rect to match its source size")
    parent = doc.parent_of(node_id)
    if parent is None:
        raise MarkupError("cannot fragment the root")
    ys = [round(i * h / rows) for i in range(rows + 1)]
    xs = [round(j * w / cols) for j in range(cols + 1)]
    tiles = []
    for i in range(rows):
        for j in range(cols):
            tw, th = xs[j + 1] - xs[j], ys[i + 1] - ys[i]
            if tw <= 0 or th <= 0:
                raise MarkupError("fragment tile degenerates to zero size")
            tile_id = f"{node.id}.frag{i}x{j}"
            doc.sources[tile_id] = Image(img.data[ys[i] : ys[i + 1], xs[j] : xs[j + 1]])
            tiles.append(
                Node(
                    id=tile_id,
                    kind="image",
                    rect=(x + xs[j], y + ys[i], tw, th),
                    source=tile_id,
                    z=node.z,
                    opacity=node.opacity,
                )
            )
    parent.children = [c for c in parent.children if c.id != node_id] + tiles
    if not any(n.source == node.source for n in doc.root.walk() if n.kind == "image"):
        doc.sources.pop(node.source, None)
    return doc
