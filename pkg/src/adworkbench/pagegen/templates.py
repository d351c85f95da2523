"""Template generation and the four ad-insertion strategies.

Templates are markup docs with placeholder containers carrying reserved
unique flat colors (g=0, b=1 palette, which generated content never uses).
Filling replaces placeholders with iframe-wrapped ads, optionally adds
disclosure logos, popups over a darkened page, or margin ads, and records
ground-truth boxes for every inserted ad.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adworkbench.imaging import Image, resize
from adworkbench.pagegen.markup import MarkupDoc, Node, render
from adworkbench.pagegen.seam import seam_carve
from adworkbench.pagegen import synth

CANVAS = 1024
REUSE_CAP = 20  # max pages an ad image may appear on, per corpus

# standard ad shapes scaled from 728x90 / 300x250 / 160x600 to the canvas
AD_SHAPES = {
    "banner": (582, 72),
    "rect": (240, 200),
    "skyscraper": (128, 480),
}
POPUP_SHAPE = (480, 360)

PLACEHOLDER_PALETTE = [(20 + 40 * i) / 255.0 for i in range(6)]


class UnplaceableError(RuntimeError):
    pass


@dataclass
class TemplateParams:
    columns: int = 2
    block_density: float = 0.8
    placeholders: tuple = ("banner", "rect")
    margins: bool = False  # reserve side margins (strategy-4 layouts)

    def __post_init__(self):
        if not 1 <= self.columns <= 3:
            raise ValueError("columns must be 1..3")
        if not 0.1 <= self.block_density <= 1.0:
            raise ValueError("block_density must be in [0.1, 1]")
        if len(self.placeholders) > len(PLACEHOLDER_PALETTE):
            raise UnplaceableError("more placeholders than reserved colors")


@dataclass
class PageTemplate:
    doc: MarkupDoc
    placeholder_ids: list
    placeholder_colors: dict  # node id -> RGB tuple
    seed: int
    params: TemplateParams


@dataclass
class LabeledPage:
    image: Image
    boxes: list  # normalized (cx, cy, w, h) per inserted ad
    element_map: dict
    doc: MarkupDoc
    provenance: dict = field(default_factory=dict)


def _content_span(params: TemplateParams):
    if params.margins:
        return 144, CANVAS - 144
    return 16, CANVAS - 16


def generate_template(seed: int, params: TemplateParams = TemplateParams()) -> PageTemplate:
    """Deterministic layout: header, nav strip, text/photo blocks in columns,
    and placeholder rects at standard ad shapes."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7E4)))
    root = Node(id="root", kind="container", rect=(0, 0, CANVAS, CANVAS), fill=(1.0, 1.0, 1.0))
    doc = MarkupDoc(root=root, sources={}, canvas=(CANVAS, CANVAS))

    header_h, nav_h = 72, 36
    header_color = tuple(synth._clip(np.array([0.16, 0.2, 0.3]) + 0.15 * (rng.random(3) - 0.5)))
    root.children.append(Node(id="header", kind="container", rect=(0, 0, CANVAS, header_h), fill=header_color, z=1))
    doc.sources["sitelogo"] = Image(synth.photo_block(rng, 120, 40))
    root.children.append(Node(id="sitelogo", kind="image", rect=(24, 16, 120, 40), source="sitelogo", z=2))
    nav_color = tuple(synth._clip(np.array(header_color) * 1.6 + 0.15))
    root.children.append(Node(id="nav", kind="container", rect=(0, header_h, CANVAS, nav_h), fill=nav_color, z=1))
    for i in range(6):
        bx = 24 + i * 110
        btn = tuple(synth._clip(np.array(nav_color) * 0.75))
        root.children.append(Node(id=f"navbtn{i}", kind="textblock", rect=(bx, header_h + 9, 84, 18), fill=btn, z=2))

    left, right = _content_span(params)
    top = header_h + nav_h + 16
    if params.columns == 1:
        cols = [(left, right - left)]
    elif params.columns == 2:
        main_w = int((right - left) * 0.66)
        cols = [(left, main_w), (left + main_w + 16, right - left - main_w - 16)]
    else:
        w3 = (right - left - 32) // 3
        cols = [(left + i * (w3 + 16), w3) for i in range(3)]

    # decide placeholder slots first so content flows around them
    placeholder_ids = []
    placeholder_colors = {}
    pending = list(params.placeholders)
    col_y = [top] * len(cols)
    blocks_budget = int(22 * params.block_density)
    block_idx = 0
    ph_idx = 0
    while blocks_budget > 0 or pending:
        col = int(np.argmin(col_y))
        cx0, cw = cols[col]
        y = col_y[col]
        if pending and (block_idx % 3 == 1 or blocks_budget == 0):
            kind = pending.pop(0)
            pw, ph = AD_SHAPES[kind]
            if pw > cw:  # shrink to the column, keeping the shape's aspect
                scale = cw / pw
                pw, ph = cw, max(int(ph * scale), 24)
            if y + ph > CANVAS - 16:
                raise UnplaceableError(f"placeholder {kind} does not fit (y={y})")
            pid = f"ph{ph_idx}"
            color = (PLACEHOLDER_PALETTE[ph_idx], 0.0, 1.0)
            node = Node(id=pid, kind="container", rect=(cx0 + (cw - pw) // 2, y, pw, ph), fill=color, z=3)
            root.children.append(node)
            placeholder_ids.append(pid)
            placeholder_colors[pid] = color
            ph_idx += 1
            col_y[col] = y + ph + 16
        elif blocks_budget > 0:
            bh = int(rng.integers(70, 190))
            bh = min(bh, CANVAS - 16 - y)
            if bh < 40:
                col_y[col] = CANVAS  # column full
                if all(cy >= CANVAS for cy in col_y) and pending:
                    raise UnplaceableError("no room left for placeholders")
                if all(cy >= CANVAS for cy in col_y):
                    break
                continue
            bid = f"blk{block_idx}"
            if rng.random() < 0.72:
                root.children.append(Node(id=bid, kind="textblock", rect=(cx0, y, cw, bh),
                                          fill=tuple(synth._clip(np.full(3, 0.88 + 0.06 * rng.random())))))
                doc.sources[bid] = Image(synth.text_block(rng, cw, bh))
                root.children.append(Node(id=bid + "img", kind="image", rect=(cx0, y, cw, bh), source=bid, z=2))
            else:
                doc.sources[bid] = Image(synth.photo_block(rng, cw, bh))
                root.children.append(Node(id=bid + "img", kind="image", rect=(cx0, y, cw, bh), source=bid, z=2))
            blocks_budget -= 1
            col_y[col] = y + bh + 14
        else:
            break
        block_idx += 1
        if all(cy >= CANVAS - 40 for cy in col_y):
            if pending:
                raise UnplaceableError("no room left for placeholders")
            break
    return PageTemplate(doc=doc, placeholder_ids=placeholder_ids, placeholder_colors=placeholder_colors,
                        seed=seed, params=params)


# ---------------------------------------------------------------------------
# filling


def _fit_ad(ad: Image, w: int, h: int) -> Image:
    """Scale to the slot; seam-carve when aspects differ by < 25%, letterbox
    otherwise."""
    ar_ad = ad.width / ad.height
    ar_slot = w / h
    ratio = ar_ad / ar_slot
    if abs(ratio - 1.0) < 0.25:
        scaled_h = max(int(round(w / ar_ad)), 1)
        scaled = resize(ad, w, scaled_h, "area_average")
        if scaled_h == h:
            return scaled
        return seam_carve(scaled, w, h)
    # letterbox: uniform scale to fit, white bars
    scale = min(w / ad.width, h / ad.height)
    sw, sh = max(int(ad.width * scale), 1), max(int(ad.height * scale), 1)
    scaled = resize(ad, sw, sh, "area_average")
    arr = np.ones((h, w, 3))
    x0, y0 = (w - sw) // 2, (h - sh) // 2
    arr[y0 : y0 + sh, x0 : x0 + sw] = scaled.rgb()
    return Image(arr)


def _pick_ad(rng, ads, w, h, usage):
    """Aspect-nearest ad among a seeded shuffle, honoring the reuse cap."""
    order = rng.permutation(len(ads))
    best = None
    best_score = None
    for idx in order:
        ad_id, ad = ads[idx]
        if usage is not None and usage.get(ad_id, 0) >= REUSE_CAP:
            continue
        score = abs(np.log((ad.width / ad.height) / (w / h)))
        if best_score is None or score < best_score - 1e-9:
            best = (ad_id, ad)
            best_score = score
            if score < 0.05:
                break
    if best is None:
        raise UnplaceableError("every ad has hit the reuse cap")
    if usage is not None:
        usage[best[0]] = usage.get(best[0], 0) + 1
    return best


def _norm_box(rect):
    x, y, w, h = rect
    return ((x + w / 2) / CANVAS, (y + h / 2) / CANVAS, w / CANVAS, h / CANVAS)


def fill_placeholders(tpl: PageTemplate, ads, strategy: int, seed: int, logos=None, usage=None) -> LabeledPage:
    """Insert ads by strategy 1..4 and return the rendered labeled page."""
    if not ads:
        raise ValueError("empty ad set")
    if strategy not in (1, 2, 3, 4):
        raise ValueError(f"unknown strategy {strategy}")
    if strategy == 2 and not logos:
        raise ValueError("strategy 2 needs disclosure logos")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF111)))
    doc = tpl.doc
    root = doc.root
    boxes = []
    ad_ids = []

    def insert_ad(rect, tag, with_logo):
        x, y, w, h = rect
        ad_id, ad = _pick_ad(rng, ads, w, h, usage)
        fitted = _fit_ad(ad, w, h)
        src = f"{tag}:src"
        doc.sources[src] = fitted
        frame = Node(id=tag, kind="iframe", rect=rect, fill=(1.0, 1.0, 1.0), z=5)
        frame.children.append(Node(id=f"{tag}.ad", kind="image", rect=rect, source=src, z=1))
        if with_logo:
            name = sorted(logos)[int(rng.integers(0, len(logos)))]
            logo = logos[name]
            lx = x + w - logo.width - 4
            ly = y + 4
            lsrc = f"{tag}:logo"
            doc.sources[lsrc] = logo
            frame.children.append(Node(id=f"{tag}.logo", kind="image",
                                       rect=(lx, ly, logo.width, logo.height), source=lsrc, z=2))
        root.children.append(frame)
        boxes.append(_norm_box(rect))
        ad_ids.append(ad_id)

    if strategy in (1, 2):
        for pid in tpl.placeholder_ids:
            node = doc.node(pid)
            node.fill = (1.0, 1.0, 1.0)  # placeholder replaced by the iframe on top
            insert_ad(node.rect, f"ad.{pid}", with_logo=(strategy == 2))
    elif strategy == 3:
        for pid in tpl.placeholder_ids:  # fill any existing slots plainly
            node = doc.node(pid)
            node.fill = (1.0, 1.0, 1.0)
            insert_ad(node.rect, f"ad.{pid}", with_logo=False)
        root.children.append(Node(id="darken", kind="container", rect=(0, 0, CANVAS, CANVAS),
                                  fill=(0.0, 0.0, 0.0), opacity=0.5, z=90))
        pw, ph = POPUP_SHAPE
        rect = ((CANVAS - pw) // 2, (CANVAS - ph) // 2, pw, ph)
        insert_ad(rect, "ad.popup", with_logo=False)
        doc.node("ad.popup").z = 95
    else:  # margins
        if not tpl.params.margins:
            raise UnplaceableError("strategy 4 needs a margins layout")
        w, h = AD_SHAPES["skyscraper"]
        for side, x in (("l", 8), ("r", CANVAS - w - 8)):
            y = 120
            k = 0
            while y + h <= CANVAS - 16:
                insert_ad((x, y, w, h), f"ad.margin{side}{k}", with_logo=False)
                y += h + 16
                k += 1

    image, element_map = render(doc)
    return LabeledPage(
        image=image,
        boxes=boxes,
        element_map=element_map,
        doc=doc,
        provenance={
            "template_seed": tpl.seed,
            "fill_seed": seed,
            "strategy": strategy,
            "ad_ids": ad_ids,
            "params": {
                "columns": tpl.params.columns,
                "block_density": tpl.params.block_density,
                "placeholders": list(tpl.params.placeholders),
                "margins": tpl.params.margins,
            },
        },
    )


# ---------------------------------------------------------------------------
# cross-boundary fixture page


def social_page(seed: int):
    """A two-post feed page: returns (page Image, attacker rect, victim rect)
    in pixels. The attacker's post holds an image the adversary controls; the
    victim's post is benign text at an ad-like slot."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x50C)))
    root = Node(id="root", kind="container", rect=(0, 0, CANVAS, CANVAS), fill=(0.94, 0.94, 0.96))
    doc = MarkupDoc(root=root, sources={}, canvas=(CANVAS, CANVAS))
    root.children.append(Node(id="header", kind="container", rect=(0, 0, CANVAS, 64), fill=(0.2, 0.3, 0.5), z=1))
    feed_x, feed_w = 256, 512
    # victim post: text card at a mid-page, ad-sized slot
    vy = 96
    vh = 320
    victim_rect = (feed_x, vy, feed_w, vh)
    root.children.append(Node(id="victim.card", kind="container", rect=victim_rect, fill=(1.0, 1.0, 1.0), z=2))
    doc.sources["victim.text"] = Image(synth.text_block(rng, feed_w - 32, vh - 64))
    root.children.append(Node(id="victim.text", kind="image", rect=(feed_x + 16, vy + 48, feed_w - 32, vh - 64),
                              source="victim.text", z=3))
    root.children.append(Node(id="victim.name", kind="textblock", rect=(feed_x + 16, vy + 12, 160, 20),
                              fill=(0.25, 0.3, 0.4), z=3))
    # attacker post below: a photo the adversary fully controls
    ay = vy + vh + 24
    ah = 360
    root.children.append(Node(id="attacker.card", kind="container", rect=(feed_x, ay, feed_w, ah), fill=(1.0, 1.0, 1.0), z=2))
    attacker_rect = (feed_x + 16, ay + 48, feed_w - 32, ah - 64)
    doc.sources["attacker.photo"] = Image(synth.photo_block(rng, attacker_rect[2], attacker_rect[3]))
    root.children.append(Node(id="attacker.photo", kind="image", rect=attacker_rect, source="attacker.photo", z=3))
    root.children.append(Node(id="attacker.name", kind="textblock", rect=(feed_x + 16, ay + 12, 160, 20),
                              fill=(0.25, 0.3, 0.4), z=3))
    image, _ = render(doc)
    return image, attacker_rect, victim_rect
