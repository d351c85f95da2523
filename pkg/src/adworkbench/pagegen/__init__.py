"""Synthetic web-page world: markup model, deterministic rendering, template
and ad-insertion pipeline, seam carving, segmentation, obfuscation, and the
perturbation encodings."""

from adworkbench.pagegen.markup import (
    ELEMENT_LIMIT,
    MarkupDoc,
    Node,
    OverSegmentationError,
    fragment,
    render,
    segment_elements,
    sprite_merge,
)
from adworkbench.pagegen.seam import seam_carve
from adworkbench.pagegen.perturb import (
    PerturbationEncoding,
    apply_perturbation,
    region_add_encoding,
    region_replace_encoding,
    tiled_overlay_encoding,
)
from adworkbench.pagegen.templates import (
    CANVAS,
    LabeledPage,
    PageTemplate,
    TemplateParams,
    UnplaceableError,
    fill_placeholders,
    generate_template,
)
from adworkbench.pagegen import synth

__all__ = [
    "ELEMENT_LIMIT",
    "MarkupDoc",
    "Node",
    "OverSegmentationError",
    "fragment",
    "render",
    "segment_elements",
    "sprite_merge",
    "seam_carve",
    "PerturbationEncoding",
    "apply_perturbation",
    "region_add_encoding",
    "region_replace_encoding",
    "tiled_overlay_encoding",
    "CANVAS",
    "LabeledPage",
    "PageTemplate",
    "TemplateParams",
    "UnplaceableError",
    "fill_placeholders",
    "generate_template",
    "synth",
]
