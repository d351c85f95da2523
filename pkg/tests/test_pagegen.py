import numpy as np
import pytest

from adworkbench.imaging import Image, constant
from adworkbench.pagegen import (
    ELEMENT_LIMIT,
    MarkupDoc,
    Node,
    OverSegmentationError,
    fragment,
    render,
    segment_elements,
    sprite_merge,
)
from adworkbench.pagegen.markup import render_subtree


def simple_doc():
    root = Node(id="root", kind="container", rect=(0, 0, 32, 32), fill=(1.0, 1.0, 1.0))
    return MarkupDoc(root=root, sources={}, canvas=(32, 32))


def test_render_white_container():
    img, emap = render(simple_doc())
    assert np.allclose(img.data, 1.0)
    assert emap["root"] == (0, 0, 32, 32)


def test_render_z_order():
    doc = simple_doc()
    doc.root.children.append(Node(id="low", kind="container", rect=(4, 4, 16, 16), fill=(0.2, 0.2, 0.2), z=1))
    doc.root.children.append(Node(id="high", kind="container", rect=(8, 8, 16, 16), fill=(0.8, 0.2, 0.2), z=2))
    img, _ = render(doc)
    assert np.allclose(img.data[10, 10], (0.8, 0.2, 0.2))  # overlap shows higher z
    assert np.allclose(img.data[5, 5], (0.2, 0.2, 0.2))


def test_render_image_node_and_dangling_reference():
    doc = simple_doc()
    rng = np.random.default_rng(0)
    src = Image(rng.random((8, 8, 3)))
    doc.sources["pic"] = src
    doc.root.children.append(Node(id="pic", kind="image", rect=(3, 5, 8, 8), source="pic", z=1))
    img, _ = render(doc)
    assert np.array_equal(img.data[5:13, 3:11], src.data)
    doc.root.children.append(Node(id="bad", kind="image", rect=(0, 0, 4, 4), source="missing", z=2))
    from adworkbench.pagegen.markup import MarkupError

    with pytest.raises(MarkupError):
        render(doc)


def test_iframe_screenshot_contains_children():
    doc = simple_doc()
    frame = Node(id="fr", kind="iframe", rect=(8, 8, 16, 16), fill=(0.5, 0.5, 0.5), z=1)
    doc.sources["logo"] = Image(np.zeros((4, 4, 3)))
    frame.children.append(Node(id="logo", kind="image", rect=(10, 10, 4, 4), source="logo", z=1))
    doc.root.children.append(frame)
    shots = segment_elements(doc, "iframe")
    assert len(shots) == 1
    shot = shots[0][1]
    assert (shot.height, shot.width) == (16, 16)
    assert np.allclose(shot.data[2:6, 2:6], 0.0)  # child at iframe-local (2,2)
    assert np.allclose(shot.data[0, 0], 0.5)


def test_segment_elements_returns_sources():
    doc = simple_doc()
    rng = np.random.default_rng(1)
    doc.sources["a"] = Image(rng.random((6, 6, 3)))
    doc.root.children.append(Node(id="a", kind="image", rect=(0, 0, 6, 6), source="a", z=1))
    elems = segment_elements(doc, "element")
    assert len(elems) == 1 and elems[0][0] == "a"
    assert np.array_equal(elems[0][1].data, doc.sources["a"].data)


def test_over_segmentation_limit():
    doc = simple_doc()
    doc.sources["x"] = Image(np.full((2, 2, 3), 0.5))
    for i in range(ELEMENT_LIMIT + 1):
        doc.root.children.append(Node(id=f"n{i}", kind="image", rect=(1, 1, 2, 2), source="x", z=1))
    with pytest.raises(OverSegmentationError):
        segment_elements(doc, "element")


def test_fragment_preserves_render_and_stitches():
    doc = simple_doc()
    rng = np.random.default_rng(2)
    src = Image(rng.random((8, 12, 3)))
    doc.sources["logo"] = src
    doc.root.children.append(Node(id="logo", kind="image", rect=(4, 6, 12, 8), source="logo", z=1))
    before, _ = render(doc)
    fragment(doc, "logo", rows=2, cols=2)
    after, _ = render(doc)
    assert np.array_equal(before.data, after.data)
    tiles = segment_elements(doc, "element")
    assert len(tiles) == 4
    # stitch by rect adjacency and compare to the original source
    stitched = np.zeros((8, 12, 3))
    for node_id, img in tiles:
        node = doc.node(node_id)
        x, y, w, h = node.rect
        stitched[y - 6 : y - 6 + h, x - 4 : x - 4 + w] = img.data
    assert np.array_equal(stitched, src.data)


def test_sprite_merge_preserves_render_and_exposes_sheet():
    doc = simple_doc()
    rng = np.random.default_rng(3)
    a = Image(rng.random((6, 9, 3)))
    b = Image(rng.random((5, 7, 3)))
    doc.sources["a"] = a
    doc.sources["b"] = b
    doc.root.children.append(Node(id="a", kind="image", rect=(2, 2, 9, 6), source="a", z=1))
    doc.root.children.append(Node(id="b", kind="image", rect=(14, 3, 7, 5), source="b", z=1))
    before, _ = render(doc)
    sprite_merge(doc, ["a", "b"])
    after, _ = render(doc)
    assert np.array_equal(before.data, after.data)
    elems = segment_elements(doc, "element")
    assert len(elems) == 2
    sheet = elems[0][1]
    assert sheet.width == 16 and sheet.height == 6  # packed side by side
    assert np.array_equal(elems[0][1].data, elems[1][1].data)


def test_fragment_requires_size_match():
    doc = simple_doc()
    doc.sources["s"] = Image(np.full((4, 4, 3), 0.5))
    doc.root.children.append(Node(id="s", kind="image", rect=(0, 0, 8, 8), source="s", z=1))
    from adworkbench.pagegen.markup import MarkupError

    with pytest.raises(MarkupError):
        fragment(doc, "s", 2, 2)
