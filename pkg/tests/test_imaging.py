import numpy as np
import pytest

from adworkbench.imaging import (
    Image,
    ImagingError,
    composite_over,
    constant,
    load_png,
    quantize,
    resize,
    resize_array_bilinear,
    resize_array_bilinear_adjoint,
    save_png,
    to_grayscale,
)


def rand_image(rng, h, w, c):
    return Image(rng.random((h, w, c)))


def test_image_invariants():
    with pytest.raises(ImagingError):
        Image(np.full((4, 4, 3), 1.5))
    with pytest.raises(ImagingError):
        Image(np.full((4, 4, 2), 0.5))
    with pytest.raises(ImagingError):
        Image(np.full((4, 4, 3), np.nan))
    img = constant(2, 3, (0.2, 0.4, 0.6))
    assert (img.height, img.width, img.channels) == (2, 3, 3)
    assert not img.data.flags.writeable


def test_resize_constant_invariance():
    img = constant(5, 7, 0.5)
    for method in ("area_average", "bilinear", "nearest"):
        for size in ((3, 2), (10, 11), (1, 1)):
            out = resize(img, size[0], size[1], method)
            assert np.allclose(out.data, 0.5)
            assert (out.width, out.height) == size


def test_resize_checker_block_mean():
    img = Image(np.array([[0.0, 1.0], [1.0, 0.0]])[:, :, None])
    out = resize(img, 1, 1, "area_average")
    assert out.data[0, 0, 0] == 0.5


def test_resize_area_matches_block_mean_oracle():
    rng = np.random.default_rng(7)
    img = rand_image(rng, 16, 16, 3)
    out = resize(img, 8, 8, "area_average")
    # independent per-output-pixel block-mean oracle
    for i in range(8):
        for j in range(8):
            block = img.data[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            for c in range(3):
                assert out.data[i, j, c] == block[:, :, c].mean()


def test_resize_idempotent_at_same_size():
    rng = np.random.default_rng(3)
    img = rand_image(rng, 9, 13, 3)
    for method in ("area_average", "nearest"):
        out = resize(img, 13, 9, method)
        assert np.array_equal(out.data, img.data)


def test_resize_rejects_zero_dim():
    img = constant(4, 4, 0.5)
    with pytest.raises(ImagingError):
        resize(img, 0, 4)


def test_grayscale_known_values():
    assert to_grayscale(constant(1, 1, (1.0, 1.0, 1.0))).data[0, 0, 0] == 1.0
    assert to_grayscale(constant(1, 1, (1.0, 0.0, 0.0))).data[0, 0, 0] == pytest.approx(0.299)
    # fully transparent white over the implicit white background
    assert to_grayscale(constant(1, 1, (1.0, 1.0, 1.0, 0.0))).data[0, 0, 0] == 1.0
    # transparent black also shows the white background
    assert to_grayscale(constant(1, 1, (0.0, 0.0, 0.0, 0.0))).data[0, 0, 0] == 1.0


def test_grayscale_gray_pixel_exact():
    rng = np.random.default_rng(11)
    for _ in range(20):
        v = float(rng.random())
        assert to_grayscale(constant(2, 2, (v, v, v))).data[0, 0, 0] == pytest.approx(v, abs=1e-15)


def test_composite_alpha_zero_is_identity():
    rng = np.random.default_rng(5)
    bg = rand_image(rng, 8, 8, 3)
    fg = rand_image(rng, 8, 8, 3)
    out = composite_over(bg, fg, opacity=0.0)
    assert np.array_equal(out.data, bg.data)


def test_composite_opaque_equal_is_identity():
    rng = np.random.default_rng(6)
    bg = rand_image(rng, 8, 8, 3)
    out = composite_over(bg, bg, opacity=1.0)
    assert np.allclose(out.data, bg.data, atol=1e-15)


def test_composite_near_transparent_budget():
    bg = constant(16, 16, (0.0, 0.0, 0.0))
    fg = constant(16, 16, (1.0, 1.0, 1.0))
    out = composite_over(bg, fg, opacity=0.01)
    assert np.allclose(out.data, 0.01)


def test_composite_pointwise_bound_property():
    rng = np.random.default_rng(9)
    for _ in range(10):
        alpha = float(rng.random())
        bg = rand_image(rng, 6, 6, 3)
        fg = rand_image(rng, 6, 6, 4)
        out = composite_over(bg, fg, opacity=alpha)
        assert np.max(np.abs(out.data - bg.data)) <= alpha + 1e-12


def test_composite_tiled_covers():
    bg = constant(10, 10, (0.0, 0.0, 0.0))
    fg = constant(3, 3, (1.0, 1.0, 1.0))
    out = composite_over(bg, fg, opacity=0.5, tiled=True)
    assert np.allclose(out.data, 0.5)


def test_composite_origin_out_of_bounds():
    bg = constant(4, 4, (0.0, 0.0, 0.0))
    fg = constant(2, 2, (1.0, 1.0, 1.0))
    with pytest.raises(ImagingError):
        composite_over(bg, fg, origin=(4, 0))


def test_composite_transparent_pixels_contribute_nothing():
    rng = np.random.default_rng(13)
    bg = rand_image(rng, 4, 4, 3)
    fg_arr = rng.random((4, 4, 4))
    fg_arr[:, :, 3] = 0.0
    out = composite_over(bg, Image(fg_arr), opacity=1.0)
    assert np.array_equal(out.data, bg.data)


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    for c in (1, 3, 4):
        img = Image(quantize(rng.random((7, 5, c))))
        p = tmp_path / f"img{c}.png"
        save_png(img, p)
        back = load_png(p)
        assert np.array_equal(back.data, img.data)


def test_bilinear_adjoint_is_transpose():
    rng = np.random.default_rng(21)
    x = rng.random((12, 10, 3))
    cot = rng.random((5, 7, 3))
    y = resize_array_bilinear(x, 5, 7)
    g = resize_array_bilinear_adjoint(cot, 12, 10)
    # <Ax, cot> == <x, A^T cot> for the linear map A
    assert np.vdot(y, cot) == pytest.approx(np.vdot(x, g), rel=1e-12)
