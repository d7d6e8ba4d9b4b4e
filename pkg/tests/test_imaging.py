import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from artforensics import imaging
from artforensics.errors import DecodeError


def _encode(arr, fmt, **kw):
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format=fmt, **kw)
    return buf.getvalue()


def test_decode_png_roundtrip():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (7, 9, 3), dtype=np.uint8)
    out = imaging.decode(_encode(img, "PNG"))
    assert out.dtype == np.uint8 and np.array_equal(out, img)


def test_decode_jpeg_shape():
    img = np.full((10, 12, 3), 128, np.uint8)
    assert imaging.decode(_encode(img, "JPEG")).shape == (10, 12, 3)


def test_alpha_composited_over_white():
    rgba = np.zeros((2, 2, 4), np.uint8)
    rgba[0, 0] = (255, 0, 0, 255)
    out = imaging.decode(_encode(rgba, "PNG"))
    assert tuple(out[0, 0]) == (255, 0, 0)
    assert tuple(out[1, 1]) == (255, 255, 255)


def test_grayscale_png_expands_to_rgb():
    out = imaging.decode(_encode(np.full((3, 3), 77, np.uint8), "PNG"))
    assert out.shape == (3, 3, 3) and np.all(out == 77)


@pytest.mark.parametrize("data", [b"", b"not an image", b"\x89PNG\r\n\x1a\ntruncated"])
def test_decode_garbage_raises(data):
    with pytest.raises(DecodeError):
        imaging.decode(data, "x.png")


def test_decode_rejects_other_formats():
    with pytest.raises(DecodeError):
        imaging.decode(_encode(np.zeros((4, 4, 3), np.uint8), "BMP"))


def test_resize_identity_and_constant():
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)
    assert np.array_equal(imaging.resize_bilinear(img, 16), img)
    flat = np.full((5, 11, 3), 42, np.uint8)
    out = imaging.resize_bilinear(flat, 8)
    assert out.shape == (8, 8, 3) and np.all(out == 42)


def test_resize_upsample_interpolates_linearly():
    g = np.array([[0.0, 100.0]])
    out = imaging.resize_bilinear(g, 4)
    assert np.allclose(out[0], [0.0, 25.0, 75.0, 100.0])


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3))),
       st.integers(1, 20))
def test_resize_stays_within_input_range(img, side):
    out = imaging.resize_bilinear(img, side)
    assert out.shape == (side, side, 3)
    assert out.min() >= img.min() and out.max() <= img.max()


def test_gray_weights():
    px = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255]]], np.uint8)
    assert np.allclose(imaging.to_gray(px)[0], [0.299 * 255, 0.587 * 255, 0.114 * 255])


def test_hsv_known_colours():
    px = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [128, 128, 128], [255, 0, 255]]],
                  np.uint8)
    hsv = imaging.to_hsv(px)[0]
    assert np.allclose(hsv[:, 0], [0, 1 / 3, 2 / 3, 0, 5 / 6])
    assert np.allclose(hsv[:, 1], [1, 1, 1, 0, 1])
    assert np.allclose(hsv[3, 2], 128 / 255)


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, (4, 4, 3)))
def test_hsv_in_unit_range(img):
    hsv = imaging.to_hsv(img)
    assert np.all(hsv >= 0) and np.all(hsv[..., 0] < 1) and np.all(hsv[..., 1:] <= 1)


def test_median3_removes_impulse():
    g = np.zeros((5, 5))
    g[2, 2] = 255
    assert np.all(imaging.median3(g) == 0)


def test_gaussian_kernel_normalised_symmetric():
    k = imaging.gaussian_kernel(5, 1.4)
    assert k.shape == (5, 5) and k.sum() == pytest.approx(1.0)
    assert np.allclose(k, k.T) and np.allclose(k, k[::-1])


def test_canny_vertical_step_is_one_pixel_line():
    g = np.zeros((20, 20))
    g[:, 10:] = 255
    edges = imaging.canny(g)
    cols = np.flatnonzero(edges.any(axis=0))
    assert edges.sum() == 20 and len(cols) == 1 and cols[0] in (9, 10)


def test_canny_flat_has_no_edges():
    assert not imaging.canny(np.full((16, 16), 90.0)).any()


def test_hysteresis_keeps_weak_pixels_connected_to_strong():
    nms = np.zeros((5, 7))
    nms[2, 1:6] = [200, 80, 80, 80, 0]
    nms[0, 6] = 80  # weak, isolated
    out = imaging.hysteresis(nms, 50, 150)
    assert out[2, 1:5].all() and not out[0, 6]


def test_median3_idempotent_on_constant():
    g = np.full((7, 9), 33.0)
    assert np.array_equal(imaging.median3(g), g)
    assert np.array_equal(imaging.median3(imaging.median3(g)), g)


def test_canny_count_translation_invariant_on_interior():
    rng = np.random.default_rng(9)
    canvas = np.zeros((60, 60))
    blob = np.zeros((20, 20))
    blob[5:15, 4:16] = rng.uniform(120, 255)
    canvas[10:30, 10:30] = blob
    moved = np.roll(canvas, (13, 17), axis=(0, 1))
    assert imaging.canny(canvas).sum() == imaging.canny(moved).sum() > 0
