import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inkblend.errors import InvalidLandmarksError, InvalidParameterError
from inkblend.geometry import Landmarks68
from inkblend.imaging import (
    Image,
    Mask,
    Rect,
    crop_inner,
    gaussian_blur,
    jpeg_roundtrip,
    quantize,
)
from inkblend.quality import psnr

from oracles import dense_gaussian_blur


def test_image_validates_shape():
    with pytest.raises(InvalidParameterError):
        Image(np.zeros((4, 4, 2), np.uint8))
    with pytest.raises(InvalidParameterError):
        Image(np.zeros((0, 4, 3), np.uint8))
    img = Image(np.zeros((4, 5), np.uint8))
    assert (img.height, img.width, img.channels) == (4, 5, 1)


def test_image_is_immutable():
    img = Image(np.zeros((4, 4, 3), np.uint8))
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 1


def test_quantize_round_half_away_and_idempotent():
    values = np.array([0.49, 0.5, 1.5, 200.4999, 200.5, 254.5, 255.7, -3.0])
    assert list(quantize(values)) == [0, 1, 2, 200, 201, 255, 255, 0]
    ints = np.arange(256, dtype=np.float64)
    assert np.array_equal(quantize(ints), ints.astype(np.uint8))


@given(st.integers(0, 255))
def test_float_roundtrip_exact_on_integers(value):
    img = Image(np.full((3, 3, 3), value, np.uint8))
    assert np.array_equal(Image.from_float(img.to_float()).data, img.data)


def test_blur_constant_image_unchanged():
    img = Image(np.full((16, 16, 3), 77, np.uint8))
    out = gaussian_blur(img, 1.5)
    assert np.array_equal(out.data, img.data)


def test_blur_rejects_nonpositive_sigma():
    img = Image(np.zeros((8, 8, 3), np.uint8))
    with pytest.raises(InvalidParameterError):
        gaussian_blur(img, 0.0)
    with pytest.raises(InvalidParameterError):
        gaussian_blur(img, -1.0)


def test_blur_matches_dense_convolution_oracle():
    arr = np.zeros((33, 33, 1), np.uint8)
    arr[16, 16, 0] = 255
    img = Image(arr)
    out = gaussian_blur(img, 1.0)
    expected = dense_gaussian_blur(img.to_float(), 1.0)
    assert np.max(np.abs(out.to_float() - quantize(expected).astype(np.float64))) <= 0.5
    # the unquantized fields agree far more tightly
    from inkblend.imaging import blur_float

    assert np.max(np.abs(blur_float(img.to_float(), 1.0) - expected)) <= 0.5 / 255.0


def test_blur_preserves_dims_and_mean():
    rng = np.random.default_rng(7)
    img = Image(rng.integers(0, 256, (24, 31, 3)).astype(np.uint8))
    out = gaussian_blur(img, 2.0)
    assert (out.height, out.width, out.channels) == (24, 31, 3)
    # clamped edges conserve energy on constant images exactly; on random
    # content the drift stays small
    from inkblend.imaging import blur_float

    blurred = blur_float(img.to_float(), 2.0)
    assert abs(blurred.mean() - img.to_float().mean()) < 2.0


def test_jpeg_roundtrip_quality_and_dims(face):
    out = jpeg_roundtrip(face, 95)
    assert (out.height, out.width, out.channels) == (face.height, face.width, face.channels)
    assert psnr(face, out) > 30.0


def test_jpeg_quality_ordering(face):
    q100 = jpeg_roundtrip(face, 100)
    q30 = jpeg_roundtrip(face, 30)
    assert psnr(face, q100) > psnr(face, q30)


def test_jpeg_rejects_bad_quality(face):
    for quality in (0, 101, -5):
        with pytest.raises(InvalidParameterError):
            jpeg_roundtrip(face, quality)
    gray = Image(face.data[:, :, :1])
    with pytest.raises(InvalidParameterError):
        jpeg_roundtrip(gray, 80)


def _lm_with_inner_span(width, height, x0, x1, y0, y1):
    pts = np.zeros((68, 2))
    pts[:, 0] = np.linspace(10, width - 10, 68)
    pts[:, 1] = height / 2
    pts[16, 0] = width - 10
    # points 17-67 span exactly the requested box
    pts[17:, 0] = np.linspace(x0, x1, 51)
    pts[17:, 1] = np.linspace(y0, y1, 51)
    return Landmarks68(points=pts, width=width, height=height)


def test_crop_inner_bounding_box():
    lm = _lm_with_inner_span(400, 420, 100, 300, 120, 380)
    img = Image(np.zeros((420, 400, 3), np.uint8))
    out = crop_inner(img, lm)
    assert (out.width, out.height) == (201, 261)


def test_crop_inner_clamps_to_image():
    lm = _lm_with_inner_span(200, 200, -50, 150, 100, 250)
    img = Image(np.zeros((200, 200, 3), np.uint8))
    out = crop_inner(img, lm)
    assert (out.width, out.height) == (151, 100)


def test_crop_inner_rejects_degenerate():
    pts = np.zeros((68, 2))
    pts[:, 0] = np.linspace(0, 100, 68)
    pts[17:] = (50.0, 50.0)
    lm = Landmarks68(points=pts, width=200, height=200)
    with pytest.raises(InvalidLandmarksError):
        crop_inner(Image(np.zeros((200, 200, 3), np.uint8)), lm)


def test_rect_validation():
    with pytest.raises(InvalidParameterError):
        Rect(0, 0, 0, 5)
    r = Rect(2, 3, 4, 5)
    assert (r.x2, r.y2, r.area) == (6, 8, 20)


def test_mask_area_and_ops():
    a = Mask(np.eye(4, dtype=bool))
    b = Mask(~np.eye(4, dtype=bool))
    assert a.area == 4
    assert a.union(b).area == 16
    assert a.intersect(b).area == 0
    assert a.minus(a).area == 0
