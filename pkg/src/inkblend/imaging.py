"""Pixel containers and shared raster primitives.

Images are 8-bit, row-major, origin top-left, with 1 (gray), 3 (RGB) or
4 (RGBA) channels. Compositing code works in a float representation in
the 0.0-255.0 range and quantizes back to 8-bit exactly once per output
image; :func:`quantize` is that single rounding step.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import PIL
import PIL.features
from PIL import Image as PILImage
from scipy import ndimage

from .errors import InvalidLandmarksError, InvalidParameterError

if TYPE_CHECKING:
    from .geometry import Landmarks68

_VALID_CHANNELS = (1, 3, 4)


def quantize(values: np.ndarray) -> np.ndarray:
    """Convert float pixel values (0-255 range) to uint8.

    Rounding is half-away-from-zero, which on the non-negative pixel
    domain is floor(x + 0.5). Idempotent on already-integer values.
    """
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)


@dataclass(frozen=True)
class Image:
    """Immutable 8-bit raster, shape (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in _VALID_CHANNELS:
            raise InvalidParameterError(
                f"image must be HxWxC with C in {_VALID_CHANNELS}, got shape {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidParameterError("image must be at least 1x1")
        arr = np.array(arr, dtype=np.uint8, copy=True, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def to_float(self) -> np.ndarray:
        """Float64 working copy in the 0.0-255.0 range."""
        return self.data.astype(np.float64)

    @classmethod
    def from_float(cls, values: np.ndarray) -> "Image":
        return cls(quantize(values))

    @classmethod
    def load(cls, path: str | Path) -> "Image":
        with PILImage.open(path) as pil:
            if pil.mode not in ("L", "RGB", "RGBA"):
                pil = pil.convert("RGBA" if "A" in pil.getbands() else "RGB")
            arr = np.asarray(pil)
        return cls(arr)

    def save(self, path: str | Path) -> None:
        """Write PNG or JPEG according to the file suffix."""
        path = Path(path)
        suffix = path.suffix.lower()
        if suffix == ".png":
            self.to_pil().save(path, format="PNG")
        elif suffix in (".jpg", ".jpeg"):
            path.write_bytes(encode_jpeg(self, quality=95))
        else:
            raise InvalidParameterError(f"unsupported image suffix: {suffix!r}")

    def to_pil(self) -> PILImage.Image:
        modes = {1: "L", 3: "RGB", 4: "RGBA"}
        arr = self.data[:, :, 0] if self.channels == 1 else self.data
        return PILImage.fromarray(arr, modes[self.channels])


@dataclass(frozen=True)
class Mask:
    """Boolean pixel mask matching some image's dimensions."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=bool, copy=True, order="C")
        if arr.ndim != 2:
            raise InvalidParameterError("mask must be 2-D")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.data))

    def union(self, other: "Mask") -> "Mask":
        return Mask(self.data | other.data)

    def intersect(self, other: "Mask") -> "Mask":
        return Mask(self.data & other.data)

    def minus(self, other: "Mask") -> "Mask":
        return Mask(self.data & ~other.data)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle, top-left anchored, w/h >= 1."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise InvalidParameterError(f"rect must be at least 1x1, got {self.w}x{self.h}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y2), slice(self.x, self.x2)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian with radius ceil(3*sigma)."""
    radius = int(np.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def blur_float(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of a float array, clamp-to-edge boundary.

    Accepts (H, W) or (H, W, C); blurs each channel independently.
    """
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
    kernel = gaussian_kernel(sigma)
    out = ndimage.correlate1d(values, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Gaussian-blur every channel of an image; dimensions are preserved."""
    return Image.from_float(blur_float(img.to_float(), sigma))


def jpeg_encoder_id() -> str:
    """Identity string of the JPEG codec, recorded in dataset manifests."""
    return f"Pillow {PIL.__version__} libjpeg {PIL.features.version('jpg')}"


def encode_jpeg(img: Image, quality: int) -> bytes:
    """Encode to baseline JPEG.

    Chroma subsampling is 4:2:0 below quality 90 and 4:4:4 from 90 up,
    so byte output is deterministic for a given codec version.
    """
    if not isinstance(quality, int) or not 1 <= quality <= 100:
        raise InvalidParameterError(f"jpeg quality must be an integer in 1..100, got {quality}")
    if img.channels != 3:
        raise InvalidParameterError("jpeg encoding requires a 3-channel image")
    buf = io.BytesIO()
    subsampling = 2 if quality < 90 else 0
    img.to_pil().save(buf, format="JPEG", quality=quality, subsampling=subsampling, progressive=False)
    return buf.getvalue()


def jpeg_roundtrip(img: Image, quality: int) -> Image:
    """Encode to baseline JPEG at the given quality and decode back."""
    data = encode_jpeg(img, quality)
    with PILImage.open(io.BytesIO(data)) as pil:
        return Image(np.asarray(pil.convert("RGB")))


def crop_inner(img: Image, lm: "Landmarks68") -> Image:
    """Crop the eyebrows-to-chin box spanned by landmark points 17-67.

    The box is clamped to the image bounds; a box that collapses to zero
    area (all points identical, or entirely outside) is rejected.
    """
    pts = lm.points[17:]
    if pts[:, 0].max() - pts[:, 0].min() <= 0 or pts[:, 1].max() - pts[:, 1].min() <= 0:
        raise InvalidLandmarksError("inner-face box is degenerate")
    # Coordinates are pixel centers; the box covers both extreme pixels.
    x0 = max(0, int(np.floor(pts[:, 0].min())))
    y0 = max(0, int(np.floor(pts[:, 1].min())))
    x1 = min(img.width, int(np.ceil(pts[:, 0].max())) + 1)
    y1 = min(img.height, int(np.ceil(pts[:, 1].max())) + 1)
    if x1 - x0 < 1 or y1 - y0 < 1:
        raise InvalidLandmarksError("inner-face box lies outside the image")
    return Image(img.data[y0:y1, x0:x1])
