"""Realistic compositing of planned tattoos onto a face image.

The chain per tattoo layer: per-tattoo black-ink tinting, depth-driven
displacement, cut-out of ink outside the face hull or inside exclusion
zones, Gaussian softening, then a multiply blend with reduced opacity.
All intermediate math is float; the face is quantized back to 8-bit
exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from .errors import InvalidParameterError
from .geometry import ExtendedLandmarks, RegionSet, polygon_mask
from .imaging import Image, blur_float, quantize
from .placement import PlacementPlan, resize_nn
from .rng import derive_rng

DEPTH_NEUTRAL = 127.5  # map value producing zero displacement


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth, float values in [0, 255], 127.5 = no displacement."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2:
            raise InvalidParameterError("depth map must be 2-D")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise InvalidParameterError("depth values must lie in [0, 255]")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def load(cls, path: str | Path) -> "DepthMap":
        img = Image.load(path)
        if img.channels != 1:
            raise InvalidParameterError(f"{path}: depth maps must be 8-bit grayscale")
        return cls(img.data[:, :, 0].astype(np.float64))

    def save(self, path: str | Path) -> None:
        Image(quantize(self.values)).save(path)


@dataclass(frozen=True)
class BlendConfig:
    """All blending knobs; defaults tuned for realistic-looking output."""

    displacement_coefficient: float = 12.0
    depth_contrast: float = 2.0
    depth_brightness: float = -40.0
    blur_sigma: float = 0.6
    opacity: float = 0.9
    black_threshold: float = 40.0
    tint_deltas: tuple[float, float] = (10.0, 45.0)
    tint_palette: dict[str, tuple[float, float, float]] = field(
        default_factory=lambda: {
            "grey": (1.0, 1.0, 1.0),
            "green": (1 / 3, 1.0, 1 / 3),
            "blue": (1 / 3, 1 / 3, 1.0),
        }
    )

    def __post_init__(self) -> None:
        if self.displacement_coefficient < 0:
            raise InvalidParameterError("displacement coefficient must be >= 0")
        if not 0.0 < self.opacity <= 1.0:
            raise InvalidParameterError("opacity must be in (0, 1]")
        if self.depth_contrast <= 0:
            raise InvalidParameterError("depth contrast must be > 0")
        if self.blur_sigma < 0:
            raise InvalidParameterError("blur sigma must be >= 0")


def transform_depth(raw: DepthMap, cfg: BlendConfig) -> DepthMap:
    """Raise contrast and lower brightness of a raw depth map.

    Raw estimator output is bright and flat; this recenters it around
    the neutral value so displacement stays moderate.
    """
    values = cfg.depth_contrast * (raw.values - DEPTH_NEUTRAL) + DEPTH_NEUTRAL + cfg.depth_brightness
    return DepthMap(np.clip(values, 0.0, 255.0))


def displacement(depth: DepthMap, c: float, x: int, y: int) -> float:
    """Signed pixel shift at (x, y); applies to both axes."""
    if not (0 <= x < depth.width and 0 <= y < depth.height):
        raise InvalidParameterError(f"({x}, {y}) outside {depth.width}x{depth.height} depth map")
    return c * (float(depth.values[y, x]) - DEPTH_NEUTRAL) / DEPTH_NEUTRAL


def displacement_field(depth: DepthMap, c: float) -> np.ndarray:
    """The full signed shift field D = c * (M - 127.5) / 127.5."""
    return c * (depth.values - DEPTH_NEUTRAL) / DEPTH_NEUTRAL


def _displace_rgba(layer: np.ndarray, depth: DepthMap, c: float) -> np.ndarray:
    """Inverse-mapped displacement with bilinear sampling.

    out(x, y) samples the layer at (x + D, y + D); samples beyond the
    layer bounds read as fully transparent. A neutral map (D == 0)
    reproduces the input bit for bit.
    """
    h, w = layer.shape[:2]
    d = displacement_field(depth, c)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    sx = xx + d
    sy = yy + d
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    out = np.zeros_like(layer)
    for dy in (0, 1):
        for dx in (0, 1):
            cx = x0 + dx
            cy = y0 + dy
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            valid = (cx >= 0) & (cx <= w - 1) & (cy >= 0) & (cy <= h - 1)
            weight = np.where(valid, weight, 0.0)
            ix = np.clip(cx, 0, w - 1).astype(np.int64)
            iy = np.clip(cy, 0, h - 1).astype(np.int64)
            out += weight[:, :, None] * layer[iy, ix, :]
    return out


def displace_layer(layer: Image, depth: DepthMap, c: float) -> Image:
    """Warp an RGBA layer to follow the face contours encoded in the depth map."""
    if layer.channels != 4:
        raise InvalidParameterError("displace_layer expects an RGBA layer")
    if (layer.height, layer.width) != (depth.height, depth.width):
        raise InvalidParameterError("layer and depth map dimensions differ")
    return Image.from_float(_displace_rgba(layer.to_float(), depth, c))


def _cutout_rgba(layer: np.ndarray, rs: RegionSet) -> np.ndarray:
    out = layer.copy()
    keep = rs.face_hull.data & ~rs.exclusion.data
    out[:, :, 3] = np.where(keep, out[:, :, 3], 0.0)
    return out


def apply_cutout(layer: Image, rs: RegionSet) -> Image:
    """Zero the alpha of ink outside the face hull or inside exclusion zones."""
    if layer.channels != 4:
        raise InvalidParameterError("apply_cutout expects an RGBA layer")
    if (layer.height, layer.width) != (rs.height, rs.width):
        raise InvalidParameterError("layer and region set dimensions differ")
    return Image.from_float(_cutout_rgba(layer.to_float(), rs))


def _tint_rgba(layer: np.ndarray, rng: np.random.Generator, cfg: BlendConfig) -> np.ndarray:
    """Shift near-black ink toward grey, green or blue; one draw per call."""
    names = sorted(cfg.tint_palette)
    tint = names[int(rng.integers(len(names)))]
    delta = float(rng.uniform(*cfg.tint_deltas))
    weights = cfg.tint_palette[tint]
    out = layer.copy()
    dark = layer[:, :, :3].max(axis=2) <= cfg.black_threshold
    for ch in range(3):
        out[:, :, ch] = np.where(dark, np.clip(layer[:, :, ch] + delta * weights[ch], 0.0, 255.0), layer[:, :, ch])
    return out


def adjust_black_ink(layer: Image, rng: np.random.Generator, cfg: BlendConfig) -> Image:
    """Recolor near-black pixels of one tattoo; call once per placed tattoo."""
    if layer.channels != 4:
        raise InvalidParameterError("adjust_black_ink expects an RGBA layer")
    return Image.from_float(_tint_rgba(layer.to_float(), rng, cfg))


def tattoo_layer(
    plan: PlacementPlan,
    rs: RegionSet,
    depth: DepthMap,
    cfg: BlendConfig,
    seed: int,
) -> np.ndarray:
    """Float RGBA layer after tinting, displacement and cut-out (pre-blur).

    Each placement is scaled nearest-neighbor into its rect and tinted
    with its own counter-based stream, so results do not depend on
    processing order or thread schedule.
    """
    layer = np.zeros((rs.height, rs.width, 4), dtype=np.float64)
    for ordinal, placement in enumerate(plan.placements):
        scaled = resize_nn(placement.template.rgba, placement.rect.h, placement.rect.w).astype(np.float64)
        tinted = _tint_rgba(scaled, derive_rng("ink", seed, ordinal), cfg)
        sl = placement.rect.slices()
        ink = tinted[:, :, 3] > 0
        region = layer[sl]
        region[ink] = tinted[ink]
        layer[sl] = region
    layer = _displace_rgba(layer, depth, cfg.displacement_coefficient)
    return _cutout_rgba(layer, rs)


def compose(
    face: Image,
    plan: PlacementPlan,
    rs: RegionSet,
    depth: DepthMap,
    cfg: BlendConfig,
    seed: int,
) -> Image:
    """Blend a placement plan onto the face; empty plans return the face unchanged.

    The multiply blend is out = face * (1 - a * opacity * (1 - ink/255))
    per channel with a the layer alpha in [0, 1]: plain multiplication
    where ink is opaque, identity where the layer is transparent. The
    blend only ever darkens.
    """
    if face.channels != 3:
        raise InvalidParameterError("compose expects an RGB face image")
    if (face.height, face.width) != (rs.height, rs.width):
        raise InvalidParameterError("face and region set dimensions differ")
    if not plan.placements:
        return Image(face.data)
    layer = tattoo_layer(plan, rs, depth, cfg, seed)
    if cfg.blur_sigma > 0:
        layer = blur_float(layer, cfg.blur_sigma)
    alpha = layer[:, :, 3:4] / 255.0
    factor = 1.0 - alpha * cfg.opacity * (1.0 - layer[:, :, :3] / 255.0)
    return Image.from_float(face.to_float() * factor)


def landmark_depth_fallback(ext: ExtendedLandmarks, width: int, height: int) -> DepthMap:
    """Smooth synthetic depth substitute when no estimator output is supplied.

    Neutral (127.5) outside the face hull so nothing moves there; inside,
    the value eases down to 60 at the hull boundary, with a nose ridge
    (up to +80) and a brow/forehead dome (+30), smoothed at 2% of the
    face width. Ready to use directly: do not run transform_depth on it.
    """
    pts = ext.points
    hull = polygon_mask(pts[ConvexHull(pts).vertices], width, height)
    face_width = float(pts[:, 0].max() - pts[:, 0].min())

    inside_dist = ndimage.distance_transform_edt(hull)
    falloff = max(1.0, 0.08 * face_width)
    base = 60.0 + (DEPTH_NEUTRAL - 60.0) * np.minimum(inside_dist / falloff, 1.0)

    smooth_sigma = max(0.5, 0.02 * face_width)
    nose = polygon_mask(pts[[27, 31, 32, 33, 34, 35]], width, height).astype(np.float64)
    nose = blur_float(nose, smooth_sigma)
    if nose.max() > 0:
        nose *= 80.0 / nose.max()
    brow_poly = np.vstack([pts[17:27], pts[68:78][::-1]])
    brow = polygon_mask(brow_poly, width, height).astype(np.float64)
    brow = blur_float(brow, smooth_sigma)
    if brow.max() > 0:
        brow *= 30.0 / brow.max()

    values = np.where(hull, base + nose + brow, DEPTH_NEUTRAL)
    values = blur_float(values, smooth_sigma)
    values = np.where(hull, np.clip(values, 0.0, 255.0), DEPTH_NEUTRAL)
    return DepthMap(values)
