"""Landmark-driven face geometry.

Turns a 68-point face annotation into everything placement and blending
need: synthesized forehead points, a fixed triangle connectivity shared
by all faces, the six placeable macro-regions, the exclusion mask (eyes,
mouth, nose ridge and nostrils) and the rasterized face hull.

Landmark ordering follows the common 68-point scheme: 0-16 jaw left to
right, 17-26 brows, 27-35 nose, 36-47 eyes, 48-67 mouth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw
from scipy import ndimage
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .errors import InvalidInputError, InvalidLandmarksError, InvalidParameterError
from .imaging import Mask

REGION_IDS = (
    "forehead",
    "left-upper-cheek",
    "right-upper-cheek",
    "left-lower-cheek",
    "right-lower-cheek",
    "chin",
)

# Index anchors into the 68-point scheme.
_CHIN = 8
_BRIDGE_TOP = 27
_NOSE_TIP = 33
_BROWS = slice(17, 27)
_LEFT_EYE = slice(36, 42)
_RIGHT_EYE = slice(42, 48)
_MOUTH_OUTER = slice(48, 60)
_LEFT_EYE_OUTER = 36
_RIGHT_EYE_OUTER = 45
_MOUTH_LEFT = 48
_MOUTH_RIGHT = 54


@dataclass(frozen=True)
class Landmarks68:
    """The 68-point annotation plus the image size it refers to."""

    points: np.ndarray
    width: int
    height: int

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.shape != (68, 2):
            raise InvalidLandmarksError(f"expected 68 (x, y) points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidLandmarksError("landmark coordinates must be finite")
        if not pts[0, 0] < pts[16, 0]:
            raise InvalidLandmarksError("jaw points are not ordered left to right")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class ExtendedLandmarks:
    """68 base points plus 10 synthesized forehead points (indices 68-77)."""

    points: np.ndarray
    nose_length: float
    width: int
    height: int

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.shape != (78, 2):
            raise InvalidLandmarksError(f"expected 78 points, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class TriangleSet:
    """Fixed triangle connectivity: index triples into a 78-point list."""

    triangles: np.ndarray
    point_count: int

    def __post_init__(self) -> None:
        tri = np.array(self.triangles, dtype=np.int32, copy=True, order="C")
        if tri.ndim != 2 or tri.shape[1] != 3:
            raise InvalidParameterError("triangles must be an (n, 3) index array")
        tri.setflags(write=False)
        object.__setattr__(self, "triangles", tri)

    def __len__(self) -> int:
        return len(self.triangles)


@dataclass(frozen=True)
class RegionSet:
    """Placeable macro-regions and the masks that constrain them.

    Macro-region masks already have the exclusion zones removed, so
    ``total_placeable_area`` is simply the sum of their areas.
    """

    regions: dict[str, Mask]
    face_hull: Mask
    exclusion: Mask
    triangle_labels: np.ndarray
    total_placeable_area: int

    @property
    def width(self) -> int:
        return self.face_hull.width

    @property
    def height(self) -> int:
        return self.face_hull.height

    def placeable(self) -> Mask:
        out = np.zeros((self.height, self.width), dtype=bool)
        for mask in self.regions.values():
            out |= mask.data
        return Mask(out)

    def triangle_mask(self, index: int) -> Mask:
        return Mask(self.triangle_labels == index)


def face_axes(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit 'up' vector (chin to nose-bridge top) and its right-hand normal."""
    up = points[_BRIDGE_TOP] - points[_CHIN]
    norm = float(np.hypot(*up))
    if norm == 0:
        raise InvalidLandmarksError("chin and nose-bridge top coincide")
    u = up / norm
    v = np.array([-u[1], u[0]])
    return u, v


def extend_forehead(lm: Landmarks68) -> ExtendedLandmarks:
    """Synthesize 10 forehead points by shifting the brows up one nose length.

    The shift direction is the face's vertical axis (chin to nose-bridge
    top), so the construction is equivariant under in-plane rotation.
    """
    pts = lm.points
    nose_length = float(np.linalg.norm(pts[_BRIDGE_TOP] - pts[_NOSE_TIP]))
    if nose_length == 0:
        raise InvalidLandmarksError("nose length is zero")
    u, _ = face_axes(pts)
    forehead = pts[_BROWS] + nose_length * u
    return ExtendedLandmarks(
        points=np.vstack([pts, forehead]),
        nose_length=nose_length,
        width=lm.width,
        height=lm.height,
    )


def triangulate_points(points: np.ndarray) -> np.ndarray:
    """Delaunay index triples for a point set, rows sorted canonically.

    Degenerate inputs (duplicate or all-collinear points) are nudged by
    a deterministic sub-pixel spiral of 1e-3 px before retrying.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 3:
        raise InvalidInputError("need at least 3 points to triangulate")
    tri = _try_delaunay(pts)
    if tri is None:
        golden = np.pi * (3.0 - np.sqrt(5.0))
        angles = golden * np.arange(len(pts))
        jitter = 1e-3 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        tri = _try_delaunay(pts + jitter)
        if tri is None:
            raise InvalidInputError("points remain degenerate after perturbation")
    return tri


def fixed_triangulation(canonical: ExtendedLandmarks) -> TriangleSet:
    """Triangulate the canonical configuration once.

    The returned index triples are re-applied verbatim to every face's
    extended landmarks.
    """
    tri = triangulate_points(canonical.points)
    return TriangleSet(triangles=tri, point_count=len(canonical.points))


def _try_delaunay(pts: np.ndarray) -> np.ndarray | None:
    try:
        simplices = Delaunay(pts).simplices
    except QhullError:
        return None
    if len(np.unique(simplices)) != len(pts):
        return None  # duplicate points were merged away
    tri = np.sort(np.asarray(simplices, dtype=np.int32), axis=1)
    return tri[np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0]))]


def polygon_mask(points: np.ndarray, width: int, height: int) -> np.ndarray:
    img = PILImage.new("L", (width, height), 0)
    ImageDraw.Draw(img).polygon([(float(x), float(y)) for x, y in points], fill=1)
    return np.asarray(img, dtype=bool)


def _disk(radius: int) -> np.ndarray:
    r = max(1, radius)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return xx**2 + yy**2 <= r**2


def _signed_side(grid: tuple[np.ndarray, np.ndarray], origin: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Signed distance of every pixel center from the line through origin."""
    yy, xx = grid
    return (xx - origin[0]) * normal[0] + (yy - origin[1]) * normal[1]


def build_regions(
    ext: ExtendedLandmarks,
    width: int,
    height: int,
    triangles: TriangleSet | None = None,
) -> RegionSet:
    """Rasterize hull, exclusions, triangle labels and the six macro-regions.

    The partition below the brows uses three landmark-anchored vertical
    cuts (through the outer eye corners and the nose axis, all parallel
    to the face's vertical axis) and one horizontal cut through the
    mouth corners. Eye polygons are dilated by 15% of the inter-eye
    distance before exclusion.
    """
    pts = ext.points
    if np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > width - 1) or np.any(pts[:, 1] < 0) or np.any(pts[:, 1] > height - 1):
        raise InvalidLandmarksError("landmarks (including forehead extension) out of image bounds")

    hull_vertices = pts[ConvexHull(pts).vertices]
    hull = polygon_mask(hull_vertices, width, height)

    # Exclusion zones: dilated eyes, outer mouth, nose ridge + nostrils.
    left_center = pts[_LEFT_EYE].mean(axis=0)
    right_center = pts[_RIGHT_EYE].mean(axis=0)
    inter_eye = float(np.linalg.norm(right_center - left_center))
    eye_dilation = _disk(int(round(0.15 * inter_eye)))
    eyes = polygon_mask(pts[_LEFT_EYE], width, height) | polygon_mask(pts[_RIGHT_EYE], width, height)
    eyes = ndimage.binary_dilation(eyes, structure=eye_dilation)
    mouth = polygon_mask(pts[_MOUTH_OUTER], width, height)
    nose = polygon_mask(pts[[27, 31, 32, 33, 34, 35]], width, height)
    exclusion = eyes | mouth | nose

    if triangles is None:
        triangles = load_canonical_triangles()
    labels_img = PILImage.new("I", (width, height), 0)
    draw = ImageDraw.Draw(labels_img)
    for i, (a, b, c) in enumerate(triangles.triangles):
        draw.polygon([tuple(pts[a]), tuple(pts[b]), tuple(pts[c])], fill=i + 1)
    triangle_labels = np.asarray(labels_img, dtype=np.int32) - 1

    u, v = face_axes(pts)
    grid = np.mgrid[0:height, 0:width].astype(np.float64)
    grid = (grid[0], grid[1])
    above_mouth = _signed_side(grid, pts[_MOUTH_LEFT], _mouth_up_normal(pts, u)) > 0
    left_of_left_eye = _signed_side(grid, pts[_LEFT_EYE_OUTER], v) < 0
    right_of_right_eye = _signed_side(grid, pts[_RIGHT_EYE_OUTER], v) > 0
    left_of_nose = _signed_side(grid, pts[_NOSE_TIP], v) < 0

    forehead_poly = np.vstack([pts[_BROWS], pts[68:78][::-1]])
    forehead = polygon_mask(forehead_poly, width, height) & hull
    chin_poly = polygon_mask(pts[5:12], width, height)

    below = hull & ~forehead & ~above_mouth
    upper = hull & ~forehead & above_mouth
    chin = below & chin_poly
    macro = {
        "forehead": forehead,
        "left-upper-cheek": upper & left_of_left_eye,
        "right-upper-cheek": upper & right_of_right_eye,
        "left-lower-cheek": below & ~chin & left_of_nose,
        "right-lower-cheek": below & ~chin & ~left_of_nose,
        "chin": chin,
    }
    regions = {name: Mask(mask & ~exclusion) for name, mask in macro.items()}
    total = sum(m.area for m in regions.values())
    return RegionSet(
        regions=regions,
        face_hull=Mask(hull),
        exclusion=Mask(exclusion),
        triangle_labels=triangle_labels,
        total_placeable_area=total,
    )


def _mouth_up_normal(pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Normal of the mouth-corner line pointing toward the nose bridge."""
    along = pts[_MOUTH_RIGHT] - pts[_MOUTH_LEFT]
    norm = float(np.hypot(*along))
    if norm == 0:
        return u  # degenerate mouth, fall back to the face axis
    n = np.array([-along[1], along[0]]) / norm
    if np.dot(pts[_BRIDGE_TOP] - pts[_MOUTH_LEFT], n) < 0:
        n = -n
    return n


def combine_regions(rs: RegionSet, ids: list[str]) -> Mask:
    """Union of the named macro-regions, for placing across region borders."""
    if not ids:
        raise InvalidParameterError("need at least one region id")
    out = np.zeros((rs.height, rs.width), dtype=bool)
    for region_id in ids:
        if region_id not in rs.regions:
            raise InvalidParameterError(f"unknown region id {region_id!r}; valid: {', '.join(REGION_IDS)}")
        out |= rs.regions[region_id].data
    return Mask(out)


# ---------------------------------------------------------------------------
# Interchange files


def load_landmarks(path: str | Path) -> Landmarks68:
    """Read the landmark interchange JSON written by extraction tools."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: unreadable landmark file ({exc})") from exc
    try:
        points = payload["points"]
        width = int(payload["width"])
        height = int(payload["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: landmark file missing image/width/height/points fields") from exc
    if not isinstance(points, list) or len(points) != 68:
        raise InvalidInputError(f"{path}: expected 68 points, got {len(points) if isinstance(points, list) else 'non-list'}")
    try:
        return Landmarks68(points=np.asarray(points, dtype=np.float64), width=width, height=height)
    except InvalidLandmarksError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


def save_landmarks(lm: Landmarks68, path: str | Path, image_name: str) -> None:
    payload = {
        "image": image_name,
        "width": lm.width,
        "height": lm.height,
        "points": [[float(x), float(y)] for x, y in lm.points],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_canonical_points() -> ExtendedLandmarks:
    """The stored canonical 78-point configuration."""
    payload = json.loads(resources.files("inkblend.data").joinpath("canonical_points.json").read_text())
    return ExtendedLandmarks(
        points=np.asarray(payload["points"], dtype=np.float64),
        nose_length=float(payload["nose_length"]),
        width=int(payload["width"]),
        height=int(payload["height"]),
    )


def load_canonical_triangles() -> TriangleSet:
    """The stored fixed triangulation of the canonical configuration."""
    payload = json.loads(resources.files("inkblend.data").joinpath("canonical_triangles.json").read_text())
    return TriangleSet(triangles=np.asarray(payload, dtype=np.int32), point_count=78)


def canonical_from_landmark_sets(landmark_sets: list[Landmarks68]) -> ExtendedLandmarks:
    """Mean configuration over aligned landmark sets, forehead-extended.

    Used to recompute the canonical triangulation for a new corpus; the
    stored file is the fallback when no corpus statistics are wanted.
    """
    if not landmark_sets:
        raise InvalidInputError("need at least one landmark set")
    mean_pts = np.mean([lm.points for lm in landmark_sets], axis=0)
    width = max(lm.width for lm in landmark_sets)
    height = max(lm.height for lm in landmark_sets)
    return extend_forehead(Landmarks68(points=mean_pts, width=width, height=height))
