"""Procedural sample assets: faces, landmark sets, tattoo templates.

Everything here is deterministic given its seed so tests and demo
corpora are reproducible. The face layout doubles as the canonical
landmark configuration stored in the package data.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw
from scipy import ndimage
from scipy.spatial import ConvexHull

from .blending import DepthMap
from .geometry import ExtendedLandmarks, Landmarks68, extend_forehead, polygon_mask, save_landmarks
from .imaging import Image, blur_float, quantize
from .placement import TattooTemplate
from .rng import derive_rng


def synthetic_landmarks(width: int = 320, height: int = 400, seed: int | None = None) -> Landmarks68:
    """An upright frontal face layout, optionally jittered by the seed."""
    cx, cy = width / 2.0, height * 0.54
    a, b = width * 0.30, height * 0.36

    pts = np.zeros((68, 2))
    # Jaw: ellipse arc from left ear through the chin to the right ear.
    for i in range(17):
        psi = np.deg2rad(170.0 - 10.0 * i)
        pts[i] = (cx + a * np.cos(psi), cy + b * np.sin(psi))
    # Brows with a slight arch.
    for j in range(5):
        arch = 0.06 * np.sin(np.pi * j / 4.0)
        pts[17 + j] = (cx + a * (-0.70 + 0.1125 * j), cy - b * (0.50 + arch))
        pts[22 + j] = (cx + a * (0.25 + 0.1125 * j), cy - b * (0.50 + 0.06 * np.sin(np.pi * (4 - j) / 4.0)))
    # Nose bridge and base row.
    for j in range(4):
        pts[27 + j] = (cx, cy + b * (-0.42 + 0.13 * j))
    base_x = (-0.16, -0.08, 0.0, 0.08, 0.16)
    base_y = (0.08, 0.10, 0.12, 0.10, 0.08)
    for j in range(5):
        pts[31 + j] = (cx + a * base_x[j], cy + b * base_y[j])
    # Eyes: hexagonal rings, outer corners at 36 and 45.
    for sign, start in ((-1, 36), (1, 42)):
        ecx, ecy = cx + sign * 0.42 * a, cy - 0.30 * b
        rx, ry = 0.16 * a, 0.07 * b
        ring = [(-rx, 0.0), (-rx / 2, -ry), (rx / 2, -ry), (rx, 0.0), (rx / 2, ry), (-rx / 2, ry)]
        for j, (dx, dy) in enumerate(ring):
            pts[start + j] = (ecx + dx, ecy + dy)
    # Mouth: outer ring of 12, inner ring of 8.
    mx, my = cx, cy + 0.42 * b
    rx, ry = 0.30 * a, 0.10 * b
    outer = [
        (-1.0, 0.0), (-0.6, -0.7), (-0.25, -1.0), (0.0, -1.1), (0.25, -1.0), (0.6, -0.7),
        (1.0, 0.0), (0.6, 0.8), (0.25, 1.1), (0.0, 1.2), (-0.25, 1.1), (-0.6, 0.8),
    ]
    for j, (fx, fy) in enumerate(outer):
        pts[48 + j] = (mx + rx * fx, my + ry * fy)
    inner = [(-0.75, 0.0), (-0.3, -0.45), (0.0, -0.5), (0.3, -0.45), (0.75, 0.0), (0.3, 0.5), (0.0, 0.55), (-0.3, 0.55)]
    for j, (fx, fy) in enumerate(inner):
        pts[60 + j] = (mx + rx * fx, my + ry * fy)

    if seed is not None:
        rng = derive_rng("landmarks", seed)
        angle = np.deg2rad(rng.uniform(-3.0, 3.0))
        scale = rng.uniform(0.95, 1.03)
        shift = rng.uniform(-0.02, 0.02, size=2) * (width, height)
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        pts = (pts - (cx, cy)) @ rot.T * scale + (cx, cy) + shift
        pts += rng.normal(0.0, 0.004 * width, size=pts.shape)
    return Landmarks68(points=pts, width=width, height=height)


def canonical_configuration(width: int = 512, height: int = 640) -> ExtendedLandmarks:
    """The reference 78-point configuration the fixed triangulation is built on."""
    return extend_forehead(synthetic_landmarks(width, height))


def synthetic_face(lm: Landmarks68, seed: int = 0) -> Image:
    """Draw a stylized face image consistent with the landmark layout."""
    w, h = lm.width, lm.height
    ext = extend_forehead(lm)
    pts = ext.points

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = np.zeros((h, w, 3))
    base[:, :, 0] = 96.0 + 30.0 * yy / h
    base[:, :, 1] = 110.0 + 24.0 * yy / h
    base[:, :, 2] = 128.0 + 18.0 * xx / w

    hull = polygon_mask(pts[ConvexHull(pts).vertices], w, h)

    cx = float(pts[:, 0].mean())
    cy = float(pts[:, 1].mean())
    radial = np.hypot(xx - cx, yy - cy)
    radial /= max(radial.max(), 1.0)
    skin = np.zeros((h, w, 3))
    skin[:, :, 0] = 214.0 - 46.0 * radial
    skin[:, :, 1] = 168.0 - 44.0 * radial
    skin[:, :, 2] = 132.0 - 40.0 * radial

    face = np.where(hull[:, :, None], skin, base)

    overlay = PILImage.fromarray(quantize(face), "RGB")
    draw = ImageDraw.Draw(overlay)
    brow_w = max(2, int(0.012 * h))
    draw.line([tuple(p) for p in pts[17:22]], fill=(72, 48, 36), width=brow_w)
    draw.line([tuple(p) for p in pts[22:27]], fill=(72, 48, 36), width=brow_w)
    for ring in (pts[36:42], pts[42:48]):
        draw.polygon([tuple(p) for p in ring], fill=(238, 238, 240))
        center = ring.mean(axis=0)
        r = 0.28 * (ring[:, 0].max() - ring[:, 0].min())
        draw.ellipse([center[0] - r, center[1] - r, center[0] + r, center[1] + r], fill=(58, 46, 40))
    draw.line([tuple(pts[27]), tuple(pts[30]), tuple(pts[33])], fill=(150, 108, 84), width=max(2, brow_w // 2))
    for idx in (31, 35):
        x, y = pts[idx]
        r = 0.012 * w
        draw.ellipse([x - r, y - r, x + r, y + r], fill=(120, 84, 66))
    draw.polygon([tuple(p) for p in pts[48:60]], fill=(154, 72, 66))
    draw.polygon([tuple(p) for p in pts[60:68]], fill=(96, 42, 40))

    out = np.asarray(overlay).astype(np.float64)
    rng = derive_rng("face-texture", seed)
    out += rng.uniform(-5.0, 5.0, size=out.shape)
    out += (3.0 * np.sin(xx / 7.0) * np.sin(yy / 9.0))[:, :, None]
    return Image.from_float(out)


def synthetic_raw_depth(ext: ExtendedLandmarks, width: int, height: int) -> DepthMap:
    """Raw-estimator-style depth: bright low-contrast face on a black background."""
    pts = ext.points
    hull = polygon_mask(pts[ConvexHull(pts).vertices], width, height)
    dist = ndimage.distance_transform_edt(hull)
    dome = dist / max(dist.max(), 1.0)
    nose = polygon_mask(pts[[27, 31, 32, 33, 34, 35]], width, height).astype(np.float64)
    nose = blur_float(nose, 0.02 * width)
    if nose.max() > 0:
        nose *= 12.0 / nose.max()
    values = np.where(hull, 135.0 + 40.0 * dome**0.7 + nose, 0.0)
    return DepthMap(np.clip(values, 0.0, 255.0))


# --- tattoo templates --------------------------------------------------------


def _rgba_canvas(w: int, h: int) -> tuple[PILImage.Image, ImageDraw.ImageDraw]:
    img = PILImage.new("RGBA", (w, h), (0, 0, 0, 0))
    return img, ImageDraw.Draw(img)


def _star_points(cx: float, cy: float, r_out: float, r_in: float, n: int = 5) -> list[tuple[float, float]]:
    pts = []
    for k in range(2 * n):
        r = r_out if k % 2 == 0 else r_in
        ang = -np.pi / 2 + k * np.pi / n
        pts.append((cx + r * np.cos(ang), cy + r * np.sin(ang)))
    return pts


def template_pack() -> list[TattooTemplate]:
    """A varied procedural catalog: shapes, aspects and ink densities."""
    templates = []

    img, draw = _rgba_canvas(120, 120)
    draw.polygon(_star_points(60, 60, 56, 24), fill=(15, 15, 15, 255))
    templates.append(TattooTemplate("star", np.asarray(img), tags=("blackwork",)))

    img, draw = _rgba_canvas(110, 110)
    draw.ellipse([4, 4, 106, 106], fill=(25, 25, 25, 255))
    draw.ellipse([30, 30, 80, 80], fill=(0, 0, 0, 0))
    templates.append(TattooTemplate("ring", np.asarray(img)))

    img, draw = _rgba_canvas(90, 130)
    draw.rectangle([36, 6, 54, 124], fill=(18, 16, 14, 255))
    draw.rectangle([8, 38, 82, 56], fill=(18, 16, 14, 255))
    templates.append(TattooTemplate("cross", np.asarray(img)))

    img, draw = _rgba_canvas(100, 100)
    draw.ellipse([6, 6, 94, 94], fill=(10, 10, 10, 255))
    draw.ellipse([28, 2, 112, 86], fill=(0, 0, 0, 0))
    templates.append(TattooTemplate("crescent", np.asarray(img)))

    img, draw = _rgba_canvas(96, 54)
    for k, r in ((12, 11), (48, 15), (84, 9)):
        draw.ellipse([k - r, 27 - r, k + r, 27 + r], fill=(5, 5, 5, 255))
    templates.append(TattooTemplate("dots", np.asarray(img)))

    img, draw = _rgba_canvas(180, 60)
    zig = [(6, 50), (30, 10), (54, 50), (78, 10), (102, 50), (126, 10), (150, 50), (174, 10)]
    draw.line(zig, fill=(30, 30, 30, 255), width=12)
    templates.append(TattooTemplate("zigzag", np.asarray(img)))

    img, draw = _rgba_canvas(56, 168)
    stem = [(28, 6), (18, 40), (36, 76), (20, 112), (32, 162)]
    draw.line(stem, fill=(18, 24, 18, 255), width=9)
    for x, y in stem[1:]:
        draw.ellipse([x - 9, y - 9, x + 9, y + 9], fill=(14, 20, 14, 255))
    templates.append(TattooTemplate("vine", np.asarray(img)))

    img, draw = _rgba_canvas(120, 120)
    theta = np.linspace(0, 5.5 * np.pi, 260)
    radius = 4 + 9.2 * theta / np.pi
    xs = 60 + radius * np.cos(theta)
    ys = 60 + radius * np.sin(theta)
    draw.line(list(zip(xs, ys)), fill=(12, 12, 12, 255), width=7)
    templates.append(TattooTemplate("spiral", np.asarray(img)))

    img, draw = _rgba_canvas(128, 96)
    for gy in range(3):
        for gx in range(4):
            if (gx + gy) % 2 == 0:
                draw.rectangle([4 + 31 * gx, 4 + 30 * gy, 28 + 31 * gx, 26 + 30 * gy], fill=(8, 8, 8, 255))
    templates.append(TattooTemplate("glyph-grid", np.asarray(img), tags=("blackwork",)))

    img, draw = _rgba_canvas(64, 96)
    draw.polygon([(32, 4), (54, 58), (32, 92), (10, 58)], fill=(5, 5, 5, 255))
    draw.ellipse([14, 40, 50, 92], fill=(5, 5, 5, 255))
    templates.append(TattooTemplate("teardrop", np.asarray(img)))

    # Portrait designs: an oval face with features, tagged for the
    # single-tattoo portrait strategy.
    for variant, jaw in (("portrait-a", 86), ("portrait-b", 78)):
        img, draw = _rgba_canvas(96, 128)
        draw.ellipse([12, 8, jaw, 120], outline=(20, 18, 16, 255), width=7)
        draw.ellipse([30, 44, 42, 54], fill=(20, 18, 16, 255))
        draw.ellipse([56, 44, 68, 54], fill=(20, 18, 16, 255))
        draw.line([(49, 58), (49, 78), (42, 82)], fill=(20, 18, 16, 255), width=5)
        draw.arc([34, 84, 64, 104], start=10, end=170, fill=(20, 18, 16, 255), width=5)
        templates.append(TattooTemplate(variant, np.asarray(img), tags=("portrait",)))

    img, draw = _rgba_canvas(100, 92)
    draw.polygon([(50, 88), (6, 40), (18, 12), (50, 28), (82, 12), (94, 40)], fill=(120, 15, 15, 255))
    templates.append(TattooTemplate("heart-red", np.asarray(img), tags=("color",)))

    return templates


def write_template_pack(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for t in template_pack():
        path = directory / f"{t.id}.png"
        Image(t.rgba).save(path)
        if t.tags:
            path.with_suffix(".json").write_text(json.dumps({"id": t.id, "tags": list(t.tags)}), encoding="utf-8")
        written.append(path)
    return written


def write_sample_corpus(
    directory: str | Path,
    faces: int = 5,
    width: int = 320,
    height: int = 400,
    with_depth: bool = False,
    seed: int = 0,
) -> dict[str, Path]:
    """Write faces/, landmarks/ (and optionally depth/) ready for generation."""
    directory = Path(directory)
    dirs = {
        "faces": directory / "faces",
        "landmarks": directory / "landmarks",
        "templates": directory / "templates",
    }
    if with_depth:
        dirs["depth"] = directory / "depth"
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)

    for i in range(faces):
        subject = f"face{i:03d}"
        lm = synthetic_landmarks(width, height, seed=seed * 1000 + i)
        synthetic_face(lm, seed=seed * 1000 + i).save(dirs["faces"] / f"{subject}.png")
        save_landmarks(lm, dirs["landmarks"] / f"{subject}.json", image_name=f"{subject}.png")
        if with_depth:
            ext = extend_forehead(lm)
            synthetic_raw_depth(ext, width, height).save(dirs["depth"] / f"{subject}.png")
    write_template_pack(dirs["templates"])
    return dirs
