import numpy as np
import pytest

from inkblend.blending import (
    BlendConfig,
    DepthMap,
    adjust_black_ink,
    apply_cutout,
    compose,
    displace_layer,
    displacement,
    displacement_field,
    landmark_depth_fallback,
    tattoo_layer,
    transform_depth,
)
from inkblend.errors import InvalidParameterError
from inkblend.imaging import Image
from inkblend.placement import parse_strategy, plan_placements
from inkblend.rng import derive_rng
from inkblend.samples import synthetic_landmarks
from inkblend.geometry import extend_forehead

W, H = 224, 280


def _uniform_depth(value, w=W, h=H):
    return DepthMap(np.full((h, w), float(value)))


def _random_layer(rng, w=W, h=H):
    return Image(rng.integers(0, 256, (h, w, 4)).astype(np.uint8))


def test_depthmap_validation():
    with pytest.raises(InvalidParameterError):
        DepthMap(np.full((4, 4), 300.0))
    with pytest.raises(InvalidParameterError):
        DepthMap(np.zeros((4, 4, 2)))


def test_transform_depth_values():
    cfg = BlendConfig(depth_contrast=2.0, depth_brightness=-40.0)
    raw = DepthMap(np.array([[127.5, 200.0, 255.0, 0.0]]))
    out = transform_depth(raw, cfg)
    assert out.values[0, 0] == pytest.approx(87.5)
    assert out.values[0, 1] == pytest.approx(232.5)
    assert out.values[0, 2] == 255.0  # 302.5 clamped
    assert out.values[0, 3] == 0.0


def test_displacement_formula_points():
    depth = DepthMap(np.array([[127.5, 255.0, 0.0]]))
    assert displacement(depth, 100.0, 0, 0) == 0.0
    assert displacement(depth, 10.0, 1, 0) == pytest.approx(10.0)
    assert displacement(depth, 10.0, 2, 0) == pytest.approx(-10.0)
    with pytest.raises(InvalidParameterError):
        displacement(depth, 10.0, 3, 0)


def test_displace_identity_bit_exact(rng):
    layer = _random_layer(rng)
    out = displace_layer(layer, _uniform_depth(127.5), 12.0)
    assert np.array_equal(out.data, layer.data)


def test_displace_uniform_shift_matches_translate(rng):
    layer = _random_layer(rng)
    c = 5.0
    out = displace_layer(layer, _uniform_depth(255.0), c)  # D = +5 everywhere
    shifted = np.zeros_like(layer.data)
    shifted[: H - 5, : W - 5] = layer.data[5:, 5:]  # content moves up-left
    interior = out.data[: H - 5, : W - 5]
    assert np.array_equal(interior, shifted[: H - 5, : W - 5])
    # samples beyond the layer read as fully transparent
    assert out.data[H - 5 :, :, 3].max() == 0
    assert out.data[:, W - 5 :, 3].max() == 0


def test_displace_preserves_transparency():
    layer = Image(np.zeros((H, W, 4), np.uint8))
    out = displace_layer(layer, _uniform_depth(60.0), 12.0)
    assert out.data[:, :, 3].max() == 0


def test_apply_cutout_rules(regions):
    layer = np.zeros((H, W, 4), np.uint8)
    layer[:, :, 3] = 255
    layer[:, :, 0] = 120
    out = apply_cutout(Image(layer), regions)
    alpha = out.data[:, :, 3]
    assert alpha[~regions.face_hull.data].max() == 0
    assert alpha[regions.exclusion.data].max() == 0
    keep = regions.face_hull.data & ~regions.exclusion.data
    assert alpha[keep].min() == 255
    assert np.array_equal(out.data[:, :, 0], layer[:, :, 0])  # colors untouched


def test_adjust_black_ink_rules():
    cfg = BlendConfig()
    layer = np.zeros((1, 3, 4), np.float64)
    layer[0, 0, :3] = (0, 0, 0)
    layer[0, 1, :3] = (200, 10, 10)  # above threshold, untouched
    layer[0, 2, :3] = (40, 40, 40)  # exactly at threshold, tinted
    layer[:, :, 3] = 255.0

    from inkblend.blending import _tint_rgba

    class FixedRng:
        def __init__(self, tint_index, delta):
            self._tint = tint_index
            self._delta = delta

        def integers(self, n):
            return self._tint

        def uniform(self, lo, hi):
            return self._delta

    # palette names sorted: blue, green, grey
    out = _tint_rgba(layer, FixedRng(2, 30.0), cfg)  # grey
    assert tuple(out[0, 0, :3]) == (30.0, 30.0, 30.0)
    out = _tint_rgba(layer, FixedRng(0, 30.0), cfg)  # blue
    assert tuple(out[0, 0, :3]) == (10.0, 10.0, 30.0)
    assert tuple(out[0, 1, :3]) == (200.0, 10.0, 10.0)
    assert out[0, 2, 2] == pytest.approx(70.0)


def test_adjust_black_ink_draw_is_per_call():
    cfg = BlendConfig()
    layer = Image(np.dstack([np.zeros((8, 8, 3), np.uint8), np.full((8, 8), 255, np.uint8)]))
    a = adjust_black_ink(layer, derive_rng("ink", 1, 0), cfg)
    b = adjust_black_ink(layer, derive_rng("ink", 1, 0), cfg)
    assert np.array_equal(a.data, b.data)
    # across many tattoo ordinals the draws must vary
    variants = {adjust_black_ink(layer, derive_rng("ink", 1, k), cfg).data.tobytes() for k in range(12)}
    assert len(variants) > 1


def test_compose_empty_plan_identity(face, regions, fallback_depth):
    from inkblend.placement import PlacementPlan
    from inkblend.imaging import Mask

    empty = PlacementPlan(placements=(), occupancy=Mask(np.zeros((H, W), bool)), achieved_coverage=0.0)
    out = compose(face, empty, regions, fallback_depth, BlendConfig(), seed=0)
    assert np.array_equal(out.data, face.data)


def test_compose_white_ink_leaves_face(face, regions, catalog):
    # a pure-white template multiplies by 1 everywhere
    from inkblend.placement import TattooTemplate, PlacementPlan, fit_tattoo
    from inkblend.imaging import Rect

    white = np.zeros((40, 40, 4), np.uint8)
    white[:, :, :3] = 255
    white[:, :, 3] = 255
    t = TattooTemplate("white", white)
    placement = fit_tattoo(t, Rect(90, 150, 40, 40), region_id="chin")
    from inkblend.imaging import Mask

    plan = PlacementPlan(placements=(placement,), occupancy=Mask(np.zeros((H, W), bool)), achieved_coverage=0.0)
    cfg = BlendConfig(blur_sigma=0.0)  # white ink is above the tint threshold anyway
    out = compose(face, plan, regions, _uniform_depth(127.5), cfg, seed=0)
    assert np.array_equal(out.data, face.data)


def test_compose_black_ink_matches_scalar_oracle(face, regions):
    from inkblend.placement import TattooTemplate, PlacementPlan, fit_tattoo
    from inkblend.imaging import Rect, Mask

    black = np.zeros((24, 24, 4), np.uint8)
    black[:, :, 3] = 255
    t = TattooTemplate("black", black)
    placement = fit_tattoo(t, Rect(96, 160, 24, 24), region_id="chin")
    plan = PlacementPlan(placements=(placement,), occupancy=Mask(np.zeros((H, W), bool)), achieved_coverage=0.0)
    cfg = BlendConfig(blur_sigma=0.0, opacity=1.0)
    seed = 5
    out = compose(face, plan, regions, _uniform_depth(127.5), cfg, seed=seed)

    # scalar oracle: recompute one covered pixel by hand
    layer = tattoo_layer(plan, regions, _uniform_depth(127.5), cfg, seed)
    ys, xs = np.nonzero(layer[:, :, 3] > 0)
    y, x = int(ys[0]), int(xs[0])
    tint = layer[y, x, :3]
    expected = np.floor(face.data[y, x].astype(np.float64) * (tint / 255.0) + 0.5)
    assert np.array_equal(out.data[y, x].astype(np.float64), expected)


def test_compose_never_brightens(face, regions, catalog, fallback_depth):
    plan = plan_placements(parse_strategy("coverage:0.2"), regions, catalog, seed=8)
    out = compose(face, plan, regions, fallback_depth, BlendConfig(), seed=8)
    assert np.all(out.data.astype(np.int16) <= face.data.astype(np.int16))


def test_compose_opacity_zero_limit(face, regions, catalog, fallback_depth):
    # opacity must be > 0 by contract; the a=0 path is the transparent layer
    plan = plan_placements(parse_strategy("region:forehead"), regions, catalog, seed=1)
    cfg = BlendConfig(opacity=1e-9, blur_sigma=0.0)
    out = compose(face, plan, regions, fallback_depth, cfg, seed=1)
    assert np.max(np.abs(out.data.astype(np.int16) - face.data.astype(np.int16))) <= 1


def test_pre_blur_cutout_guarantee(face, regions, catalog, fallback_depth):
    for seed in range(4):
        plan = plan_placements(parse_strategy("coverage:0.15"), regions, catalog, seed=seed)
        layer = tattoo_layer(plan, regions, fallback_depth, BlendConfig(), seed=seed)
        alpha = layer[:, :, 3]
        banned = ~regions.face_hull.data | regions.exclusion.data
        assert np.count_nonzero(alpha[banned]) == 0


def test_full_pipeline_deterministic(face, regions, catalog, fallback_depth):
    plan = plan_placements(parse_strategy("coverage:0.12"), regions, catalog, seed=13)
    a = compose(face, plan, regions, fallback_depth, BlendConfig(), seed=13)
    b = compose(face, plan, regions, fallback_depth, BlendConfig(), seed=13)
    assert np.array_equal(a.data, b.data)


def test_depth_fallback_properties(ext):
    depth = landmark_depth_fallback(ext, W, H)
    from inkblend.geometry import polygon_mask
    from scipy.spatial import ConvexHull

    hull = polygon_mask(ext.points[ConvexHull(ext.points).vertices], W, H)
    assert np.all(depth.values[~hull] == 127.5)
    nose_tip = ext.points[33]
    cheek = (ext.points[2] + ext.points[31]) / 2.0
    nx, ny = int(round(nose_tip[0])), int(round(nose_tip[1]))
    cx, cy = int(round(cheek[0])), int(round(cheek[1]))
    assert depth.values[ny, nx] > depth.values[cy, cx]
    assert depth.values.min() >= 0.0 and depth.values.max() <= 255.0


def test_depth_fallback_range_under_jitter():
    for seed in range(60):
        lm = synthetic_landmarks(96, 120, seed=seed)
        ext = extend_forehead(lm)
        depth = landmark_depth_fallback(ext, 96, 120)
        assert depth.values.min() >= 0.0
        assert depth.values.max() <= 255.0


def test_depth_png_roundtrip(tmp_path, fallback_depth):
    path = tmp_path / "depth.png"
    fallback_depth.save(path)
    loaded = DepthMap.load(path)
    assert (loaded.width, loaded.height) == (fallback_depth.width, fallback_depth.height)
    assert np.max(np.abs(loaded.values - fallback_depth.values)) <= 0.5
