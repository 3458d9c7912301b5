import numpy as np
import pytest

from inkblend.errors import InvalidParameterError, NoSpaceError, TooSmallError
from inkblend.imaging import Mask, Rect
from inkblend.placement import (
    REGION_NEIGHBORS,
    TattooTemplate,
    coverage,
    fit_tattoo,
    largest_empty_rect,
    load_catalog,
    parse_strategy,
    placement_footprint,
    plan_placements,
    plan_to_json,
    resize_nn,
    strategy_to_string,
)
from inkblend.geometry import REGION_IDS

from oracles import brute_force_max_rect, coverage_by_pixel_count


def _solid_template(tid, w, h, rgb=(10, 10, 10)):
    rgba = np.zeros((h, w, 4), np.uint8)
    rgba[:, :, :3] = rgb
    rgba[:, :, 3] = 255
    return TattooTemplate(tid, rgba)


def test_template_requires_ink_and_alpha():
    with pytest.raises(InvalidParameterError):
        TattooTemplate("flat", np.zeros((4, 4, 3), np.uint8))
    with pytest.raises(InvalidParameterError):
        TattooTemplate("empty", np.zeros((4, 4, 4), np.uint8))
    t = _solid_template("ok", 6, 3)
    assert t.ink_pixels == 18
    assert t.aspect == 2.0


def test_ler_whole_region():
    r = largest_empty_rect(Mask(np.ones((10, 10), bool)), Mask(np.zeros((10, 10), bool)))
    assert (r.x, r.y, r.w, r.h) == (0, 0, 10, 10)


def test_ler_occupied_row():
    occ = np.zeros((10, 10), bool)
    occ[4, :] = True
    r = largest_empty_rect(Mask(np.ones((10, 10), bool)), Mask(occ))
    assert (r.x, r.y, r.w, r.h) == (0, 5, 10, 5)


def test_ler_no_space():
    with pytest.raises(NoSpaceError):
        largest_empty_rect(Mask(np.zeros((5, 5), bool)), Mask(np.zeros((5, 5), bool)))
    with pytest.raises(InvalidParameterError):
        largest_empty_rect(Mask(np.ones((5, 5), bool)), Mask(np.zeros((4, 5), bool)))


def test_ler_matches_brute_force_on_random_masks():
    rng = np.random.default_rng(99)
    for _ in range(200):
        free = rng.random((20, 20)) < rng.uniform(0.2, 0.95)
        if not free.any():
            continue
        rect = largest_empty_rect(Mask(free), Mask(np.zeros_like(free)))
        assert free[rect.y : rect.y2, rect.x : rect.x2].all()
        area, by, bx = brute_force_max_rect(free)
        assert rect.area == area
        assert (rect.y, rect.x) == (by, bx)


def test_fit_tattoo_examples():
    p = fit_tattoo(_solid_template("a", 100, 50), Rect(10, 10, 60, 60))
    assert (p.rect.x, p.rect.y, p.rect.w, p.rect.h) == (10, 25, 60, 30)
    p = fit_tattoo(_solid_template("b", 50, 50), Rect(10, 10, 100, 40))
    assert (p.rect.x, p.rect.w, p.rect.h) == (40, 40, 40)
    with pytest.raises(TooSmallError):
        fit_tattoo(_solid_template("c", 400, 10), Rect(0, 0, 60, 60))


def test_fit_tattoo_preserves_aspect():
    rng = np.random.default_rng(5)
    for _ in range(200):
        tw, th = int(rng.integers(10, 200)), int(rng.integers(10, 200))
        rw, rh = int(rng.integers(12, 300)), int(rng.integers(12, 300))
        t = _solid_template("t", tw, th)
        try:
            p = fit_tattoo(t, Rect(0, 0, rw, rh))
        except TooSmallError:
            continue
        assert abs(p.rect.w / p.rect.h - t.aspect) / t.aspect <= 0.01 + 1e-12
        assert p.rect.w <= rw and p.rect.h <= rh


def test_coverage_empty_and_ratio(regions):
    from inkblend.placement import PlacementPlan

    empty = PlacementPlan(placements=(), occupancy=Mask(np.zeros((regions.height, regions.width), bool)), achieved_coverage=0.0)
    assert coverage(empty, regions) == 0.0


def test_coverage_matches_pixel_count_oracle(regions, catalog):
    plan = plan_placements(parse_strategy("coverage:0.12"), regions, catalog, seed=3)
    fast = coverage(plan, regions)
    oracle = coverage_by_pixel_count(
        [placement_footprint(p) for p in plan.placements],
        regions.placeable().data,
        regions.total_placeable_area,
    )
    assert fast == pytest.approx(oracle, abs=1e-12)
    assert plan.achieved_coverage == pytest.approx(oracle, abs=1e-12)


def test_coverage_monotone_under_append(regions, catalog):
    plan = plan_placements(parse_strategy("coverage:0.15"), regions, catalog, seed=11)
    from inkblend.placement import PlacementPlan

    last = 0.0
    for k in range(len(plan.placements) + 1):
        partial = PlacementPlan(
            placements=plan.placements[:k],
            occupancy=plan.occupancy,
            achieved_coverage=0.0,
        )
        value = coverage(partial, regions)
        assert value >= last - 1e-12
        last = value


def test_plan_fixed_region_contract(regions, catalog):
    plan = plan_placements(parse_strategy("region:left-upper-cheek"), regions, catalog, seed=2)
    assert len(plan.placements) == 1
    p = plan.placements[0]
    region = regions.regions["left-upper-cheek"].data
    assert region[p.rect.y : p.rect.y2, p.rect.x : p.rect.x2].all()


def test_plan_single_full_face_and_portrait(regions, catalog):
    plan = plan_placements(parse_strategy("single:full-face"), regions, catalog, seed=4)
    assert len(plan.placements) == 1
    plan = plan_placements(parse_strategy("single:portrait"), regions, catalog, seed=2)
    assert len(plan.placements) == 1
    assert "portrait" in plan.placements[0].template.tags
    assert plan.placements[0].region_id in REGION_IDS


def test_plan_single_portrait_cramped_region_errors(regions, catalog):
    # seed 0 draws a region whose free rect is too small for a portrait
    with pytest.raises(TooSmallError):
        plan_placements(parse_strategy("single:portrait"), regions, catalog, seed=0)


def test_plan_single_portrait_requires_tagged_templates(regions):
    untagged = [_solid_template("plain", 50, 50)]
    with pytest.raises(InvalidParameterError):
        plan_placements(parse_strategy("single:portrait"), regions, untagged, seed=0)


def test_plan_empty_catalog_rejected(regions):
    with pytest.raises(InvalidParameterError):
        plan_placements(parse_strategy("coverage:0.1"), regions, [], seed=0)


def test_plan_deterministic(regions, catalog):
    a = plan_placements(parse_strategy("coverage:0.15"), regions, catalog, seed=21)
    b = plan_placements(parse_strategy("coverage:0.15"), regions, catalog, seed=21)
    assert a.achieved_coverage == b.achieved_coverage
    assert len(a.placements) == len(b.placements)
    for p, q in zip(a.placements, b.placements):
        assert p.template.id == q.template.id and p.rect == q.rect and p.scale == q.scale
    assert np.array_equal(a.occupancy.data, b.occupancy.data)


def test_plan_footprints_never_overlap(regions, catalog):
    for seed in range(6):
        plan = plan_placements(parse_strategy("coverage:0.2"), regions, catalog, seed=seed)
        composite = np.zeros((regions.height, regions.width), np.int32)
        for p in plan.placements:
            sl, footprint = placement_footprint(p)
            composite[sl] += footprint
        assert composite.max() <= 1


def test_strategy_parsing_roundtrip():
    for text in ("coverage:0.05-0.25", "coverage:0.15", "region:chin", "region:forehead+chin", "single:full-face", "single:portrait"):
        assert strategy_to_string(parse_strategy(text)) == text
    with pytest.raises(InvalidParameterError):
        parse_strategy("nonsense")
    with pytest.raises(InvalidParameterError):
        parse_strategy("coverage:0.5-0.1")


def test_neighbor_map_is_symmetric():
    for region, neighbors in REGION_NEIGHBORS.items():
        for n in neighbors:
            assert region in REGION_NEIGHBORS[n]


def test_catalog_roundtrip(tmp_path, catalog):
    from inkblend.samples import write_template_pack

    write_template_pack(tmp_path)
    loaded = load_catalog(tmp_path)
    assert sorted(t.id for t in loaded) == sorted(t.id for t in catalog)
    by_id = {t.id: t for t in loaded}
    for t in catalog:
        assert np.array_equal(by_id[t.id].rgba, t.rgba)
        assert by_id[t.id].tags == t.tags


def test_plan_serialization(regions, catalog):
    plan = plan_placements(parse_strategy("coverage:0.1"), regions, catalog, seed=9)
    payload = plan_to_json(plan)
    assert payload["strategy"] == "coverage:0.1"
    assert payload["achieved_coverage"] == plan.achieved_coverage
    for entry, p in zip(payload["placements"], plan.placements):
        assert entry["template"] == p.template.id
        assert entry["rect"] == [p.rect.x, p.rect.y, p.rect.w, p.rect.h]


def test_resize_nn_exact_on_identity():
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 255, (13, 17, 4)).astype(np.uint8)
    assert np.array_equal(resize_nn(arr, 13, 17), arr)
