"""Tattoo placement planning.

Decides which tattoo templates go where on a face: occupancy-aware
largest-empty-rectangle search, aspect-preserving fitting, ink-coverage
accounting and the generation strategies (target a coverage fraction,
fill a fixed region, or drop a single tattoo).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, NoSpaceError, TooSmallError
from .geometry import REGION_IDS, RegionSet, combine_regions
from .imaging import Image, Mask, Rect
from .rng import derive_rng

MIN_PLACEMENT_SIDE = 8  # px; smaller renders as unrecognizable speckle
ASPECT_TOLERANCE = 0.01

# Which macro-regions may be merged into a larger placement area.
REGION_NEIGHBORS = {
    "forehead": ("left-upper-cheek", "right-upper-cheek"),
    "left-upper-cheek": ("forehead", "left-lower-cheek"),
    "right-upper-cheek": ("forehead", "right-lower-cheek"),
    "left-lower-cheek": ("left-upper-cheek", "chin"),
    "right-lower-cheek": ("right-upper-cheek", "chin"),
    "chin": ("left-lower-cheek", "right-lower-cheek"),
}


@dataclass(frozen=True)
class TattooTemplate:
    """An RGBA tattoo design; the alpha channel is the ink shape."""

    id: str
    rgba: np.ndarray
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        arr = np.array(self.rgba, dtype=np.uint8, copy=True, order="C")
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise InvalidParameterError(f"template {self.id!r} must be RGBA")
        if not (arr[:, :, 3] > 0).any():
            raise InvalidParameterError(f"template {self.id!r} has no ink pixels")
        arr.setflags(write=False)
        object.__setattr__(self, "rgba", arr)

    @property
    def height(self) -> int:
        return self.rgba.shape[0]

    @property
    def width(self) -> int:
        return self.rgba.shape[1]

    @property
    def ink_pixels(self) -> int:
        return int(np.count_nonzero(self.rgba[:, :, 3]))

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True)
class Placement:
    """One planned tattoo: template, final rect, scale and host region."""

    template: TattooTemplate
    rect: Rect
    scale: float
    region_id: str


@dataclass(frozen=True)
class PlacementPlan:
    placements: tuple[Placement, ...]
    occupancy: Mask
    achieved_coverage: float
    best_effort: bool = False
    seed: int | None = None
    strategy: str = ""


# --- strategies -------------------------------------------------------------


@dataclass(frozen=True)
class CoverageTarget:
    """Place tattoos until ink covers a fraction drawn from [low, high]."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not (0.0 < self.low <= self.high <= 1.0):
            raise InvalidParameterError(f"coverage range must satisfy 0 < low <= high <= 1, got [{self.low}, {self.high}]")


@dataclass(frozen=True)
class FixedRegion:
    """Always place one tattoo into the named region(s)."""

    region_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.region_ids:
            raise InvalidParameterError("FixedRegion needs at least one region id")


@dataclass(frozen=True)
class SingleTattoo:
    """One tattoo across the whole face, or one portrait design in a random region."""

    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("full-face", "portrait-random-region"):
            raise InvalidParameterError(f"unknown single-tattoo mode {self.mode!r}")


Variant = CoverageTarget | FixedRegion | SingleTattoo


@dataclass(frozen=True)
class GenerationStrategy:
    variant: Variant
    seed: int | None = None


def parse_strategy(text: str) -> GenerationStrategy:
    """Parse the compact strategy syntax used by config files and the CLI.

    Forms: ``coverage:LO-HI`` or ``coverage:VALUE`` (fractions),
    ``region:ID[+ID...]``, ``single:full-face``, ``single:portrait``.
    """
    kind, _, arg = text.partition(":")
    if kind == "coverage" and arg:
        lo, _, hi = arg.partition("-")
        try:
            low = float(lo)
            high = float(hi) if hi else low
        except ValueError as exc:
            raise InvalidParameterError(f"bad coverage range {arg!r}") from exc
        return GenerationStrategy(CoverageTarget(low, high))
    if kind == "region" and arg:
        return GenerationStrategy(FixedRegion(tuple(arg.split("+"))))
    if kind == "single" and arg:
        mode = "portrait-random-region" if arg == "portrait" else arg
        return GenerationStrategy(SingleTattoo(mode))
    raise InvalidParameterError(f"unknown strategy {text!r}")


def strategy_to_string(strategy: GenerationStrategy) -> str:
    v = strategy.variant
    if isinstance(v, CoverageTarget):
        return f"coverage:{v.low:g}-{v.high:g}" if v.low != v.high else f"coverage:{v.low:g}"
    if isinstance(v, FixedRegion):
        return "region:" + "+".join(v.region_ids)
    return "single:" + ("portrait" if v.mode == "portrait-random-region" else v.mode)


# --- geometry of a single placement ----------------------------------------


def largest_empty_rect(region: Mask, occupancy: Mask) -> Rect:
    """Maximum-area axis-aligned rectangle inside region minus occupancy.

    Histogram-of-heights stack sweep, O(W*H). Ties are broken toward the
    smaller top y, then the smaller left x.
    """
    if region.data.shape != occupancy.data.shape:
        raise InvalidParameterError("region and occupancy masks differ in size")
    free = region.data & ~occupancy.data
    if not free.any():
        raise NoSpaceError("region is fully occupied")
    h, w = free.shape
    heights = np.zeros(w, dtype=np.int64)
    best_area = 0
    best = (0, 0, 1, 1)
    for y in range(h):
        heights = (heights + 1) * free[y]
        row = heights.tolist()
        row.append(0)  # sentinel flushes the stack
        stack: list[int] = []
        for j, bar in enumerate(row):
            start = j
            while stack and row[stack[-1]] >= bar:
                s = stack.pop()
                height = row[s]
                width = j - s
                area = height * width
                top = y - height + 1
                left = s
                if area > best_area or (area == best_area and (top, left) < (best[1], best[0])):
                    best_area = area
                    best = (left, top, width, height)
                start = s
            stack.append(start)
            row[start] = bar  # widened bar keeps its height for later pops
    return Rect(*best)


def fit_tattoo(t: TattooTemplate, r: Rect, region_id: str = "") -> Placement:
    """Largest aspect-preserving placement of the template inside the rect."""
    return _fit(t, r, math.inf, region_id)


def _fit(t: TattooTemplate, r: Rect, max_scale: float, region_id: str) -> Placement:
    scale = min(r.w / t.width, r.h / t.height, max_scale)
    w0 = min(r.w, int(math.floor(t.width * scale + 0.5)))
    h0 = min(r.h, int(math.floor(t.height * scale + 0.5)))
    if w0 < MIN_PLACEMENT_SIDE or h0 < MIN_PLACEMENT_SIDE:
        raise TooSmallError(f"template {t.id!r} would shrink to {w0}x{h0}, below {MIN_PLACEMENT_SIDE} px")
    dims = _aspect_clean_dims(w0, h0, t.aspect, r)
    if dims is None:
        raise TooSmallError(f"template {t.id!r} cannot keep its aspect ratio within 1% near {w0}x{h0}")
    w, h = dims
    x = r.x + (r.w - w) // 2
    y = r.y + (r.h - h) // 2
    return Placement(template=t, rect=Rect(x, y, w, h), scale=w / t.width, region_id=region_id)


def _aspect_clean_dims(w0: int, h0: int, aspect: float, r: Rect) -> tuple[int, int] | None:
    """Largest integer dims at or just below (w0, h0) within the aspect tolerance.

    At small sizes rounding one side can alone exceed 1%; shrinking the
    driving side by a few pixels always reaches a cleaner ratio.
    """
    if w0 >= h0:
        for w in range(w0, max(MIN_PLACEMENT_SIDE, w0 - 10) - 1, -1):
            h = int(math.floor(w / aspect + 0.5))
            if h < MIN_PLACEMENT_SIDE or h > r.h:
                continue
            if abs(w / h - aspect) / aspect <= ASPECT_TOLERANCE + 1e-12:
                return w, h
    else:
        for h in range(h0, max(MIN_PLACEMENT_SIDE, h0 - 10) - 1, -1):
            w = int(math.floor(h * aspect + 0.5))
            if w < MIN_PLACEMENT_SIDE or w > r.w:
                continue
            if abs(w / h - aspect) / aspect <= ASPECT_TOLERANCE + 1e-12:
                return w, h
    return None


def resize_nn(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    """Nearest-neighbor resample of an (H, W[, C]) array."""
    src_h, src_w = arr.shape[:2]
    ys = np.minimum((np.arange(height) + 0.5) * src_h / height, src_h - 1).astype(np.int64)
    xs = np.minimum((np.arange(width) + 0.5) * src_w / width, src_w - 1).astype(np.int64)
    return arr[ys[:, None], xs[None, :]]


def placement_footprint(p: Placement) -> tuple[tuple[slice, slice], np.ndarray]:
    """Rect slices plus the boolean ink footprint after nearest-neighbor scaling."""
    alpha = resize_nn(p.template.rgba[:, :, 3], p.rect.h, p.rect.w)
    return p.rect.slices(), alpha > 0


def coverage(plan: PlacementPlan, rs: RegionSet) -> float:
    """Fraction of the placeable area covered by scaled, clipped ink pixels."""
    if rs.total_placeable_area == 0:
        return 0.0
    placeable = rs.placeable().data
    covered = 0
    for p in plan.placements:
        sl, footprint = placement_footprint(p)
        covered += int(np.count_nonzero(footprint & placeable[sl]))
    return covered / rs.total_placeable_area


# --- planning ---------------------------------------------------------------

COVERAGE_TOLERANCE = 0.01
MAX_CONSECUTIVE_FAILURES = 50
NEIGHBOR_COMBINE_PROB = 0.25


class _TemplateDeck:
    """Uniform draws without replacement, reshuffled when exhausted."""

    def __init__(self, catalog: list[TattooTemplate], rng: np.random.Generator) -> None:
        self._catalog = catalog
        self._rng = rng
        self._queue: list[int] = []

    def draw(self) -> TattooTemplate:
        if not self._queue:
            self._queue = list(self._rng.permutation(len(self._catalog)))
        return self._catalog[self._queue.pop()]


def plan_placements(
    strategy: GenerationStrategy,
    rs: RegionSet,
    catalog: list[TattooTemplate],
    seed: int | None = None,
) -> PlacementPlan:
    """Plan non-overlapping placements according to the strategy.

    Deterministic given (strategy, seed): all randomness comes from one
    counter-based generator keyed by the effective seed.
    """
    if not catalog:
        raise InvalidParameterError("template catalog is empty")
    if rs.total_placeable_area == 0:
        raise NoSpaceError("face has no placeable area")
    effective_seed = seed if seed is not None else (strategy.seed if strategy.seed is not None else 0)
    rng = derive_rng("plan", effective_seed)
    occupancy = np.zeros((rs.height, rs.width), dtype=bool)
    deck = _TemplateDeck(catalog, rng)

    variant = strategy.variant
    if isinstance(variant, CoverageTarget):
        placements, achieved, best_effort = _plan_coverage(variant, rs, rng, deck, occupancy)
    elif isinstance(variant, FixedRegion):
        mask = combine_regions(rs, list(variant.region_ids))
        label = "+".join(variant.region_ids)
        placement = _place_into(mask, occupancy, deck.draw(), label, math.inf)
        placements = [placement]
        achieved = _commit(placement, occupancy, rs)
        best_effort = False
    else:
        placements, achieved = _plan_single(variant, rs, rng, catalog, occupancy)
        best_effort = False

    return PlacementPlan(
        placements=tuple(placements),
        occupancy=Mask(occupancy),
        achieved_coverage=achieved,
        best_effort=best_effort,
        seed=effective_seed,
        strategy=strategy_to_string(strategy),
    )


def _place_into(
    mask: Mask,
    occupancy: np.ndarray,
    template: TattooTemplate,
    label: str,
    max_scale: float,
) -> Placement:
    rect = largest_empty_rect(mask, Mask(occupancy))
    return _fit(template, rect, max_scale, label)


def _commit(placement: Placement, occupancy: np.ndarray, rs: RegionSet) -> float:
    """Mark the ink footprint occupied; return the coverage it adds."""
    sl, footprint = placement_footprint(placement)
    occupancy[sl] |= footprint
    placeable = rs.placeable().data
    return int(np.count_nonzero(footprint & placeable[sl])) / rs.total_placeable_area


def _plan_coverage(
    target_range: CoverageTarget,
    rs: RegionSet,
    rng: np.random.Generator,
    deck: _TemplateDeck,
    occupancy: np.ndarray,
) -> tuple[list[Placement], float, bool]:
    target = float(rng.uniform(target_range.low, target_range.high))
    placements: list[Placement] = []
    achieved = 0.0
    failures = 0
    placeable = rs.placeable().data
    while achieved < target - COVERAGE_TOLERANCE:
        if failures >= MAX_CONSECUTIVE_FAILURES:
            return placements, achieved, True
        ids = [REGION_IDS[int(rng.integers(len(REGION_IDS)))]]
        if rng.random() < NEIGHBOR_COMBINE_PROB:
            neighbors = REGION_NEIGHBORS[ids[0]]
            ids.append(neighbors[int(rng.integers(len(neighbors)))])
        mask = combine_regions(rs, ids)
        template = deck.draw()
        # Cap the scale so the added ink cannot overshoot the target band.
        budget_px = (target + COVERAGE_TOLERANCE * 0.9 - achieved) * rs.total_placeable_area
        ink_fraction = template.ink_pixels / (template.width * template.height)
        max_scale = math.sqrt(max(budget_px, 0.0) / ink_fraction / (template.width * template.height))
        try:
            placement = _place_into(mask, occupancy, template, "+".join(ids), max_scale)
        except (NoSpaceError, TooSmallError):
            failures += 1
            continue
        sl, footprint = placement_footprint(placement)
        added = int(np.count_nonzero(footprint & placeable[sl]))
        if added == 0:
            failures += 1
            continue
        occupancy[sl] |= footprint
        achieved += added / rs.total_placeable_area
        placements.append(placement)
        failures = 0
    return placements, achieved, False


def _plan_single(
    variant: SingleTattoo,
    rs: RegionSet,
    rng: np.random.Generator,
    catalog: list[TattooTemplate],
    occupancy: np.ndarray,
) -> tuple[list[Placement], float]:
    if variant.mode == "full-face":
        template = catalog[int(rng.integers(len(catalog)))]
        mask = combine_regions(rs, list(REGION_IDS))
        placement = _place_into(mask, occupancy, template, "+".join(REGION_IDS), math.inf)
    else:
        portraits = [t for t in catalog if "portrait" in t.tags]
        if not portraits:
            raise InvalidParameterError("no templates tagged 'portrait' in the catalog")
        template = portraits[int(rng.integers(len(portraits)))]
        region_id = REGION_IDS[int(rng.integers(len(REGION_IDS)))]
        placement = _place_into(rs.regions[region_id], occupancy, template, region_id, math.inf)
    achieved = _commit(placement, occupancy, rs)
    return [placement], achieved


# --- catalog and plan serialization ----------------------------------------


def load_catalog(directory: str | Path) -> list[TattooTemplate]:
    """Load RGBA template PNGs (with optional .json tag sidecars) from a directory."""
    directory = Path(directory)
    templates = []
    for png in sorted(directory.glob("*.png")):
        img = Image.load(png)
        if img.channels != 4:
            raise InvalidParameterError(f"{png}: templates must be RGBA PNGs")
        template_id = png.stem
        tags: tuple[str, ...] = ()
        sidecar = png.with_suffix(".json")
        if sidecar.exists():
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
            template_id = meta.get("id", template_id)
            tags = tuple(meta.get("tags", ()))
        templates.append(TattooTemplate(id=template_id, rgba=img.data, tags=tags))
    if not templates:
        raise InvalidParameterError(f"no template PNGs found in {directory}")
    return templates


def plan_to_json(plan: PlacementPlan) -> dict:
    return {
        "seed": plan.seed,
        "strategy": plan.strategy,
        "achieved_coverage": plan.achieved_coverage,
        "best_effort": plan.best_effort,
        "placements": [
            {
                "template": p.template.id,
                "rect": [p.rect.x, p.rect.y, p.rect.w, p.rect.h],
                "scale": p.scale,
                "region": p.region_id,
            }
            for p in plan.placements
        ],
    }
