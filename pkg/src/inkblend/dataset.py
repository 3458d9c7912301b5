"""Paired dataset generation.

Walks an aligned face corpus, synthesizes tattooed counterparts under a
weighted mix of generation strategies, applies one shared augmentation
(JPEG recompression or Gaussian blur) per subject pair, and writes a
JSON-Lines manifest from which any output can be regenerated byte for
byte. Subjects are independent, so generation parallelizes across
processes without changing a single output bit.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .blending import BlendConfig, DepthMap, compose, landmark_depth_fallback, transform_depth
from .errors import InkblendError, InvalidInputError
from .geometry import Landmarks68, build_regions, extend_forehead, load_landmarks
from .imaging import Image, encode_jpeg, gaussian_blur, jpeg_encoder_id, jpeg_roundtrip
from .placement import (
    GenerationStrategy,
    load_catalog,
    parse_strategy,
    plan_placements,
    plan_to_json,
    strategy_to_string,
)
from .rng import derive_rng, seed_entropy

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class AugmentRanges:
    """Exactly one of JPEG recompression or Gaussian blur per pair."""

    jpeg_quality: tuple[int, int] = (30, 95)
    blur_sigma: tuple[float, float] = (0.5, 2.0)
    jpeg_probability: float = 0.5

    def __post_init__(self) -> None:
        lo, hi = self.jpeg_quality
        if not (1 <= lo <= hi <= 100):
            raise InvalidInputError(f"jpeg quality range {self.jpeg_quality} invalid")
        slo, shi = self.blur_sigma
        if not (0 < slo <= shi):
            raise InvalidInputError(f"blur sigma range {self.blur_sigma} invalid")
        if not 0.0 <= self.jpeg_probability <= 1.0:
            raise InvalidInputError("jpeg probability must be in [0, 1]")


@dataclass
class DatasetConfig:
    images_dir: Path
    landmarks_dir: Path
    templates_dir: Path
    out_dir: Path
    depth_dir: Path | None = None
    strategies: list[tuple[GenerationStrategy, float]] = field(
        default_factory=lambda: [(parse_strategy("coverage:0.05-0.25"), 1.0)]
    )
    count_per_bona_fide: int = 1
    seed: int = 0
    augment: AugmentRanges = field(default_factory=AugmentRanges)
    blend: BlendConfig = field(default_factory=BlendConfig)
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.count_per_bona_fide < 1:
            raise InvalidInputError("count_per_bona_fide must be >= 1")
        if not self.strategies:
            raise InvalidInputError("strategy mix is empty")
        for _, weight in self.strategies:
            if weight <= 0:
                raise InvalidInputError("strategy weights must be positive")

    @classmethod
    def from_json(cls, payload: dict, base: Path | None = None) -> "DatasetConfig":
        base = base or Path.cwd()

        def resolve(key: str, required: bool = True) -> Path | None:
            value = payload.get(key)
            if value is None:
                if required:
                    raise InvalidInputError(f"config missing required path {key!r}")
                return None
            return (base / value).resolve()

        try:
            strategies = [
                (parse_strategy(entry[0]), float(entry[1]))
                for entry in payload.get("strategies", [["coverage:0.05-0.25", 1.0]])
            ]
            augment = AugmentRanges(
                jpeg_quality=tuple(payload.get("augment", {}).get("jpeg_quality", (30, 95))),
                blur_sigma=tuple(payload.get("augment", {}).get("blur_sigma", (0.5, 2.0))),
                jpeg_probability=float(payload.get("augment", {}).get("jpeg_probability", 0.5)),
            )
            blend = BlendConfig(**payload.get("blend", {}))
        except (TypeError, ValueError, IndexError, KeyError) as exc:
            raise InvalidInputError(f"malformed config: {exc}") from exc
        return cls(
            images_dir=resolve("images"),
            landmarks_dir=resolve("landmarks"),
            templates_dir=resolve("templates"),
            out_dir=resolve("out"),
            depth_dir=resolve("depth", required=False),
            strategies=strategies,
            count_per_bona_fide=int(payload.get("count_per_bona_fide", 1)),
            seed=int(payload.get("seed", 0)),
            augment=augment,
            blend=blend,
            workers=payload.get("workers"),
        )

    def to_json(self) -> dict:
        return {
            "images": str(self.images_dir),
            "landmarks": str(self.landmarks_dir),
            "templates": str(self.templates_dir),
            "out": str(self.out_dir),
            "depth": str(self.depth_dir) if self.depth_dir else None,
            "strategies": [[strategy_to_string(s), w] for s, w in self.strategies],
            "count_per_bona_fide": self.count_per_bona_fide,
            "seed": self.seed,
            "augment": {
                "jpeg_quality": list(self.augment.jpeg_quality),
                "blur_sigma": list(self.augment.blur_sigma),
                "jpeg_probability": self.augment.jpeg_probability,
            },
            "blend": {
                "displacement_coefficient": self.blend.displacement_coefficient,
                "depth_contrast": self.blend.depth_contrast,
                "depth_brightness": self.blend.depth_brightness,
                "blur_sigma": self.blend.blur_sigma,
                "opacity": self.blend.opacity,
                "black_threshold": self.blend.black_threshold,
            },
            "workers": self.workers,
        }


def config_hash(cfg: DatasetConfig) -> str:
    return hashlib.sha256(json.dumps(cfg.to_json(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class DatasetManifest:
    records: list[dict]
    skips: list[dict]
    out_dir: Path
    manifest_path: Path


def generate_pair(
    face: Image,
    landmarks: Landmarks68,
    depth: DepthMap | None,
    strategy: GenerationStrategy,
    seed: int,
    catalog,
    blend: BlendConfig | None = None,
) -> tuple[Image, Image, dict]:
    """One bona fide / tattooed pair plus its reproduction record.

    A supplied depth map is treated as raw estimator output and run
    through the contrast/brightness transform; without one, the
    landmark-driven fallback (already displacement-ready) is used.
    """
    blend = blend or BlendConfig()
    ext = extend_forehead(landmarks)
    rs = build_regions(ext, face.width, face.height)
    if depth is not None:
        depth_t = transform_depth(depth, blend)
    else:
        depth_t = landmark_depth_fallback(ext, face.width, face.height)
    plan = plan_placements(strategy, rs, catalog, seed=seed)
    tattooed = compose(face, plan, rs, depth_t, blend, seed)
    record = {
        "strategy": strategy_to_string(strategy),
        "seed": seed,
        "coverage": plan.achieved_coverage,
        "best_effort": plan.best_effort,
        "placements": plan_to_json(plan)["placements"],
    }
    return face, tattooed, record


def augment_pair(
    pair: tuple[Image, Image],
    seed: int,
    ranges: AugmentRanges | None = None,
) -> tuple[tuple[Image, Image], str, float]:
    """Apply one augmentation, identical in kind and parameter, to both images."""
    ranges = ranges or AugmentRanges()
    kind, param = draw_augmentation(seed, ranges)
    if kind == "jpeg":
        out = tuple(jpeg_roundtrip(img, int(param)) for img in pair)
    else:
        out = tuple(gaussian_blur(img, param) for img in pair)
    return out, kind, param


def draw_augmentation(seed: int, ranges: AugmentRanges) -> tuple[str, float]:
    rng = derive_rng("augment", seed)
    if rng.random() < ranges.jpeg_probability:
        lo, hi = ranges.jpeg_quality
        return "jpeg", float(rng.integers(lo, hi + 1))
    lo, hi = ranges.blur_sigma
    return "blur", float(rng.uniform(lo, hi))


def _augmented_bytes(img: Image, kind: str, param: float) -> tuple[bytes, str]:
    """Encoded file content for an augmented image.

    The JPEG branch realizes the augmentation as the encoding itself;
    the blur branch blurs and stores PNG.
    """
    if kind == "jpeg":
        return encode_jpeg(img, int(param)), ".jpg"
    buf = io.BytesIO()
    gaussian_blur(img, param).to_pil().save(buf, format="PNG")
    return buf.getvalue(), ".png"


@lru_cache(maxsize=4)
def _cached_catalog(directory: str):
    return load_catalog(directory)


def _pick_strategy(cfg_strategies: list[tuple[GenerationStrategy, float]], rng: np.random.Generator) -> GenerationStrategy:
    weights = np.array([w for _, w in cfg_strategies], dtype=np.float64)
    pick = rng.random() * weights.sum()
    cum = 0.0
    for strategy, weight in cfg_strategies:
        cum += weight
        if pick < cum:
            return strategy
    return cfg_strategies[-1][0]


def _subject_paths(cfg: DatasetConfig, subject: str) -> dict:
    face = None
    for suffix in IMAGE_SUFFIXES:
        candidate = cfg.images_dir / f"{subject}{suffix}"
        if candidate.exists():
            face = candidate
            break
    depth = cfg.depth_dir / f"{subject}.png" if cfg.depth_dir else None
    return {
        "face": face,
        "landmarks": cfg.landmarks_dir / f"{subject}.json",
        "depth": depth if depth and depth.exists() else None,
    }


def _subject_records(
    cfg: DatasetConfig,
    subject: str,
    write: bool = True,
    only_idx: int | None = None,
    include_bona: bool = True,
):
    """Generate (and optionally write) outputs for one subject.

    ``only_idx`` restricts generation to a single tattooed variant (for
    manifest audits). Returns (records, skips, artifacts) where
    artifacts maps relative paths to encoded bytes; deterministic for a
    given (cfg.seed, subject).
    """
    records: list[dict] = []
    skips: list[dict] = []
    artifacts: dict[str, bytes] = {}
    paths = _subject_paths(cfg, subject)
    tool_meta = {"tool_version": __version__, "jpeg_encoder": jpeg_encoder_id()}

    if paths["face"] is None:
        skips.append({"subject": subject, "index": None, "reason": "face image not found"})
        return records, skips, artifacts
    try:
        face = Image.load(paths["face"])
        landmarks = load_landmarks(paths["landmarks"])
        depth = DepthMap.load(paths["depth"]) if paths["depth"] else None
    except (InkblendError, OSError) as exc:
        skips.append({"subject": subject, "index": None, "reason": str(exc)})
        return records, skips, artifacts

    catalog = _cached_catalog(str(cfg.templates_dir))
    aug_seed = seed_entropy(cfg.seed, "aug", subject)
    kind, param = draw_augmentation(aug_seed, cfg.augment)

    bona_bytes, suffix = _augmented_bytes(face, kind, param)
    bona_rel = f"bonafide/{subject}_0{suffix}"
    if include_bona:
        artifacts[bona_rel] = bona_bytes
        records.append(
            {
                "subject": subject,
                "bona_fide": bona_rel,
                "tattooed": None,
                "strategy": None,
                "seed": None,
                "coverage": None,
                "augmentation": kind,
                "aug_param": param,
                **tool_meta,
                "placements": [],
                "best_effort": False,
            }
        )

    for idx in range(cfg.count_per_bona_fide):
        if only_idx is not None and idx != only_idx:
            continue
        strategy = _pick_strategy(cfg.strategies, derive_rng("strategy", cfg.seed, subject, idx))
        record_seed = seed_entropy(cfg.seed, subject, idx)
        try:
            _, tattooed, pair_record = generate_pair(face, landmarks, depth, strategy, record_seed, catalog, cfg.blend)
        except InkblendError as exc:
            skips.append({"subject": subject, "index": idx, "reason": str(exc)})
            continue
        tattooed_bytes, t_suffix = _augmented_bytes(tattooed, kind, param)
        tattooed_rel = f"tattooed/{subject}_{idx}{t_suffix}"
        artifacts[tattooed_rel] = tattooed_bytes
        records.append(
            {
                "subject": subject,
                "bona_fide": bona_rel,
                "tattooed": tattooed_rel,
                "augmentation": kind,
                "aug_param": param,
                **tool_meta,
                **pair_record,
            }
        )

    if write:
        for rel, blob in artifacts.items():
            target = cfg.out_dir / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(blob)
    return records, skips, artifacts


def _subject_task(args: tuple[dict, str]) -> tuple[list[dict], list[dict]]:
    payload, subject = args
    cfg = DatasetConfig.from_json(payload)
    records, skips, _ = _subject_records(cfg, subject)
    return records, skips


def discover_subjects(images_dir: Path) -> list[str]:
    return sorted({p.stem for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES})


def generate_dataset(cfg: DatasetConfig) -> DatasetManifest:
    """Run the full harness; per-subject failures are skips, not aborts."""
    for name in ("images_dir", "landmarks_dir", "templates_dir"):
        path = getattr(cfg, name)
        if not path.is_dir():
            raise InvalidInputError(f"{name.replace('_', ' ')} does not exist: {path}")
    if cfg.depth_dir is not None and not cfg.depth_dir.is_dir():
        raise InvalidInputError(f"depth dir does not exist: {cfg.depth_dir}")
    subjects = discover_subjects(cfg.images_dir)
    if not subjects:
        raise InvalidInputError(f"no face images found in {cfg.images_dir}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    workers = cfg.workers or os.cpu_count() or 1
    all_records: list[dict] = []
    all_skips: list[dict] = []
    if workers == 1:
        for subject in subjects:
            records, skips, _ = _subject_records(cfg, subject)
            all_records.extend(records)
            all_skips.extend(skips)
    else:
        payload = cfg.to_json()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for records, skips in pool.map(_subject_task, [(payload, s) for s in subjects]):
                all_records.extend(records)
                all_skips.extend(skips)

    all_records.sort(key=lambda r: (r["subject"], r["tattooed"] or ""))
    all_skips.sort(key=lambda r: (r["subject"], r["index"] if r["index"] is not None else -1))

    manifest_path = cfg.out_dir / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for record in all_records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    if all_skips:
        with open(cfg.out_dir / "skips.jsonl", "w", encoding="utf-8") as fh:
            for skip in all_skips:
                fh.write(json.dumps(skip, sort_keys=True) + "\n")
    sidecar = dict(cfg.to_json())
    sidecar.update(
        {
            "tool_version": __version__,
            "jpeg_encoder": jpeg_encoder_id(),
            "config_hash": config_hash(cfg),
        }
    )
    (cfg.out_dir / "manifest.config.json").write_text(json.dumps(sidecar, indent=2), encoding="utf-8")
    return DatasetManifest(records=all_records, skips=all_skips, out_dir=cfg.out_dir, manifest_path=manifest_path)


def validate_manifest(manifest_path: str | Path, sample: int = 10, seed: int = 0) -> list[str]:
    """Regenerate a sample of manifest records and byte-compare the outputs.

    Needs the manifest.config.json sidecar written at generation time
    (input corpus paths come from it). Returns a list of problems;
    empty means every sampled record reproduced exactly.
    """
    manifest_path = Path(manifest_path)
    out_dir = manifest_path.parent
    config_path = out_dir / "manifest.config.json"
    if not config_path.exists():
        return [f"missing config sidecar {config_path}"]
    cfg = DatasetConfig.from_json(json.loads(config_path.read_text(encoding="utf-8")))

    records = [json.loads(line) for line in manifest_path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not records:
        return ["manifest is empty"]
    rng = derive_rng("validate", seed)
    order = rng.permutation(len(records))[: min(sample, len(records))]

    problems: list[str] = []
    for i in sorted(int(j) for j in order):
        record = records[i]
        subject = record["subject"]
        if record["tattooed"] is not None:
            idx = int(Path(record["tattooed"]).stem.rsplit("_", 1)[1])
            _, _, artifacts = _subject_records(cfg, subject, write=False, only_idx=idx, include_bona=False)
        else:
            _, _, artifacts = _subject_records(cfg, subject, write=False, only_idx=-1, include_bona=True)
        rel = record["tattooed"] or record["bona_fide"]
        if rel not in artifacts:
            problems.append(f"{rel}: could not regenerate (record skipped on re-run)")
            continue
        on_disk = out_dir / rel
        if not on_disk.exists():
            problems.append(f"{rel}: file missing")
            continue
        if on_disk.read_bytes() != artifacts[rel]:
            problems.append(f"{rel}: regenerated bytes differ")
    return problems
