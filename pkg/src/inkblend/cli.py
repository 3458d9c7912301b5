"""Operator command line: generation, single blends, metrics, audits."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .biometrics import evaluate_scores, load_embeddings_csv, load_score_csv, score_sets_from_embeddings
from .blending import BlendConfig, DepthMap, landmark_depth_fallback
from .dataset import (
    DatasetConfig,
    config_hash,
    generate_dataset,
    generate_pair,
    validate_manifest,
)
from .errors import InkblendError, InvalidInputError
from .geometry import extend_forehead, load_landmarks
from .imaging import Image
from .placement import load_catalog, parse_strategy
from .quality import SsimConfig, evaluate_removal
from .samples import write_sample_corpus

SEED_ENV_VAR = "INKBLEND_SEED"


def _effective_seed(flag: int | None, config_value: int | None = None) -> int:
    """Seed priority: explicit flag, then config file, then environment."""
    if flag is not None:
        return flag
    if config_value is not None:
        return config_value
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _banner(seed: int, cfg_hash: str = "-") -> None:
    click.echo(f"inkblend {__version__} | seed {seed} | config {cfg_hash}", err=True)


@click.group()
@click.version_option(version=__version__, prog_name="inkblend")
@click.option("-v", "--verbose", count=True, help="Increase log verbosity (repeatable).")
def cli(verbose: int) -> None:
    """Synthetic facial-tattoo blending and evaluation toolkit."""
    import logging

    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--workers", type=int, default=None, help="Worker processes (default: all cores).")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None, help="Override the output directory.")
@click.pass_context
def generate(ctx: click.Context, config_path: Path, seed: int | None, workers: int | None, out_dir: Path | None) -> None:
    """Generate a paired bona fide / tattooed dataset from a config file."""
    try:
        payload = json.loads(config_path.read_text(encoding="utf-8"))
        cfg = DatasetConfig.from_json(payload, base=config_path.parent)
    except (json.JSONDecodeError, InvalidInputError) as exc:
        raise click.ClickException(f"config error: {exc}") from exc
    cfg.seed = _effective_seed(seed, cfg.seed if "seed" in payload else None)
    if workers is not None:
        cfg.workers = workers
    if out_dir is not None:
        cfg.out_dir = out_dir.resolve()
    _banner(cfg.seed, config_hash(cfg))
    manifest = generate_dataset(cfg)
    click.echo(f"{len(manifest.records)} records -> {manifest.manifest_path}")
    if manifest.skips:
        click.echo(f"{len(manifest.skips)} records skipped (see skips.jsonl)", err=True)
        ctx.exit(2)


@cli.command("blend-one")
@click.option("--image", "image_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--depth", "depth_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--templates", "templates_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--strategy", "strategy_text", required=True, help="e.g. coverage:0.15, region:chin, single:full-face")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(path_type=Path), default=Path("."), show_default=True)
def blend_one(
    image_path: Path,
    landmarks_path: Path,
    depth_path: Path | None,
    templates_dir: Path,
    strategy_text: str,
    seed: int | None,
    out_dir: Path,
) -> None:
    """Blend one face image and write the bona fide / tattooed pair."""
    seed_value = _effective_seed(seed)
    _banner(seed_value)
    face = Image.load(image_path)
    landmarks = load_landmarks(landmarks_path)
    depth = DepthMap.load(depth_path) if depth_path else None
    strategy = parse_strategy(strategy_text)
    catalog = load_catalog(templates_dir)
    bona, tattooed, record = generate_pair(face, landmarks, depth, strategy, seed_value, catalog, BlendConfig())
    out_dir.mkdir(parents=True, exist_ok=True)
    bona_path = out_dir / f"{image_path.stem}_bonafide.png"
    tattooed_path = out_dir / f"{image_path.stem}_tattooed.png"
    bona.save(bona_path)
    tattooed.save(tattooed_path)
    (out_dir / f"{image_path.stem}_record.json").write_text(json.dumps(record, indent=2), encoding="utf-8")
    click.echo(str(bona_path))
    click.echo(str(tattooed_path))


@cli.command()
@click.option("--truth", "truth_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--candidate", "candidate_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--landmarks", "landmark_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="Write the JSON report here.")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None, help="Write the summary CSV here.")
@click.option("--rounded-constants", is_flag=True, help="Use the 6.55 / 58.98 SSIM constants.")
def quality(
    truth_dir: Path,
    candidate_dir: Path,
    landmark_dir: Path,
    out_path: Path | None,
    csv_path: Path | None,
    rounded_constants: bool,
) -> None:
    """Score reconstruction quality (MSSIM / PSNR / VIF, portrait and inner)."""
    _banner(0)
    cfg = SsimConfig.rounded_constants() if rounded_constants else SsimConfig()
    report = evaluate_removal(truth_dir, candidate_dir, landmark_dir, cfg)
    payload = report.to_json()
    if out_path:
        out_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(str(out_path))
    if csv_path:
        report.write_csv(csv_path, label=candidate_dir.name)
        click.echo(str(csv_path))
    for crop in ("portrait", "inner"):
        agg = payload["aggregates"][crop]
        click.echo(
            f"{crop}: mssim {_mv(agg['mssim'])} | psnr {_mv(agg['psnr'])} dB"
            f" (inf: {agg['psnr']['infinite']}) | vif {_mv(agg['vif'])}"
        )


def _mv(agg: dict) -> str:
    if agg["mean"] is None:
        return "n/a"
    return f"{agg['mean']:.4f} (+/-{agg['std']:.4f})"


@cli.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
def bioeval(
    scores_path: Path | None,
    embeddings_path: Path | None,
    pairs_path: Path | None,
    out_path: Path | None,
    csv_path: Path | None,
) -> None:
    """Verification performance (EER, FNMR at FMR 0.1% / 1%) from scores or embeddings."""
    _banner(0)
    if scores_path is not None:
        score_sets = load_score_csv(scores_path)
        missing: list[str] = []
    elif embeddings_path is not None and pairs_path is not None:
        vectors = load_embeddings_csv(embeddings_path)
        score_sets, missing = score_sets_from_embeddings(vectors, pairs_path)
    else:
        raise click.UsageError("provide --scores, or --embeddings together with --pairs")
    report = evaluate_scores(score_sets, missing)
    if out_path:
        out_path.write_text(json.dumps(report.to_json(), indent=2), encoding="utf-8")
        click.echo(str(out_path))
    if csv_path:
        report.write_csv(csv_path)
        click.echo(str(csv_path))
    for cond in report.conditions:
        click.echo(
            f"{cond.condition}: EER {cond.eer * 100:.2f}% | "
            f"FNMR@FMR=0.1% {cond.fnmr_at_fmr[0.001] * 100:.2f}% | "
            f"FNMR@FMR=1% {cond.fnmr_at_fmr[0.01] * 100:.2f}%"
        )
    if missing:
        click.echo(f"{len(missing)} pairs excluded (missing embeddings)", err=True)


@cli.command("depth-fallback")
@click.option("--landmarks", "landmarks_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--size", required=True, help="Output size as WIDTHxHEIGHT, e.g. 320x400.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def depth_fallback(landmarks_path: Path, size: str, out_path: Path) -> None:
    """Write the landmark-driven synthetic depth map as an 8-bit PNG."""
    _banner(0)
    try:
        w, h = (int(v) for v in size.lower().split("x"))
    except ValueError as exc:
        raise click.UsageError(f"--size must look like 320x400, got {size!r}") from exc
    landmarks = load_landmarks(landmarks_path)
    depth = landmark_depth_fallback(extend_forehead(landmarks), w, h)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    depth.save(out_path)
    click.echo(str(out_path))


@cli.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--sample", type=int, default=10, show_default=True, help="Records to re-derive from the manifest.")
@click.option("--landmarks", "landmarks_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.option("--depth", "depth_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.option("--images", "images_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.pass_context
def validate(
    ctx: click.Context,
    manifest_path: Path | None,
    sample: int,
    landmarks_dir: Path | None,
    depth_dir: Path | None,
    images_dir: Path | None,
) -> None:
    """Audit a manifest (byte-exact re-derivation) or interchange files."""
    _banner(0)
    problems: list[str] = []
    checked = 0
    if manifest_path is not None:
        problems += validate_manifest(manifest_path, sample=sample)
        checked += 1
    if landmarks_dir is not None:
        problems += _validate_landmark_dir(landmarks_dir, images_dir)
        checked += 1
    if depth_dir is not None:
        if images_dir is None:
            raise click.UsageError("--depth validation needs --images for dimension checks")
        problems += _validate_depth_dir(depth_dir, images_dir)
        checked += 1
    if checked == 0:
        raise click.UsageError("nothing to validate: pass --manifest, --landmarks or --depth")
    for problem in problems:
        click.echo(f"FAIL {problem}")
    if problems:
        ctx.exit(1)
    click.echo("all checks passed")


def _validate_landmark_dir(landmarks_dir: Path, images_dir: Path | None) -> list[str]:
    problems = []
    files = sorted(landmarks_dir.glob("*.json"))
    if not files:
        return [f"{landmarks_dir}: no landmark JSON files"]
    for path in files:
        try:
            lm = load_landmarks(path)
        except InkblendError as exc:
            problems.append(str(exc))
            continue
        if np.any(lm.points[:, 0] < 0) or np.any(lm.points[:, 0] > lm.width - 1) or np.any(
            lm.points[:, 1] < 0
        ) or np.any(lm.points[:, 1] > lm.height - 1):
            problems.append(f"{path}: landmark points outside the declared image bounds")
        if images_dir is not None:
            img_path = _sibling_image(images_dir, path.stem)
            if img_path is None:
                problems.append(f"{path}: no matching image in {images_dir}")
            else:
                img = Image.load(img_path)
                if (img.width, img.height) != (lm.width, lm.height):
                    problems.append(f"{path}: declared {lm.width}x{lm.height}, image is {img.width}x{img.height}")
    return problems


def _validate_depth_dir(depth_dir: Path, images_dir: Path) -> list[str]:
    problems = []
    files = sorted(depth_dir.glob("*.png"))
    if not files:
        return [f"{depth_dir}: no depth PNG files"]
    for path in files:
        try:
            depth = DepthMap.load(path)
        except InkblendError as exc:
            problems.append(str(exc))
            continue
        img_path = _sibling_image(images_dir, path.stem)
        if img_path is None:
            problems.append(f"{path}: no matching image in {images_dir}")
            continue
        img = Image.load(img_path)
        if (img.width, img.height) != (depth.width, depth.height):
            problems.append(f"{path}: depth is {depth.width}x{depth.height}, image is {img.width}x{img.height}")
    return problems


def _sibling_image(images_dir: Path, stem: str) -> Path | None:
    for suffix in (".png", ".jpg", ".jpeg"):
        candidate = images_dir / f"{stem}{suffix}"
        if candidate.exists():
            return candidate
    return None


@cli.command("sample-pack")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--faces", type=int, default=5, show_default=True)
@click.option("--width", type=int, default=320, show_default=True)
@click.option("--height", type=int, default=400, show_default=True)
@click.option("--with-depth", is_flag=True, help="Also write raw-style depth maps.")
@click.option("--seed", type=int, default=None)
def sample_pack(out_dir: Path, faces: int, width: int, height: int, with_depth: bool, seed: int | None) -> None:
    """Write a synthetic demo corpus: faces, landmarks, templates (and depth)."""
    seed_value = _effective_seed(seed)
    _banner(seed_value)
    dirs = write_sample_corpus(out_dir, faces=faces, width=width, height=height, with_depth=with_depth, seed=seed_value)
    for name, path in dirs.items():
        click.echo(f"{name}: {path}")


def main(argv: list[str] | None = None) -> None:
    """Entry point with the documented exit codes (1 config/usage errors)."""
    try:
        rv = cli.main(args=argv, prog_name="inkblend", standalone_mode=False)
        if isinstance(rv, int) and rv != 0:
            sys.exit(rv)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except InkblendError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
