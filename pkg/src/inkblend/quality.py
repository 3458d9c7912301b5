"""Full-reference image quality metrics and the removal evaluation harness.

PSNR, mean structural similarity (MSSIM) and pixel-domain visual
information fidelity (VIF) between a ground-truth image and a
reconstructed candidate, measured on both the full portrait and the
eyebrows-to-chin inner crop.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InvalidPairError
from .geometry import Landmarks68, load_landmarks
from .imaging import Image, crop_inner

PEAK_VALUE = 255.0
CROPS = ("portrait", "inner")
METRICS = ("mssim", "psnr", "vif")


@dataclass(frozen=True)
class SsimConfig:
    """Window and stabilizer constants for MSSIM.

    Default constants follow the standard (0.01 * 255)^2 and
    (0.03 * 255)^2 parameterization. ``rounded_constants()`` gives the
    coarser 6.55 / 58.98 pair seen in some write-ups, for strict
    replication of results computed that way.
    """

    c1: float = 6.5025
    c2: float = 58.5225
    window: int = 11
    sigma: float = 1.5

    def __post_init__(self) -> None:
        if self.c1 <= 0 or self.c2 <= 0 or self.window < 1 or self.sigma <= 0:
            raise InvalidPairError("SSIM constants and window must be positive")

    @classmethod
    def rounded_constants(cls) -> "SsimConfig":
        return cls(c1=6.55, c2=58.98)


def to_gray(values: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an (H, W, C) float array; gray passes through."""
    if values.shape[2] == 1:
        return values[:, :, 0]
    return 0.299 * values[:, :, 0] + 0.587 * values[:, :, 1] + 0.114 * values[:, :, 2]


def _check_pair(x: Image, y: Image) -> None:
    if (x.height, x.width, x.channels) != (y.height, y.width, y.channels):
        raise InvalidPairError(
            f"image pair differs in shape: {x.height}x{x.width}x{x.channels} vs {y.height}x{y.width}x{y.channels}"
        )


def psnr(x: Image, y: Image) -> float:
    """Peak signal-to-noise ratio in dB over all channels jointly; inf if identical."""
    _check_pair(x, y)
    diff = x.to_float() - y.to_float()
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(PEAK_VALUE / math.sqrt(mse))


def _window_filter_valid(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable windowed sum over every fully-inside window position."""
    r = len(kernel) // 2
    out = ndimage.correlate1d(values, kernel, axis=0, mode="constant")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="constant")
    return out[r:-r, r:-r]


def mssim(x: Image, y: Image, cfg: SsimConfig | None = None) -> float:
    """Mean SSIM over Gaussian-weighted windows centered at every valid pixel.

    Color input is converted to luma first. Windows never extend past
    the image border (no padding), so the image must be at least as
    large as the window.
    """
    cfg = cfg or SsimConfig()
    _check_pair(x, y)
    if min(x.height, x.width) < cfg.window:
        raise InvalidPairError(f"images must be at least {cfg.window}x{cfg.window} for MSSIM")
    gx = to_gray(x.to_float())
    gy = to_gray(y.to_float())
    kernel = gaussian_kernel_sized(cfg.window, cfg.sigma)

    mu_x = _window_filter_valid(gx, kernel)
    mu_y = _window_filter_valid(gy, kernel)
    var_x = _window_filter_valid(gx * gx, kernel) - mu_x * mu_x
    var_y = _window_filter_valid(gy * gy, kernel) - mu_y * mu_y
    cov = _window_filter_valid(gx * gy, kernel) - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + cfg.c1) * (2.0 * cov + cfg.c2)
    den = (mu_x * mu_x + mu_y * mu_y + cfg.c1) * (var_x + var_y + cfg.c2)
    return float(np.mean(num / den))


def gaussian_kernel_sized(window: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian of an explicit odd length."""
    half = (window - 1) / 2.0
    xs = np.arange(window, dtype=np.float64) - half
    kernel = np.exp(-(xs**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


VIF_MIN_SIDE = 32
_VIF_EPS = 1e-10


def vif_p(x: Image, y: Image, noise_variance: float = 2.0) -> float:
    """Pixel-domain visual information fidelity of candidate y against truth x.

    Four dyadic scales with Gaussian windows of size 2^(5-s)+1 and sigma
    size/5; local statistics over valid window positions only; scale
    sums accumulate into one ratio. May slightly exceed 1 when the
    candidate has more contrast than the truth.
    """
    _check_pair(x, y)
    if min(x.height, x.width) < VIF_MIN_SIDE:
        raise InvalidPairError(f"images must be at least {VIF_MIN_SIDE} px per side for VIF")
    ref = to_gray(x.to_float())
    dist = to_gray(y.to_float())

    num = 0.0
    den = 0.0
    for scale in range(1, 5):
        size = 2 ** (5 - scale) + 1
        kernel = gaussian_kernel_sized(size, size / 5.0)
        if scale > 1:
            if min(ref.shape) < size:
                break
            ref = _window_filter_valid(ref, kernel)[::2, ::2]
            dist = _window_filter_valid(dist, kernel)[::2, ::2]
        if min(ref.shape) < size:
            continue
        mu_r = _window_filter_valid(ref, kernel)
        mu_d = _window_filter_valid(dist, kernel)
        var_r = _window_filter_valid(ref * ref, kernel) - mu_r * mu_r
        var_d = _window_filter_valid(dist * dist, kernel) - mu_d * mu_d
        cov = _window_filter_valid(ref * dist, kernel) - mu_r * mu_d
        var_r = np.maximum(var_r, 0.0)
        var_d = np.maximum(var_d, 0.0)

        gain = cov / (var_r + _VIF_EPS)
        noise = var_d - gain * cov

        gain = np.where(var_r < _VIF_EPS, 0.0, gain)
        noise = np.where(var_r < _VIF_EPS, var_d, noise)
        var_r = np.where(var_r < _VIF_EPS, 0.0, var_r)

        gain = np.where(var_d < _VIF_EPS, 0.0, gain)
        noise = np.where(var_d < _VIF_EPS, 0.0, noise)

        noise = np.where(gain < 0.0, var_d, noise)
        gain = np.maximum(gain, 0.0)
        noise = np.maximum(noise, _VIF_EPS)

        num += float(np.sum(np.log10(1.0 + gain * gain * var_r / (noise + noise_variance))))
        den += float(np.sum(np.log10(1.0 + var_r / noise_variance)))
    if den == 0.0:
        return 1.0
    return num / den


# --- removal evaluation ------------------------------------------------------


@dataclass
class PairQuality:
    name: str
    values: dict[str, dict[str, float | None]] = field(default_factory=dict)
    error: str | None = None


@dataclass
class QualityReport:
    pairs: list[PairQuality]
    aggregates: dict[str, dict[str, dict[str, float | int]]]
    unmatched: list[str]
    ssim_config: SsimConfig

    def to_json(self) -> dict:
        return {
            "pairs": [
                {"name": p.name, "values": p.values, "error": p.error} for p in self.pairs
            ],
            "aggregates": self.aggregates,
            "unmatched": self.unmatched,
            "ssim_constants": {"c1": self.ssim_config.c1, "c2": self.ssim_config.c2},
        }

    def write_csv(self, path: str | Path, label: str = "candidate") -> None:
        """One row per evaluated set: (MSSIM, PSNR, VIF) x (portrait, inner)."""
        header = ["label"]
        for crop in CROPS:
            for metric in METRICS:
                header += [f"{crop}_{metric}_mean", f"{crop}_{metric}_std"]
        row = [label]
        for crop in CROPS:
            for metric in METRICS:
                agg = self.aggregates[crop][metric]
                row += [_fmt(agg["mean"]), _fmt(agg["std"])]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerow(row)


def _fmt(value) -> str:
    return "" if value is None else f"{value:.4f}"


def _pair_metrics(truth: Image, cand: Image, cfg: SsimConfig) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    out["psnr"] = psnr(truth, cand)
    out["mssim"] = mssim(truth, cand, cfg)
    try:
        raw = vif_p(truth, cand)
        out["vif_raw"] = raw
        out["vif"] = min(max(raw, 0.0), 1.0)
    except InvalidPairError:
        out["vif_raw"] = None
        out["vif"] = None
    return out


def evaluate_removal(
    truth_dir: str | Path,
    candidate_dir: str | Path,
    landmark_dir: str | Path,
    cfg: SsimConfig | None = None,
) -> QualityReport:
    """Score every matching filename pair on portrait and inner crops.

    Files present in only one directory, or pairs that cannot be
    compared, are listed and excluded from the aggregates.
    """
    cfg = cfg or SsimConfig()
    truth_dir, candidate_dir, landmark_dir = Path(truth_dir), Path(candidate_dir), Path(landmark_dir)
    truth_files = {p.stem: p for p in sorted(truth_dir.iterdir()) if p.suffix.lower() in (".png", ".jpg", ".jpeg")}
    cand_files = {p.stem: p for p in sorted(candidate_dir.iterdir()) if p.suffix.lower() in (".png", ".jpg", ".jpeg")}

    unmatched = sorted(set(truth_files) ^ set(cand_files))
    pairs: list[PairQuality] = []
    for stem in sorted(set(truth_files) & set(cand_files)):
        pair = PairQuality(name=stem)
        try:
            truth = Image.load(truth_files[stem])
            cand = Image.load(cand_files[stem])
            lm_path = landmark_dir / f"{stem}.json"
            lm: Landmarks68 | None = load_landmarks(lm_path) if lm_path.exists() else None
            pair.values["portrait"] = _pair_metrics(truth, cand, cfg)
            if lm is not None:
                pair.values["inner"] = _pair_metrics(crop_inner(truth, lm), crop_inner(cand, lm), cfg)
            else:
                pair.error = "no landmark file; inner crop skipped"
        except Exception as exc:  # noqa: BLE001 - per-pair failures must not abort the run
            pair.error = str(exc)
        pairs.append(pair)

    aggregates: dict[str, dict[str, dict[str, float | int]]] = {}
    for crop in CROPS:
        aggregates[crop] = {}
        for metric in METRICS:
            values = [
                p.values[crop][metric]
                for p in pairs
                if crop in p.values and p.values[crop].get(metric) is not None
            ]
            finite = [v for v in values if math.isfinite(v)]
            aggregates[crop][metric] = {
                "mean": float(np.mean(finite)) if finite else None,
                "std": float(np.std(finite, ddof=1)) if len(finite) > 1 else (0.0 if finite else None),
                "n": len(values),
                "infinite": len(values) - len(finite),
            }
    return QualityReport(pairs=pairs, aggregates=aggregates, unmatched=unmatched, ssim_config=cfg)
