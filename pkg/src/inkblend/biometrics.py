"""Verification-performance evaluation from scores or embeddings.

Scores are dissimilarities (Euclidean distances): a comparison is a
match when its score is at or below the decision threshold. Rates are
empirical step functions over the observed scores, with no distribution
fitting or interpolation, so every number is exactly reproducible from
the score lists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, InvalidPairError

TABLE_FMR_TARGETS = (0.001, 0.01)  # FMR = 0.1% and 1% operating points


def euclidean_distance(a: np.ndarray, b: np.ndarray) -> float:
    """L2 distance between two feature vectors of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidPairError(f"vectors must share one dimension, got {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class ScoreSet:
    """Mated and non-mated scores for one condition.

    Scores are dissimilarities throughout this module (lower means more
    similar); the convention field records that and rejects anything
    else rather than silently flipping comparisons.
    """

    mated: np.ndarray
    nonmated: np.ndarray
    convention: str = "dissimilarity"

    def __post_init__(self) -> None:
        if self.convention != "dissimilarity":
            raise InvalidInputError(f"unsupported score convention {self.convention!r}")
        mated = np.array(self.mated, dtype=np.float64, copy=True)
        nonmated = np.array(self.nonmated, dtype=np.float64, copy=True)
        if not (np.all(np.isfinite(mated)) and np.all(np.isfinite(nonmated))):
            raise InvalidInputError("scores must be finite")
        mated.setflags(write=False)
        nonmated.setflags(write=False)
        object.__setattr__(self, "mated", mated)
        object.__setattr__(self, "nonmated", nonmated)

    def _require_nonempty(self) -> None:
        if self.mated.size == 0 or self.nonmated.size == 0:
            raise InvalidInputError("rate computation needs non-empty mated and non-mated lists")


def error_rates(s: ScoreSet, threshold: float) -> tuple[float, float]:
    """(FMR, FNMR) at a threshold: match decided when score <= threshold."""
    s._require_nonempty()
    fmr = float(np.count_nonzero(s.nonmated <= threshold)) / s.nonmated.size
    fnmr = float(np.count_nonzero(s.mated > threshold)) / s.mated.size
    return fmr, fnmr


def threshold_at_fmr(nonmated: np.ndarray, target: float) -> float:
    """Largest threshold whose FMR does not exceed the target.

    Placed at the midpoint between the last admissible score and the
    next one, so ties in the score list cannot push the FMR above the
    target; if even the smallest score is inadmissible the threshold
    sits one unit below it (FMR = 0).
    """
    nonmated = np.asarray(nonmated, dtype=np.float64)
    if nonmated.size == 0:
        raise InvalidInputError("non-mated score list is empty")
    if not 0.0 < target < 1.0:
        raise InvalidInputError(f"target FMR must be in (0, 1), got {target}")
    values = np.unique(nonmated)
    counts = np.searchsorted(np.sort(nonmated), values, side="right")
    admissible = np.nonzero(counts / nonmated.size <= target)[0]
    if admissible.size == 0:
        return float(values[0] - 1.0)
    i = int(admissible[-1])
    if i + 1 < values.size:
        return float((values[i] + values[i + 1]) / 2.0)
    return float(values[-1] + 1.0)


def _threshold_candidates(s: ScoreSet) -> np.ndarray:
    values = np.unique(np.concatenate([s.mated, s.nonmated]))
    mids = (values[:-1] + values[1:]) / 2.0
    return np.sort(np.concatenate([[values[0] - 1.0], values, mids, [values[-1] + 1.0]]))


def eer(s: ScoreSet) -> float:
    """Equal error rate: (FMR + FNMR) / 2 where they come closest.

    Exhaustive sweep over all score values and midpoints; ties prefer
    the smaller rate sum, then the smaller threshold.
    """
    s._require_nonempty()
    cands = _threshold_candidates(s)
    nm = np.sort(s.nonmated)
    m = np.sort(s.mated)
    fmr = np.searchsorted(nm, cands, side="right") / nm.size
    fnmr = (m.size - np.searchsorted(m, cands, side="right")) / m.size
    gap = np.abs(fmr - fnmr)
    best = np.lexsort((cands, fmr + fnmr, gap))[0]
    return float((fmr[best] + fnmr[best]) / 2.0)


def boxplot_stats(values: np.ndarray) -> dict:
    """Five-number summary with 1.5*IQR outliers.

    Quartiles use linear interpolation of the (n+1)p order-statistic
    positions, matching hand computation on small samples.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidInputError("cannot summarize an empty score list")
    q1, median, q3 = (float(np.percentile(values, q, method="weibull")) for q in (25, 50, 75))
    iqr = q3 - q1
    low_fence = q1 - 1.5 * iqr
    high_fence = q3 + 1.5 * iqr
    outliers = values[(values < low_fence) | (values > high_fence)]
    return {
        "min": float(values.min()),
        "q1": q1,
        "median": median,
        "q3": q3,
        "max": float(values.max()),
        "outliers": sorted(float(v) for v in outliers),
    }


@dataclass
class ConditionResult:
    condition: str
    eer: float
    fnmr_at_fmr: dict[float, float]
    thresholds: dict[float, float]
    boxplot: dict[str, dict]
    mated_count: int
    nonmated_count: int


@dataclass
class BiometricReport:
    conditions: list[ConditionResult]
    missing: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "conditions": [
                {
                    "condition": c.condition,
                    "eer_percent": c.eer * 100.0,
                    "fnmr_percent_at_fmr": {f"{t:g}": c.fnmr_at_fmr[t] * 100.0 for t in c.fnmr_at_fmr},
                    "thresholds": {f"{t:g}": c.thresholds[t] for t in c.thresholds},
                    "boxplot": c.boxplot,
                    "mated": c.mated_count,
                    "nonmated": c.nonmated_count,
                }
                for c in self.conditions
            ],
            "missing": self.missing,
        }

    def write_csv(self, path: str | Path) -> None:
        """Type | EER% | FNMR% at FMR=0.1% | FNMR% at FMR=1%."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["type", "eer_pct", "fnmr_pct_at_fmr_0.1pct", "fnmr_pct_at_fmr_1pct"])
            for c in self.conditions:
                writer.writerow(
                    [
                        c.condition,
                        f"{c.eer * 100.0:.2f}",
                        f"{c.fnmr_at_fmr[0.001] * 100.0:.2f}",
                        f"{c.fnmr_at_fmr[0.01] * 100.0:.2f}",
                    ]
                )


def evaluate_scores(score_sets: dict[str, ScoreSet], missing: list[str] | None = None) -> BiometricReport:
    """Full report (EER, FNMR at the fixed FMR operating points, boxplots)."""
    conditions = []
    for name in sorted(score_sets):
        s = score_sets[name]
        s._require_nonempty()
        thresholds = {t: threshold_at_fmr(s.nonmated, t) for t in TABLE_FMR_TARGETS}
        fnmr_at = {t: error_rates(s, thresholds[t])[1] for t in TABLE_FMR_TARGETS}
        conditions.append(
            ConditionResult(
                condition=name,
                eer=eer(s),
                fnmr_at_fmr=fnmr_at,
                thresholds=thresholds,
                boxplot={"mated": boxplot_stats(s.mated), "nonmated": boxplot_stats(s.nonmated)},
                mated_count=int(s.mated.size),
                nonmated_count=int(s.nonmated.size),
            )
        )
    return BiometricReport(conditions=conditions, missing=missing or [])


# --- file inputs --------------------------------------------------------------


def load_score_csv(path: str | Path) -> dict[str, ScoreSet]:
    """Read 'condition,label,score' rows; label is mated or nonmated."""
    buckets: dict[str, dict[str, list[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"condition", "label", "score"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InvalidInputError(f"{path}: score CSV must have header {sorted(required)}")
        for row in reader:
            label = row["label"].strip().lower()
            if label not in ("mated", "nonmated"):
                raise InvalidInputError(f"{path}: label must be mated or nonmated, got {row['label']!r}")
            buckets.setdefault(row["condition"], {"mated": [], "nonmated": []})[label].append(float(row["score"]))
    if not buckets:
        raise InvalidInputError(f"{path}: no score rows")
    return {
        name: ScoreSet(mated=np.array(b["mated"]), nonmated=np.array(b["nonmated"]))
        for name, b in buckets.items()
    }


def load_embeddings_csv(path: str | Path) -> dict[tuple[str, str], np.ndarray]:
    """Read 'subject,probe,v0,v1,...' rows into keyed feature vectors."""
    vectors: dict[tuple[str, str], np.ndarray] = {}
    dim: int | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if i == 0 and row[:2] == ["subject", "probe"]:
                continue
            if len(row) < 3:
                raise InvalidInputError(f"{path}: row {i + 1} has no vector components")
            vec = np.array([float(v) for v in row[2:]], dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise InvalidInputError(f"{path}: row {i + 1} has non-finite components")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise InvalidInputError(f"{path}: row {i + 1} has dimension {vec.size}, expected {dim}")
            vectors[(row[0], row[1])] = vec
    if not vectors:
        raise InvalidInputError(f"{path}: no embeddings")
    return vectors


def score_sets_from_embeddings(
    vectors: dict[tuple[str, str], np.ndarray],
    pairs_path: str | Path,
) -> tuple[dict[str, ScoreSet], list[str]]:
    """Build per-condition score sets from a pairing manifest.

    Pairing CSV header: condition,label,subject_a,probe_a,subject_b,probe_b.
    Pairs referencing unknown embeddings are reported and excluded.
    """
    buckets: dict[str, dict[str, list[float]]] = {}
    missing: list[str] = []
    with open(pairs_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"condition", "label", "subject_a", "probe_a", "subject_b", "probe_b"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InvalidInputError(f"{pairs_path}: pairing CSV must have header {sorted(required)}")
        for row in reader:
            key_a = (row["subject_a"], row["probe_a"])
            key_b = (row["subject_b"], row["probe_b"])
            if key_a not in vectors or key_b not in vectors:
                missing.append(f"{row['condition']}: {key_a} vs {key_b}")
                continue
            label = row["label"].strip().lower()
            if label not in ("mated", "nonmated"):
                raise InvalidInputError(f"{pairs_path}: label must be mated or nonmated, got {row['label']!r}")
            score = euclidean_distance(vectors[key_a], vectors[key_b])
            buckets.setdefault(row["condition"], {"mated": [], "nonmated": []})[label].append(score)
    score_sets = {
        name: ScoreSet(mated=np.array(b["mated"]), nonmated=np.array(b["nonmated"]))
        for name, b in buckets.items()
    }
    return score_sets, missing
