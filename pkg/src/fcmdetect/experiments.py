"""Parameter sweeps, learning curves and benchmarks over a dataset split.

Every runner returns plain rows and has a matching ``save_*`` emitter that
writes a CSV (or JSON) artifact plus a ``*.params.json`` sidecar recording
how the run was configured.  Metric columns are deterministic for a fixed
(dataset, seed, parameters) triple; timing columns are environment-bound
and excluded from any reproducibility expectations.
"""

from __future__ import annotations

import csv
import json
import logging
import resource
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from fcmdetect import __version__
from fcmdetect.alphabet import Alphabet, filter_text, preset_alphabet
from fcmdetect.classifier import BinaryClassifier
from fcmdetect.dataset import DatasetSplit, LabeledSample, build_reference
from fcmdetect.fcm import ContextModel
from fcmdetect.metrics import score

logger = logging.getLogger(__name__)


class ExperimentError(ValueError):
    """Invalid sweep configuration or a failure annotated with its cell."""


@dataclass(frozen=True)
class GridCell:
    k: int
    alpha: float
    f1: float
    accuracy: float
    train_seconds: float
    eval_seconds: float
    eval_chars_per_second: float


@dataclass(frozen=True)
class TrimRow:
    alphabet: str
    f1: float


@dataclass(frozen=True)
class CurvePoint:
    x: int
    accuracy: float
    f1: float
    n_scored: int


def _two_labels(samples: Sequence[LabeledSample], where: str) -> tuple[str, str]:
    labels = sorted({s.label for s in samples})
    if len(labels) != 2:
        raise ExperimentError(f"{where} must contain exactly two classes, got {labels}")
    return labels[0], labels[1]


def _pick_positive(labels: tuple[str, str], positive_label: str | None) -> str:
    if positive_label is None:
        return labels[0]
    if positive_label not in labels:
        raise ExperimentError(f"positive label {positive_label!r} not among classes {labels}")
    return positive_label


def _build_pair(
    split_train: Sequence[LabeledSample],
    labels: tuple[str, str],
    k: int,
    alphabet: Alphabet,
    lowercase: bool,
) -> tuple[ContextModel, ContextModel]:
    models = []
    for lab in labels:
        group = [s for s in split_train if s.label == lab]
        _, model = build_reference(group, k=k, alphabet=alphabet, lowercase=lowercase)
        models.append(model)
    return models[0], models[1]


def _evaluate(
    clf: BinaryClassifier, samples: Sequence[LabeledSample], positive_label: str
) -> tuple[float, float, int, int]:
    """Accuracy, f1, scored count and raw chars over a labeled sample list."""
    pairs = []
    chars = 0
    for s in samples:
        decision = clf.classify(s.text)
        pairs.append((s.label, decision.label))
        chars += len(s.text)
    report = score(pairs, positive_label=positive_label)
    return report.accuracy, report.f1, len(pairs), chars


def grid_search(
    split: DatasetSplit,
    k_values: Sequence[int],
    alpha_values: Sequence[float],
    alphabet: Alphabet,
    lowercase: bool = True,
    positive_label: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[GridCell]:
    """Sweep (k, alpha) pairs: train per k, evaluate on validation per alpha.

    Models are trained once per k and reused across the alpha values, which
    cannot change results because classification never mutates a model.
    Rows come back in the given k-major, alpha-minor order.
    """
    if not k_values or not alpha_values:
        raise ExperimentError("k_values and alpha_values must both be nonempty")
    labels = _two_labels(split.train, "training partition")
    positive = _pick_positive(labels, positive_label)
    rows: list[GridCell] = []
    for k in k_values:
        t0 = time.perf_counter()
        try:
            model_a, model_b = _build_pair(split.train, labels, k, alphabet, lowercase)
        except ValueError as exc:
            raise ExperimentError(f"grid cell k={k}: training failed: {exc}") from exc
        train_seconds = time.perf_counter() - t0
        for alpha in alpha_values:
            try:
                clf = BinaryClassifier(
                    model_a=model_a,
                    model_b=model_b,
                    label_a=labels[0],
                    label_b=labels[1],
                    alphabet=alphabet,
                    alpha=alpha,
                    lowercase=lowercase,
                )
                t1 = time.perf_counter()
                accuracy, f1, _, chars = _evaluate(clf, split.validation, positive)
                eval_seconds = time.perf_counter() - t1
            except ValueError as exc:
                raise ExperimentError(
                    f"grid cell k={k}, alpha={alpha}: evaluation failed: {exc}"
                ) from exc
            rows.append(
                GridCell(
                    k=int(k),
                    alpha=float(alpha),
                    f1=f1,
                    accuracy=accuracy,
                    train_seconds=train_seconds,
                    eval_seconds=eval_seconds,
                    eval_chars_per_second=chars / eval_seconds if eval_seconds > 0 else 0.0,
                )
            )
            if progress is not None:
                progress(f"grid k={k} alpha={alpha}: f1={f1:.4f} accuracy={accuracy:.4f}")
    return rows


def alphabet_trim_study(
    split: DatasetSplit,
    k: int = 8,
    alpha: float = 0.5,
    presets: Sequence[str] = ("sigma1", "sigma2", "sigma3", "sigma4"),
    lowercase: bool = True,
    positive_label: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[TrimRow]:
    """Hold (k, alpha) fixed and re-run the pipeline per alphabet preset.

    Filtering happens per preset, so each alphabet sees its own view of the
    same raw text.
    """
    if not presets:
        raise ExperimentError("need at least one alphabet preset")
    labels = _two_labels(split.train, "training partition")
    positive = _pick_positive(labels, positive_label)
    rows: list[TrimRow] = []
    for name in presets:
        try:
            alphabet = preset_alphabet(name)
            model_a, model_b = _build_pair(split.train, labels, k, alphabet, lowercase)
            clf = BinaryClassifier(
                model_a=model_a,
                model_b=model_b,
                label_a=labels[0],
                label_b=labels[1],
                alphabet=alphabet,
                alpha=alpha,
                lowercase=lowercase,
            )
            _, f1, _, _ = _evaluate(clf, split.validation, positive)
        except ValueError as exc:
            raise ExperimentError(f"alphabet {name!r}: {exc}") from exc
        rows.append(TrimRow(alphabet=name, f1=f1))
        if progress is not None:
            progress(f"alphabet {name}: f1={f1:.4f}")
    return rows


def reference_length_curve(
    split: DatasetSplit,
    k: int,
    alpha: float,
    alphabet: Alphabet,
    start: int = 100_000,
    step: int = 100_000,
    max_chars: int | None = None,
    lowercase: bool = True,
    positive_label: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[CurvePoint]:
    """Accuracy and f1 on the test partition as reference size grows.

    At each point both class references are rebuilt truncated to exactly L
    filtered characters; the curve stops when either class runs out of
    material (or at ``max_chars``).
    """
    if step < 1:
        raise ExperimentError(f"step must be >= 1, got {step}")
    if start <= k:
        raise ExperimentError(f"start must exceed k={k}, got {start}")
    labels = _two_labels(split.train, "training partition")
    positive = _pick_positive(labels, positive_label)
    groups = {lab: [s for s in split.train if s.label == lab] for lab in labels}
    available = {
        lab: sum(len(filter_text(s.text, alphabet, lowercase=lowercase)) for s in group)
        for lab, group in groups.items()
    }
    limit = min(available.values())
    if max_chars is not None:
        limit = min(limit, max_chars)
    if start > limit:
        raise ExperimentError(
            f"start={start} exceeds usable reference material ({limit} chars); "
            f"per-class availability: {available}"
        )
    points: list[CurvePoint] = []
    length = start
    while length <= limit:
        models = {}
        for lab in labels:
            ref, model = build_reference(
                groups[lab], k=k, alphabet=alphabet, lowercase=lowercase, max_chars=length
            )
            models[lab] = model
        clf = BinaryClassifier(
            model_a=models[labels[0]],
            model_b=models[labels[1]],
            label_a=labels[0],
            label_b=labels[1],
            alphabet=alphabet,
            alpha=alpha,
            lowercase=lowercase,
        )
        try:
            accuracy, f1, n_scored, _ = _evaluate(clf, split.test, positive)
        except ValueError as exc:
            raise ExperimentError(f"reference length {length}: {exc}") from exc
        points.append(CurvePoint(x=length, accuracy=accuracy, f1=f1, n_scored=n_scored))
        if progress is not None:
            progress(f"ref_chars={length}: accuracy={accuracy:.4f} f1={f1:.4f}")
        length += step
    return points


def target_prefix_curve(
    classifier: BinaryClassifier,
    samples: Sequence[LabeledSample],
    samples_per_class: int = 1500,
    max_prefix: int = 1500,
    prefix_step: int = 50,
    positive_label: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[CurvePoint]:
    """Accuracy and f1 as a function of how much of each target is read.

    Per class, the ``samples_per_class`` shortest qualifying samples (those
    with at least ``max_prefix`` filtered characters) are fixed once; each
    point classifies their first N symbols.  Points with N <= k are skipped
    with a warning since nothing is scorable there.
    """
    if prefix_step < 1:
        raise ExperimentError(f"prefix_step must be >= 1, got {prefix_step}")
    if max_prefix < prefix_step:
        raise ExperimentError(f"max_prefix={max_prefix} is below prefix_step={prefix_step}")
    if samples_per_class < 1:
        raise ExperimentError(f"samples_per_class must be >= 1, got {samples_per_class}")
    labels = _two_labels(samples, "prefix-curve sample set")
    positive = _pick_positive(labels, positive_label)
    if set(labels) != set(classifier.labels):
        raise ExperimentError(
            f"sample classes {labels} do not match classifier labels {classifier.labels}"
        )
    chosen: list[tuple[str, object]] = []
    for lab in labels:
        qualifying = []
        for s in samples:
            if s.label != lab:
                continue
            seq = filter_text(s.text, classifier.alphabet, lowercase=classifier.lowercase)
            if len(seq) >= max_prefix:
                qualifying.append((len(seq), s.id, seq))
        if len(qualifying) < samples_per_class:
            raise ExperimentError(
                f"class {lab!r} has {len(qualifying)} samples with >= {max_prefix} "
                f"filtered chars; need {samples_per_class}"
            )
        qualifying.sort(key=lambda t: (t[0], t[1]))
        chosen.extend((lab, seq) for _, _, seq in qualifying[:samples_per_class])

    points: list[CurvePoint] = []
    for n in range(prefix_step, max_prefix + 1, prefix_step):
        if n <= classifier.k:
            logger.warning(
                "prefix length %d <= k=%d has no scorable positions; point skipped",
                n,
                classifier.k,
            )
            continue
        pairs = []
        for lab, seq in chosen:
            decision = classifier.classify_indices(seq[:n])
            pairs.append((lab, decision.label))
        report = score(pairs, positive_label=positive)
        points.append(CurvePoint(x=n, accuracy=report.accuracy, f1=report.f1, n_scored=len(pairs)))
        if progress is not None:
            progress(f"prefix={n}: accuracy={report.accuracy:.4f} f1={report.f1:.4f}")
    return points


def throughput_bench(
    classifier: BinaryClassifier,
    texts: Sequence[str],
    repetitions: int = 3,
    model_build_seconds: float | None = None,
) -> dict:
    """Single-worker inference benchmark over a fixed text list.

    Runs the whole list ``repetitions`` times and reports the best pass,
    so one descheduling hiccup cannot sink the numbers.  Character counts
    are raw input characters, before any filtering.
    """
    if repetitions < 1:
        raise ExperimentError(f"repetitions must be >= 1, got {repetitions}")
    if not texts:
        raise ExperimentError("benchmark needs at least one text")
    chars = sum(len(t) for t in texts)
    best = None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        for t in texts:
            classifier.classify(t)
        elapsed = time.perf_counter() - t0
        if best is None or elapsed < best:
            best = elapsed
    best = max(best, 1e-9)
    peak_rss_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return {
        "samples": len(texts),
        "total_chars": chars,
        "repetitions": repetitions,
        "best_pass_seconds": best,
        "samples_per_second": len(texts) / best,
        "chars_per_second": chars / best,
        "peak_rss_bytes": peak_rss_kb * 1024,
        "model_build_seconds": model_build_seconds,
    }


# ----------------------------------------------------------------------
# artifact emitters

GRID_CSV = "grid_search.csv"
TRIM_CSV = "alphabet_trim.csv"
REF_LENGTH_CSV = "ref_length.csv"
TARGET_PREFIX_CSV = "target_prefix.csv"
THROUGHPUT_JSON = "throughput.json"

GRID_COLUMNS = ["k", "alpha", "f1", "accuracy", "train_seconds", "eval_seconds", "eval_chars_per_second"]
TRIM_COLUMNS = ["alphabet", "f1"]
REF_LENGTH_COLUMNS = ["ref_chars", "accuracy", "f1", "n_scored"]
TARGET_PREFIX_COLUMNS = ["prefix_chars", "accuracy", "f1", "n_scored"]


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _write_sidecar(artifact_path: Path, params: dict) -> Path:
    sidecar = artifact_path.with_suffix(".params.json")
    payload = dict(params)
    payload.setdefault("artifact", artifact_path.name)
    payload.setdefault("tool_version", __version__)
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return sidecar


def save_grid_search(rows: Sequence[GridCell], out_dir: str | Path, params: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / GRID_CSV
    _write_csv(
        path,
        GRID_COLUMNS,
        [
            [r.k, r.alpha, r.f1, r.accuracy, r.train_seconds, r.eval_seconds, r.eval_chars_per_second]
            for r in rows
        ],
    )
    _write_sidecar(path, params)
    return path


def save_trim_study(rows: Sequence[TrimRow], out_dir: str | Path, params: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / TRIM_CSV
    _write_csv(path, TRIM_COLUMNS, [[r.alphabet, r.f1] for r in rows])
    _write_sidecar(path, params)
    return path


def save_curve(
    points: Sequence[CurvePoint],
    out_dir: str | Path,
    filename: str,
    x_column: str,
    params: dict,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    _write_csv(
        path,
        [x_column, "accuracy", "f1", "n_scored"],
        [[p.x, p.accuracy, p.f1, p.n_scored] for p in points],
    )
    _write_sidecar(path, params)
    return path


def save_throughput(report: dict, out_dir: str | Path, params: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / THROUGHPUT_JSON
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_sidecar(path, params)
    return path
