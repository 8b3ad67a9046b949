"""Loading, cleaning, partitioning and reference-building for labeled text.

The cleaning pipeline runs three ordered stages: exact-duplicate removal
(on the alphabet-filtered symbol sequence), short-sample removal, and
character-count balancing between the two classes.  Splitting shuffles each
class independently with a seeded generator, so a (data, seed, ratios)
triple always reproduces the same partitions.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from fcmdetect.alphabet import Alphabet, filter_text
from fcmdetect.fcm import ContextModel


class DatasetError(ValueError):
    """Raised for unreadable files, empty results, or impossible requests."""


@dataclass(frozen=True)
class LabeledSample:
    """One text with its class label and a stable id."""

    id: str
    text: str
    label: str


@dataclass(frozen=True)
class LoadReport:
    """What a load pass saw: record totals and per-reason skip counts."""

    path: str
    total_records: int
    loaded: int
    skipped_empty_text: int
    skipped_unmapped_label: int

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "total_records": self.total_records,
            "loaded": self.loaded,
            "skipped_empty_text": self.skipped_empty_text,
            "skipped_unmapped_label": self.skipped_unmapped_label,
        }


@dataclass(frozen=True)
class ClassCleaningStats:
    removed_duplicates: int = 0
    removed_short: int = 0
    removed_balance: int = 0
    kept: int = 0
    kept_chars: int = 0


@dataclass(frozen=True)
class PreprocessReport:
    """Per-class removal counts for each cleaning stage."""

    per_class: dict[str, ClassCleaningStats]

    def to_dict(self) -> dict:
        return {
            label: {
                "removed_duplicates": s.removed_duplicates,
                "removed_short": s.removed_short,
                "removed_balance": s.removed_balance,
                "kept": s.kept,
                "kept_chars": s.kept_chars,
            }
            for label, s in sorted(self.per_class.items())
        }


@dataclass(frozen=True)
class DatasetSplit:
    """Train/validation/test partitions plus the recipe that made them."""

    train: list[LabeledSample]
    validation: list[LabeledSample]
    test: list[LabeledSample]
    seed: int
    ratios: tuple[float, float, float]


@dataclass(frozen=True)
class ClassReference:
    """Where one class's training material came from."""

    label: str
    total_chars: int
    sample_ids: list[str]
    build_seconds: float


# ----------------------------------------------------------------------
# loading


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}, line {lineno + 1}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DatasetError(f"{path}, line {lineno + 1}: record is not a JSON object")
            yield lineno, record


def _iter_csv(path: Path, delimiter: str) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file, expected a header row")
        try:
            for ordinal, record in enumerate(reader):
                yield ordinal, record
        except csv.Error as exc:
            raise DatasetError(f"{path}, row {reader.line_num}: malformed CSV: {exc}") from exc


def load_dataset(
    path: str | Path,
    format: str | None = None,
    text_field: str = "text",
    label_field: str = "label",
    label_map: Mapping[str, str] | None = None,
    delimiter: str = ",",
) -> tuple[list[LabeledSample], LoadReport]:
    """Read labeled samples from a CSV or JSONL file.

    ``format`` is inferred from the suffix when omitted.  Records with a
    missing or empty text field are skipped and counted; so are records
    whose raw label is absent from ``label_map`` when a map is given.
    Malformed syntax raises :class:`DatasetError` naming the location.
    Sample ids are ``<basename>:<ordinal>`` in file order, so they are
    stable across reloads.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such dataset file: {path}")
    if format is None:
        suffix = path.suffix.lower()
        format = {"csv": "csv", "jsonl": "jsonl", "ndjson": "jsonl", "json": "jsonl"}.get(
            suffix.lstrip(".")
        )
        if format is None:
            raise DatasetError(f"cannot infer format from suffix {suffix!r}; pass format=")
    if format == "jsonl":
        records = _iter_jsonl(path)
    elif format == "csv":
        records = _iter_csv(path, delimiter)
    else:
        raise DatasetError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")

    samples: list[LabeledSample] = []
    total = empty_text = unmapped = 0
    for ordinal, record in records:
        total += 1
        text = record.get(text_field)
        raw_label = record.get(label_field)
        if text is None or not str(text).strip():
            empty_text += 1
            continue
        if raw_label is None or not str(raw_label).strip():
            unmapped += 1
            continue
        raw_label = str(raw_label).strip()
        if label_map is not None:
            label = label_map.get(raw_label)
            if label is None:
                unmapped += 1
                continue
        else:
            label = raw_label
        samples.append(LabeledSample(id=f"{path.name}:{ordinal}", text=str(text), label=label))
    if not samples:
        raise DatasetError(f"{path}: no usable records (saw {total}, all skipped)")
    report = LoadReport(
        path=str(path),
        total_records=total,
        loaded=len(samples),
        skipped_empty_text=empty_text,
        skipped_unmapped_label=unmapped,
    )
    return samples, report


# ----------------------------------------------------------------------
# cleaning


def preprocess(
    samples: Sequence[LabeledSample],
    alphabet: Alphabet,
    lowercase: bool = True,
    min_chars: int = 50,
    balance: bool = True,
) -> tuple[list[LabeledSample], PreprocessReport]:
    """Clean a sample list in three ordered stages.

    1. Drop exact duplicates of the alphabet-filtered symbol sequence,
       keeping the first occurrence in input order.
    2. Drop samples whose filtered sequence is shorter than ``min_chars``.
    3. When balancing, repeatedly drop the longest remaining sample of the
       class with more filtered characters, but only while the class totals
       differ by at least that sample's length, so a drop never overshoots
       the balance point.

    Surviving samples keep their input order.  A class that started nonempty
    but lost every sample raises :class:`DatasetError`.
    """
    if min_chars < 0:
        raise DatasetError(f"min_chars must be >= 0, got {min_chars}")
    if not samples:
        raise DatasetError("no samples to preprocess")
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise DatasetError("sample ids must be unique")

    filtered_len: dict[str, int] = {}
    dup_removed: dict[str, int] = {}
    short_removed: dict[str, int] = {}
    bal_removed: dict[str, int] = {}
    initial_labels = sorted({s.label for s in samples})

    seen: set[bytes] = set()
    survivors: list[LabeledSample] = []
    for s in samples:
        seq = filter_text(s.text, alphabet, lowercase=lowercase)
        key = seq.tobytes()
        if key in seen:
            dup_removed[s.label] = dup_removed.get(s.label, 0) + 1
            continue
        seen.add(key)
        filtered_len[s.id] = len(seq)
        survivors.append(s)

    stage2: list[LabeledSample] = []
    for s in survivors:
        if filtered_len[s.id] < min_chars:
            short_removed[s.label] = short_removed.get(s.label, 0) + 1
        else:
            stage2.append(s)

    kept = stage2
    if balance:
        labels_now = sorted({s.label for s in stage2})
        if len(labels_now) == 2:
            kept = _balance_classes(stage2, filtered_len, bal_removed, labels_now)
        elif len(labels_now) > 2:
            raise DatasetError(f"balancing requires exactly two classes, got {labels_now}")

    final_labels = {s.label for s in kept}
    lost = [lab for lab in initial_labels if lab not in final_labels]
    if lost:
        raise DatasetError(f"cleaning removed every sample of class(es) {lost}")

    per_class: dict[str, ClassCleaningStats] = {}
    for lab in initial_labels:
        members = [s for s in kept if s.label == lab]
        per_class[lab] = ClassCleaningStats(
            removed_duplicates=dup_removed.get(lab, 0),
            removed_short=short_removed.get(lab, 0),
            removed_balance=bal_removed.get(lab, 0),
            kept=len(members),
            kept_chars=sum(filtered_len[s.id] for s in members),
        )
    return kept, PreprocessReport(per_class=per_class)


def _balance_classes(
    samples: list[LabeledSample],
    filtered_len: dict[str, int],
    removed: dict[str, int],
    labels: list[str],
) -> list[LabeledSample]:
    totals = {lab: 0 for lab in labels}
    for s in samples:
        totals[s.label] += filtered_len[s.id]
    # Longest-first drop queue per class; ties broken by id for determinism.
    queues = {
        lab: sorted(
            (s for s in samples if s.label == lab),
            key=lambda s: (-filtered_len[s.id], s.id),
        )
        for lab in labels
    }
    cursor = {lab: 0 for lab in labels}
    dropped: set[str] = set()
    while True:
        a, b = labels
        larger = a if totals[a] > totals[b] else b
        diff = abs(totals[a] - totals[b])
        if diff == 0:
            break
        q, i = queues[larger], cursor[larger]
        if i >= len(q):
            break
        cand = q[i]
        length = filtered_len[cand.id]
        # Dropping a sample longer than the gap would overshoot; stop there.
        if length == 0 or diff < length:
            break
        dropped.add(cand.id)
        removed[larger] = removed.get(larger, 0) + 1
        totals[larger] -= length
        cursor[larger] = i + 1
    return [s for s in samples if s.id not in dropped]


# ----------------------------------------------------------------------
# splitting


def split(
    samples: Sequence[LabeledSample],
    seed: int,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> DatasetSplit:
    """Partition samples into train/validation/test, stratified by class.

    Each class is shuffled with its own slice of a generator seeded by
    ``seed`` and cut contiguously.  Counts are the floor of ratio * n with
    leftovers assigned to train, then validation, then test.  Classes with
    fewer than 10 samples are refused.
    """
    if len(ratios) != 3:
        raise DatasetError(f"need exactly three ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise DatasetError(f"ratios must be nonnegative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DatasetError(f"ratios must sum to 1, got {sum(ratios)}")
    by_label: dict[str, list[LabeledSample]] = {}
    for s in samples:
        by_label.setdefault(s.label, []).append(s)
    for lab, group in sorted(by_label.items()):
        if len(group) < 10:
            raise DatasetError(f"class {lab!r} has only {len(group)} samples; need at least 10")

    rng = np.random.default_rng(seed)
    train: list[LabeledSample] = []
    validation: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for lab in sorted(by_label):
        group = by_label[lab]
        perm = rng.permutation(len(group))
        shuffled = [group[int(i)] for i in perm]
        n = len(group)
        counts = [int(n * r) for r in ratios]
        leftover = n - sum(counts)
        for i in range(3):
            if leftover == 0:
                break
            counts[i] += 1
            leftover -= 1
        a, b = counts[0], counts[0] + counts[1]
        train.extend(shuffled[:a])
        validation.extend(shuffled[a:b])
        test.extend(shuffled[b:])
    return DatasetSplit(train=train, validation=validation, test=test, seed=seed, ratios=tuple(ratios))


# ----------------------------------------------------------------------
# reference building


def build_reference(
    samples: Sequence[LabeledSample],
    k: int,
    alphabet: Alphabet,
    lowercase: bool = True,
    max_chars: int | None = None,
) -> tuple[ClassReference, ContextModel]:
    """Train one class model from a single-class sample list.

    Samples are consumed in id order, each as its own training window (no
    context bleeds between samples).  With ``max_chars`` set, the last
    sample is truncated so the total lands exactly on the cap, and the
    total can fall short only when the class runs out of characters.
    """
    if not samples:
        raise DatasetError("cannot build a reference from zero samples")
    labels = {s.label for s in samples}
    if len(labels) != 1:
        raise DatasetError(f"reference samples must share one label, got {sorted(labels)}")
    if max_chars is not None and max_chars < 1:
        raise DatasetError(f"max_chars must be >= 1, got {max_chars}")
    label = next(iter(labels))
    model = ContextModel(k, alphabet.size)
    t0 = time.perf_counter()
    total = 0
    used_ids: list[str] = []
    for s in sorted(samples, key=lambda s: s.id):
        seq = filter_text(s.text, alphabet, lowercase=lowercase)
        if max_chars is not None and total + len(seq) >= max_chars:
            seq = seq[: max_chars - total]
            model.train(seq)
            total += len(seq)
            used_ids.append(s.id)
            break
        model.train(seq)
        total += len(seq)
        used_ids.append(s.id)
    ref = ClassReference(
        label=label,
        total_chars=total,
        sample_ids=used_ids,
        build_seconds=time.perf_counter() - t0,
    )
    return ref, model
