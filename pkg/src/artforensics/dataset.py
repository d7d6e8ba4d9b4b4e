"""Directory-per-class ingestion, the feature cache, and stratified splits.

Layout on disk is ``root/<class_name>/<image files>``. A class whose name
starts with ``AI-`` (any case) is AI-generated (binary label 1); every
other class is human-made (binary label 0).

The feature cache is a CSV with the 39 feature columns followed by
``class_label`` (the class name), ``binary_label`` and ``path``, plus a
JSON sidecar (``<csv>.meta.json``) holding the extractor configuration,
the ordered class names and a SHA-256 of every source file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from artforensics import imaging
from artforensics.errors import (
    DecodeError,
    EmptyDataset,
    InvalidInput,
    ShapeError,
    StratificationError,
)
from artforensics.features import FEATURE_NAMES, ExtractorConfig, extract_all

log = logging.getLogger(__name__)

LABEL_COLUMNS = ("class_label", "binary_label", "path")
CSV_HEADER = FEATURE_NAMES + LABEL_COLUMNS
SIDECAR_SUFFIX = ".meta.json"


def binary_label_for(class_name: str) -> int:
    """1 for AI-generated classes (``AI-`` prefix), 0 otherwise."""
    return int(class_name.lower().startswith("ai-"))


@dataclass(frozen=True)
class Manifest:
    entries: tuple[tuple[str, int], ...]
    class_names: tuple[str, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.entries]


def scan(root_dir: str | os.PathLike) -> Manifest:
    """List ``root_dir/<class>/<image>`` in lexicographic order.

    Files that are not PNG/JPEG by suffix are skipped with a warning, and
    empty class directories are kept with a warning.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"dataset root is not a readable directory: {root}")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    class_names = tuple(p.name for p in class_dirs)
    entries = []
    for label, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.is_file())
        n_images = 0
        for f in files:
            if f.suffix.lower() not in imaging.IMAGE_SUFFIXES:
                log.warning("skipping non-image file %s", f)
                continue
            entries.append((str(f), label))
            n_images += 1
        if n_images == 0:
            log.warning("class directory %s contains no images", cdir)
    return Manifest(entries=tuple(entries), class_names=class_names)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    X: np.ndarray
    class_labels: np.ndarray
    binary_labels: np.ndarray
    paths: tuple[str, ...]
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        n = len(self.paths)
        if self.X.shape != (n, len(self.feature_names)):
            raise ShapeError(f"feature matrix {self.X.shape} does not match {n} rows x "
                             f"{len(self.feature_names)} features")
        if len(self.class_labels) != n or len(self.binary_labels) != n:
            raise ShapeError("label columns must have one entry per row")
        for a in (self.X, self.class_labels, self.binary_labels):
            a.setflags(write=False)

    def __len__(self):
        return len(self.paths)

    def __eq__(self, other):
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return (self.paths == other.paths and self.class_names == other.class_names
                and self.feature_names == other.feature_names
                and np.array_equal(self.X, other.X)
                and np.array_equal(self.class_labels, other.class_labels)
                and np.array_equal(self.binary_labels, other.binary_labels))

    def labels(self, task: str) -> np.ndarray:
        if task == "binary":
            return self.binary_labels
        if task == "multiclass":
            return self.class_labels
        raise InvalidInput(f"unknown task {task!r}")

    def task_class_names(self, task: str) -> tuple[str, ...]:
        return ("human", "ai") if task == "binary" else self.class_names

    def subset(self, rows) -> "FeatureTable":
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureTable(self.X[rows].copy(), self.class_labels[rows].copy(),
                            self.binary_labels[rows].copy(),
                            tuple(self.paths[i] for i in rows), self.class_names,
                            self.feature_names)

    def project(self, names) -> "FeatureTable":
        cols = [self.feature_names.index(n) for n in names]
        return FeatureTable(self.X[:, cols].copy(), self.class_labels.copy(),
                            self.binary_labels.copy(), self.paths, self.class_names,
                            tuple(names))


def _fmt(v: float) -> str:
    return repr(float(v))


def write_table(table: FeatureTable, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(table.feature_names) + list(LABEL_COLUMNS))
        for i in range(len(table)):
            w.writerow([_fmt(v) for v in table.X[i]]
                       + [table.class_names[table.class_labels[i]],
                          int(table.binary_labels[i]), table.paths[i]])


def read_table(path: str | os.PathLike, class_names=None) -> FeatureTable:
    """Load a feature CSV; class order comes from the sidecar when present."""
    path = Path(path)
    if class_names is None:
        meta = read_sidecar(path)
        if meta is not None:
            class_names = tuple(meta.get("class_names", ()))
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInput(f"{path}: empty feature file")
    header = tuple(rows[0])
    if header[-3:] != LABEL_COLUMNS:
        raise InvalidInput(f"{path}: header must end with {', '.join(LABEL_COLUMNS)}")
    feature_names = header[:-3]
    body = rows[1:]
    names_in_file = [r[-3] for r in body]
    if not class_names:
        class_names = tuple(sorted(set(names_in_file)))
    index = {c: i for i, c in enumerate(class_names)}
    missing = sorted(set(names_in_file) - index.keys())
    if missing:
        raise InvalidInput(f"{path}: unknown class names {missing}")
    X = np.array([[float(v) for v in r[:-3]] for r in body], dtype=np.float64)
    X = X.reshape(len(body), len(feature_names))
    return FeatureTable(
        X=X,
        class_labels=np.array([index[c] for c in names_in_file], dtype=np.int64),
        binary_labels=np.array([int(r[-2]) for r in body], dtype=np.int64),
        paths=tuple(r[-1] for r in body),
        class_names=tuple(class_names),
        feature_names=tuple(feature_names),
    )


def sidecar_path(csv_path) -> Path:
    return Path(str(csv_path) + SIDECAR_SUFFIX)


def read_sidecar(csv_path) -> dict | None:
    p = sidecar_path(csv_path)
    if not p.exists():
        return None
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


def write_sidecar(csv_path, meta: dict) -> None:
    with open(sidecar_path(csv_path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class ExtractionReport:
    extracted: int = 0
    cached: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)


def _extract_one(args):
    path, config = args
    try:
        with open(path, "rb") as fh:
            data = fh.read()
        digest = hashlib.sha256(data).hexdigest()
        vec = extract_all(imaging.decode(data, path), config)
        return path, digest, vec, None
    except (DecodeError, OSError, InvalidInput) as exc:
        return path, None, None, str(exc)


def _file_digest(path) -> str | None:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError:
        return None


def _load_cache(cache_path, manifest: Manifest, config: ExtractorConfig):
    """Rows from an existing cache whose file hash still matches, keyed by path."""
    if cache_path is None or not Path(cache_path).exists():
        return {}
    meta = read_sidecar(cache_path)
    if meta is None or meta.get("extractor") != config.to_dict():
        return {}
    try:
        old = read_table(cache_path, class_names=manifest.class_names)
    except (InvalidInput, ShapeError, ValueError):
        log.warning("ignoring unreadable feature cache %s", cache_path)
        return {}
    if old.feature_names != FEATURE_NAMES:
        log.warning("feature cache %s has a foreign header; rebuilding", cache_path)
        return {}
    hashes = meta.get("files", {})
    return {p: (old.X[i], hashes.get(p)) for i, p in enumerate(old.paths)}


def build_feature_table(manifest: Manifest, cache_path=None,
                        config: ExtractorConfig = ExtractorConfig(), workers: int = 1,
                        seed: int | None = None) -> tuple[FeatureTable, ExtractionReport]:
    """Extract features for every manifest entry, reusing valid cached rows.

    Undecodable images are recorded in the returned report and skipped. When
    ``cache_path`` is given the CSV and its sidecar are (re)written.
    """
    report = ExtractionReport()
    cached = _load_cache(cache_path, manifest, config)

    vectors: dict[str, np.ndarray] = {}
    digests: dict[str, str] = {}
    todo = []
    for path, _ in manifest.entries:
        hit = cached.get(path)
        if hit is not None and hit[1] is not None and _file_digest(path) == hit[1]:
            vectors[path] = hit[0]
            digests[path] = hit[1]
            report.cached += 1
        else:
            todo.append(path)

    jobs = [(p, config) for p in todo]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_one, jobs, chunksize=8))
    else:
        results = [_extract_one(j) for j in jobs]
    for path, digest, vec, err in results:
        if err is not None:
            log.warning("feature extraction failed for %s: %s", path, err)
            report.failures.append((path, err))
            continue
        vectors[path] = vec
        digests[path] = digest
        report.extracted += 1

    kept = [(p, c) for p, c in manifest.entries if p in vectors]
    if not kept:
        raise EmptyDataset("no image in the dataset could be processed")
    class_labels = np.array([c for _, c in kept], dtype=np.int64)
    table = FeatureTable(
        X=np.array([vectors[p] for p, _ in kept], dtype=np.float64),
        class_labels=class_labels,
        binary_labels=np.array([binary_label_for(manifest.class_names[c]) for c in class_labels],
                               dtype=np.int64),
        paths=tuple(p for p, _ in kept),
        class_names=manifest.class_names,
    )
    if cache_path is not None:
        write_table(table, cache_path)
        meta = {
            "format": 1,
            "extractor": config.to_dict(),
            "extractor_hash": config.digest(),
            "class_names": list(manifest.class_names),
            "files": {p: digests[p] for p in table.paths},
        }
        if seed is not None:
            meta["seed"] = seed
        write_sidecar(cache_path, meta)
    return table, report


# -- splitting ----------------------------------------------------------------

@dataclass(frozen=True)
class SplitIndex:
    train: np.ndarray
    test: np.ndarray
    validation: np.ndarray | None = None
    seed: int = 0


def _largest_remainder(n: int, ratios) -> np.ndarray:
    quotas = np.asarray(ratios, dtype=np.float64) * n
    counts = np.floor(quotas + 1e-9).astype(np.int64)
    short = n - counts.sum()
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def _class_name(label, class_names):
    if class_names is not None and 0 <= label < len(class_names):
        return class_names[label]
    return str(label)


def stratified_split(labels, ratios=(0.8, 0.2), seed: int = 0, class_names=None) -> SplitIndex:
    """Per-class shuffled split into train/test(/validation) partitions.

    ``ratios`` holds two (train, test) or three (train, test, validation)
    fractions summing to 1. Per-class counts use largest-remainder rounding.
    """
    y = np.asarray(getattr(labels, "class_labels", labels))
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) not in (2, 3) or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) <= 0:
        raise InvalidInput(f"ratios must be 2 or 3 positive fractions summing to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    parts = [[] for _ in ratios]
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        counts = _largest_remainder(len(idx), ratios)
        if counts.min() < 1:
            name = _class_name(int(label), class_names)
            raise StratificationError(
                f"class {name!r} has {len(idx)} samples, too few for split {ratios}", name)
        idx = rng.permutation(idx)
        bounds = np.concatenate([[0], np.cumsum(counts)])
        for p in range(len(ratios)):
            parts[p].append(idx[bounds[p] : bounds[p + 1]])
    parts = [np.sort(np.concatenate(p)) for p in parts]
    return SplitIndex(train=parts[0], test=parts[1],
                      validation=parts[2] if len(parts) == 3 else None, seed=seed)


def kfold(labels, k: int = 5, seed: int = 0, class_names=None) -> list[SplitIndex]:
    """Stratified k-fold partition; every row is in exactly one test fold."""
    y = np.asarray(getattr(labels, "class_labels", labels))
    if k < 2:
        raise InvalidInput(f"k must be at least 2, got {k}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        if len(idx) < k:
            name = _class_name(int(label), class_names)
            raise StratificationError(f"class {name!r} has {len(idx)} samples, fewer than k={k}",
                                      name)
        chunks = np.array_split(rng.permutation(idx), k)
        # Rotate so leftover samples of successive classes go to different folds.
        for f in range(k):
            folds[(f + offset) % k].append(chunks[f])
        offset += len(idx) % k
    all_idx = np.arange(len(y))
    out = []
    for f in range(k):
        test = np.sort(np.concatenate(folds[f]))
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        out.append(SplitIndex(train=train, test=test, seed=seed))
    return out
