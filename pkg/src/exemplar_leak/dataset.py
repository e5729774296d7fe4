"""Trial container, on-disk format, validation and feature flattening.

On disk a dataset is a pair of files: ``manifest.json`` describing shapes
and per-trial labels, and a raw little-endian float32 payload holding all
trial matrices back to back in [trial][channel][sample] order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedManifest,
    MissingFile,
    NonFiniteValue,
    PayloadSizeMismatch,
)

FORMAT_VERSION = 1

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Trial:
    """One recording epoch: a channels x samples matrix plus its labels."""

    data: np.ndarray
    exemplar_id: int
    category_id: int
    subject_id: int


@dataclass(frozen=True)
class DatasetManifest:
    n_trials: int
    n_channels: int
    n_samples: int
    exemplar_names: list[str]
    category_names: list[str]
    subject_ids: list[int]
    data_file: str
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class Dataset:
    """Immutable trial collection.

    ``data`` is an (n_trials, n_channels, n_samples) float32 array; the
    three id arrays run parallel to its first axis.  Trial order is part of
    the identity of the dataset and never changes after construction.
    """

    manifest: DatasetManifest
    data: np.ndarray
    exemplar_ids: np.ndarray
    category_ids: np.ndarray
    subject_ids: np.ndarray

    def __post_init__(self):
        self.data.setflags(write=False)
        self.exemplar_ids.setflags(write=False)
        self.category_ids.setflags(write=False)
        self.subject_ids.setflags(write=False)

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def trial(self, i: int) -> Trial:
        return Trial(
            data=self.data[i],
            exemplar_id=int(self.exemplar_ids[i]),
            category_id=int(self.category_ids[i]),
            subject_id=int(self.subject_ids[i]),
        )

    def with_category_ids(self, new_ids: np.ndarray) -> "Dataset":
        """Copy of this dataset with replaced per-trial category labels."""
        return Dataset(
            manifest=self.manifest,
            data=self.data,
            exemplar_ids=self.exemplar_ids,
            category_ids=np.ascontiguousarray(new_ids, dtype=np.int64),
            subject_ids=self.subject_ids,
        )


@dataclass
class ValidationReport:
    trials_per_exemplar: dict[int, int] = field(default_factory=dict)
    exemplars_per_category: dict[int, int] = field(default_factory=dict)
    trials_per_subject: dict[int, int] = field(default_factory=dict)
    inconsistent_exemplars: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.inconsistent_exemplars


def flatten_trial(trial) -> np.ndarray:
    """Channel-major feature vector: v[c*T + s] = data[c][s]."""
    data = trial.data if isinstance(trial, Trial) else np.asarray(trial)
    return np.ravel(data, order="C")


def unflatten(vector: np.ndarray, n_channels: int, n_samples: int) -> np.ndarray:
    return np.asarray(vector).reshape(n_channels, n_samples)


def flatten_all(data: np.ndarray) -> np.ndarray:
    """Flatten an (n, C, T) stack to (n, C*T) without copying when possible."""
    return data.reshape(data.shape[0], -1)


def _require(cond: bool, message: str):
    if not cond:
        raise MalformedManifest(message)


def load_manifest(manifest_path: str | os.PathLike) -> tuple[DatasetManifest, list]:
    if not os.path.exists(manifest_path):
        raise MissingFile(f"manifest not found: {manifest_path}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedManifest(f"manifest does not parse: {exc}") from exc

    for key in ("n_trials", "n_channels", "n_samples", "exemplar_names",
                "category_names", "subject_ids", "data_file", "trial_table"):
        _require(key in raw, f"manifest missing field {key!r}")
    manifest = DatasetManifest(
        n_trials=int(raw["n_trials"]),
        n_channels=int(raw["n_channels"]),
        n_samples=int(raw["n_samples"]),
        exemplar_names=[str(s) for s in raw["exemplar_names"]],
        category_names=[str(s) for s in raw["category_names"]],
        subject_ids=[int(s) for s in raw["subject_ids"]],
        data_file=str(raw["data_file"]),
        format_version=int(raw.get("format_version", FORMAT_VERSION)),
    )
    _require(manifest.n_trials >= 0, "n_trials must be >= 0")
    _require(manifest.n_channels >= 1, "n_channels must be >= 1")
    _require(manifest.n_samples >= 1, "n_samples must be >= 1")
    table = raw["trial_table"]
    _require(len(table) == manifest.n_trials,
             f"trial_table has {len(table)} rows, expected {manifest.n_trials}")
    return manifest, table


def load_dataset(manifest_path: str | os.PathLike) -> Dataset:
    """Load a dataset from its manifest; see module docstring for format."""
    manifest, table = load_manifest(manifest_path)
    n, c, t = manifest.n_trials, manifest.n_channels, manifest.n_samples

    ex = np.empty(n, dtype=np.int64)
    cat = np.empty(n, dtype=np.int64)
    subj = np.empty(n, dtype=np.int64)
    for i, row in enumerate(table):
        _require(len(row) == 3, f"trial_table row {i} must have 3 entries")
        ex[i], cat[i], subj[i] = (int(v) for v in row)
    _require(bool(np.all(ex >= 0)) and bool(np.all(cat >= 0)) and bool(np.all(subj >= 0)),
             "trial ids must be non-negative")
    if n:
        _require(int(ex.max()) < len(manifest.exemplar_names),
                 "exemplar_id out of range of exemplar_names")
        _require(int(cat.max()) < len(manifest.category_names),
                 "category_id out of range of category_names")

    payload_path = os.path.join(os.path.dirname(os.fspath(manifest_path)),
                                manifest.data_file)
    if not os.path.exists(payload_path):
        raise MissingFile(f"payload not found: {payload_path}")
    flat = np.fromfile(payload_path, dtype="<f4")
    if flat.size != n * c * t:
        raise PayloadSizeMismatch(
            f"payload holds {flat.size} elements, manifest implies {n * c * t}")
    if flat.size and not np.all(np.isfinite(flat)):
        raise NonFiniteValue("payload contains NaN or Inf")
    data = flat.reshape(n, c, t)

    return Dataset(manifest=manifest, data=data,
                   exemplar_ids=ex, category_ids=cat, subject_ids=subj)


def save_dataset(dataset: Dataset, out_dir: str | os.PathLike) -> str:
    """Write manifest + payload into ``out_dir``; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    m = dataset.manifest
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    doc = {
        "format_version": m.format_version,
        "n_trials": m.n_trials,
        "n_channels": m.n_channels,
        "n_samples": m.n_samples,
        "exemplar_names": m.exemplar_names,
        "category_names": m.category_names,
        "subject_ids": m.subject_ids,
        "data_file": m.data_file,
        "trial_table": [
            [int(dataset.exemplar_ids[i]), int(dataset.category_ids[i]),
             int(dataset.subject_ids[i])]
            for i in range(dataset.n_trials)
        ],
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.ascontiguousarray(dataset.data, dtype="<f4").tofile(
        os.path.join(out_dir, m.data_file))
    return manifest_path


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Report per-exemplar/category/subject counts and label inconsistencies.

    An exemplar whose trials carry more than one category_id is flagged;
    nothing is raised, callers decide what to do with the report.
    """
    report = ValidationReport()
    ex = dataset.exemplar_ids
    cat = dataset.category_ids
    subj = dataset.subject_ids

    for e in np.unique(ex):
        mask = ex == e
        report.trials_per_exemplar[int(e)] = int(mask.sum())
        if len(np.unique(cat[mask])) > 1:
            report.inconsistent_exemplars.append(int(e))
    for c in np.unique(cat):
        report.exemplars_per_category[int(c)] = int(
            len(np.unique(ex[cat == c])))
    for s in np.unique(subj):
        report.trials_per_subject[int(s)] = int((subj == s).sum())
    return report
