"""Shared classifier plumbing: specs, the normalizer, fit/predict dispatch."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..dataset import flatten_all
from ..errors import ConfigError, ShapeMismatch, SingleClassInput

NORMALIZER_EPS = 1e-8


@dataclass(frozen=True)
class KnnSpec:
    kind: str = field(default="knn", init=False)
    k: int = 5

    def validate(self):
        if self.k < 1:
            raise ConfigError("knn k must be >= 1")


@dataclass(frozen=True)
class LdaSpec:
    kind: str = field(default="lda", init=False)
    shrinkage: float = 0.1

    def validate(self):
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ConfigError("lda shrinkage must be in [0, 1]")


@dataclass(frozen=True)
class SvmSpec:
    kind: str = field(default="svm", init=False)
    lam: float = 1e-4
    epochs: int = 20
    batch_size: int = 64
    seed: int = 0

    def validate(self):
        if not self.lam > 0:
            raise ConfigError("svm lam must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("svm epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class ShallowConvSpec:
    kind: str = field(default="shallowconv", init=False)
    n_temporal_filters: int = 8
    temporal_kernel_len: Optional[int] = None  # None -> ceil(T/4)
    n_spatial_filters: int = 8
    pool_len: Optional[int] = None  # None -> ceil(T/8)
    learning_rate: float = 0.05
    epochs: int = 10
    batch_size: int = 64
    seed: int = 0

    def validate(self):
        for name in ("n_temporal_filters", "n_spatial_filters", "epochs",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"shallowconv {name} must be >= 1")
        for name in ("temporal_kernel_len", "pool_len"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"shallowconv {name} must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("shallowconv learning_rate must be > 0")


SPEC_KINDS = {
    "knn": KnnSpec,
    "lda": LdaSpec,
    "svm": SvmSpec,
    "shallowconv": ShallowConvSpec,
}


def spec_from_dict(doc: dict):
    doc = dict(doc)
    kind = doc.pop("kind", None)
    if kind not in SPEC_KINDS:
        raise ConfigError(f"unknown classifier kind {kind!r}")
    cls = SPEC_KINDS[kind]
    valid = {f for f in cls.__dataclass_fields__ if f != "kind"}
    unknown = set(doc) - valid
    if unknown:
        raise ConfigError(f"unknown {kind} parameters: {sorted(unknown)}")
    spec = cls(**doc)
    spec.validate()
    return spec


def spec_to_dict(spec) -> dict:
    return asdict(spec)


class Normalizer:
    """Per-feature standardizer fitted on training trials only.

    transform(x) = (x - mean) / (std + eps); constant features therefore
    map to exactly zero instead of blowing up.
    """

    def __init__(self):
        self.mean = None
        self.std = None

    def fit(self, features: np.ndarray) -> "Normalizer":
        features = np.asarray(features, dtype=np.float64)
        self.mean = features.mean(axis=0)
        self.std = features.std(axis=0)
        return self

    def transform(self, features: np.ndarray) -> np.ndarray:
        if self.mean is None:
            raise ShapeMismatch("normalizer used before fit")
        features = np.asarray(features, dtype=np.float64)
        if features.shape[1] != self.mean.shape[0]:
            raise ShapeMismatch(
                f"feature dim {features.shape[1]} does not match "
                f"fitted dim {self.mean.shape[0]}")
        return (features - self.mean) / (self.std + NORMALIZER_EPS)


def fit_normalizer(data: np.ndarray) -> Normalizer:
    """Fit the standardizer on an (n, C, T) stack of training trials."""
    if len(data) == 0:
        raise SingleClassInput("cannot fit a normalizer on zero trials")
    return Normalizer().fit(flatten_all(np.asarray(data)))


class TrainedModel:
    """Opaque fitted classifier with its input-shape contract."""

    def __init__(self, kind: str, impl, input_shape: tuple[int, int],
                 classes: np.ndarray):
        self.kind = kind
        self.impl = impl
        self.input_shape = input_shape
        self.classes = classes

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def check_labels(labels: np.ndarray) -> np.ndarray:
    classes = np.unique(labels)
    if len(classes) < 2:
        raise SingleClassInput(
            f"training labels contain {len(classes)} distinct class(es)")
    return classes


def check_shape(data: np.ndarray, expected: tuple[int, int]):
    if tuple(data.shape[1:]) != tuple(expected):
        raise ShapeMismatch(
            f"trial shape {tuple(data.shape[1:])} does not match "
            f"model's fitted shape {tuple(expected)}")
