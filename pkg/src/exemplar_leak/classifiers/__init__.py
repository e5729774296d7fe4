"""Classifier roster: kNN, shrinkage LDA, one-vs-rest SVM, shallow conv net.

``fit``/``predict`` take an (n, C, T) trial stack; labels are remapped to
a dense 0..K-1 range internally and mapped back for prediction, with ties
always resolving toward the smallest original label.
"""

from __future__ import annotations

import numpy as np

from ..dataset import flatten_all
from ..errors import ShapeMismatch, SingleClassInput
from .base import (
    KnnSpec,
    LdaSpec,
    Normalizer,
    NORMALIZER_EPS,
    ShallowConvSpec,
    SvmSpec,
    TrainedModel,
    check_labels,
    check_shape,
    fit_normalizer,
    spec_from_dict,
    spec_to_dict,
)
from .convnet import ShallowConvNet, gradient_check
from .knn import KnnClassifier
from .lda import LdaClassifier
from .svm import SvmClassifier, hinge_objective

__all__ = [
    "KnnSpec", "LdaSpec", "SvmSpec", "ShallowConvSpec",
    "Normalizer", "NORMALIZER_EPS", "TrainedModel",
    "fit", "predict", "fit_normalizer", "gradient_check",
    "spec_from_dict", "spec_to_dict", "hinge_objective",
    "ShallowConvNet", "KnnClassifier", "LdaClassifier", "SvmClassifier",
]


def fit(spec, data: np.ndarray, labels, normalizer: Normalizer) -> TrainedModel:
    """Train one classifier on normalized training trials."""
    spec.validate()
    data = np.asarray(data)
    labels = np.asarray(labels, dtype=np.int64)
    if data.ndim != 3 or len(data) == 0:
        raise ShapeMismatch("expected a non-empty (n, C, T) trial stack")
    if len(labels) != len(data):
        raise ShapeMismatch("labels and trials differ in length")
    classes = check_labels(labels)
    dense = np.searchsorted(classes, labels)
    shape = (data.shape[1], data.shape[2])

    features = normalizer.transform(flatten_all(data))
    if spec.kind == "knn":
        impl = KnnClassifier(spec.k).fit(features, dense)
    elif spec.kind == "lda":
        impl = LdaClassifier(spec.shrinkage).fit(features, dense)
    elif spec.kind == "svm":
        impl = SvmClassifier(spec.lam, spec.epochs, spec.batch_size,
                             spec.seed).fit(features, dense)
    elif spec.kind == "shallowconv":
        net = ShallowConvNet(spec, shape[0], shape[1], len(classes))
        net.fit(features.reshape(len(data), *shape), dense)
        impl = net
    else:  # pragma: no cover - spec_from_dict rejects unknown kinds
        raise SingleClassInput(f"unknown classifier kind {spec.kind!r}")
    return TrainedModel(kind=spec.kind, impl=impl, input_shape=shape,
                        classes=classes)


def predict(model: TrainedModel, data: np.ndarray,
            normalizer: Normalizer) -> np.ndarray:
    """Labels for a stack of trials, using the training-time normalizer."""
    data = np.asarray(data)
    if data.ndim != 3:
        raise ShapeMismatch("expected an (n, C, T) trial stack")
    check_shape(data, model.input_shape)
    features = normalizer.transform(flatten_all(data))
    if model.kind == "shallowconv":
        dense = model.impl.predict(
            features.reshape(len(data), *model.input_shape))
    else:
        dense = model.impl.predict(features)
    return model.classes[dense]
