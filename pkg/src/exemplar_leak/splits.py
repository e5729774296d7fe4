"""K-fold split plans: the leaky exemplar-stratified protocol and the
exemplar-disjoint control.

The leaky protocol spreads each exemplar's trials across all test folds,
so every exemplar appears on both sides of every fold: this is the
protocol under audit.  The clean protocol partitions exemplars themselves,
so no exemplar ever contributes trials to both train and test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import IndexOutOfRange, InvalidK, TooFewExemplars
from .rngutil import substream

LEAKY_STRATIFIED = "leaky-stratified"
CLEAN_DISJOINT = "clean-disjoint"
PROTOCOLS = (LEAKY_STRATIFIED, CLEAN_DISJOINT)


@dataclass(frozen=True)
class SplitPlan:
    protocol: str
    k: int
    folds: list[tuple[np.ndarray, np.ndarray]]  # (train, test) index pairs
    seed: int

    def domain(self) -> np.ndarray:
        """All trial indices covered by this plan, sorted."""
        return np.unique(np.concatenate([t for _, t in self.folds]))

    def to_json(self) -> str:
        doc = {
            "protocol": self.protocol,
            "k": self.k,
            "seed": self.seed,
            "folds": [{"train": train.tolist(), "test": test.tolist()}
                      for train, test in self.folds],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SplitPlan":
        doc = json.loads(text)
        folds = [(np.asarray(f["train"], dtype=np.int64),
                  np.asarray(f["test"], dtype=np.int64))
                 for f in doc["folds"]]
        return cls(protocol=doc["protocol"], k=int(doc["k"]),
                   folds=folds, seed=int(doc["seed"]))


@dataclass
class SplitValidationReport:
    covers_all: bool
    is_partition: bool
    folds_disjoint: bool
    leak_counts: list[int] = field(default_factory=list)
    test_label_histograms: list[dict[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.covers_all and self.is_partition and self.folds_disjoint


def _plan_indices(dataset: Dataset, indices) -> np.ndarray:
    if indices is None:
        return np.arange(dataset.n_trials, dtype=np.int64)
    idx = np.asarray(indices, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= dataset.n_trials):
        raise IndexOutOfRange("split indices out of dataset range")
    return idx


def stratified_kfold_by_exemplar(dataset: Dataset, k: int, seed: int,
                                 indices=None) -> SplitPlan:
    """Leaky protocol: stratify trials by exemplar label.

    For every exemplar its trials are shuffled (seeded) and dealt
    round-robin across the k test folds from a seeded starting fold, so
    per-exemplar test counts differ by at most one between folds.  Train
    sets are the complements within the covered indices.
    """
    if k < 2:
        raise InvalidK(f"k must be >= 2, got {k}")
    idx = _plan_indices(dataset, indices)
    ex = dataset.exemplar_ids[idx]

    fold_of = np.empty(len(idx), dtype=np.int64)
    for e in np.unique(ex):
        pos = np.where(ex == e)[0]
        rng = substream(seed, LEAKY_STRATIFIED, int(e))
        pos = pos[rng.permutation(len(pos))]
        start = int(rng.integers(k))
        fold_of[pos] = (start + np.arange(len(pos))) % k

    folds = []
    for f in range(k):
        test = np.sort(idx[fold_of == f])
        train = np.sort(idx[fold_of != f])
        folds.append((train, test))
    return SplitPlan(protocol=LEAKY_STRATIFIED, k=k, folds=folds, seed=seed)


def exemplar_disjoint_kfold(dataset: Dataset, k: int, seed: int,
                            indices=None) -> SplitPlan:
    """Clean protocol: partition exemplars, not trials, across folds.

    Within each true category exemplars are shuffled (seeded) and dealt to
    folds by a global round-robin counter, which balances exemplars per
    category where counts divide evenly and spreads remainders otherwise.
    """
    if k < 2:
        raise InvalidK(f"k must be >= 2, got {k}")
    idx = _plan_indices(dataset, indices)
    ex = dataset.exemplar_ids[idx]
    cat = dataset.category_ids[idx]

    exemplars = np.unique(ex)
    if len(exemplars) < k:
        raise TooFewExemplars(
            f"{len(exemplars)} distinct exemplars cannot fill {k} folds")

    category_of = {}
    for e in exemplars:
        category_of[int(e)] = int(cat[ex == e][0])

    fold_of_exemplar: dict[int, int] = {}
    counter = 0
    by_cat: dict[int, list[int]] = {}
    for e in exemplars:
        by_cat.setdefault(category_of[int(e)], []).append(int(e))
    for c in sorted(by_cat):
        members = by_cat[c]
        rng = substream(seed, CLEAN_DISJOINT, c)
        members = [members[i] for i in rng.permutation(len(members))]
        for e in members:
            fold_of_exemplar[e] = counter % k
            counter += 1

    fold_of = np.array([fold_of_exemplar[int(e)] for e in ex], dtype=np.int64)
    folds = []
    for f in range(k):
        test = np.sort(idx[fold_of == f])
        train = np.sort(idx[fold_of != f])
        folds.append((train, test))
    return SplitPlan(protocol=CLEAN_DISJOINT, k=k, folds=folds, seed=seed)


def build_split(protocol: str, dataset: Dataset, k: int, seed: int,
                indices=None) -> SplitPlan:
    if protocol == LEAKY_STRATIFIED:
        return stratified_kfold_by_exemplar(dataset, k, seed, indices)
    if protocol == CLEAN_DISJOINT:
        return exemplar_disjoint_kfold(dataset, k, seed, indices)
    raise InvalidK(f"unknown protocol {protocol!r}")


def validate_split(plan: SplitPlan, dataset: Dataset) -> SplitValidationReport:
    """Check plan structure against a dataset and count per-fold leaks.

    A fold's leak count is the number of exemplars contributing trials to
    both its train and test sides.
    """
    all_test = np.concatenate([test for _, test in plan.folds]) \
        if plan.folds else np.empty(0, dtype=np.int64)
    if len(all_test) and (all_test.min() < 0
                          or all_test.max() >= dataset.n_trials):
        raise IndexOutOfRange("plan references indices outside the dataset")
    for train, _ in plan.folds:
        if len(train) and (train.min() < 0
                           or train.max() >= dataset.n_trials):
            raise IndexOutOfRange("plan references indices outside the dataset")

    domain = plan.domain()
    is_partition = len(all_test) == len(np.unique(all_test))
    covers_all = bool(np.array_equal(domain, np.arange(dataset.n_trials)))
    folds_disjoint = all(
        len(np.intersect1d(train, test)) == 0 for train, test in plan.folds)

    leak_counts = []
    histograms = []
    for train, test in plan.folds:
        shared = np.intersect1d(dataset.exemplar_ids[train],
                                dataset.exemplar_ids[test])
        leak_counts.append(int(len(shared)))
        labels, counts = np.unique(dataset.category_ids[test],
                                   return_counts=True)
        histograms.append({int(l): int(n) for l, n in zip(labels, counts)})

    return SplitValidationReport(
        covers_all=covers_all, is_partition=is_partition,
        folds_disjoint=folds_disjoint, leak_counts=leak_counts,
        test_label_histograms=histograms)
