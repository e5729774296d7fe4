"""Balanced pseudocategory construction and dataset relabeling.

A pseudocategory is a semantically meaningless group of exemplars.  Every
pseudocategory receives the same number of exemplars from each true
category, so a trial's pseudolabel carries no category information at all;
decoding pseudolabels above chance is evidence of exemplar-level leakage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import (
    CompositionMismatch,
    ConfigError,
    UnbalancedInput,
    UnmappedExemplar,
)
from .rngutil import substream


@dataclass(frozen=True)
class PseudocategoryAssignment:
    n_pseudocategories: int
    exemplar_to_pseudo: dict[int, int]
    per_pseudo_composition: dict[int, dict[int, int]]

    @property
    def chance_accuracy(self) -> float:
        # Balance invariants make trial counts uniform, so chance is exactly 1/P.
        return 1.0 / self.n_pseudocategories

    def members(self, pseudo_id: int) -> list[int]:
        return sorted(e for e, p in self.exemplar_to_pseudo.items()
                      if p == pseudo_id)

    def to_json(self) -> str:
        doc = {
            "n_pseudocategories": self.n_pseudocategories,
            "pseudocategories": [self.members(p)
                                 for p in range(self.n_pseudocategories)],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str,
                  category_of_exemplar: dict[int, int]) -> "PseudocategoryAssignment":
        doc = json.loads(text)
        groups = doc["pseudocategories"]
        mapping = {int(e): p for p, members in enumerate(groups)
                   for e in members}
        return _build(len(groups), mapping, category_of_exemplar)


def _build(n_pseudo: int, mapping: dict[int, int],
           category_of_exemplar: dict[int, int]) -> PseudocategoryAssignment:
    composition: dict[int, dict[int, int]] = {p: {} for p in range(n_pseudo)}
    for e, p in mapping.items():
        c = category_of_exemplar[e]
        composition[p][c] = composition[p].get(c, 0) + 1
    return PseudocategoryAssignment(
        n_pseudocategories=n_pseudo,
        exemplar_to_pseudo=dict(mapping),
        per_pseudo_composition=composition)


def _check_p(n_pseudo: int):
    if n_pseudo < 2:
        raise ConfigError("need at least 2 pseudocategories")


def assign_one_per_category(exemplars_by_category: dict[int, list[int]],
                            n_pseudocategories: int,
                            seed: int) -> PseudocategoryAssignment:
    """One exemplar from every category per pseudocategory.

    Requires every category to hold exactly ``n_pseudocategories``
    exemplars; within each category a seeded permutation decides which
    exemplar lands in which pseudocategory.
    """
    _check_p(n_pseudocategories)
    for c, exemplars in sorted(exemplars_by_category.items()):
        if len(exemplars) != n_pseudocategories:
            raise UnbalancedInput(
                f"category {c} holds {len(exemplars)} exemplars, "
                f"need exactly {n_pseudocategories}")
    mapping: dict[int, int] = {}
    cat_of: dict[int, int] = {}
    for c, exemplars in sorted(exemplars_by_category.items()):
        rng = substream(seed, "one-per-category", c)
        perm = rng.permutation(n_pseudocategories)
        for slot, e in enumerate(exemplars):
            mapping[int(e)] = int(perm[slot])
            cat_of[int(e)] = int(c)
    return _build(n_pseudocategories, mapping, cat_of)


def assign_by_composition(exemplars_by_category: dict[int, list[int]],
                          n_pseudocategories: int,
                          composition: dict[int, int],
                          seed: int) -> PseudocategoryAssignment:
    """Fixed per-category exemplar counts per pseudocategory.

    Each category's exemplars are shuffled (seeded) and dealt out in chunks
    of ``composition[c]`` to the pseudocategories in order.
    """
    _check_p(n_pseudocategories)
    for c, exemplars in sorted(exemplars_by_category.items()):
        want = n_pseudocategories * composition.get(c, 0)
        if len(exemplars) != want:
            raise CompositionMismatch(
                f"category {c} holds {len(exemplars)} exemplars, "
                f"composition demands {want}")
    mapping: dict[int, int] = {}
    cat_of: dict[int, int] = {}
    for c, exemplars in sorted(exemplars_by_category.items()):
        per = composition.get(c, 0)
        if per == 0:
            continue
        rng = substream(seed, "composition", c)
        shuffled = [exemplars[i] for i in rng.permutation(len(exemplars))]
        for p in range(n_pseudocategories):
            for e in shuffled[p * per:(p + 1) * per]:
                mapping[int(e)] = p
                cat_of[int(e)] = int(c)
    return _build(n_pseudocategories, mapping, cat_of)


def exemplars_by_category(dataset: Dataset) -> dict[int, list[int]]:
    """Sorted exemplar-id lists keyed by the category each exemplar carries."""
    out: dict[int, list[int]] = {}
    pairs = set(zip(dataset.category_ids.tolist(),
                    dataset.exemplar_ids.tolist()))
    for c, e in sorted(pairs):
        out.setdefault(int(c), []).append(int(e))
    return out


def relabel(dataset: Dataset,
            assignment: PseudocategoryAssignment) -> Dataset:
    """Replace each trial's category_id with its pseudocategory id.

    Data, order and exemplar ids are untouched, so split construction and
    leak accounting still see the original exemplar structure.
    """
    present = np.unique(dataset.exemplar_ids)
    missing = [int(e) for e in present
               if int(e) not in assignment.exemplar_to_pseudo]
    if missing:
        raise UnmappedExemplar(
            f"exemplars {missing} are not covered by the assignment")
    lookup = np.full(int(present.max()) + 1 if len(present) else 1, -1,
                     dtype=np.int64)
    for e, p in assignment.exemplar_to_pseudo.items():
        if e < len(lookup):
            lookup[e] = p
    new_labels = lookup[dataset.exemplar_ids]
    return dataset.with_category_ids(new_labels)


def check_balance(assignment: PseudocategoryAssignment) -> bool:
    """True when every (pseudocategory, category) count matches pseudo 0."""
    comps = assignment.per_pseudo_composition
    reference = comps.get(0, {})
    cats = set()
    for comp in comps.values():
        cats.update(comp)
    for comp in comps.values():
        for c in cats:
            if comp.get(c, 0) != reference.get(c, 0):
                return False
    return True
