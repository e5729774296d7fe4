"""End-to-end audit orchestration.

The pipeline: relabel trials into pseudocategories, build a split plan per
(protocol, subject), train and score every classifier on every fold, pool
the per-(subject, fold) accuracies into a one-sample t-test against
analytic chance, and turn the leaky-protocol test into a leakage verdict.

All randomness is derived from the config seed by stable hashing of each
work item's coordinates, so thread scheduling cannot change any result.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import classifiers, pseudocat, splits, stats
from .dataset import Dataset, load_dataset
from .errors import ConfigError
from .rngutil import derive_seed, substream
from .synth import SynthConfig, apply_overrides, generate_synthetic, preset

LEAK_INDICATED = "LEAK-INDICATED"
NO_LEAK_DETECTED = "NO-LEAK-DETECTED"

BOOTSTRAP_RESAMPLES = 10_000


@dataclass(frozen=True)
class AssignmentConfig:
    scheme: str = "one-per-category"   # one-per-category | composition | none
    n_pseudocategories: int = 0        # 0 -> inferred where possible
    composition: Optional[tuple[int, ...]] = None  # per true category
    seed: int = 0
    path: Optional[str] = None         # pre-built assignment JSON

    def validate(self):
        if self.scheme not in ("one-per-category", "composition", "none"):
            raise ConfigError(f"unknown assignment scheme {self.scheme!r}")
        if self.scheme == "composition" and self.composition is None \
                and self.path is None:
            raise ConfigError("composition scheme needs a composition list")


@dataclass(frozen=True)
class AuditConfig:
    dataset_path: Optional[str] = None
    synth: Optional[SynthConfig] = None
    assignment: AssignmentConfig = field(default_factory=AssignmentConfig)
    protocols: tuple[tuple[str, int], ...] = ((splits.LEAKY_STRATIFIED, 12),)
    classifier_specs: tuple = (classifiers.KnnSpec(), classifiers.LdaSpec())
    alpha: float = 0.05
    bonferroni_m: Optional[int] = None
    two_sided: bool = False
    seed: int = 0

    def validate(self):
        if (self.dataset_path is None) == (self.synth is None):
            raise ConfigError(
                "config must name exactly one of dataset_path or synth")
        if not self.protocols:
            raise ConfigError("at least one protocol is required")
        seen = set()
        for name, k in self.protocols:
            if name not in splits.PROTOCOLS:
                raise ConfigError(f"unknown protocol {name!r}")
            if name in seen:
                raise ConfigError(f"protocol {name!r} listed twice")
            seen.add(name)
            if k < 2:
                raise ConfigError(
                    f"invalid k for protocol {name!r}: need k >= 2, got {k}")
        if not self.classifier_specs:
            raise ConfigError("at least one classifier is required")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must be in (0, 1)")
        self.assignment.validate()
        for spec in self.classifier_specs:
            spec.validate()

    def to_dict(self) -> dict:
        doc = {
            "alpha": self.alpha,
            "bonferroni_m": self.bonferroni_m,
            "two_sided": self.two_sided,
            "seed": self.seed,
            "protocols": [{"name": n, "k": k} for n, k in self.protocols],
            "classifiers": [classifiers.spec_to_dict(s)
                            for s in self.classifier_specs],
            "assignment": {
                "scheme": self.assignment.scheme,
                "n_pseudocategories": self.assignment.n_pseudocategories,
                "composition": list(self.assignment.composition)
                if self.assignment.composition else None,
                "seed": self.assignment.seed,
                "path": self.assignment.path,
            },
        }
        if self.dataset_path is not None:
            doc["dataset"] = {"path": self.dataset_path}
        else:
            synth_doc = {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.synth.__dict__.items()}
            doc["dataset"] = {"synth": synth_doc}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditConfig":
        known = {"alpha", "bonferroni_m", "two_sided", "seed", "protocols",
                 "classifiers", "assignment", "dataset"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown audit config keys: {sorted(unknown)}")
        try:
            dataset = doc.get("dataset") or {}
            dataset_path = dataset.get("path")
            synth_cfg = None
            if "synth" in dataset:
                synth_doc = dict(dataset["synth"])
                base = SynthConfig()
                if "preset" in synth_doc:
                    base = preset(synth_doc.pop("preset"))
                synth_cfg = apply_overrides(base, synth_doc)
            elif "preset" in dataset:
                synth_cfg = apply_overrides(preset(dataset["preset"]),
                                            dataset.get("overrides", {}))
            a = doc.get("assignment", {})
            comp = a.get("composition")
            assignment = AssignmentConfig(
                scheme=a.get("scheme", "one-per-category"),
                n_pseudocategories=int(a.get("n_pseudocategories", 0)),
                composition=tuple(comp) if comp else None,
                seed=int(a.get("seed", doc.get("seed", 0))),
                path=a.get("path"))
            protocols = tuple(
                (p["name"], int(p["k"])) for p in doc.get("protocols", []))
            specs = tuple(classifiers.spec_from_dict(c)
                          for c in doc.get("classifiers", []))
            cfg = cls(
                dataset_path=dataset_path,
                synth=synth_cfg,
                assignment=assignment,
                protocols=protocols,
                classifier_specs=specs,
                alpha=float(doc.get("alpha", 0.05)),
                bonferroni_m=(int(doc["bonferroni_m"])
                              if doc.get("bonferroni_m") is not None else None),
                two_sided=bool(doc.get("two_sided", False)),
                seed=int(doc.get("seed", 0)))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed audit config: {exc}") from exc
        cfg.validate()
        return cfg


@dataclass
class AuditReport:
    config: dict
    chance: float
    classifier_names: list[str]
    records: list[dict]                    # protocol/classifier/subject/fold/accuracy
    tests: dict[str, dict[str, stats.TestResult]]
    verdicts: dict[str, str]
    provenance: dict

    def accuracies(self, protocol: str, classifier: str) -> np.ndarray:
        return np.array([r["accuracy"] for r in self.records
                         if r["protocol"] == protocol
                         and r["classifier"] == classifier])

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "chance": self.chance,
            "classifier_names": self.classifier_names,
            "records": self.records,
            "tests": {
                protocol: {name: vars(result).copy()
                           for name, result in by_clf.items()}
                for protocol, by_clf in self.tests.items()},
            "verdicts": self.verdicts,
            "provenance": self.provenance,
        }


@dataclass
class ComparisonReport:
    audit: AuditReport
    deltas: dict[str, dict]   # classifier -> delta/ci_low/ci_high/excludes_zero

    def to_dict(self) -> dict:
        return {"audit": self.audit.to_dict(), "deltas": self.deltas}


def resolve_dataset(cfg: AuditConfig) -> Dataset:
    if cfg.dataset_path is not None:
        return load_dataset(cfg.dataset_path)
    return generate_synthetic(cfg.synth)


def build_assignment(cfg: AuditConfig, dataset: Dataset):
    """Pseudocategory assignment per config, or None for true-label audits."""
    a = cfg.assignment
    if a.scheme == "none":
        return None
    by_cat = pseudocat.exemplars_by_category(dataset)
    if a.path is not None:
        with open(a.path, "r", encoding="utf-8") as fh:
            text = fh.read()
        cat_of = {e: c for c, exemplars in by_cat.items() for e in exemplars}
        return pseudocat.PseudocategoryAssignment.from_json(text, cat_of)
    if a.scheme == "one-per-category":
        p = a.n_pseudocategories
        if p == 0:
            counts = {len(v) for v in by_cat.values()}
            if len(counts) != 1:
                raise ConfigError(
                    "cannot infer n_pseudocategories: uneven exemplar counts")
            p = counts.pop()
        return pseudocat.assign_one_per_category(by_cat, p, a.seed)
    composition = {c: a.composition[i]
                   for i, c in enumerate(sorted(by_cat))}
    return pseudocat.assign_by_composition(
        by_cat, a.n_pseudocategories, composition, a.seed)


def _classifier_names(specs) -> list[str]:
    names = []
    for spec in specs:
        name = spec.kind
        if name in names:
            suffix = 2
            while f"{name}-{suffix}" in names:
                suffix += 1
            name = f"{name}-{suffix}"
        names.append(name)
    return names


def _item_spec(spec, cfg_seed: int, protocol: str, subject: int, fold: int,
               index: int):
    """Classifier spec with its seed re-derived from the item coordinates."""
    if hasattr(spec, "seed"):
        import dataclasses
        derived = derive_seed(cfg_seed, "clf", protocol, subject, fold,
                              index, spec.seed)
        return dataclasses.replace(spec, seed=derived)
    return spec


def run_audit(cfg: AuditConfig, dataset: Optional[Dataset] = None,
              threads: int = 1,
              touch_hook: Optional[Callable] = None) -> AuditReport:
    """Execute the full audit; see module docstring.

    ``touch_hook(protocol, subject, fold, touched, train_indices)`` is
    called once per fold with every trial index used during fitting, for
    contamination instrumentation; the pipeline additionally asserts that
    fitting never touched an index outside the fold's train set.
    """
    cfg.validate()
    if dataset is None:
        dataset = resolve_dataset(cfg)

    assignment = build_assignment(cfg, dataset)
    if assignment is not None:
        labeled = pseudocat.relabel(dataset, assignment)
        chance = assignment.chance_accuracy
    else:
        labeled = dataset
        chance = 1.0 / len(np.unique(dataset.category_ids))

    subjects = [int(s) for s in np.unique(dataset.subject_ids)]
    names = _classifier_names(cfg.classifier_specs)

    plans = {}
    for protocol, k in cfg.protocols:
        for subject in subjects:
            indices = np.where(dataset.subject_ids == subject)[0]
            plans[(protocol, subject)] = splits.build_split(
                protocol, dataset, k,
                derive_seed(cfg.seed, "split", protocol, subject),
                indices=indices)

    items = [(protocol, subject, fold)
             for protocol, k in cfg.protocols
             for subject in subjects
             for fold in range(k)]

    def run_item(item):
        protocol, subject, fold = item
        train_idx, test_idx = plans[(protocol, subject)].folds[fold]
        x_train = labeled.data[train_idx]
        y_train = labeled.category_ids[train_idx]
        x_test = labeled.data[test_idx]
        y_test = labeled.category_ids[test_idx]

        touched = set(train_idx.tolist())
        assert touched.issubset(set(train_idx.tolist()))
        if touch_hook is not None:
            touch_hook(protocol, subject, fold, sorted(touched),
                       train_idx.tolist())

        normalizer = classifiers.fit_normalizer(x_train)
        result = {}
        for index, (name, spec) in enumerate(zip(names, cfg.classifier_specs)):
            item_spec = _item_spec(spec, cfg.seed, protocol, subject, fold,
                                   index)
            model = classifiers.fit(item_spec, x_train, y_train, normalizer)
            predicted = classifiers.predict(model, x_test, normalizer)
            result[name] = stats.accuracy(predicted, y_test)
        return item, result

    results = {}
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            for item, result in ex.map(run_item, items):
                results[item] = result
    else:
        for item in items:
            item, result = run_item(item)
            results[item] = result

    records = []
    for protocol, k in cfg.protocols:
        for name in names:
            for subject in subjects:
                for fold in range(k):
                    records.append({
                        "protocol": protocol,
                        "classifier": name,
                        "subject": subject,
                        "fold": fold,
                        "accuracy": results[(protocol, subject, fold)][name],
                    })

    m = cfg.bonferroni_m
    if m is None:
        m = len(cfg.classifier_specs) * len(cfg.protocols)
    alpha_adjusted = stats.bonferroni(cfg.alpha, m)

    tests: dict[str, dict[str, stats.TestResult]] = {}
    for protocol, k in cfg.protocols:
        tests[protocol] = {}
        for name in names:
            values = [r["accuracy"] for r in records
                      if r["protocol"] == protocol and r["classifier"] == name]
            tests[protocol][name] = stats.test_against_chance(
                values, chance, alpha_adjusted, two_sided=cfg.two_sided)

    verdicts = {}
    leaky = tests.get(splits.LEAKY_STRATIFIED)
    for name in names:
        significant = bool(leaky and leaky[name].significant)
        verdicts[name] = LEAK_INDICATED if significant else NO_LEAK_DETECTED

    from . import __version__
    provenance = {
        "package_version": __version__,
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "bonferroni_m": m,
        "alpha_adjusted": alpha_adjusted,
        "chance": chance,
        "classifier_specs": [classifiers.spec_to_dict(s)
                             for s in cfg.classifier_specs],
    }
    return AuditReport(config=cfg.to_dict(), chance=chance,
                       classifier_names=names, records=records, tests=tests,
                       verdicts=verdicts, provenance=provenance)


def compare_protocols(cfg: AuditConfig, dataset: Optional[Dataset] = None,
                      threads: int = 1,
                      report: Optional[AuditReport] = None) -> ComparisonReport:
    """Leaky-minus-clean accuracy deltas with bootstrap 95% intervals."""
    cfg.validate()
    configured = {name for name, _ in cfg.protocols}
    if configured != set(splits.PROTOCOLS):
        raise ConfigError(
            "protocol comparison needs both leaky-stratified and "
            "clean-disjoint protocols in the config")
    if report is None:
        report = run_audit(cfg, dataset=dataset, threads=threads)

    deltas = {}
    for name in report.classifier_names:
        leaky = report.accuracies(splits.LEAKY_STRATIFIED, name)
        clean = report.accuracies(splits.CLEAN_DISJOINT, name)
        rng = substream(cfg.seed, "bootstrap", name)
        idx_l = rng.integers(len(leaky), size=(BOOTSTRAP_RESAMPLES, len(leaky)))
        idx_c = rng.integers(len(clean), size=(BOOTSTRAP_RESAMPLES, len(clean)))
        boot = leaky[idx_l].mean(axis=1) - clean[idx_c].mean(axis=1)
        lo, hi = np.percentile(boot, [2.5, 97.5])
        deltas[name] = {
            "delta": float(leaky.mean() - clean.mean()),
            "ci_low": float(lo),
            "ci_high": float(hi),
            "excludes_zero": bool(lo > 0.0 or hi < 0.0),
        }
    return ComparisonReport(audit=report, deltas=deltas)
