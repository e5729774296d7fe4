"""Synthetic dataset generator with separately tunable signal levels.

Each trial is built as

    category_amplitude * G[category]
    + exemplar_amplitude * E[exemplar]
    + noise_sigma * fresh standard-normal noise

where G and E are fixed random templates shared across subjects.  Templates
are scaled to unit root-mean-square entry (Frobenius norm sqrt(C*T)) so
that the amplitude parameters express per-entry signal strength relative
to noise_sigma, independent of channel/sample counts.

Category amplitude controls how decodable the true categories are;
exemplar amplitude controls how much exemplar-specific (leakable) signal
exists.  Setting one of them to zero gives a ground-truth oracle for what
an audit should or should not find.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, DatasetManifest
from .errors import ConfigError, UnknownPreset
from .rngutil import substream

#: Per-pseudocategory exemplar composition of the ten retained high-level
#: categories (animals, birds, clothing, containers, electronics, food,
#: instruments, sports gear, tools, vehicles).
GIFFORD_COMPOSITION = (3, 1, 2, 1, 1, 6, 1, 2, 3, 3)

PRESET_NAMES = ("kaneshiro-like", "gifford-like")


@dataclass(frozen=True)
class SynthConfig:
    n_categories: int = 6
    exemplars_per_category: int | tuple[int, ...] = 12
    trials_per_exemplar: int = 72
    n_subjects: int = 1
    n_channels: int = 16
    n_samples: int = 32
    category_amplitude: float = 0.3
    exemplar_amplitude: float = 0.3
    noise_sigma: float = 1.0
    seed: int = 0

    def exemplar_counts(self) -> tuple[int, ...]:
        """Per-category exemplar counts, expanded from the scalar form."""
        if isinstance(self.exemplars_per_category, int):
            return (self.exemplars_per_category,) * self.n_categories
        return tuple(self.exemplars_per_category)

    def validate(self):
        counts = self.exemplar_counts()
        if self.n_categories < 1:
            raise ConfigError("n_categories must be >= 1")
        if len(counts) != self.n_categories:
            raise ConfigError(
                "exemplars_per_category list length must equal n_categories")
        if any(c < 1 for c in counts):
            raise ConfigError("exemplars_per_category entries must be >= 1")
        for name in ("trials_per_exemplar", "n_subjects", "n_channels",
                     "n_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.category_amplitude < 0 or self.exemplar_amplitude < 0:
            raise ConfigError("amplitudes must be >= 0")
        if not self.noise_sigma > 0:
            raise ConfigError("noise_sigma must be > 0")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    @property
    def n_exemplars(self) -> int:
        return sum(self.exemplar_counts())

    @property
    def n_trials(self) -> int:
        return self.n_exemplars * self.trials_per_exemplar * self.n_subjects


def preset(name: str) -> SynthConfig:
    """Desk-scale configs mirroring the structure of the two source datasets."""
    if name == "kaneshiro-like":
        # 6 categories x 12 exemplars x 72 trials, 10 subjects; channels and
        # samples scaled down from the recording's resolution to desk scale.
        return SynthConfig(
            n_categories=6, exemplars_per_category=12, trials_per_exemplar=72,
            n_subjects=10, n_channels=16, n_samples=32,
            category_amplitude=0.3, exemplar_amplitude=0.3, noise_sigma=1.0,
            seed=0)
    if name == "gifford-like":
        # 10 categories whose exemplar counts support an even 5-way division
        # with the documented composition; 80 trials per exemplar.
        counts = tuple(5 * c for c in GIFFORD_COMPOSITION)
        return SynthConfig(
            n_categories=10, exemplars_per_category=counts,
            trials_per_exemplar=80, n_subjects=10, n_channels=17,
            n_samples=25, category_amplitude=0.3, exemplar_amplitude=0.3,
            noise_sigma=1.0, seed=0)
    raise UnknownPreset(f"unknown preset {name!r}; known: {PRESET_NAMES}")


def _template(rng: np.random.Generator, c: int, t: int) -> np.ndarray:
    """Random matrix scaled to unit RMS entry."""
    m = rng.standard_normal((c, t))
    norm = np.linalg.norm(m)
    if norm == 0.0:  # astronomically unlikely; regenerate deterministically
        m = rng.standard_normal((c, t))
        norm = np.linalg.norm(m)
    return m * (np.sqrt(c * t) / norm)


def make_templates(cfg: SynthConfig):
    """Category and exemplar templates, each from its own seed substream."""
    c, t = cfg.n_channels, cfg.n_samples
    cat_templates = np.stack([
        _template(substream(cfg.seed, "template", "category", k), c, t)
        for k in range(cfg.n_categories)])
    ex_templates = np.stack([
        _template(substream(cfg.seed, "template", "exemplar", e), c, t)
        for e in range(cfg.n_exemplars)])
    return cat_templates, ex_templates


def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Deterministic template-plus-noise dataset; see module docstring.

    Trial order is subject-major, then exemplar (category-major global
    ids), then repetition.  Per-trial noise comes from a substream keyed by
    (subject, exemplar, repetition), so generation order cannot affect the
    output bytes.
    """
    cfg.validate()
    counts = cfg.exemplar_counts()
    cat_templates, ex_templates = make_templates(cfg)

    category_of_exemplar = np.repeat(np.arange(cfg.n_categories), counts)
    n_ex = cfg.n_exemplars
    c, t = cfg.n_channels, cfg.n_samples
    n = cfg.n_trials

    data = np.empty((n, c, t), dtype=np.float32)
    ex_ids = np.empty(n, dtype=np.int64)
    cat_ids = np.empty(n, dtype=np.int64)
    subj_ids = np.empty(n, dtype=np.int64)

    i = 0
    for s in range(cfg.n_subjects):
        for e in range(n_ex):
            k = int(category_of_exemplar[e])
            signal = (cfg.category_amplitude * cat_templates[k]
                      + cfg.exemplar_amplitude * ex_templates[e])
            for r in range(cfg.trials_per_exemplar):
                noise = substream(cfg.seed, "noise", s, e, r).standard_normal((c, t))
                data[i] = (signal + cfg.noise_sigma * noise).astype(np.float32)
                ex_ids[i] = e
                cat_ids[i] = k
                subj_ids[i] = s
                i += 1

    exemplar_names = [
        f"cat{category_of_exemplar[e]:02d}_ex{e:03d}" for e in range(n_ex)]
    category_names = [f"category{k:02d}" for k in range(cfg.n_categories)]
    manifest = DatasetManifest(
        n_trials=n, n_channels=c, n_samples=t,
        exemplar_names=exemplar_names, category_names=category_names,
        subject_ids=list(range(cfg.n_subjects)), data_file="data.f32")
    return Dataset(manifest=manifest, data=data, exemplar_ids=ex_ids,
                   category_ids=cat_ids, subject_ids=subj_ids)


def apply_overrides(cfg: SynthConfig, overrides: dict) -> SynthConfig:
    """Replace config fields from a {name: value} dict; unknown names raise."""
    valid = set(SynthConfig.__dataclass_fields__)
    for key in overrides:
        if key not in valid:
            raise ConfigError(f"unknown synth config field {key!r}")
    fixed = dict(overrides)
    if "exemplars_per_category" in fixed and isinstance(
            fixed["exemplars_per_category"], list):
        fixed["exemplars_per_category"] = tuple(fixed["exemplars_per_category"])
    return replace(cfg, **fixed)
