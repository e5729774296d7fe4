import numpy as np
import pytest

from exemplar_leak.errors import ConfigError, UnknownPreset
from exemplar_leak.dataset import validate_dataset
from exemplar_leak.synth import (
    GIFFORD_COMPOSITION,
    SynthConfig,
    apply_overrides,
    generate_synthetic,
    make_templates,
    preset,
)
from conftest import tiny_config


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        a = generate_synthetic(tiny_config())
        b = generate_synthetic(tiny_config())
        assert np.array_equal(a.data, b.data)

    def test_different_seed_differs(self):
        a = generate_synthetic(tiny_config(seed=1))
        b = generate_synthetic(tiny_config(seed=2))
        assert not np.array_equal(a.data, b.data)

    def test_templates_shared_across_subjects(self):
        # with zero noise the trials are pure template sums, identical
        # across subjects for matching exemplars
        cfg = tiny_config(n_subjects=2, noise_sigma=1e-12)
        ds = generate_synthetic(cfg)
        half = ds.n_trials // 2
        np.testing.assert_allclose(ds.data[:half], ds.data[half:], atol=1e-6)


class TestStructure:
    def test_trial_counts(self):
        cfg = tiny_config(n_subjects=2)
        ds = generate_synthetic(cfg)
        assert ds.n_trials == 3 * 4 * 6 * 2
        report = validate_dataset(ds)
        assert report.ok
        assert set(report.trials_per_exemplar.values()) == {12}
        assert set(report.trials_per_subject.values()) == {3 * 4 * 6}

    def test_template_rms_norm(self):
        cfg = tiny_config()
        cat_templates, ex_templates = make_templates(cfg)
        d = cfg.n_channels * cfg.n_samples
        for m in list(cat_templates) + list(ex_templates):
            assert np.linalg.norm(m) == pytest.approx(np.sqrt(d), rel=1e-6)

    def test_uneven_exemplar_counts(self):
        cfg = tiny_config(n_categories=2, exemplars_per_category=(2, 5))
        ds = generate_synthetic(cfg)
        report = validate_dataset(ds)
        assert report.exemplars_per_category == {0: 2, 1: 5}


class TestConfigValidation:
    @pytest.mark.parametrize("overrides", [
        {"n_categories": 0},
        {"trials_per_exemplar": 0},
        {"noise_sigma": 0.0},
        {"exemplar_amplitude": -0.1},
        {"exemplars_per_category": (1, 2)},  # wrong length for 3 categories
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            tiny_config(**overrides).validate()

    def test_unknown_override_key(self):
        with pytest.raises(ConfigError):
            apply_overrides(SynthConfig(), {"bogus": 1})


class TestPresets:
    def test_kaneshiro_like(self):
        cfg = preset("kaneshiro-like")
        assert cfg.n_categories == 6
        assert cfg.exemplar_counts() == (12,) * 6
        assert cfg.trials_per_exemplar == 72
        assert cfg.n_subjects == 10

    def test_gifford_like_composition(self):
        cfg = preset("gifford-like")
        assert cfg.n_categories == 10
        # five pseudocategories' worth of each category's composition count
        assert cfg.exemplar_counts() == tuple(5 * c for c in GIFFORD_COMPOSITION)
        assert sum(GIFFORD_COMPOSITION) == 23
        assert cfg.trials_per_exemplar == 80

    def test_unknown(self):
        with pytest.raises(UnknownPreset):
            preset("bogus")


class TestSignalContent:
    def test_near_noiseless_exemplar_recovery(self):
        # strong exemplar signal, almost no noise: trials of one exemplar
        # are nearly identical, so nearest-template matching is trivial
        cfg = tiny_config(noise_sigma=0.01, exemplar_amplitude=1.0,
                          category_amplitude=0.0)
        ds = generate_synthetic(cfg)
        _, ex_templates = make_templates(cfg)
        flat = ds.data.reshape(ds.n_trials, -1)
        templates = ex_templates.reshape(len(ex_templates), -1)
        nearest = np.argmax(flat @ templates.T, axis=1)
        assert np.array_equal(nearest, ds.exemplar_ids)

    def test_pure_noise_has_no_template_signal(self):
        cfg = tiny_config(noise_sigma=1.0, exemplar_amplitude=0.0,
                          category_amplitude=0.0, trials_per_exemplar=50)
        ds = generate_synthetic(cfg)
        _, ex_templates = make_templates(cfg)
        flat = ds.data.reshape(ds.n_trials, -1)
        t0 = ex_templates[0].ravel()
        # correlation of noise with an unused template is ~N(0, 1/sqrt(n))
        corr = flat @ t0 / (np.linalg.norm(flat, axis=1) * np.linalg.norm(t0))
        assert abs(corr.mean()) < 0.05
