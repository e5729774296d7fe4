import json
import os

import numpy as np
import pytest

from exemplar_leak.dataset import (
    Dataset,
    DatasetManifest,
    Trial,
    flatten_trial,
    load_dataset,
    save_dataset,
    unflatten,
    validate_dataset,
)
from exemplar_leak.errors import (
    MalformedManifest,
    MissingFile,
    NonFiniteValue,
    PayloadSizeMismatch,
)
from exemplar_leak.synth import generate_synthetic, preset
from conftest import tiny_config


def make_dataset(n_trials, c=2, t=3, labels=None):
    data = np.arange(n_trials * c * t, dtype=np.float32).reshape(n_trials, c, t)
    if labels is None:
        labels = [(i % 2, i % 2, 0) for i in range(n_trials)]
    ex = np.array([l[0] for l in labels], dtype=np.int64)
    cat = np.array([l[1] for l in labels], dtype=np.int64)
    subj = np.array([l[2] for l in labels], dtype=np.int64)
    manifest = DatasetManifest(
        n_trials=n_trials, n_channels=c, n_samples=t,
        exemplar_names=[f"e{i}" for i in range(int(ex.max()) + 1 if n_trials else 1)],
        category_names=[f"c{i}" for i in range(int(cat.max()) + 1 if n_trials else 1)],
        subject_ids=sorted(set(subj.tolist())) if n_trials else [0],
        data_file="data.f32")
    return Dataset(manifest=manifest, data=data, exemplar_ids=ex,
                   category_ids=cat, subject_ids=subj)


class TestRoundTrip:
    def test_save_load_bit_exact(self, tmp_path, tiny_dataset):
        path = save_dataset(tiny_dataset, tmp_path)
        loaded = load_dataset(path)
        assert np.array_equal(loaded.data, tiny_dataset.data)
        assert np.array_equal(loaded.exemplar_ids, tiny_dataset.exemplar_ids)
        assert np.array_equal(loaded.category_ids, tiny_dataset.category_ids)
        assert np.array_equal(loaded.subject_ids, tiny_dataset.subject_ids)
        assert loaded.manifest == tiny_dataset.manifest

    def test_saved_files_are_deterministic(self, tmp_path, tiny_dataset):
        save_dataset(tiny_dataset, tmp_path / "a")
        save_dataset(tiny_dataset, tmp_path / "b")
        for name in ("manifest.json", "data.f32"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_empty_dataset(self, tmp_path):
        ds = make_dataset(0)
        path = save_dataset(ds, tmp_path)
        loaded = load_dataset(path)
        assert loaded.n_trials == 0


class TestLoadErrors:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingFile):
            load_dataset(tmp_path / "nope.json")

    def test_missing_payload(self, tmp_path, tiny_dataset):
        path = save_dataset(tiny_dataset, tmp_path)
        os.remove(tmp_path / "data.f32")
        with pytest.raises(MissingFile):
            load_dataset(path)

    def test_garbage_manifest(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(MalformedManifest):
            load_dataset(path)

    def test_manifest_missing_field(self, tmp_path, tiny_dataset):
        path = save_dataset(tiny_dataset, tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        del doc["trial_table"]
        (tmp_path / "manifest.json").write_text(json.dumps(doc))
        with pytest.raises(MalformedManifest):
            load_dataset(path)

    def test_payload_size_mismatch(self, tmp_path):
        ds = make_dataset(10)
        path = save_dataset(ds, tmp_path)
        # truncate to 9 trials' worth of elements
        payload = np.fromfile(tmp_path / "data.f32", dtype="<f4")
        payload[:9 * 2 * 3].tofile(tmp_path / "data.f32")
        with pytest.raises(PayloadSizeMismatch):
            load_dataset(path)

    def test_nan_payload(self, tmp_path):
        ds = make_dataset(4)
        path = save_dataset(ds, tmp_path)
        payload = np.fromfile(tmp_path / "data.f32", dtype="<f4")
        payload[5] = np.nan
        payload.tofile(tmp_path / "data.f32")
        with pytest.raises(NonFiniteValue):
            load_dataset(path)

    def test_id_out_of_range(self, tmp_path, tiny_dataset):
        path = save_dataset(tiny_dataset, tmp_path)
        doc = json.loads((tmp_path / "manifest.json").read_text())
        doc["trial_table"][0][0] = 999
        (tmp_path / "manifest.json").write_text(json.dumps(doc))
        with pytest.raises(MalformedManifest):
            load_dataset(path)


class TestFlatten:
    def test_single_channel(self):
        trial = Trial(data=np.array([[1.0, 2.0, 3.0]]), exemplar_id=0,
                      category_id=0, subject_id=0)
        assert flatten_trial(trial).tolist() == [1.0, 2.0, 3.0]

    def test_channel_major_order(self):
        trial = Trial(data=np.array([[1.0, 2.0], [3.0, 4.0]]), exemplar_id=0,
                      category_id=0, subject_id=0)
        assert flatten_trial(trial).tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_round_trip_bit_exact(self, rng):
        m = rng.standard_normal((5, 9)).astype(np.float32)
        v = flatten_trial(m)
        assert np.array_equal(unflatten(v, 5, 9), m)

    def test_injective(self, rng):
        a = rng.standard_normal((3, 4))
        b = a.copy()
        b[2, 1] += 1.0
        assert not np.array_equal(flatten_trial(a), flatten_trial(b))


class TestValidate:
    def test_counts_on_synthetic(self, tiny_dataset):
        report = validate_dataset(tiny_dataset)
        assert report.ok
        assert set(report.trials_per_exemplar.values()) == {6}
        assert set(report.exemplars_per_category.values()) == {4}

    def test_kaneshiro_shape(self):
        cfg = tiny_config(n_categories=6, exemplars_per_category=12,
                          trials_per_exemplar=72, n_channels=2, n_samples=2)
        report = validate_dataset(generate_synthetic(cfg))
        assert set(report.trials_per_exemplar.values()) == {72}
        assert set(report.exemplars_per_category.values()) == {12}

    def test_inconsistent_exemplar_flagged(self):
        ds = make_dataset(4, labels=[(3, 0, 0), (3, 1, 0), (0, 0, 0),
                                     (1, 1, 0)])
        report = validate_dataset(ds)
        assert report.inconsistent_exemplars == [3]
        assert not report.ok

    def test_empty_report(self):
        report = validate_dataset(make_dataset(0))
        assert report.ok
        assert report.trials_per_exemplar == {}

    def test_immutable(self, tiny_dataset):
        with pytest.raises(ValueError):
            tiny_dataset.data[0, 0, 0] = 1.0


def test_presets_validate_cleanly():
    for name in ("kaneshiro-like", "gifford-like"):
        preset(name).validate()
