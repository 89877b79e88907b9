import numpy as np
import pytest

from hetda.data import (UNLABELED, DataFormatError, DomainData, SynthSpec,
                        load_domain, load_pairing, preprocess, save_domain,
                        synth_generate, validate_dataset)


def write(path, text):
    path.write_text(text)
    return str(path)


class TestLoadDomain:
    def test_round_trip_values(self, tmp_path):
        f = write(tmp_path / "f.csv", "1.5,2\n-3,0.25\n0,7\n")
        l = write(tmp_path / "l.csv", "1,2\n")
        data = load_domain(f, l)
        np.testing.assert_array_equal(
            data.features, [[1.5, 2.0], [-3.0, 0.25], [0.0, 7.0]])
        np.testing.assert_array_equal(data.labels, [1, 2])
        assert data.dim == 3

    def test_empty_label_cell_is_unlabeled(self, tmp_path):
        f = write(tmp_path / "f.csv", "1,2,3\n")
        l = write(tmp_path / "l.csv", "1,,2\n")
        data = load_domain(f, l)
        np.testing.assert_array_equal(data.labels, [1, UNLABELED, 2])

    def test_ragged_row_names_line(self, tmp_path):
        f = write(tmp_path / "f.csv", "1,2,3\n4,5\n")
        l = write(tmp_path / "l.csv", "1,1,1\n")
        with pytest.raises(DataFormatError, match="f.csv:2"):
            load_domain(f, l)

    def test_bad_label_rejected(self, tmp_path):
        f = write(tmp_path / "f.csv", "1,2\n")
        l = write(tmp_path / "l.csv", "0,1\n")
        with pytest.raises(DataFormatError):
            load_domain(f, l)

    def test_label_count_mismatch(self, tmp_path):
        f = write(tmp_path / "f.csv", "1,2\n")
        l = write(tmp_path / "l.csv", "1\n")
        with pytest.raises(DataFormatError):
            load_domain(f, l)

    def test_save_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = DomainData(features=rng.normal(size=(4, 6)),
                          labels=np.array([1, 2, UNLABELED, 1, 3, UNLABELED]))
        save_domain(data, str(tmp_path / "f.csv"), str(tmp_path / "l.csv"))
        back = load_domain(str(tmp_path / "f.csv"), str(tmp_path / "l.csv"))
        np.testing.assert_array_equal(back.features, data.features)
        np.testing.assert_array_equal(back.labels, data.labels)


class TestLoadPairing:
    @pytest.fixture
    def domains(self):
        src = DomainData(features=np.ones((2, 3)), labels=np.array([1, 2, 1]))
        tgt = DomainData(features=np.ones((3, 3)),
                         labels=np.array([1, 2, 1]))
        return src, tgt

    def test_valid_pairs(self, tmp_path, domains):
        p = write(tmp_path / "p.csv", "0,0\n1,1\n")
        assert load_pairing(p, *domains) == [(0, 0), (1, 1)]

    def test_label_mismatch(self, tmp_path, domains):
        p = write(tmp_path / "p.csv", "0,1\n")
        with pytest.raises(DataFormatError, match="mismatch"):
            load_pairing(p, *domains)

    def test_duplicate_source_index(self, tmp_path, domains):
        p = write(tmp_path / "p.csv", "0,0\n0,2\n")
        with pytest.raises(DataFormatError, match="twice"):
            load_pairing(p, *domains)

    def test_out_of_range(self, tmp_path, domains):
        p = write(tmp_path / "p.csv", "5,0\n")
        with pytest.raises(DataFormatError, match="range"):
            load_pairing(p, *domains)


class TestPreprocess:
    def test_zscore_simple_row(self):
        data = DomainData(features=np.array([[1.0, 3.0]]),
                          labels=np.array([1, 1]))
        out = preprocess(data, "zscore")
        np.testing.assert_allclose(out.features, [[-1.0, 1.0]])

    def test_constant_row_only_centered(self):
        data = DomainData(features=np.array([[5.0, 5.0, 5.0]]),
                          labels=np.array([1, 1, 1]))
        out = preprocess(data, "zscore")
        np.testing.assert_allclose(out.features, [[0.0, 0.0, 0.0]])

    def test_unitnorm_columns(self):
        rng = np.random.default_rng(1)
        data = DomainData(features=rng.normal(size=(5, 8)),
                          labels=np.ones(8, dtype=int))
        out = preprocess(data, "zscore_unitnorm")
        np.testing.assert_allclose(np.linalg.norm(out.features, axis=0),
                                   1.0, atol=1e-12)

    def test_none_is_identity(self):
        data = DomainData(features=np.array([[1.0, 3.0]]),
                          labels=np.array([1, 1]))
        assert preprocess(data, "none") is data

    def test_single_sample_rejected(self):
        data = DomainData(features=np.array([[1.0]]), labels=np.array([1]))
        with pytest.raises(ValueError):
            preprocess(data, "zscore")

    def test_unknown_scheme_rejected(self):
        data = DomainData(features=np.ones((1, 2)), labels=np.array([1, 1]))
        with pytest.raises(ValueError):
            preprocess(data, "whiten")


class TestSynthGenerate:
    def test_deterministic(self):
        spec = SynthSpec(samples_per_domain=40)
        a = synth_generate(spec, 7)
        b = synth_generate(spec, 7)
        np.testing.assert_array_equal(a.source.features, b.source.features)
        np.testing.assert_array_equal(a.target.features, b.target.features)
        np.testing.assert_array_equal(a.target.labels, b.target.labels)
        assert a.pairs == b.pairs

    def test_different_seeds_differ(self):
        spec = SynthSpec(samples_per_domain=40)
        a = synth_generate(spec, 1)
        b = synth_generate(spec, 2)
        assert np.abs(a.source.features - b.source.features).max() > 0

    def test_pair_count_and_shared_labels(self):
        spec = SynthSpec(samples_per_domain=100, pair_fraction=0.3)
        ds = synth_generate(spec, 0)
        assert len(ds.pairs) == 30
        for i, j in ds.pairs:
            assert ds.source.labels[i] == ds.target.labels[j]
        # unpaired target samples are unlabeled
        paired_t = {j for _, j in ds.pairs}
        for j in range(ds.target.n_samples):
            if j not in paired_t:
                assert ds.target.labels[j] == UNLABELED

    def test_invariants_validate(self):
        ds = synth_generate(SynthSpec(samples_per_domain=50), 3)
        validate_dataset(ds)
        assert ds.source.dim == 30
        assert ds.target.dim == 20
        assert ds.target_truth is not None

    def test_zero_noise_nearest_centroid_separable(self):
        spec = SynthSpec(class_count=2, noise_sigma=0.0,
                         samples_per_domain=50)
        ds = synth_generate(spec, 5)
        x, y = ds.source.features, ds.source.labels
        centroids = np.column_stack([x[:, y == c].mean(axis=1)
                                     for c in (1, 2)])
        d2 = ((x[:, :, None] - centroids[:, None, :]) ** 2).sum(axis=0)
        pred = d2.argmin(axis=1) + 1
        assert np.all(pred == y)

    def test_balanced_pair_classes(self):
        ds = synth_generate(SynthSpec(class_count=4, samples_per_domain=100,
                                      pair_fraction=0.3), 0)
        labels = [int(ds.source.labels[i]) for i, _ in ds.pairs]
        counts = np.bincount(labels, minlength=5)[1:]
        assert counts.max() - counts.min() <= 1

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            synth_generate(SynthSpec(latent_dim=25, target_dim=20), 0)
        with pytest.raises(ValueError):
            synth_generate(SynthSpec(pair_fraction=0.0), 0)
        with pytest.raises(ValueError):
            synth_generate(SynthSpec(noise_sigma=-0.1), 0)
        with pytest.raises(ValueError):
            synth_generate(SynthSpec(class_count=10, samples_per_domain=20,
                                     pair_fraction=0.1), 0)


class TestValidateDataset:
    def test_rejects_label_mismatch_pair(self):
        src = DomainData(features=np.ones((2, 2)), labels=np.array([1, 2]))
        tgt = DomainData(features=np.ones((2, 2)), labels=np.array([2, 1]))
        from hetda.data import HeteroDataset
        ds = HeteroDataset(source=src, target=tgt, pairs=[(0, 0)],
                           class_count=2)
        with pytest.raises(ValueError, match="mismatch"):
            validate_dataset(ds)

    def test_rejects_reused_index(self):
        src = DomainData(features=np.ones((2, 3)), labels=np.array([1, 1, 1]))
        tgt = DomainData(features=np.ones((2, 3)), labels=np.array([1, 1, 1]))
        from hetda.data import HeteroDataset
        ds = HeteroDataset(source=src, target=tgt, pairs=[(0, 0), (0, 1)],
                           class_count=1)
        with pytest.raises(ValueError, match="reuses"):
            validate_dataset(ds)
