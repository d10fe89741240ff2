import numpy as np
import pytest

from app.utils.data_processor import (
    LabeledDataset,
    center,
    compute_centering,
    load_manifest,
    save_dataset,
    shuffle_labels,
    split_per_class,
    synth_generate,
    synth_prototypes,
)
from app.utils.errors import (
    DimensionError,
    InvalidInputError,
    InvalidParameterError,
    LoadError,
)
from tests.conftest import write_pgm


def _dataset(samples, labels, m=None):
    samples = np.asarray(samples, dtype=np.float64)
    m = m if m is not None else int(max(labels)) + 1
    return LabeledDataset(samples, labels, tuple(f"c{j}" for j in range(m)))


def test_load_manifest_two_classes(two_class_manifest):
    ds = load_manifest(two_class_manifest)

    assert ds.n == 4
    assert ds.n_classes == 2
    assert ds.class_names == ("alpha", "beta")
    assert (ds.height, ds.width) == (2, 2)
    np.testing.assert_array_equal(ds.labels, [0, 0, 1, 1])
    np.testing.assert_allclose(ds.samples[0], [[0, 1], [1, 0]])
    assert ds.samples.min() >= 0.0 and ds.samples.max() <= 1.0


def test_load_manifest_reads_plain_pgm(tmp_path):
    write_pgm(tmp_path / "x.pgm", [[0, 51], [102, 255]], plain=True)
    (tmp_path / "m.csv").write_text("x.pgm,only\n")

    ds = load_manifest(tmp_path / "m.csv")

    np.testing.assert_allclose(ds.samples[0], [[0, 0.2], [0.4, 1.0]])


def test_load_manifest_class_order_follows_first_appearance(tmp_path):
    for name in ("p", "q", "r"):
        write_pgm(tmp_path / f"{name}.pgm", [[1, 2]])
    (tmp_path / "m.csv").write_text("p.pgm,zeta\nq.pgm,alpha\nr.pgm,zeta\n")

    ds = load_manifest(tmp_path / "m.csv")

    assert ds.class_names == ("zeta", "alpha")
    np.testing.assert_array_equal(ds.labels, [0, 1, 0])


def test_load_manifest_skips_comment_lines_only(tmp_path):
    write_pgm(tmp_path / "a" / "img#1.pgm", [[0, 255]])
    write_pgm(tmp_path / "b.pgm", [[255, 0]])
    (tmp_path / "m.csv").write_text(
        "# header comment\n"
        "a/img#1.pgm,alpha\n"
        "  # indented comment\n"
        "b.pgm,beta\n"
    )

    ds = load_manifest(tmp_path / "m.csv")

    assert ds.class_names == ("alpha", "beta")
    np.testing.assert_allclose(ds.samples[:, 0], [[0.0, 1.0], [1.0, 0.0]])


def test_load_manifest_empty(tmp_path):
    manifest = tmp_path / "empty.csv"
    manifest.write_text("")

    with pytest.raises(LoadError, match="empty"):
        load_manifest(manifest)


def test_load_manifest_dimension_mismatch(tmp_path):
    write_pgm(tmp_path / "small.pgm", np.zeros((2, 2)))
    write_pgm(tmp_path / "large.pgm", np.zeros((3, 3)))
    (tmp_path / "m.csv").write_text("small.pgm,a\nlarge.pgm,b\n")

    with pytest.raises(LoadError, match="dimension mismatch.*large.pgm"):
        load_manifest(tmp_path / "m.csv")


def test_load_manifest_missing_image_names_the_file(tmp_path):
    (tmp_path / "m.csv").write_text("ghost.pgm,a\n")

    with pytest.raises(LoadError, match="ghost.pgm"):
        load_manifest(tmp_path / "m.csv")


def test_load_manifest_unknown_format(tmp_path):
    (tmp_path / "note.pgm").write_text("definitely not an image")
    (tmp_path / "m.csv").write_text("note.pgm,a\n")

    with pytest.raises(LoadError, match="note.pgm"):
        load_manifest(tmp_path / "m.csv")


def test_load_manifest_missing_label(tmp_path):
    write_pgm(tmp_path / "x.pgm", [[1]])
    (tmp_path / "m.csv").write_text("x.pgm\n")

    with pytest.raises(LoadError, match="no class label"):
        load_manifest(tmp_path / "m.csv")


def test_load_manifest_not_found(tmp_path):
    with pytest.raises(LoadError, match="manifest not found"):
        load_manifest(tmp_path / "nope.csv")


def test_save_dataset_can_be_reloaded(tmp_path, small_dataset):
    ds = small_dataset.with_samples(
        np.clip(small_dataset.samples * 0.1 + 0.5, 0.0, 1.0)
    )
    manifest = save_dataset(ds, tmp_path / "out")
    reloaded = load_manifest(manifest)

    assert reloaded.class_names == ds.class_names
    np.testing.assert_array_equal(reloaded.labels, ds.labels)
    np.testing.assert_allclose(
        reloaded.samples, ds.samples, atol=0.5 / 255 + 1e-12
    )


def test_load_save_load_is_bit_exact(tmp_path, two_class_manifest):
    first = load_manifest(two_class_manifest)
    second = load_manifest(save_dataset(first, tmp_path / "copy"))

    assert second.class_names == first.class_names
    np.testing.assert_array_equal(second.labels, first.labels)
    np.testing.assert_array_equal(second.samples, first.samples)


def test_dataset_validation():
    with pytest.raises(InvalidInputError, match="non-finite"):
        _dataset([[[np.inf]]], [0])
    with pytest.raises(InvalidInputError, match="unknown classes"):
        _dataset([[[1.0]]], [1], m=1)
    with pytest.raises(InvalidInputError, match="at least one sample"):
        _dataset([[[1.0]]], [0], m=2)
    with pytest.raises(DimensionError):
        _dataset([[[1.0]], [[2.0]]], [0])


def test_dataset_is_read_only(small_dataset):
    with pytest.raises(ValueError):
        small_dataset.samples[0, 0, 0] = 1.0


def test_centering_single_sample():
    ds = _dataset([[[1.0, 2.0]]], [0])
    c = compute_centering(ds)

    np.testing.assert_array_equal(c.global_mean, [[1.0, 2.0]])
    np.testing.assert_array_equal(c.class_means[0], [[1.0, 2.0]])


def test_centering_examples():
    one_class = compute_centering(_dataset([[[0.0]], [[2.0]]], [0, 0]))
    np.testing.assert_array_equal(one_class.global_mean, [[1.0]])

    two_class = compute_centering(
        _dataset([[[0.0]], [[2.0]], [[4.0]]], [0, 0, 1])
    )
    np.testing.assert_array_equal(two_class.global_mean, [[2.0]])
    np.testing.assert_array_equal(two_class.class_means[0], [[1.0]])
    np.testing.assert_array_equal(two_class.class_means[1], [[4.0]])


def test_center_examples(small_dataset):
    ds = _dataset([[[0.0]], [[2.0]]], [0, 0])
    centered = center(ds, compute_centering(ds))
    np.testing.assert_array_equal(centered.samples, [[[-1.0]], [[1.0]]])

    centered = center(small_dataset, compute_centering(small_dataset))
    np.testing.assert_allclose(centered.samples.mean(axis=0), 0.0, atol=1e-12)
    again = center(centered, compute_centering(centered))
    np.testing.assert_allclose(again.samples, centered.samples, atol=1e-15)

    single = _dataset([[[3.0, 4.0]]], [0])
    np.testing.assert_array_equal(
        center(single, compute_centering(single)).samples, np.zeros((1, 1, 2))
    )


def test_center_dimension_mismatch(small_dataset):
    other = _dataset([[[1.0]]], [0])
    with pytest.raises(DimensionError):
        center(small_dataset, compute_centering(other))


def test_split_per_class_counts_and_determinism():
    samples = np.arange(6, dtype=float).reshape(6, 1, 1)
    ds = _dataset(samples, [0, 0, 0, 1, 1, 1])

    train, test = split_per_class(ds, 2, seed=7)
    again_train, again_test = split_per_class(ds, 2, seed=7)

    assert (train.n, test.n) == (4, 2)
    np.testing.assert_array_equal(train.class_counts, [2, 2])
    np.testing.assert_array_equal(train.samples, again_train.samples)
    np.testing.assert_array_equal(test.samples, again_test.samples)
    merged = np.concatenate([train.samples, test.samples]).ravel()
    assert sorted(merged) == list(range(6))


def test_split_per_class_rejects_too_many_train_samples():
    ds = _dataset(np.zeros((6, 1, 1)), [0, 0, 0, 1, 1, 1])
    with pytest.raises(InvalidParameterError, match="train_per_class"):
        split_per_class(ds, 3, seed=0)


def test_shuffle_labels_keeps_class_counts(synthetic_dataset):
    shuffled = shuffle_labels(synthetic_dataset, seed=1)

    np.testing.assert_array_equal(
        shuffled.class_counts, synthetic_dataset.class_counts
    )
    assert np.any(shuffled.labels != synthetic_dataset.labels)
    np.testing.assert_array_equal(shuffled.samples, synthetic_dataset.samples)


def test_synth_without_noise_repeats_prototypes():
    ds = synth_generate(3, 4, 5, 6, noise_sigma=0.0, seed=2)
    for j in range(3):
        members = ds.class_samples(j)
        assert np.all(members == members[0])


def test_synth_single_class():
    ds = synth_generate(1, 5, 4, 4, noise_sigma=0.1, seed=2)
    assert np.all(ds.labels == 0)
    assert ds.n == 5


def test_synth_is_deterministic():
    a = synth_generate(3, 4, 5, 6, noise_sigma=0.2, seed=9)
    b = synth_generate(3, 4, 5, 6, noise_sigma=0.2, seed=9)
    np.testing.assert_array_equal(a.samples, b.samples)


@pytest.mark.parametrize("sigma", [0.05, 0.5, 3.0])
def test_synth_prototype_separation(sigma):
    h, w = 4, 4
    prototypes = synth_prototypes(6, h, w, sigma, np.random.default_rng(4))
    dists = np.sqrt(
        np.sum((prototypes[:, None] - prototypes[None]) ** 2, axis=(2, 3))
    )
    assert dists[np.triu_indices(6, k=1)].min() >= 4.0 * sigma * np.sqrt(h * w)
