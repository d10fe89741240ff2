import math

import numpy as np
import pytest

from app.utils.classifier import (
    Gallery,
    accuracy,
    classify,
    predict,
    project,
    relaxed_distance,
)
from app.utils.data_processor import (
    LabeledDataset,
    shuffle_labels,
    split_per_class,
)
from app.utils.errors import DimensionError, InvalidStateError
from app.utils.projector import FitConfig, r2dpca_fit, relaxed_2dpca_eig
from tests.conftest import make_model


def _gallery(features, labels, D):
    return Gallery(
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels),
        weights=np.asarray(D, dtype=np.float64),
    )


def test_project_examples():
    model = make_model(W=[[1.0], [0.0]], D=[1.0], mean=[[0.0, 0.0]])
    np.testing.assert_array_equal(project([[1.0, 2.0]], model), [[1.0]])

    mean = np.array([[0.5, -1.0, 2.0], [1.0, 1.0, 1.0]])
    square = make_model(W=np.eye(3), D=np.ones(3), mean=mean)
    X = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(project(mean, square), np.zeros((2, 3)))
    np.testing.assert_allclose(project(X, square), X - mean)


def test_project_dimension_mismatch():
    model = make_model(W=[[1.0], [0.0]], D=[1.0], mean=[[0.0, 0.0]])
    with pytest.raises(DimensionError):
        project(np.zeros((1, 3)), model)


def test_relaxed_distance_examples():
    P = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert relaxed_distance(P, P, [2.0, 3.0]) == 0.0
    Q = np.array([[0.0, 1.0], [1.0, 1.0]])
    expected = pytest.approx(np.linalg.norm(P - Q))
    assert relaxed_distance(P, Q, [1.0, 1.0]) == expected
    weighted = relaxed_distance([[1.0, 1.0]], [[0.0, 0.0]], [2.0, 3.0])
    assert weighted == pytest.approx(math.sqrt(13.0))


def test_relaxed_distance_dimension_mismatch():
    with pytest.raises(DimensionError):
        relaxed_distance(np.zeros((2, 2)), np.zeros((2, 3)), [1.0, 1.0])
    with pytest.raises(DimensionError):
        relaxed_distance(np.zeros((2, 2)), np.zeros((2, 2)), [1.0, 1.0, 1.0])


def test_relaxed_distance_is_a_pseudometric():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        A, B, C = rng.standard_normal((3, 4, 3))
        D = rng.uniform(0.0, 2.0, size=3)
        ab = relaxed_distance(A, B, D)
        assert ab == pytest.approx(relaxed_distance(B, A, D), rel=1e-12)
        assert relaxed_distance(A, A, D) == 0.0
        detour = relaxed_distance(A, C, D) + relaxed_distance(C, B, D)
        assert ab <= detour + 1e-12


def test_scaling_weights_keeps_classify_decision():
    rng = np.random.default_rng(23)
    for _ in range(100):
        model = make_model(
            W=np.linalg.qr(rng.standard_normal((4, 2)))[0],
            D=rng.uniform(0.1, 3.0, size=2),
            mean=np.zeros((3, 4)),
        )
        features = rng.standard_normal((6, 3, 2))
        labels = rng.integers(0, 3, size=6)
        query = rng.standard_normal((3, 4))
        alpha = rng.uniform(0.01, 100.0)

        plain = _gallery(features, labels, model.D)
        scaled = _gallery(features, labels, alpha * model.D)
        assert classify(plain, query, model) == classify(scaled, query, model)


def test_classify_examples():
    model = make_model(W=np.eye(2), D=[1.0, 1.0], mean=np.zeros((1, 2)))

    single = _gallery([[[5.0, 5.0]]], [2], [1.0, 1.0])
    assert classify(single, np.array([[-9.0, 3.0]]), model) == 2

    two = _gallery([[[1.0, 0.0]], [[2.0, 0.0]]], [0, 1], [1.0, 1.0])
    # distances 1.0 and 2.0 from the origin
    assert classify(two, np.zeros((1, 2)), model) == 0
    assert classify(two, np.array([[2.0, 0.0]]), model) == 1


def test_classify_ties_go_to_lowest_index():
    model = make_model(W=np.eye(2), D=[1.0, 1.0], mean=np.zeros((1, 2)))
    gallery = _gallery([[[1.0, 0.0]], [[-1.0, 0.0]]], [4, 3], [1.0, 1.0])
    assert classify(gallery, np.zeros((1, 2)), model) == 4


def test_classify_empty_gallery():
    model = make_model(W=np.eye(2), D=[1.0, 1.0], mean=np.zeros((1, 2)))
    empty = _gallery(np.zeros((0, 1, 2)), np.zeros(0, dtype=int), [1.0, 1.0])
    with pytest.raises(InvalidStateError, match="empty"):
        classify(empty, np.zeros((1, 2)), model)


def test_accuracy_on_training_set_is_one(synthetic_dataset):
    train, _ = split_per_class(synthetic_dataset, 10, seed=0)
    model = r2dpca_fit(train, None, FitConfig(r=3))
    gallery = Gallery.from_dataset(train, model)
    assert accuracy(gallery, train, model) == 1.0


def test_accuracy_all_wrong():
    model = make_model(W=np.eye(2), D=[1.0, 1.0], mean=np.zeros((1, 2)))
    gallery = _gallery([[[0.0, 0.0]]], [1], [1.0, 1.0])
    test = LabeledDataset(np.ones((3, 1, 2)), [0, 0, 0], ("a",))
    assert accuracy(gallery, test, model) == 0.0


def test_accuracy_on_separated_classes():
    rng = np.random.default_rng(1)
    centres = np.array([np.zeros((4, 4)), np.full((4, 4), 10.0)])
    samples = np.concatenate(
        [centre + 0.1 * rng.standard_normal((6, 4, 4)) for centre in centres]
    )
    ds = LabeledDataset(samples, np.repeat([0, 1], 6), ("low", "high"))
    train, test = split_per_class(ds, 3, seed=2)
    model = relaxed_2dpca_eig(train, None, 0.0, 2)
    assert accuracy(Gallery.from_dataset(train, model), test, model) == 1.0


def test_predict_frame(synthetic_dataset):
    train, test = split_per_class(synthetic_dataset, 10, seed=1)
    model = r2dpca_fit(train, None, FitConfig(r=2))
    gallery = Gallery.from_dataset(train, model)
    frame = predict(gallery, test, model)

    assert list(frame.columns) == [
        "test_index",
        "true_label",
        "predicted_label",
        "distance",
    ]
    assert len(frame) == test.n
    assert (frame["distance"] >= 0).all()
    hits = (frame["true_label"] == frame["predicted_label"]).mean()
    assert hits == pytest.approx(accuracy(gallery, test, model))


def test_classify_is_shift_invariant_after_refit(synthetic_dataset):
    train, test = split_per_class(synthetic_dataset, 10, seed=3)
    shift = np.random.default_rng(0).uniform(-5.0, 5.0, size=(16, 16))
    cfg = FitConfig(r=3)

    model = r2dpca_fit(train, None, cfg)
    moved_train = train.with_samples(train.samples + shift)
    moved_model = r2dpca_fit(moved_train, None, cfg)

    gallery = Gallery.from_dataset(train, model)
    moved_gallery = Gallery.from_dataset(moved_train, moved_model)
    for sample in test.samples:
        assert classify(gallery, sample, model) == classify(
            moved_gallery, sample + shift, moved_model
        )


def test_desk_scale_recognition(synthetic_dataset):
    train, test = split_per_class(synthetic_dataset, 10, seed=5)
    model = r2dpca_fit(train, None, FitConfig(s=2, p=2, gamma=0.0, r=3))
    assert accuracy(Gallery.from_dataset(train, model), test, model) >= 0.95


def test_shuffled_training_labels_fall_to_chance(synthetic_dataset):
    scores = []
    for rep in range(5):
        train, test = split_per_class(synthetic_dataset, 10, seed=rep)
        train = shuffle_labels(train, seed=100 + rep)
        model = r2dpca_fit(train, None, FitConfig(s=2, p=2, gamma=0.0, r=3))
        gallery = Gallery.from_dataset(train, model)
        scores.append(accuracy(gallery, test, model))
    assert np.mean(scores) <= 0.35
