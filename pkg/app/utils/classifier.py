import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from app.utils.data_processor import LabeledDataset
from app.utils.errors import DimensionError, InvalidStateError
from app.utils.projector import ProjectionModel

logger = logging.getLogger(__name__)

# Feature images are plain (h, r) arrays: column t holds (X - M) w_t.
FeatureImage = np.ndarray

PREDICTION_COLUMNS = [
    "test_index",
    "true_label",
    "predicted_label",
    "distance",
]


@dataclass(frozen=True, eq=False)
class Gallery:
    """Training feature images, their labels and the axis weights D."""

    features: np.ndarray  # (n, h, r)
    labels: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_dataset(
        cls, train: LabeledDataset, model: ProjectionModel
    ) -> "Gallery":
        return cls(
            features=project_many(train.samples, model),
            labels=np.asarray(train.labels),
            weights=np.asarray(model.D, dtype=np.float64),
        )


def _check_shape(X: np.ndarray, model: ProjectionModel) -> None:
    if X.shape[-2:] != (model.height, model.width):
        raise DimensionError(
            f"sample of shape {X.shape[-2:]} for a model trained on "
            f"{(model.height, model.width)}"
        )


def project(X, model: ProjectionModel) -> FeatureImage:
    """P = (X - M) W."""
    X = np.asarray(X, dtype=np.float64)
    _check_shape(X, model)
    return (X - model.centering.global_mean) @ model.W


def project_many(samples, model: ProjectionModel) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    _check_shape(samples, model)
    return (samples - model.centering.global_mean) @ model.W


def relaxed_distance(Pa, Pb, D) -> float:
    """Frobenius norm of (Pa - Pb) diag(D)."""
    Pa = np.asarray(Pa, dtype=np.float64)
    Pb = np.asarray(Pb, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if Pa.shape != Pb.shape:
        raise DimensionError(
            f"feature images differ in shape: {Pa.shape} vs {Pb.shape}"
        )
    if D.shape != (Pa.shape[-1],):
        raise DimensionError(
            f"{D.shape[0]} weights for {Pa.shape[-1]} components"
        )
    return float(np.linalg.norm((Pa - Pb) * D))


def _gallery_distances(gallery: Gallery, P: np.ndarray) -> np.ndarray:
    if len(gallery) == 0:
        raise InvalidStateError("gallery is empty")
    if P.shape != gallery.features.shape[1:]:
        raise DimensionError(
            f"feature image of shape {P.shape} for gallery of "
            f"{gallery.features.shape[1:]}"
        )
    weighted = (gallery.features - P) * gallery.weights
    return np.sqrt(np.sum(weighted**2, axis=(1, 2)))


def nearest(gallery: Gallery, X, model: ProjectionModel) -> Tuple[int, float]:
    """Index and relaxed distance of the nearest gallery item.

    Ties go to the lowest index.
    """
    distances = _gallery_distances(gallery, project(X, model))
    idx = int(np.argmin(distances))
    return idx, float(distances[idx])


def classify(gallery: Gallery, X, model: ProjectionModel) -> int:
    idx, _ = nearest(gallery, X, model)
    return int(gallery.labels[idx])


def predict(
    gallery: Gallery, test: LabeledDataset, model: ProjectionModel
) -> pd.DataFrame:
    """Per-sample predictions as a frame with the prediction-dump columns."""
    rows = []
    for i, (sample, label) in enumerate(zip(test.samples, test.labels)):
        idx, distance = nearest(gallery, sample, model)
        rows.append(
            {
                "test_index": i,
                "true_label": test.class_names[label],
                "predicted_label": test.class_names[gallery.labels[idx]],
                "distance": distance,
            }
        )
    return pd.DataFrame(rows, columns=PREDICTION_COLUMNS)


def accuracy(
    gallery: Gallery, test: LabeledDataset, model: ProjectionModel
) -> float:
    hits = sum(
        classify(gallery, sample, model) == label
        for sample, label in zip(test.samples, test.labels)
    )
    return hits / test.n
