import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.utils.data_processor import (
    Centering,
    LabeledDataset,
    compute_centering,
)
from app.utils.errors import InvalidParameterError
from app.utils.linalg_utils import sym_eig

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12


class RelaxFn(BaseModel):
    """Positive map applied to each class's principal within-class variance.

    The catalog is closed so experiment configs stay reproducible.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["identity-plus-epsilon", "exponential", "constant"] = (
        "identity-plus-epsilon"
    )
    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "identity-plus-epsilon":
            return x + self.epsilon
        if self.kind == "exponential":
            # shifted by the maximum; the ratios, and so v, are unchanged
            return np.exp(x - x.max())
        return np.ones_like(x)


@dataclass(frozen=True, eq=False)
class RelaxationVector:
    """Per-class weights v (nonnegative, summing to one)."""

    v: np.ndarray
    class_counts: np.ndarray
    lambda_max: np.ndarray

    @property
    def per_sample(self) -> np.ndarray:
        """Weight v_j / n_j shared by every sample of class j."""
        return self.v / self.class_counts

    def sample_weights(self, labels: np.ndarray) -> np.ndarray:
        return self.per_sample[labels]


def within_class_cov(ds: LabeledDataset, c: Centering, j: int) -> np.ndarray:
    """C_j = (1/n_j) sum_i (X_i^j - M_j)^T (X_i^j - M_j), a w x w matrix."""
    if not 0 <= j < ds.n_classes:
        raise InvalidParameterError(
            f"class index must lie in [0, {ds.n_classes - 1}], got {j}"
        )
    deviations = ds.class_samples(j) - c.class_means[j]
    cov = np.einsum("nhi,nhj->ij", deviations, deviations)
    cov /= deviations.shape[0]
    return 0.5 * (cov + cov.T)


def relaxation_vector(
    ds: LabeledDataset, c: Centering = None, f: RelaxFn = None
) -> RelaxationVector:
    c = c if c is not None else compute_centering(ds)
    f = f if f is not None else RelaxFn()

    lambda_max = np.empty(ds.n_classes)
    for j in range(ds.n_classes):
        _, d = sym_eig(within_class_cov(ds, c, j), 1)
        # PSD matrices can come back with tiny negative round-off
        lambda_max[j] = max(d[0], 0.0)

    if np.all(lambda_max == 0.0):
        v = np.full(ds.n_classes, 1.0 / ds.n_classes)
    else:
        weights = f(lambda_max)
        v = weights / weights.sum()
    logger.debug("Relaxation vector %s from lambda_max %s", v, lambda_max)
    return RelaxationVector(
        v=v, class_counts=ds.class_counts, lambda_max=lambda_max
    )
