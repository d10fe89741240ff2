"""Projection learning for the 2DPCA family.

All iterative members (2DPCA, 2DPCA-L1, G2DPCA, R2DPCA) share one solver that
maximizes the relaxed criterion

    J(w) = gamma * sum_i ||X_i w||_s^s
           + (1 - gamma) * sum_j sum_i ||(v_j / n_j) X_i^j w||_s^s

over ||w||_p = 1, one axis at a time with deflation between axes. Since
v_j / n_j is a nonnegative scalar per sample, both sums collapse into one
sum with per-sample weights gamma + (1 - gamma) * (v_j / n_j)^s.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.utils.data_processor import (
    Centering,
    LabeledDataset,
    compute_centering,
)
from app.utils.errors import DimensionError, InvalidParameterError
from app.utils.linalg_utils import lp_norm, pow_abs, signum, sym_eig
from app.utils.relaxation import RelaxationVector, relaxation_vector
from app.utils.seeding import make_rng

logger = logging.getLogger(__name__)

TINY_OBJECTIVE = 1e-300

InitKind = Literal[
    "ones", "unit-e1", "seeded-random", "first-right-singular-proxy"
]
Step = Callable[[np.ndarray, np.ndarray], Optional[np.ndarray]]


def parse_norm_order(value):
    """Accepts "inf", "infinity" and "∞" for p = infinity."""
    names = ("inf", "infinity", "∞")
    if isinstance(value, str) and value.strip().lower() in names:
        return math.inf
    return value


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float = Field(default=2.0, ge=1.0, allow_inf_nan=False)
    p: float = Field(default=2.0, gt=0.0)
    gamma: float = Field(default=1.0, ge=0.0, le=1.0)
    r: int = Field(default=1, ge=1)
    tol: float = Field(default=1e-8, gt=0.0, allow_inf_nan=False)
    max_iter: int = Field(default=500, ge=1)
    lambda_sparsity: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    init: InitKind = "ones"
    seed: int = Field(default=0, ge=0)

    @field_validator("p", mode="before")
    @classmethod
    def parse_infinity(cls, value):
        return parse_norm_order(value)

    @field_validator("p")
    @classmethod
    def reject_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("p must not be NaN")
        return value


@dataclass(frozen=True, eq=False)
class ProjectionModel:
    """Learned basis W (w x r) with per-axis objective values D."""

    W: np.ndarray
    D: np.ndarray
    centering: Centering
    relax: RelaxationVector
    config: FitConfig
    iters_per_axis: Tuple[int, ...]
    converged: Tuple[bool, ...]
    degenerate: Tuple[bool, ...]
    histories: Tuple[np.ndarray, ...] = ()

    @property
    def r(self) -> int:
        return self.W.shape[1]

    @property
    def height(self) -> int:
        return self.centering.global_mean.shape[0]

    @property
    def width(self) -> int:
        return self.centering.global_mean.shape[1]

    def truncate(self, r: int) -> "ProjectionModel":
        """Keeps the first r axes and their objective values."""
        if not 1 <= r <= self.r:
            raise InvalidParameterError(
                f"requested {r} axes but the model has {self.r}"
            )
        return replace(
            self,
            W=self.W[:, :r],
            D=self.D[:r],
            config=self.config.model_copy(update={"r": r}),
            iters_per_axis=self.iters_per_axis[:r],
            converged=self.converged[:r],
            degenerate=self.degenerate[:r],
            histories=self.histories[:r],
        )


@dataclass
class _AxisResult:
    w: np.ndarray
    value: float
    iterations: int
    converged: bool
    degenerate: bool
    history: np.ndarray


def _sample_weights(
    labels: np.ndarray,
    relax: Optional[RelaxationVector],
    gamma: float,
    s: float,
) -> np.ndarray:
    if relax is None:
        if gamma != 1.0:
            raise InvalidParameterError(
                "a relaxation vector is required when gamma < 1"
            )
        per_sample = np.zeros(labels.shape[0])
    else:
        per_sample = relax.sample_weights(labels)
    return gamma + (1.0 - gamma) * per_sample**s


def _objective_value(
    X: np.ndarray, c: np.ndarray, w: np.ndarray, s: float
) -> float:
    Y = X @ w
    return float(np.sum(c * np.sum(pow_abs(Y, s), axis=1)))


def _ascent_direction(
    X: np.ndarray, c: np.ndarray, w: np.ndarray, s: float
) -> np.ndarray:
    Y = X @ w
    G = pow_abs(Y, s - 1.0) * signum(Y)
    return np.einsum("nhw,nh->w", X, c[:, None] * G)


def objective(
    ds: LabeledDataset,
    relax: Optional[RelaxationVector],
    gamma: float,
    s: float,
    w,
) -> float:
    """Relaxed criterion J(w) on samples that are already mean deviations."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (ds.width,):
        raise DimensionError(f"axis of shape {w.shape} for width {ds.width}")
    c = _sample_weights(ds.labels, relax, gamma, s)
    return _objective_value(ds.samples, c, w, s)


def deflate(samples, W) -> np.ndarray:
    """X_i <- X_i (I - W W^T) for every sample."""
    X = np.asarray(samples, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    if W.size == 0:
        return X.copy()
    if X.shape[-1] != W.shape[0]:
        raise DimensionError(
            f"samples of width {X.shape[-1]} do not match a basis "
            f"with {W.shape[0]} rows"
        )
    return X - (X @ W) @ W.T


def _lp_step(p: float) -> Step:
    """Update w^{k+1} from v^k for the constraint ||w||_p = 1."""

    def step(v: np.ndarray, w: np.ndarray) -> Optional[np.ndarray]:
        if not np.any(v):
            return None
        if p < 1.0:
            # zeros of w are absorbing under this multiplicative rule
            u = pow_abs(w, 2.0 - p) * v
            if not np.any(u):
                return None
            return u / lp_norm(u, p)
        if p == 1.0:
            j = int(np.argmax(np.abs(v)))
            w_next = np.zeros_like(v)
            w_next[j] = np.sign(v[j])
            return w_next
        if math.isinf(p):
            return signum(v)
        q = p / (p - 1.0)
        if q - 1.0 == 1.0:
            magnitude = np.abs(v)
        else:
            # u/||u||_p ignores positive scaling of v; scaled against overflow
            magnitude = pow_abs(v / np.max(np.abs(v)), q - 1.0)
        u = magnitude * signum(v)
        return u / lp_norm(u, p)

    return step


def _shrink_step(lambda_sparsity: float) -> Step:
    """2DPCA-L1-S update u_i = v_i |w_i| / (lambda + |w_i|), L2-normalized."""

    def step(v: np.ndarray, w: np.ndarray) -> Optional[np.ndarray]:
        if not np.any(v):
            return None
        abs_w = np.abs(w)
        denom = lambda_sparsity + abs_w
        shrink = np.divide(
            abs_w, denom, out=np.ones_like(abs_w), where=denom > 0
        )
        u = v * shrink
        if not np.any(u):
            return None
        return u / lp_norm(u, 2.0)

    return step


def _initial_axis(
    X: np.ndarray, cfg: FitConfig, t: int, kind: str
) -> np.ndarray:
    width = X.shape[-1]
    if kind == "unit-e1":
        w = np.zeros(width)
        w[0] = 1.0
        return w
    if kind == "seeded-random":
        w = make_rng(cfg.seed, "init", t).standard_normal(width)
    elif kind == "first-right-singular-proxy" and np.any(X):
        scatter = np.einsum("nhi,nhj->ij", X, X)
        W, _ = sym_eig(0.5 * (scatter + scatter.T), 1)
        w = W[:, 0]
    else:
        w = np.ones(width)
    return w / lp_norm(w, cfg.p)


def _fit_axis(
    X: np.ndarray,
    c: np.ndarray,
    w0: np.ndarray,
    cfg: FitConfig,
    step: Step,
    s: float,
) -> _AxisResult:
    w = w0
    f = _objective_value(X, c, w, s)
    history = [f]
    for k in range(cfg.max_iter):
        v = _ascent_direction(X, c, w, s)
        w_next = step(v, w)
        if w_next is None:
            return _AxisResult(w, f, k, True, True, np.array(history))
        f_next = _objective_value(X, c, w_next, s)
        history.append(f_next)
        if abs(f) < TINY_OBJECTIVE:
            delta = abs(f_next - f)
        else:
            delta = abs(f_next - f) / abs(f)
        w, f = w_next, f_next
        if delta <= cfg.tol:
            return _AxisResult(w, f, k + 1, True, False, np.array(history))
    return _AxisResult(w, f, cfg.max_iter, False, False, np.array(history))


def _fit_axes(
    train: LabeledDataset,
    relax: RelaxationVector,
    c: np.ndarray,
    cfg: FitConfig,
    step: Step,
    s: float,
) -> ProjectionModel:
    if cfg.r > train.width:
        raise InvalidParameterError(
            f"r={cfg.r} exceeds the image width {train.width}"
        )
    centering = compute_centering(train)
    X0 = train.samples - centering.global_mean

    axes, results = [], []
    X = X0
    for t in range(cfg.r):
        if axes:
            X = deflate(X0, np.column_stack(axes))
        w0 = _initial_axis(X, cfg, t, cfg.init)
        result = _fit_axis(X, c, w0, cfg, step, s)
        if result.degenerate and result.iterations == 0 and np.any(X):
            if cfg.init != "seeded-random":
                logger.debug(
                    "Axis %d: zero ascent direction at w0, retrying from a "
                    "random start",
                    t,
                )
                w0 = _initial_axis(X, cfg, t, "seeded-random")
                result = _fit_axis(X, c, w0, cfg, step, s)
        if result.degenerate:
            logger.warning("Axis %d is degenerate (zero ascent direction)", t)
        elif not result.converged:
            logger.warning(
                "Axis %d did not converge within %d iterations",
                t,
                cfg.max_iter,
            )
        logger.debug(
            "Axis %d: objective %.6g after %d iterations",
            t,
            result.value,
            result.iterations,
        )
        axes.append(result.w)
        results.append(result)

    return ProjectionModel(
        W=np.column_stack(axes),
        D=np.array([res.value for res in results]),
        centering=centering,
        relax=relax,
        config=cfg,
        iters_per_axis=tuple(res.iterations for res in results),
        converged=tuple(res.converged for res in results),
        degenerate=tuple(res.degenerate for res in results),
        histories=tuple(res.history for res in results),
    )


def r2dpca_fit(
    train: LabeledDataset,
    relax: Optional[RelaxationVector],
    cfg: FitConfig,
) -> ProjectionModel:
    """Relaxed 2DPCA with Ls objective and Lp constraint.

    Samples are centered internally with the training mean. When ``relax``
    is None the default relaxation vector of ``train`` is used.
    """
    if relax is None:
        relax = relaxation_vector(train)
    c = _sample_weights(train.labels, relax, cfg.gamma, cfg.s)
    return _fit_axes(train, relax, c, cfg, _lp_step(cfg.p), cfg.s)


def g2dpca_fit(
    train: LabeledDataset,
    cfg: FitConfig,
    relax: Optional[RelaxationVector] = None,
) -> ProjectionModel:
    """G2DPCA: the unsupervised special case gamma = 1.

    The relaxation vector does not influence the basis; it is only carried on
    the model so the result is interchangeable with ``r2dpca_fit``.
    """
    return r2dpca_fit(train, relax, cfg.model_copy(update={"gamma": 1.0}))


def twodpca_fit(train: LabeledDataset, cfg: FitConfig) -> ProjectionModel:
    return g2dpca_fit(train, cfg.model_copy(update={"s": 2.0, "p": 2.0}))


def twodpca_l1_fit(train: LabeledDataset, cfg: FitConfig) -> ProjectionModel:
    return g2dpca_fit(train, cfg.model_copy(update={"s": 1.0, "p": 2.0}))


def twodpca_l1s_fit(
    train: LabeledDataset,
    cfg: FitConfig,
    relax: Optional[RelaxationVector] = None,
) -> ProjectionModel:
    """2DPCA-L1-S: L1 objective, L2 constraint, soft shrinkage.

    gamma = 1 is the plain method; gamma < 1 mixes in the relaxation weights
    exactly as ``r2dpca_fit`` does at s = 1.
    """
    cfg = cfg.model_copy(update={"s": 1.0, "p": 2.0})
    if relax is None:
        relax = relaxation_vector(train)
    c = _sample_weights(train.labels, relax, cfg.gamma, 1.0)
    step = _shrink_step(cfg.lambda_sparsity)
    return _fit_axes(train, relax, c, cfg, step, 1.0)


def relaxed_2dpca_eig(
    train: LabeledDataset,
    relax: Optional[RelaxationVector],
    gamma: float,
    r: int,
    scatter: Literal["normalized", "criterion"] = "normalized",
    method: Literal["lapack", "jacobi"] = "lapack",
) -> ProjectionModel:
    """Eigen route for s = p = 2.

    ``normalized`` builds gamma * G + (1 - gamma) * G~ with
    G = (1/n) sum X^T X and G~ = sum_j (v_j/n_j) sum_i X^T X. ``criterion``
    builds the quadratic form of J(w) itself, whose leading eigenvectors
    coincide with the iterative solver at s = p = 2.
    """
    if not 1 <= r <= train.width:
        raise InvalidParameterError(
            f"r must lie in [1, {train.width}], got {r}"
        )
    cfg = FitConfig(s=2.0, p=2.0, gamma=gamma, r=r)
    centering = compute_centering(train)
    if relax is None:
        relax = relaxation_vector(train, centering)
    X = train.samples - centering.global_mean
    per_sample = relax.sample_weights(train.labels)
    if scatter == "normalized":
        c = gamma / train.n + (1.0 - gamma) * per_sample
    elif scatter == "criterion":
        c = gamma + (1.0 - gamma) * per_sample**2
    else:
        raise InvalidParameterError(f"unknown scatter '{scatter}'")

    S = np.einsum("n,nhi,nhj->ij", c, X, X)
    W, d = sym_eig(0.5 * (S + S.T), r, method=method)
    return ProjectionModel(
        W=W,
        D=np.maximum(d, 0.0),
        centering=centering,
        relax=relax,
        config=cfg,
        iters_per_axis=(0,) * r,
        converged=(True,) * r,
        degenerate=(False,) * r,
    )


def twodpca_eig(train: LabeledDataset, r: int) -> ProjectionModel:
    """Classic 2DPCA: top-r eigenvectors of the total scatter."""
    return relaxed_2dpca_eig(train, None, 1.0, r)
