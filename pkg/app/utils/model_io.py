"""Versioned text container for fitted projection models.

Floats are written with ``repr`` through the json module, which round-trips
float64 values exactly, so write followed by read is bit-exact.
"""

import json
import logging
import os
from pathlib import Path
from typing import List, Literal, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from app.utils.data_processor import Centering
from app.utils.errors import LoadError
from app.utils.projector import FitConfig, ProjectionModel
from app.utils.relaxation import RelaxationVector

logger = logging.getLogger(__name__)

MODEL_FORMAT = "r2dpca-model"
MODEL_FORMAT_VERSION = 1


class ModelFile(BaseModel):
    format: Literal["r2dpca-model"] = MODEL_FORMAT
    version: int = MODEL_FORMAT_VERSION
    height: int
    width: int
    r: int
    s: float
    p: float
    gamma: float
    seed: int
    tol: float
    max_iter: int
    lambda_sparsity: float
    init: str
    mean: List[float]  # row-major h x w
    class_means: List[float]  # row-major m x h x w
    basis: List[float]  # column-major w x r
    objective: List[float]
    relax: List[float]
    class_counts: List[int]
    lambda_max: List[float]
    iterations: List[int]
    converged: List[bool]
    degenerate: List[bool]


def save_model(model: ProjectionModel, path: Union[str, os.PathLike]) -> Path:
    cfg = model.config
    payload = ModelFile(
        height=model.height,
        width=model.width,
        r=model.r,
        s=cfg.s,
        p=cfg.p,
        gamma=cfg.gamma,
        seed=cfg.seed,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        lambda_sparsity=cfg.lambda_sparsity,
        init=cfg.init,
        mean=model.centering.global_mean.ravel().tolist(),
        class_means=model.centering.class_means.ravel().tolist(),
        basis=model.W.ravel(order="F").tolist(),
        objective=model.D.tolist(),
        relax=model.relax.v.tolist(),
        class_counts=model.relax.class_counts.tolist(),
        lambda_max=model.relax.lambda_max.tolist(),
        iterations=list(model.iters_per_axis),
        converged=list(model.converged),
        degenerate=list(model.degenerate),
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload.model_dump()) + "\n", encoding="utf-8")
    logger.info("Saved model with %d axes to %s", model.r, path)
    return path


def load_model(path: Union[str, os.PathLike]) -> ProjectionModel:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise LoadError("model file not found", path)
    except json.JSONDecodeError as e:
        raise LoadError(f"model file is not valid JSON: {e}", path)

    if not isinstance(raw, dict) or raw.get("format") != MODEL_FORMAT:
        raise LoadError("not a model file", path)
    if raw.get("version") != MODEL_FORMAT_VERSION:
        raise LoadError(
            f"unsupported model version {raw.get('version')}", path
        )
    try:
        data = ModelFile.model_validate(raw)
        config = FitConfig(
            s=data.s,
            p=data.p,
            gamma=data.gamma,
            r=data.r,
            tol=data.tol,
            max_iter=data.max_iter,
            lambda_sparsity=data.lambda_sparsity,
            init=data.init,
            seed=data.seed,
        )
    except ValidationError as e:
        raise LoadError(f"invalid model file: {e}", path)

    h, w, r = data.height, data.width, data.r
    m = len(data.relax)
    try:
        centering = Centering(
            global_mean=np.array(data.mean).reshape(h, w),
            class_means=np.array(data.class_means).reshape(m, h, w),
        )
        basis = np.array(data.basis).reshape((w, r), order="F")
    except ValueError as e:
        raise LoadError(f"inconsistent array sizes: {e}", path)

    return ProjectionModel(
        W=basis,
        D=np.array(data.objective),
        centering=centering,
        relax=RelaxationVector(
            v=np.array(data.relax),
            class_counts=np.array(data.class_counts, dtype=np.int64),
            lambda_max=np.array(data.lambda_max),
        ),
        config=config,
        iters_per_axis=tuple(data.iterations),
        converged=tuple(data.converged),
        degenerate=tuple(data.degenerate),
    )
