import functools
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import click
import numpy as np
import pandas as pd
from dotenv import dotenv_values, load_dotenv
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from tqdm import tqdm

from app.utils.classifier import Gallery, accuracy, predict
from app.utils.data_processor import (
    LabeledDataset,
    load_manifest,
    save_dataset,
    shuffle_labels,
    split_per_class,
    synth_generate,
)
from app.utils.errors import InvalidParameterError, R2DPCAError
from app.utils.hypersearch import (
    SearchGrid,
    SearchResult,
    SearchStep,
    axis_sweep,
    exhaustive,
    multi_start_search,
)
from app.utils.model_io import load_model, save_model
from app.utils.projector import (
    FitConfig,
    InitKind,
    ProjectionModel,
    g2dpca_fit,
    parse_norm_order,
    r2dpca_fit,
    relaxed_2dpca_eig,
    twodpca_fit,
    twodpca_l1_fit,
    twodpca_l1s_fit,
)
from app.utils.relaxation import RelaxFn, relaxation_vector
from app.utils.seeding import derive_seed

load_dotenv()

LOG_LEVEL = os.getenv("R2DPCA_LOG_LEVEL", "INFO")
OUT_DIR = os.getenv("R2DPCA_OUT_DIR", "results")

logger = logging.getLogger(__name__)

Method = Literal[
    "2dpca",
    "2dpca-eig",
    "2dpca-l1",
    "2dpca-l1s",
    "g2dpca",
    "r2dpca",
    "r2dpca-eig",
]
EIGEN_METHODS = ("2dpca-eig", "r2dpca-eig")
SEARCHABLE_METHODS = ("g2dpca", "r2dpca")

MODEL_FILE = "model.bin"
FIT_REPORT_FILE = "fit_report.json"
ACCURACY_FILE = "accuracy.csv"
ACCURACY_SPLITS_FILE = "accuracy_splits.csv"
PREDICTIONS_FILE = "predictions.csv"
SEARCH_PATH_FILE = "search_path.csv"
COMPARE_FILE = "compare.csv"
SWEEP_FILE = "sweep.csv"
ACCURACY_FORMAT = "%.4f"


def _parse_int_list(value):
    """Parses lists like "1,2,5", "1-4" (inclusive) or a mix of both."""
    if not isinstance(value, str):
        return value
    items: List[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            low, high = part.split("-", 1)
            items.extend(range(int(low), int(high) + 1))
        else:
            items.append(int(part))
    return items


def _parse_grid_range(value):
    """Parses a "start:step:stop" grid range."""
    if not isinstance(value, str):
        return value
    parts = value.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:step:stop, got '{value}'")
    return tuple(float(part) for part in parts)


def _parse_starts(value):
    """Parses starting points written as "s,p; s,p"."""
    if not isinstance(value, str):
        return value
    starts = []
    for entry in value.split(";"):
        entry = entry.strip()
        if not entry:
            continue
        s, p = entry.split(",")
        starts.append((float(s), float(parse_norm_order(p))))
    return starts


class ExperimentConfig(BaseModel):
    """Flat experiment configuration; any key may come from the config file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    manifest: Optional[str] = None
    synth_classes: int = Field(default=5, ge=1)
    synth_per_class: int = Field(default=20, ge=2)
    synth_height: int = Field(default=16, ge=1)
    synth_width: int = Field(default=16, ge=1)
    synth_noise: float = Field(default=0.05, ge=0.0)
    shuffle_labels: bool = False

    method: Method = "r2dpca"
    s: float = Field(default=2.0, ge=1.0, allow_inf_nan=False)
    p: float = Field(default=2.0, gt=0.0)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    r: int = Field(default=3, ge=1)
    r_values: Optional[List[int]] = None
    train_per_class: int = Field(default=10, ge=1)
    repeats: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    tol: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    lambda_sparsity: Optional[float] = Field(default=None, ge=0.0)
    rho: Optional[float] = None
    relax_fn: Literal["identity-plus-epsilon", "exponential", "constant"] = (
        "identity-plus-epsilon"
    )
    relax_epsilon: float = Field(default=1e-12, ge=0.0)
    init: InitKind = "ones"
    eig_method: Literal["lapack", "jacobi"] = "lapack"
    scatter: Literal["normalized", "criterion"] = "normalized"

    s_grid: Tuple[float, float, float] = (1.0, 0.1, 3.0)
    p_grid: Tuple[float, float, float] = (0.9, 0.1, 3.0)
    delta: float = Field(default=0.3, gt=0.0)
    starts: List[Tuple[float, float]] = [(2.0, 2.0)]
    exhaustive: bool = False
    sweep_s: Optional[float] = None
    sweep_p: Optional[float] = None

    methods: List[str] = [
        "2dpca-eig",
        "r2dpca-eig gamma=0",
        "r2dpca-eig gamma=1",
    ]
    out_dir: str = OUT_DIR

    @field_validator("p", "sweep_p", mode="before")
    @classmethod
    def parse_p(cls, value):
        return parse_norm_order(value)

    @field_validator("r_values", mode="before")
    @classmethod
    def parse_r_values(cls, value):
        return _parse_int_list(value)

    @field_validator("s_grid", "p_grid", mode="before")
    @classmethod
    def parse_grid(cls, value):
        return _parse_grid_range(value)

    @field_validator("starts", mode="before")
    @classmethod
    def parse_starts(cls, value):
        return _parse_starts(value)

    @field_validator("methods", mode="before")
    @classmethod
    def parse_methods(cls, value):
        if isinstance(value, str):
            entries = (entry.strip() for entry in value.split(";"))
            return [entry for entry in entries if entry]
        return value

    @model_validator(mode="after")
    def check_compatibility(self) -> "ExperimentConfig":
        if math.isnan(self.p):
            raise ValueError("p must not be NaN")
        if self.method != "2dpca-l1s" and (
            self.lambda_sparsity is not None or self.rho is not None
        ):
            raise ValueError(
                "lambda_sparsity and rho only apply to method 2dpca-l1s"
            )
        if self.lambda_sparsity is not None and self.rho is not None:
            raise ValueError("set either lambda_sparsity or rho, not both")
        if self.r_values is not None and (
            not self.r_values or min(self.r_values) < 1
        ):
            raise ValueError(
                "r_values must be a nonempty list of positive integers"
            )
        return self

    @property
    def sparsity(self) -> float:
        if self.lambda_sparsity is not None:
            return self.lambda_sparsity
        if self.rho is not None:
            return 10.0 ** (-self.rho)
        return 0.0

    @property
    def effective_gamma(self) -> float:
        """2dpca-l1s stays unrelaxed unless gamma is set explicitly."""
        if self.method == "2dpca-l1s" and "gamma" not in self.model_fields_set:
            return 1.0
        return self.gamma

    @property
    def feature_counts(self) -> List[int]:
        return list(self.r_values) if self.r_values else [self.r]

    def fit_config(self) -> FitConfig:
        return FitConfig(
            s=self.s,
            p=self.p,
            gamma=self.effective_gamma,
            r=self.r,
            tol=self.tol,
            max_iter=self.max_iter,
            lambda_sparsity=self.sparsity,
            init=self.init,
            seed=self.seed,
        )

    def search_grid(self) -> SearchGrid:
        return SearchGrid.from_ranges(self.s_grid, self.p_grid, self.delta)


def read_config_values(
    config_path: Optional[str], overrides: Dict[str, Any]
) -> Dict[str, Any]:
    """Merges the flat ``key = value`` file with command line overrides."""
    values: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise InvalidParameterError(f"config file not found: {path}")
        values = {
            key.strip().lower(): value
            for key, value in dotenv_values(path).items()
            if value is not None
        }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return values


def load_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    if cfg.manifest:
        return load_manifest(cfg.manifest)
    return synth_generate(
        cfg.synth_classes,
        cfg.synth_per_class,
        cfg.synth_height,
        cfg.synth_width,
        cfg.synth_noise,
        cfg.seed,
    )


def make_splits(
    cfg: ExperimentConfig, ds: LabeledDataset
) -> List[Tuple[LabeledDataset, LabeledDataset]]:
    """One seeded per-class split per repeat."""
    splits = []
    for rep in range(cfg.repeats):
        train, test = split_per_class(
            ds, cfg.train_per_class, derive_seed(cfg.seed, "split", rep)
        )
        if cfg.shuffle_labels:
            shuffle_seed = derive_seed(cfg.seed, "shuffle", rep)
            train = shuffle_labels(train, shuffle_seed)
        splits.append((train, test))
    return splits


def fit_model(cfg: ExperimentConfig, train: LabeledDataset) -> ProjectionModel:
    relax = relaxation_vector(
        train, f=RelaxFn(kind=cfg.relax_fn, epsilon=cfg.relax_epsilon)
    )
    fit_cfg = cfg.fit_config()
    if cfg.method == "2dpca":
        return twodpca_fit(train, fit_cfg)
    if cfg.method == "2dpca-l1":
        return twodpca_l1_fit(train, fit_cfg)
    if cfg.method == "2dpca-l1s":
        return twodpca_l1s_fit(train, fit_cfg, relax)
    if cfg.method == "g2dpca":
        return g2dpca_fit(train, fit_cfg, relax)
    if cfg.method == "r2dpca":
        return r2dpca_fit(train, relax, fit_cfg)
    gamma = 1.0 if cfg.method == "2dpca-eig" else cfg.gamma
    return relaxed_2dpca_eig(
        train, relax, gamma, cfg.r, scatter=cfg.scatter, method=cfg.eig_method
    )


def evaluate_model(
    model: ProjectionModel,
    train: LabeledDataset,
    test: LabeledDataset,
    r_values: Sequence[int],
) -> List[float]:
    """Accuracy on ``test`` with the first r' axes, per r' in ``r_values``."""
    results = []
    for r in r_values:
        sub = model.truncate(r)
        results.append(accuracy(Gallery.from_dataset(train, sub), test, sub))
    return results


def split_accuracies(
    cfg: ExperimentConfig,
    splits: Sequence[Tuple[LabeledDataset, LabeledDataset]],
    model: Optional[ProjectionModel] = None,
) -> np.ndarray:
    """Accuracies of shape (repeats, len(r_values)).

    A model is fitted on every split unless ``model`` is given.
    """
    r_values = cfg.feature_counts
    fit_cfg = cfg.model_copy(update={"r": max(r_values)})
    rows = []
    for train, test in splits:
        current = model if model is not None else fit_model(fit_cfg, train)
        rows.append(evaluate_model(current, train, test, r_values))
    return np.array(rows)


def mean_accuracy(cfg: ExperimentConfig, splits) -> float:
    return float(split_accuracies(cfg, splits)[:, -1].mean())


def describe_parameters(cfg: ExperimentConfig) -> str:
    if cfg.method in EIGEN_METHODS:
        gamma = 1.0 if cfg.method == "2dpca-eig" else cfg.gamma
        return f"gamma={gamma:g} r={cfg.r}"
    if cfg.method in ("2dpca", "2dpca-l1"):
        return f"r={cfg.r}"
    if cfg.method == "2dpca-l1s":
        if cfg.effective_gamma != 1.0:
            return (
                f"lambda={cfg.sparsity:g} gamma={cfg.effective_gamma:g} "
                f"r={cfg.r}"
            )
        return f"lambda={cfg.sparsity:g} r={cfg.r}"
    if cfg.method == "g2dpca":
        return f"s={cfg.s:g} p={cfg.p:g} r={cfg.r}"
    return f"s={cfg.s:g} p={cfg.p:g} gamma={cfg.gamma:g} r={cfg.r}"


def parse_method_entry(entry: str) -> Dict[str, str]:
    """Splits "r2dpca-eig gamma=0.5 r=2" into method and key overrides."""
    tokens = entry.split()
    if not tokens:
        raise InvalidParameterError("empty method entry")
    values = {"method": tokens[0]}
    for token in tokens[1:]:
        if "=" not in token:
            raise InvalidParameterError(
                f"expected key=value in '{entry}', got '{token}'"
            )
        key, value = token.split("=", 1)
        values[key.strip().lower()] = value.strip()
    return values


class FitReport(BaseModel):
    method: str
    n_train: int
    r: int
    objective: List[float]
    iterations: List[int]
    converged: List[bool]
    degenerate: List[bool]
    wall_time_seconds: float


def _path_frame(path: Sequence[SearchStep]) -> pd.DataFrame:
    return pd.DataFrame(
        [(row.step, row.kind, row.s, row.p, row.accuracy) for row in path],
        columns=["step", "kind", "s", "p", "accuracy"],
    )


def _write_accuracy_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=ACCURACY_FORMAT)
    logger.info("Wrote %s", path)


class _ProgressEvaluator:
    """Accuracy at (s, p) averaged over fixed splits, with a progress bar."""

    def __init__(self, cfg: ExperimentConfig, splits, progress: tqdm):
        self.cfg = cfg
        self.splits = splits
        self.progress = progress

    def __call__(self, s: float, p: float) -> float:
        cfg = self.cfg.model_copy(update={"s": s, "p": p})
        value = mean_accuracy(cfg, self.splits)
        self.progress.update(1)
        return value


def handle_errors(func):
    """Turns library errors into the documented exit statuses."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except R2DPCAError as e:
            logger.error("%s: %s", type(e).__name__, e)
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)
        except ValidationError as e:
            logger.error("Invalid configuration: %s", e)
            click.echo(f"Error: invalid configuration\n{e}", err=True)
            ctx.exit(1)
        except np.linalg.LinAlgError as e:
            logger.error("Numerical failure: %s", e)
            click.echo(f"Error: numerical failure: {e}", err=True)
            ctx.exit(3)
        except OSError as e:
            logger.error("I/O failure: %s", e)
            click.echo(f"Error: {e}", err=True)
            ctx.exit(2)

    return wrapper


def experiment_options(func):
    """--config/--seed/--out/--set shared by every command."""
    func = click.option(
        "--set",
        "assignments",
        multiple=True,
        metavar="KEY=VALUE",
        help="Override one config key; may be repeated.",
    )(func)
    func = click.option(
        "--out", "out_dir", type=click.Path(file_okay=False), default=None
    )(func)
    func = click.option(
        "--seed", type=int, default=None, help="Root seed."
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        default=None,
    )(func)
    return func


def build_config(
    config_path: Optional[str],
    seed: Optional[int],
    out_dir: Optional[str],
    assignments: Sequence[str],
    **flags,
) -> Tuple[Dict[str, Any], ExperimentConfig]:
    overrides: Dict[str, Any] = {}
    for item in assignments:
        if "=" not in item:
            raise InvalidParameterError(
                f"--set expects KEY=VALUE, got '{item}'"
            )
        key, value = item.split("=", 1)
        overrides[key.strip().lower()] = value.strip()
    overrides.update(seed=seed, out_dir=out_dir, **flags)
    values = read_config_values(config_path, overrides)
    return values, ExperimentConfig.model_validate(values)


def _output_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


class ExperimentGroup(click.Group):
    """Reports usage errors with exit status 1 instead of click's 2."""

    def main(
        self,
        args=None,
        prog_name=None,
        complete_var=None,
        standalone_mode=True,
        **extra,
    ):
        try:
            rv = super().main(
                args, prog_name, complete_var, standalone_mode=False, **extra
            )
        except click.ClickException as e:
            e.show()
            rv = 1
        except click.Abort:
            click.echo("Aborted!", err=True)
            rv = 1
        if not standalone_mode:
            return rv
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=ExperimentGroup)
@click.option(
    "--log-level",
    type=click.Choice(
        ["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False
    ),
    default=LOG_LEVEL,
    show_default=True,
)
def cli(log_level: str):
    """Relaxed 2DPCA experiments on PGM datasets or synthetic images."""
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@cli.command()
@experiment_options
@handle_errors
def synth(config_path, seed, out_dir, assignments):
    """Generate a synthetic dataset (P5 images + manifest)."""
    _, cfg = build_config(config_path, seed, out_dir, assignments)
    ds = synth_generate(
        cfg.synth_classes,
        cfg.synth_per_class,
        cfg.synth_height,
        cfg.synth_width,
        cfg.synth_noise,
        cfg.seed,
    )
    manifest = save_dataset(ds, _output_dir(cfg) / "dataset")
    click.echo(f"Wrote {ds.n} images in {ds.n_classes} classes: {manifest}")


@cli.command()
@experiment_options
@handle_errors
def fit(config_path, seed, out_dir, assignments):
    """Fit on the first split; write model.bin and fit_report.json."""
    _, cfg = build_config(config_path, seed, out_dir, assignments)
    ds = load_dataset(cfg)
    train, _ = make_splits(cfg.model_copy(update={"repeats": 1}), ds)[0]

    started = time.perf_counter()
    model = fit_model(cfg, train)
    elapsed = time.perf_counter() - started

    out = _output_dir(cfg)
    save_model(model, out / MODEL_FILE)
    report = FitReport(
        method=cfg.method,
        n_train=train.n,
        r=model.r,
        objective=model.D.tolist(),
        iterations=list(model.iters_per_axis),
        converged=list(model.converged),
        degenerate=list(model.degenerate),
        wall_time_seconds=elapsed,
    )
    (out / FIT_REPORT_FILE).write_text(report.model_dump_json(indent=2) + "\n")
    logger.info(
        "Fitted %s with %d axes in %.3fs", cfg.method, model.r, elapsed
    )
    click.echo(f"Model written to {out / MODEL_FILE}")


@cli.command(name="eval")
@experiment_options
@click.option(
    "--model",
    "model_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Evaluate a saved model instead of fitting one per split.",
)
@handle_errors
def evaluate(config_path, seed, out_dir, assignments, model_path):
    """Accuracy versus number of features, averaged over repeats."""
    _, cfg = build_config(config_path, seed, out_dir, assignments)
    model = load_model(model_path) if model_path else None
    splits = make_splits(cfg, load_dataset(cfg))
    r_values = cfg.feature_counts

    started = time.perf_counter()
    progress = tqdm(splits, desc="repeats", disable=None)
    per_split = split_accuracies(cfg, progress, model)
    out = _output_dir(cfg)
    _write_accuracy_csv(
        pd.DataFrame({"r": r_values, "accuracy": per_split.mean(axis=0)}),
        out / ACCURACY_FILE,
    )
    _write_accuracy_csv(
        pd.DataFrame(
            [
                (rep, r, per_split[rep, col])
                for rep in range(len(splits))
                for col, r in enumerate(r_values)
            ],
            columns=["repeat", "r", "accuracy"],
        ),
        out / ACCURACY_SPLITS_FILE,
    )

    train, test = splits[0]
    first = model if model is not None else fit_model(
        cfg.model_copy(update={"r": max(r_values)}), train
    )
    first = first.truncate(max(r_values))
    predict(Gallery.from_dataset(train, first), test, first).to_csv(
        out / PREDICTIONS_FILE, index=False
    )
    logger.info("Evaluation finished in %.3fs", time.perf_counter() - started)
    for r, value in zip(r_values, per_split.mean(axis=0)):
        click.echo(f"r={r}: accuracy {value:.4f}")


@cli.command()
@experiment_options
@click.option(
    "--exhaustive",
    "exhaustive_flag",
    is_flag=True,
    help="Evaluate every grid point instead of searching.",
)
@handle_errors
def search(config_path, seed, out_dir, assignments, exhaustive_flag):
    """Restarted alternating direction search for the best (s, p)."""
    _, cfg = build_config(
        config_path,
        seed,
        out_dir,
        assignments,
        exhaustive=True if exhaustive_flag else None,
    )
    if cfg.method not in SEARCHABLE_METHODS:
        raise InvalidParameterError(
            f"search tunes s and p of {SEARCHABLE_METHODS}, not {cfg.method}"
        )
    grid = cfg.search_grid()
    splits = make_splits(cfg, load_dataset(cfg))

    with tqdm(total=grid.size, desc="grid points", disable=None) as progress:
        evaluator = _ProgressEvaluator(cfg, splits, progress)
        if cfg.exhaustive:
            result = exhaustive(grid, evaluator)
            path = result.path
        else:
            result, per_start = multi_start_search(grid, evaluator, cfg.starts)
            path = _concatenate_paths(per_start)

    _write_accuracy_csv(_path_frame(path), _output_dir(cfg) / SEARCH_PATH_FILE)
    click.echo(
        f"best s={result.best_s:g} p={result.best_p:g} "
        f"accuracy {result.best_accuracy:.4f} "
        f"({len(path)} path rows)"
    )


def _concatenate_paths(results: Sequence[SearchResult]) -> List[SearchStep]:
    """Joins per-starter paths, numbering steps consecutively."""
    rows: List[SearchStep] = []
    offset = 0
    for result in results:
        for row in result.path:
            rows.append(
                SearchStep(
                    row.step + offset, row.kind, row.s, row.p, row.accuracy
                )
            )
        if result.path:
            offset = rows[-1].step
    return rows


@cli.command()
@experiment_options
@handle_errors
def compare(config_path, seed, out_dir, assignments):
    """One accuracy row per configured method; failures stay per row."""
    values, cfg = build_config(config_path, seed, out_dir, assignments)
    ds = load_dataset(cfg)
    rows = []
    for entry in tqdm(cfg.methods, desc="methods", disable=None):
        method = entry.split()[0]
        try:
            merged = {
                k: v
                for k, v in values.items()
                if k not in ("lambda_sparsity", "rho", "methods")
            }
            merged.update(parse_method_entry(entry))
            entry_cfg = ExperimentConfig.model_validate(merged)
            value = mean_accuracy(entry_cfg, make_splits(entry_cfg, ds))
            rows.append((method, describe_parameters(entry_cfg), value, ""))
        except (R2DPCAError, ValidationError, np.linalg.LinAlgError) as e:
            logger.warning("Method entry '%s' failed: %s", entry, e)
            rows.append((method, entry, float("nan"), str(e).splitlines()[0]))

    df = pd.DataFrame(
        rows, columns=["method", "parameters", "accuracy", "error"]
    )
    _write_accuracy_csv(df, _output_dir(cfg) / COMPARE_FILE)
    for method, params, value, error in rows:
        click.echo(f"{method:<11} {params:<32} {value:.4f} {error}".rstrip())


@cli.command()
@experiment_options
@handle_errors
def sweep(config_path, seed, out_dir, assignments):
    """Accuracy along one grid axis (set exactly one of sweep_s, sweep_p)."""
    _, cfg = build_config(config_path, seed, out_dir, assignments)
    if cfg.method not in SEARCHABLE_METHODS:
        raise InvalidParameterError(
            f"sweep varies s and p of {SEARCHABLE_METHODS}, not {cfg.method}"
        )
    grid = cfg.search_grid()
    splits = make_splits(cfg, load_dataset(cfg))
    axis = grid.p_values if cfg.sweep_s is not None else grid.s_values
    total = len(axis)
    with tqdm(total=total, desc="grid points", disable=None) as progress:
        rows = axis_sweep(
            grid,
            _ProgressEvaluator(cfg, splits, progress),
            s=cfg.sweep_s,
            p=cfg.sweep_p,
        )
    df = pd.DataFrame(
        [(row.s, row.p, row.accuracy) for row in rows],
        columns=["s", "p", "accuracy"],
    )
    _write_accuracy_csv(df, _output_dir(cfg) / SWEEP_FILE)
    best = max(rows, key=lambda row: row.accuracy)
    click.echo(f"best s={best.s:g} p={best.p:g} accuracy {best.accuracy:.4f}")


def main():
    cli()


if __name__ == "__main__":
    main()
