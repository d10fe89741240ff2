import io
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from app.utils.errors import (
    DimensionError,
    InvalidInputError,
    InvalidParameterError,
    LoadError,
)
from app.utils.seeding import make_rng

logger = logging.getLogger(__name__)

PIXEL_MAX = 255.0
MANIFEST_NAME = "manifest.csv"


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Stack of equally sized grayscale samples grouped into classes.

    ``samples`` has shape (n, h, w); ``labels`` holds 0-based class indices
    into ``class_names``.
    """

    samples: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if samples.ndim != 3 or samples.shape[0] == 0:
            raise InvalidInputError(
                "samples must have shape (n, h, w) with n >= 1, "
                f"got {samples.shape}"
            )
        if labels.shape != (samples.shape[0],):
            raise DimensionError(
                f"{labels.shape[0] if labels.ndim else 0} labels for "
                f"{samples.shape[0]} samples"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples contain non-finite entries")
        m = len(self.class_names)
        if labels.min() < 0 or labels.max() >= m:
            raise InvalidInputError("labels reference unknown classes")
        if np.any(np.bincount(labels, minlength=m) == 0):
            raise InvalidInputError("every class needs at least one sample")
        samples.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def class_samples(self, j: int) -> np.ndarray:
        return self.samples[self.labels == j]

    def with_samples(self, samples: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(samples, self.labels, self.class_names)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.samples[idx], self.labels[idx], self.class_names
        )


@dataclass(frozen=True, eq=False)
class Centering:
    global_mean: np.ndarray
    class_means: np.ndarray


def _read_pgm(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.format != "PPM" or img.mode != "L":
                raise LoadError(
                    f"unsupported image format {img.format}/{img.mode}, "
                    "expected 8-bit PGM",
                    path,
                )
            return np.asarray(img, dtype=np.float64) / PIXEL_MAX
    except FileNotFoundError:
        raise LoadError("image file not found", path)
    except UnidentifiedImageError:
        raise LoadError("unknown image format", path)
    except OSError as e:
        raise LoadError(f"unreadable image: {e}", path)


def load_manifest(manifest_path: Union[str, os.PathLike]) -> LabeledDataset:
    """Reads a ``<relative-image-path>,<class-label>`` manifest.

    Class indices follow first appearance; pixels are scaled to [0, 1].
    Lines starting with ``#`` are comments.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise LoadError("manifest not found", manifest_path)
    try:
        records = [
            line
            for line in manifest_path.read_text(encoding="utf-8").splitlines()
            if not line.lstrip().startswith("#")
        ]
        df = pd.read_csv(
            io.StringIO("\n".join(records)),
            header=None,
            names=["path", "label"],
            dtype=str,
            skip_blank_lines=True,
            skipinitialspace=True,
        )
    except UnicodeDecodeError as e:
        raise LoadError(f"manifest is not UTF-8: {e}", manifest_path)
    except pd.errors.EmptyDataError:
        raise LoadError("manifest is empty", manifest_path)
    except pd.errors.ParserError as e:
        raise LoadError(f"malformed manifest: {e}", manifest_path)

    df = df.dropna(how="all")
    if df.empty:
        raise LoadError("manifest is empty", manifest_path)
    if df["label"].isna().any():
        bad = df.loc[df["label"].isna(), "path"].iloc[0]
        raise LoadError(f"record '{bad}' has no class label", manifest_path)

    class_names: List[str] = list(dict.fromkeys(df["label"].str.strip()))
    index_of = {name: i for i, name in enumerate(class_names)}

    images = []
    shape = None
    for rel_path in df["path"].str.strip():
        image_path = manifest_path.parent / rel_path
        pixels = _read_pgm(image_path)
        if shape is None:
            shape = pixels.shape
        elif pixels.shape != shape:
            raise LoadError(
                f"dimension mismatch: {pixels.shape} vs {shape}", image_path
            )
        images.append(pixels)

    labels = [index_of[name] for name in df["label"].str.strip()]
    logger.info(
        "Loaded %d images in %d classes from %s",
        len(images),
        len(class_names),
        manifest_path,
    )
    return LabeledDataset(
        np.stack(images), np.array(labels), tuple(class_names)
    )


def save_dataset(ds: LabeledDataset, out_dir: Union[str, os.PathLike]) -> Path:
    """Writes P5 images plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    counters = np.zeros(ds.n_classes, dtype=np.int64)
    for sample, label in zip(ds.samples, ds.labels):
        name = ds.class_names[label]
        rel_path = Path(f"class_{label:03d}") / f"{counters[label]:04d}.pgm"
        counters[label] += 1
        (out_dir / rel_path.parent).mkdir(parents=True, exist_ok=True)
        pixels = np.clip(np.rint(sample * PIXEL_MAX), 0, PIXEL_MAX)
        pixels = pixels.astype(np.uint8)
        Image.fromarray(pixels).save(out_dir / rel_path, format="PPM")
        rows.append({"path": rel_path.as_posix(), "label": name})

    manifest_path = out_dir / MANIFEST_NAME
    pd.DataFrame(rows).to_csv(manifest_path, header=False, index=False)
    logger.info("Wrote %d images to %s", ds.n, out_dir)
    return manifest_path


def compute_centering(ds: LabeledDataset) -> Centering:
    class_means = np.stack(
        [ds.class_samples(j).mean(axis=0) for j in range(ds.n_classes)]
    )
    return Centering(
        global_mean=ds.samples.mean(axis=0), class_means=class_means
    )


def center(ds: LabeledDataset, c: Centering) -> LabeledDataset:
    if c.global_mean.shape != ds.samples.shape[1:]:
        raise DimensionError(
            f"mean of shape {c.global_mean.shape} does not match samples "
            f"{ds.samples.shape[1:]}"
        )
    return ds.with_samples(ds.samples - c.global_mean)


def split_per_class(
    ds: LabeledDataset, train_per_class: int, seed: int
) -> Tuple[LabeledDataset, LabeledDataset]:
    """Random per-class split, ``train_per_class`` training samples each."""
    counts = ds.class_counts
    if train_per_class < 1 or train_per_class >= counts.min():
        raise InvalidParameterError(
            f"train_per_class must lie in [1, {counts.min() - 1}], "
            f"got {train_per_class}"
        )
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for j in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == j)
        chosen = rng.permutation(members)
        train_idx.extend(chosen[:train_per_class])
        test_idx.extend(chosen[train_per_class:])
    return ds.subset(np.sort(train_idx)), ds.subset(np.sort(test_idx))


def shuffle_labels(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """Permutes the labels: class structure goes, class counts stay."""
    rng = np.random.default_rng(seed)
    return LabeledDataset(
        ds.samples, rng.permutation(ds.labels), ds.class_names
    )


def synth_prototypes(
    m: int, h: int, w: int, noise_sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """Uniform random prototypes, pairwise at least 4 sigma sqrt(hw) apart."""
    prototypes = rng.uniform(0.0, 1.0, size=(m, h, w))
    if m > 1 and noise_sigma > 0:
        required = 4.0 * noise_sigma * np.sqrt(h * w)
        diffs = prototypes[:, None] - prototypes[None, :]
        dists = np.sqrt(np.sum(diffs**2, axis=(2, 3)))
        closest = dists[np.triu_indices(m, k=1)].min()
        if closest < required:
            # stretch about the common mean until the closest pair is apart
            centre = prototypes.mean(axis=0)
            factor = required / closest * (1.0 + 1e-9)
            prototypes = centre + (prototypes - centre) * factor
    return prototypes


def synth_generate(
    m: int,
    per_class: int,
    h: int,
    w: int,
    noise_sigma: float,
    seed: int,
) -> LabeledDataset:
    """Class-structured synthetic images: prototype + Gaussian pixel noise."""
    if min(m, per_class, h, w) < 1:
        raise InvalidParameterError(
            "synthetic dataset counts must all be >= 1"
        )
    if noise_sigma < 0:
        raise InvalidParameterError(
            f"noise_sigma must be >= 0, got {noise_sigma}"
        )

    rng = make_rng(seed, "synth")
    prototypes = synth_prototypes(m, h, w, noise_sigma, rng)
    noise = rng.normal(0.0, noise_sigma, size=(m, per_class, h, w))
    samples = (prototypes[:, None] + noise).reshape(m * per_class, h, w)
    labels = np.repeat(np.arange(m), per_class)
    names = tuple(f"c{j:02d}" for j in range(m))
    return LabeledDataset(samples, labels, names)
