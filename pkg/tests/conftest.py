from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from app.utils.data_processor import Centering, LabeledDataset, synth_generate
from app.utils.projector import FitConfig, ProjectionModel
from app.utils.relaxation import RelaxationVector


def make_dataset(seed, m=3, per_class=4, h=6, w=5):
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((m * per_class, h, w))
    labels = np.repeat(np.arange(m), per_class)
    return LabeledDataset(samples, labels, tuple(f"k{j}" for j in range(m)))


def make_model(W, D, mean):
    """Hand-built single-class model around a given mean."""
    W = np.asarray(W, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    r = W.shape[1]
    return ProjectionModel(
        W=W,
        D=np.asarray(D, dtype=np.float64),
        centering=Centering(global_mean=mean, class_means=mean[None]),
        relax=RelaxationVector(
            v=np.array([1.0]),
            class_counts=np.array([1]),
            lambda_max=np.array([0.0]),
        ),
        config=FitConfig(r=r),
        iters_per_axis=(0,) * r,
        converged=(True,) * r,
        degenerate=(False,) * r,
    )


def write_pgm(path: Path, pixels, plain=False):
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    if plain:
        body = "\n".join(" ".join(str(int(x)) for x in row) for row in pixels)
        path.write_text(f"P2\n{w} {h}\n255\n{body}\n")
    else:
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        path.write_bytes(header + pixels.tobytes())
    return path


@pytest.fixture
def small_dataset():
    return make_dataset(seed=3)


@pytest.fixture
def synthetic_dataset():
    return synth_generate(5, 20, 16, 16, 0.05, seed=0)


@pytest.fixture
def two_class_manifest(tmp_path):
    """Two classes of two 2x2 P5 images each."""
    images = {
        "a/0.pgm": [[0, 255], [255, 0]],
        "a/1.pgm": [[10, 245], [250, 5]],
        "b/0.pgm": [[255, 255], [0, 0]],
        "b/1.pgm": [[250, 240], [3, 1]],
    }
    for rel, pixels in images.items():
        write_pgm(tmp_path / rel, pixels)
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        "a/0.pgm,alpha\na/1.pgm,alpha\nb/0.pgm,beta\nb/1.pgm,beta\n"
    )
    return manifest


@pytest.fixture
def runner():
    return CliRunner()
