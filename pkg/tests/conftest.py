import numpy as np
import pytest

from s2oiqa.raster import Raster
from s2oiqa.synthetic import build_desk_corpus


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    """Small synthetic corpus shared by protocol/CLI tests."""
    root = tmp_path_factory.mktemp("desk")
    manifest = build_desk_corpus(root, n_sources=8, seed=1234, height=256)
    return manifest


def random_raster(rng, h, w):
    return Raster(rng.uniform(0, 255, size=(h, w)))
