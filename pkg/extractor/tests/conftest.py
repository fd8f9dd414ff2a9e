import pytest

from s2oiqa.synthetic import build_desk_corpus


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    return build_desk_corpus(root, n_sources=8, seed=1234, height=256,
                             semantic=False)
