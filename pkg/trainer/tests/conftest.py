import pytest

from semtrainer.synthetic import make_corpus


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Five classes, three small images each; fast enough for unit tests."""
    root = tmp_path_factory.mktemp("tiny_corpus")
    return make_corpus(root, per_class=3, seed=11, size=96)
