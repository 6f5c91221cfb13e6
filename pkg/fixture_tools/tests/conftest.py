import pytest

from fixture_tools import build_tiny_bundle, export_models
from fixture_tools.goldens import build_goldens


@pytest.fixture(scope="session")
def bundle():
    return build_tiny_bundle(seed=0)


@pytest.fixture(scope="session")
def model_dir(bundle, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    export_models(bundle, out)
    return out


@pytest.fixture(scope="session")
def golden_dir(bundle, model_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("goldens")
    build_goldens(bundle, out, count=12, seed=7)
    return out
