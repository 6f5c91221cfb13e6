import pytest

from mace_eval.backends import ArchiveBackend
from mace_eval.dataset import load_dataset

import fixture_data


@pytest.fixture
def bench(tmp_path):
    """The 4-pair fixture: (pairs, backend, dataset_path, archive_dir)."""
    dataset_path, archive_dir = fixture_data.write_fixture_files(tmp_path / "bench")
    pairs = load_dataset(dataset_path)
    backend = ArchiveBackend.from_dir(archive_dir)
    return pairs, backend, dataset_path, archive_dir


@pytest.fixture
def tie_bench(tmp_path):
    dataset_path, archive_dir = fixture_data.write_tie_fixture(tmp_path / "ties")
    pairs = load_dataset(dataset_path)
    backend = ArchiveBackend.from_dir(archive_dir)
    return pairs, backend, dataset_path, archive_dir
