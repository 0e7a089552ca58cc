import pytest

from csvdata import fill_directory


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    """One directory holding a valid CSV of every harness schema."""
    return fill_directory(tmp_path_factory.mktemp("csv"))
