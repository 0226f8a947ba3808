import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from _pipeline import generate


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv")
    generate(out)
    return out


@pytest.fixture(scope="session")
def golden_dir():
    return pathlib.Path(__file__).parent / "goldens"
