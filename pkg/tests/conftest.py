import pathlib

import pytest

from vizsynth.tables import load_table

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def cars():
    return load_table(DATA.joinpath("cars.csv").read_bytes())


@pytest.fixture(scope="session")
def cars_csv_text():
    return DATA.joinpath("cars.csv").read_text()
