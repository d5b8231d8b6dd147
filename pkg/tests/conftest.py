import os

import pytest

DATA_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__),
                                        os.pardir, "data"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
