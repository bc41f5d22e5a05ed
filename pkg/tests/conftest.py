import pytest

from rustcast.dataset import encode, split_random
from rustcast.linalg import SeededRng
from rustcast.synthgen import SynthConfig, generate


@pytest.fixture(scope="session")
def small_records():
    return generate(SynthConfig(n_rows=90, seed=7))


@pytest.fixture(scope="session")
def small_data(small_records):
    return encode(small_records)


@pytest.fixture(scope="session")
def small_split(small_data):
    return split_random(small_data.n_rows, (0.7, 0.15, 0.15), SeededRng(0))


@pytest.fixture(scope="session")
def default_records():
    """The default 500-row synthetic dataset used by the acceptance criteria."""
    return generate(SynthConfig())


@pytest.fixture(scope="session")
def default_data(default_records):
    return encode(default_records)
