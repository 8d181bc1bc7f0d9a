import pytest

from epolis.content import sample_map, sample_map_text, sample_pack, sample_pack_text


@pytest.fixture(scope="session")
def cmap():
    return sample_map()


@pytest.fixture(scope="session")
def pack(cmap):
    return sample_pack()


@pytest.fixture(scope="session")
def map_text():
    return sample_map_text()


@pytest.fixture(scope="session")
def pack_text():
    return sample_pack_text()
