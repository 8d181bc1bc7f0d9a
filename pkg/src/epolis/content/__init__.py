"""Built-in sample content: a 16x16 city square and a four-dilemma pack."""

from __future__ import annotations

from importlib import resources

from ..dilemmas import DilemmaPack, load_pack
from ..world import CityMap, load_map

MAP_NAME = "plateia.map"
PACK_NAME = "epolis-sample.pack"


def sample_map_text() -> str:
    return resources.files(__package__).joinpath(MAP_NAME).read_text(encoding="utf-8")


def sample_pack_text() -> str:
    return resources.files(__package__).joinpath(PACK_NAME).read_text(encoding="utf-8")


def sample_map() -> CityMap:
    return load_map(sample_map_text())


def sample_pack() -> DilemmaPack:
    return load_pack(sample_pack_text(), sample_map())
