from __future__ import annotations

import random

import pytest

from gridstress import build_benchmark

from helpers import SEED


@pytest.fixture(scope="session")
def bench():
    return build_benchmark()


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(SEED)
