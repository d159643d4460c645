# conftest.py - Shared fixtures for the workbench tests
import numpy as np
import pytest

from orders import chain, from_pairs


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def chain4():
    return chain(4)


@pytest.fixture
def diamond():
    """0 below 1 and 2, both below 3."""
    return from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)])


@pytest.fixture
def unranked():
    """0 below 1, 2, 3 with 3 < 2 and 1 incomparable to both."""
    return from_pairs(4, [(0, 1), (0, 2), (0, 3), (3, 2)])


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
