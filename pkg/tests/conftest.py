import numpy as np
import pytest

from regspectra import digraph
from regspectra.rng import generator


def assert_regular(g, n, d):
    A = g.adjacency
    assert A.shape == (n, n)
    assert A.dtype == np.uint8
    assert set(np.unique(A)).issubset({0, 1})
    assert (A.sum(axis=1) == d).all()
    assert (A.sum(axis=0) == d).all()


@pytest.fixture(scope="session")
def small_digraph():
    return digraph.sample(40, 5, generator(1234))


@pytest.fixture(scope="session")
def medium_digraph():
    return digraph.sample(120, 8, generator(99))


@pytest.fixture(scope="session")
def m42():
    """The 90-element enumeration of 4x4 matrices with row/col sums 2."""
    return digraph.enumerate_all(4, 2)
