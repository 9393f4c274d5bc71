import numpy as np
import pytest

from spatialstrat import RandomStream


def test_same_path_same_draws():
    a = RandomStream(123).child(4, 7).uniform(10)
    b = RandomStream(123).child(4, 7).uniform(10)
    assert np.array_equal(a, b)


def test_distinct_paths_differ():
    a = RandomStream(123).child(0).uniform(10)
    b = RandomStream(123).child(1).uniform(10)
    assert not np.array_equal(a, b)


def test_frozen_reference_sequence():
    # counter-based generator: values are platform-stable; freeze a draw
    val = RandomStream(2024, (1, 2)).uniform(3)
    frozen = np.array([0.9499610366536609, 0.9038216428488584,
                       0.8261657413620654])
    assert np.allclose(val, frozen, atol=1e-15)


def test_child_paths_compose():
    s = RandomStream(5)
    assert s.child(1).child(2).path == (1, 2)
    assert s.child(1, 2).path == (1, 2)
    assert np.array_equal(s.child(1).child(2).uniform(4),
                          s.child(1, 2).uniform(4))


def test_provenance_roundtrip():
    s = RandomStream(99, (3,))
    assert s.provenance() == {"root_seed": 99, "path": [3]}


def test_invalid_seed():
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(2**64)
