import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netsep.rng import RngStream, derive_seed

path_items = st.one_of(st.integers(0, 2**64 - 1), st.integers(-(2**40), -1), st.text(max_size=8))


def test_golden_values():
    s = RngStream(2024, ("golden", 3))
    assert s.uniform(3).tolist() == [0.005504257401295842, 0.7411809718896338, 0.974288123918222]
    assert s.normal(2).tolist() == [-2.542428416695579, 0.6469905551583843]
    assert s.integers(0, 1000, 4).tolist() == [527, 5, 683, 741]
    assert derive_seed(2024, "golden", 3) == 50767813798763064


@given(st.integers(0, 2**64 - 1), st.lists(path_items, max_size=4))
def test_same_stream_same_draws(seed, path):
    a, b = RngStream(seed, tuple(path)), RngStream(seed, tuple(path))
    np.testing.assert_array_equal(a.uniform(5), b.uniform(5))
    np.testing.assert_array_equal(a.uniform(5), a.uniform(5))


@given(st.integers(0, 2**32), st.lists(path_items, max_size=3), path_items, path_items)
def test_child_paths_compose(seed, path, x, y):
    s = RngStream(seed, tuple(path))
    assert s.child(x).child(y) == s.child(x, y)
    np.testing.assert_array_equal(s.child(x, y).uniform(3), RngStream(seed, tuple(path) + (x, y)).uniform(3))


def test_distinct_paths_differ():
    base = RngStream(1)
    draws = {tuple(base.child(*p).uniform(4)) for p in [(0,), (1,), ("0",), ("a", 0), ("a", 1), (0, "a"), (-1,)]}
    assert len(draws) == 7


def test_uniforms_in_open_interval_and_normals_finite():
    u = RngStream(5, ("u",)).uniform(200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    z = RngStream(5, ("z",)).normal(200_000)
    assert np.all(np.isfinite(z))
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.02


def test_rejects_bad_components():
    with pytest.raises(TypeError):
        RngStream(0, (0.5,)).uniform(1)
    with pytest.raises(TypeError):
        RngStream(0, (True,)).uniform(1)
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, (2**65,)).uniform(1)
