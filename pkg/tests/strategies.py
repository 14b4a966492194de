"""Hypothesis strategies for probability objects."""

import numpy as np
from hypothesis import strategies as st


@st.composite
def pmfs(draw, min_size=1, max_size=5, min_mass=0.0):
    k = draw(st.integers(min_size, max_size))
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k)), dtype=float)
    w = w + min_mass + 1e-3
    return w / w.sum()


@st.composite
def joints(draw, max_side=4):
    a = draw(st.integers(1, max_side))
    b = draw(st.integers(1, max_side))
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=a * b, max_size=a * b)), dtype=float)
    w = w.reshape(a, b) + 1e-3
    return w / w.sum()


@st.composite
def stochastic_matrices(draw, max_in=4, max_out=4):
    a = draw(st.integers(1, max_in))
    b = draw(st.integers(1, max_out))
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=a * b, max_size=a * b)), dtype=float)
    w = w.reshape(a, b) + 1e-3
    return w / w.sum(axis=1, keepdims=True)
