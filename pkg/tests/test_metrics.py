import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mazeplan.metrics import path_length, smoothness

coords = st.floats(-1e3, 1e3, allow_nan=False)
paths = arrays(float, st.tuples(st.integers(1, 30), st.just(2)), elements=coords)


def test_path_length_examples():
    assert path_length([(0, 0), (3, 4)]) == 5.0
    assert path_length([(7, 7)]) == 0.0
    with pytest.raises(ValueError):
        path_length([])


@given(paths, paths)
def test_path_length_additive_under_concatenation(a, b):
    joined = np.vstack([a, b])
    gap = math.dist(a[-1], b[0])
    assert path_length(joined) == pytest.approx(path_length(a) + path_length(b) + gap, rel=1e-9, abs=1e-6)


def test_smoothness_examples():
    assert smoothness([(0, 0), (1, 0), (5, 0), (9, 0)]) == 0.0
    assert smoothness([(0, 0), (1, 0), (1, 1)]) == pytest.approx(math.pi / 2)
    assert smoothness([(0, 0), (1, 0)]) == 0.0
    # a repeated waypoint is not a turn
    assert smoothness([(0, 0), (1, 0), (1, 0), (2, 0)]) == 0.0


@given(paths)
def test_smoothness_in_range(p):
    s = smoothness(p)
    assert 0.0 <= s <= math.pi + 1e-12


def test_reversal_is_pi():
    assert smoothness([(0, 0), (1, 0), (0, 0)]) == pytest.approx(math.pi)
