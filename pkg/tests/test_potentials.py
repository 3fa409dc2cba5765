import numpy as np
import pytest

from ergoham.grid import TimeGrid, TorusGrid, time_average
from ergoham.potentials import (is_separable, is_time_symmetric, random_corpus, random_smooth,
                                recipe, traveling_bump, two_mode)


def test_traveling_bump_has_zero_time_average(grid1):
    m = traveling_bump(*grid1, kappa=2.0, amplitude=3.0)
    np.testing.assert_allclose(time_average(m), 0.0, atol=1e-12)
    assert np.mean(m.values.max(axis=1)) > 0


def test_random_smooth_is_seeded_and_scaled(grid1):
    a = random_smooth(*grid1, seed=5, amplitude=2.5)
    b = random_smooth(*grid1, seed=5, amplitude=2.5)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.sup_norm() == pytest.approx(2.5)
    assert not np.array_equal(a.values, random_smooth(*grid1, seed=6).values)
    assert is_time_symmetric(random_smooth(*grid1, seed=1, time_symmetric=True))


def test_corpus_members_differ(grid1):
    ms = random_corpus(*grid1, 4, seed=0)
    assert len({m.values.tobytes() for m in ms}) == 4


def test_separable_detection(grid1):
    assert is_separable(recipe("separable", *grid1))
    assert not is_separable(traveling_bump(*grid1))


def test_two_mode_profile(grid1):
    space, time = grid1
    m = two_mode(space, time, 1, 3, amplitude=2.0)
    (x,) = space.coords()
    np.testing.assert_allclose(m.values[0], 2.0 * np.sin(2 * np.pi * x), atol=1e-12)


def test_sin_cos_recipe():
    space = TorusGrid(2, 16)
    m = recipe("sin_cos", space, TimeGrid.degenerate())
    assert m.is_static()
    assert m.sup_norm() == pytest.approx(2.0, abs=0.05)


def test_unknown_recipe(grid1):
    with pytest.raises(ValueError):
        recipe("nope", *grid1)
