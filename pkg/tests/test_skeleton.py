import numpy as np
import pytest

from fbmbt.skeleton import (
    SkeletonPath,
    crossings_bruteforce,
    sample_skeleton,
    signed_crossings_closed_form,
    terminal_y,
)


def _manual_path(level, positions, seed=0):
    positions = np.asarray(positions, dtype=np.int64)
    return SkeletonPath(
        level=level, steps=len(positions) - 1, positions=positions, seed=seed
    )


def test_sample_skeleton_is_simple_walk():
    walk = sample_skeleton(8, 1000, 42)
    steps = np.diff(walk.positions)
    assert set(np.unique(steps)) <= {-1, 1}
    assert walk.positions[0] == 0
    assert len(walk.positions) == 1001


def test_sample_skeleton_reproducible():
    a = sample_skeleton(8, 500, 7)
    b = sample_skeleton(8, 500, 7)
    assert np.array_equal(a.positions, b.positions)


def test_crossings_on_known_path():
    # 0 1 2 1 2 1 0 -1 0
    path = _manual_path(4, [0, 1, 2, 1, 2, 1, 0, -1, 0])
    table = crossings_bruteforce(path, 8)
    assert table.upcrossings(0) == 1
    assert table.downcrossings(0) == 1
    assert table.upcrossings(1) == 2
    assert table.downcrossings(1) == 2
    assert table.upcrossings(-1) == 1
    assert table.downcrossings(-1) == 1
    assert table.signed() == {}
    assert signed_crossings_closed_form(path, 8) == {}


def test_signed_closed_form_positive_terminal():
    path = _manual_path(4, [0, 1, 0, 1, 2, 3])
    assert signed_crossings_closed_form(path, 5) == {0: 1, 1: 1, 2: 1}
    assert crossings_bruteforce(path, 5).signed() == {0: 1, 1: 1, 2: 1}


def test_signed_closed_form_negative_terminal():
    path = _manual_path(4, [0, -1, 0, -1, -2])
    assert signed_crossings_closed_form(path, 4) == {-1: -1, -2: -1}
    assert crossings_bruteforce(path, 4).signed() == {-1: -1, -2: -1}


def test_signed_closed_form_random_walks():
    for seed in range(200):
        walk = sample_skeleton(6, 300, seed)
        horizon = (seed * 37) % 301
        assert (
            crossings_bruteforce(walk, horizon).signed()
            == signed_crossings_closed_form(walk, horizon)
        )


def test_terminal_y_scaling():
    path = _manual_path(4, [0, 1, 2, 3])
    assert terminal_y(path, 3) == pytest.approx(3 * 2.0**-2)
    assert terminal_y(path, 0) == 0.0


def test_horizon_validation():
    walk = sample_skeleton(6, 10, 0)
    with pytest.raises(ValueError):
        crossings_bruteforce(walk, 11)
    with pytest.raises(ValueError):
        terminal_y(walk, -1)


def test_terminal_variance_matches_step_count():
    n, steps = 8, 256  # horizon time 1: variance 256 * 2^-8 = 1
    vals = [terminal_y(sample_skeleton(n, steps, s), steps) for s in range(3000)]
    assert np.var(vals, ddof=1) == pytest.approx(1.0, abs=0.1)
