from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserim.ising import build_cubic_problem, flip_one_coupling
from laserim.spectrum import CapacityError, enumerate_spectrum, predicted_counts, verify_gap


def brute_levels(p):
    """Independent dense enumeration: all 2^m states as a matrix."""
    m = p.m
    codes = np.arange(2**m)[:, None]
    s = 1 - 2 * ((codes >> np.arange(m)) & 1)
    i, j, w = p.edge_arrays
    e = (s[:, i] * s[:, j] * w).sum(axis=1)
    vals, counts = np.unique(e, return_counts=True)
    return tuple(zip(vals.tolist(), counts.tolist())), s[e == e.min()]


def test_m4_levels():
    st_ = enumerate_spectrum(build_cubic_problem(4, [1, 1, 1, 1]))
    assert st_.levels == ((-6, 2), (0, 8), (2, 6))
    assert st_.ground_states == ((1, 1, 1, 1), (-1, -1, -1, -1))


@pytest.mark.parametrize("m", [6, 8, 10, 12])
def test_matches_dense_enumeration(m):
    t = np.random.default_rng(m).choice([-1, 1], m)
    p = build_cubic_problem(m, t)
    levels, gs = brute_levels(p)
    stats = enumerate_spectrum(p)
    assert stats.levels == levels
    assert sorted(stats.ground_states) == sorted(map(tuple, gs.tolist()))
    assert stats.total == 2**m


# frozen from the dense enumerator above and the closed form
@pytest.mark.parametrize(
    "m,n1,n2",
    [(6, 12, 18), (8, 16, 28), (10, 20, 40), (12, 24, 54), (14, 28, 70), (16, 32, 88)],
)
def test_low_levels(m, n1, n2):
    stats = enumerate_spectrum(build_cubic_problem(m, [1] * m))
    assert (stats.n_g, stats.gap, stats.n_1e, stats.n_2e) == (2, 6, n1, n2)
    assert predicted_counts(m) == (n1, n2)


def test_predicted_counts_domain():
    with pytest.raises(ValueError):
        predicted_counts(4)
    with pytest.raises(ValueError):
        predicted_counts(7)


def test_capacity_guard():
    p = build_cubic_problem(28, [1] * 28)
    with pytest.raises(CapacityError):
        enumerate_spectrum(p)
    with pytest.raises(CapacityError):
        enumerate_spectrum(build_cubic_problem(64, [1] * 64), force=True)


def test_single_flip_m8():
    p = build_cubic_problem(8, [1, -1, 1, 1, -1, -1, 1, -1])
    base = enumerate_spectrum(p)
    for k in range(p.n_edges):
        f = enumerate_spectrum(flip_one_coupling(p, k))
        assert f.ground_states == base.ground_states
        assert f.levels[:2] == ((-10, 2), (-8, 4))
        assert f.gap == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 7).flatmap(lambda h: st.lists(st.sampled_from([-1, 1]), min_size=2 * h, max_size=2 * h)))
def test_spectrum_is_gauge_invariant(t):
    m = len(t)
    a = enumerate_spectrum(build_cubic_problem(m, t))
    b = enumerate_spectrum(build_cubic_problem(m, [1] * m))
    assert a.levels == b.levels
    assert set(a.ground_states) == {tuple(t), tuple(-v for v in t)}
    assert verify_gap(build_cubic_problem(m, t))
