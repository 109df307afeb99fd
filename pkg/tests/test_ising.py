from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserim.ising import (
    DimensionError,
    InvalidProblemError,
    IsingProblem,
    as_spins,
    build_cubic_problem,
    cubic_graph_edges,
    flip_one_coupling,
    ising_energy,
)


def targets(min_m=4, max_m=30):
    return st.integers(min_m // 2, max_m // 2).flatmap(
        lambda h: st.lists(st.sampled_from([-1, 1]), min_size=2 * h, max_size=2 * h)
    )


def test_m4_is_complete_graph():
    assert cubic_graph_edges(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_m8_edges():
    e = cubic_graph_edges(8)
    assert len(e) == 12
    assert (0, 4) in e and (3, 7) in e and (0, 7) in e


@pytest.mark.parametrize("m", [0, 2, 3, 5, 7, -4])
def test_bad_sizes(m):
    with pytest.raises(InvalidProblemError):
        cubic_graph_edges(m)


def test_mattis_couplings_example():
    p = build_cubic_problem(4, [1, -1, 1, 1])
    assert dict(((i, j), w) for i, j, w in p.edges) == {
        (0, 1): 1, (0, 2): -1, (0, 3): -1, (1, 2): 1, (1, 3): 1, (2, 3): -1,
    }
    assert ising_energy(p, [1, -1, 1, 1]) == -6
    assert ising_energy(p, [-1, 1, -1, -1]) == -6


def test_spin_validation():
    with pytest.raises(ValueError):
        as_spins([1, 0, 1, 1])
    with pytest.raises(DimensionError):
        as_spins([1, -1, 1], 4)
    with pytest.raises(DimensionError):
        as_spins([[1, -1]])
    with pytest.raises(InvalidProblemError):
        build_cubic_problem(4.0, [1, 1, 1, 1])


def test_flip_index_out_of_range():
    p = build_cubic_problem(8, [1] * 8)
    with pytest.raises(IndexError):
        flip_one_coupling(p, 12)
    q = flip_one_coupling(p, 0)
    assert q.edges[0][2] == -p.edges[0][2] and q.edges[1:] == p.edges[1:]


def test_json_round_trip_and_rejects_bad_edges():
    p = build_cubic_problem(6, [1, -1, -1, 1, 1, -1])
    assert IsingProblem.from_json(p.to_json()) == p
    d = p.to_dict()
    d["edges"][0] = [0, 0, 1]
    with pytest.raises(InvalidProblemError):
        IsingProblem.from_dict(d)


def test_csr_matches_dense():
    p = build_cubic_problem(10, np.random.default_rng(0).choice([-1, 1], 10))
    indptr, idx, w = p.csr
    dense = np.zeros((10, 10))
    for i in range(10):
        dense[i, idx[indptr[i]:indptr[i + 1]]] = w[indptr[i]:indptr[i + 1]]
    np.testing.assert_array_equal(dense, p.coupling_matrix())


@settings(max_examples=60, deadline=None)
@given(targets())
def test_graph_is_cubic_and_target_is_minimum(t):
    m = len(t)
    p = build_cubic_problem(m, t)
    assert np.all(p.degrees() == 3)
    assert p.n_edges == 3 * m // 2
    assert ising_energy(p, t) == -p.n_edges
    assert ising_energy(p, [-v for v in t]) == -p.n_edges


@settings(max_examples=40, deadline=None)
@given(targets(max_m=12), st.data())
def test_energy_is_flip_invariant_and_bounded(t, data):
    m = len(t)
    p = build_cubic_problem(m, t)
    s = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=m, max_size=m))
    e = ising_energy(p, s)
    assert e == ising_energy(p, [-v for v in s])
    assert -p.n_edges <= e <= p.n_edges
    # gauge transform: energy depends only on s * t
    g = np.array(s) * np.array(t)
    assert e == ising_energy(build_cubic_problem(m, [1] * m), g)


def test_only_target_pair_reaches_minimum_small():
    t = [1, -1, -1, 1, 1, 1]
    p = build_cubic_problem(6, t)
    minima = [s for s in itertools.product([-1, 1], repeat=6) if ising_energy(p, s) == -9]
    assert sorted(minima) == sorted([tuple(t), tuple(-v for v in t)])
