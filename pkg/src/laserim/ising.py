"""Cubic-graph Mattis problems used as the data-search benchmark.

Nodes sit on a ring; each node couples to its two ring neighbours and to the
node opposite it (the diameter chord).  Couplings are chosen so that a given
target spin pattern and its global flip are the only ground states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class InvalidProblemError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def as_spins(s, m: int | None = None) -> np.ndarray:
    """Validate and return a ±1 spin vector as an int8 array."""
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise DimensionError(f"spin vector must be 1-D, got shape {arr.shape}")
    if m is not None and arr.shape[0] != m:
        raise DimensionError(f"spin vector has length {arr.shape[0]}, expected {m}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spin entries must be +1 or -1")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class IsingProblem:
    """Sparse Ising instance with zero external fields.

    ``edges`` holds ``(i, j, J_ij)`` with ``i < j`` in lexicographic order.
    """

    m: int
    edges: tuple[tuple[int, int, int], ...]
    target: tuple[int, ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def target_spins(self) -> np.ndarray:
        return np.array(self.target, dtype=np.int8)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 3)
        return e[:, 0].copy(), e[:, 1].copy(), e[:, 2].copy()

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric adjacency as ``(indptr, indices, weights)``."""
        i, j, w = self.edge_arrays
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([w, w]).astype(np.float64)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(self.m + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols.astype(np.int64), vals

    def degrees(self) -> np.ndarray:
        i, j, _ = self.edge_arrays
        return np.bincount(np.concatenate([i, j]), minlength=self.m)

    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric J (small problems and diagnostics only)."""
        mat = np.zeros((self.m, self.m))
        i, j, w = self.edge_arrays
        mat[i, j] = w
        mat[j, i] = w
        return mat

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "edges": [[i, j, w] for i, j, w in self.edges],
            "target": list(self.target),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> IsingProblem:
        m = int(d["m"])
        edges = []
        for e in d["edges"]:
            i, j, w = (int(v) for v in e)
            if not (0 <= i < m and 0 <= j < m) or i == j or w not in (-1, 1):
                raise InvalidProblemError(f"bad edge {e!r}")
            edges.append((min(i, j), max(i, j), w))
        target = tuple(int(v) for v in as_spins(d["target"], m))
        return cls(m=m, edges=tuple(sorted(edges)), target=target)

    @classmethod
    def from_json(cls, text: str) -> IsingProblem:
        return cls.from_dict(json.loads(text))


def cubic_graph_edges(m: int) -> list[tuple[int, int]]:
    """Ring plus diameter chords, canonical and deduplicated.

    For ``m == 4`` every node is joined to every other one, giving K4.
    """
    if m < 4 or m % 2:
        raise InvalidProblemError(f"m must be an even integer >= 4, got {m}")
    pairs = {tuple(sorted((i, (i + 1) % m))) for i in range(m)}
    pairs |= {(i, i + m // 2) for i in range(m // 2)}
    return sorted(pairs)


def build_cubic_problem(m: int, target) -> IsingProblem:
    """Mattis couplings J_ij = -t_i t_j on the cubic ring-with-chords graph."""
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise InvalidProblemError(f"m must be an integer, got {m!r}")
    m = int(m)
    edge_pairs = cubic_graph_edges(m)
    t = as_spins(target, m)
    edges = tuple((i, j, int(-t[i] * t[j])) for i, j in edge_pairs)
    return IsingProblem(m=m, edges=edges, target=tuple(int(v) for v in t))


def random_target(m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=m)


def ising_energy(p: IsingProblem, s) -> int:
    """H(s) = sum over edges of J_ij s_i s_j."""
    s = as_spins(s, p.m).astype(np.int64)
    i, j, w = p.edge_arrays
    return int(np.sum(w * s[i] * s[j]))


def flip_one_coupling(p: IsingProblem, edge_index: int) -> IsingProblem:
    if not 0 <= edge_index < p.n_edges:
        raise IndexError(f"edge_index {edge_index} out of range [0, {p.n_edges})")
    edges = list(p.edges)
    i, j, w = edges[edge_index]
    edges[edge_index] = (i, j, -w)
    return IsingProblem(m=p.m, edges=tuple(edges), target=p.target)
