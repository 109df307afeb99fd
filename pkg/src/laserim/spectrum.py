"""Exact Ising spectrum by exhaustive Gray-code enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .ising import IsingProblem

DEFAULT_CAP = 26


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumStats:
    m: int
    levels: tuple[tuple[int, int], ...]
    ground_states: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def e_g(self) -> int:
        return self.levels[0][0]

    @property
    def e_1e(self) -> int | None:
        return self.levels[1][0] if len(self.levels) > 1 else None

    @property
    def gap(self) -> int | None:
        return None if self.e_1e is None else self.e_1e - self.e_g

    def _count(self, k: int) -> int:
        return self.levels[k][1] if len(self.levels) > k else 0

    @property
    def n_g(self) -> int:
        return self._count(0)

    @property
    def n_1e(self) -> int:
        return self._count(1)

    @property
    def n_2e(self) -> int:
        return self._count(2)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.levels)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "levels": [[e, c] for e, c in self.levels],
            "e_g": self.e_g,
            "e_1e": self.e_1e,
            "gap": self.gap,
            "n_g": self.n_g,
            "n_1e": self.n_1e,
            "n_2e": self.n_2e,
            "ground_states": [list(s) for s in self.ground_states],
        }


@numba.njit(cache=True)
def _gray_walk(m, indptr, indices, weights, e0, offset, hist, target_energy, out):
    # spins[k] = +1 for bit k clear; state 0 is all +1 with energy e0
    spins = np.ones(m, dtype=np.int64)
    state = np.int64(0)
    e = e0
    n_out = 0
    hist[e + offset] += 1
    if e == target_energy and n_out < out.shape[0]:
        out[n_out] = state
        n_out += 1
    for k in range(1, np.int64(1) << m):
        v = 0
        x = k
        while (x & 1) == 0:
            x >>= 1
            v += 1
        local = 0
        for q in range(indptr[v], indptr[v + 1]):
            local += weights[q] * spins[indices[q]]
        e -= np.int64(2 * spins[v] * local)
        spins[v] = -spins[v]
        state ^= np.int64(1) << v
        hist[e + offset] += 1
        if e == target_energy and n_out < out.shape[0]:
            out[n_out] = state
            n_out += 1
    return n_out


def _bits_to_spins(state: int, m: int) -> tuple[int, ...]:
    return tuple(-1 if (state >> k) & 1 else 1 for k in range(m))


def enumerate_spectrum(
    p: IsingProblem, cap: int = DEFAULT_CAP, force: bool = False
) -> SpectrumStats:
    """Histogram of H over all 2^m spin states, plus the exact ground-state set.

    Raises CapacityError above ``cap`` spins unless ``force`` is set.
    """
    if p.m > cap and not force:
        raise CapacityError(f"m={p.m} exceeds enumeration cap {cap}; pass force=True")
    if p.m > 62:
        raise CapacityError("bitmask enumeration is limited to m <= 62")
    indptr, indices, weights = p.csr
    w_int = weights.astype(np.int64)
    offset = int(np.abs(np.array([w for _, _, w in p.edges])).sum())
    hist = np.zeros(2 * offset + 1, dtype=np.int64)
    e0 = int(sum(w for _, _, w in p.edges))
    empty = np.zeros(0, dtype=np.int64)
    _gray_walk(p.m, indptr, indices, w_int, e0, offset, hist, offset + 1, empty)

    nz = np.flatnonzero(hist)
    levels = tuple((int(k - offset), int(hist[k])) for k in nz)
    e_g, n_g = levels[0]

    hist2 = np.zeros_like(hist)
    out = np.zeros(n_g, dtype=np.int64)
    _gray_walk(p.m, indptr, indices, w_int, e0, offset, hist2, e_g, out)
    states = [_bits_to_spins(int(s), p.m) for s in out]
    return SpectrumStats(m=p.m, levels=levels, ground_states=_canonical_order(states))


def _canonical_order(states: list[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
    """Representatives with first spin +1 (sorted), each followed by its flip."""
    seen = set(states)
    reps = sorted({s if s[0] == 1 else tuple(-v for v in s) for s in states}, reverse=True)
    ordered = []
    for r in reps:
        for s in (r, tuple(-v for v in r)):
            if s in seen:
                ordered.append(s)
    return tuple(ordered)


def predicted_counts(m: int) -> tuple[int, int]:
    """Closed-form first/second excited degeneracies for the cubic family."""
    if m < 6 or m % 2:
        raise ValueError(f"count formulas hold for even m >= 6, got {m}")
    return 2 * m, m * (m + 6) // 4


def verify_gap(p: IsingProblem, cap: int = DEFAULT_CAP, force: bool = False) -> bool:
    return enumerate_spectrum(p, cap=cap, force=force).gap == 6

