"""Interference terms of the Sorkin hierarchy.

For a probability measure ``P`` on subsets of slits, the interference term of
a nonempty subset ``T`` is the inclusion-exclusion sum

    I(T) = sum_{S subset of T, S nonempty} (-1)^(|T| - |S|) P(S)

so ``I({a, b}) = P(ab) - P(a) - P(b)`` and so on. The ``N``-sum rule holds
when every ``I(T)`` with ``|T| = N`` vanishes. Subsets are bitmasks.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .slits import SlitField, subset_amplitudes

VANISH_TOL = 1e-10


def popcounts(n: int) -> np.ndarray:
    """Number of set bits of every mask in ``range(2**n)``."""
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts[1 << i:1 << (i + 1)] = counts[: 1 << i] + 1
    return counts


def interference_naive(P: Sequence[float] | Callable[[int], float], T: int, n: int | None = None) -> float:
    """Direct inclusion-exclusion over all nonempty subsets of ``T``.

    ``P`` is indexable by bitmask (or a callable on bitmasks). ``n`` bounds the
    slit range when given.
    """
    if T <= 0:
        raise ValueError("T must be a nonempty subset")
    if n is not None and T >> n:
        raise ValueError(f"subset {T:#b} outside {n} slits")
    get = P if callable(P) else P.__getitem__
    size_t = bin(T).count("1")
    total = 0.0
    s = T
    while s:
        sign = -1.0 if (size_t - bin(s).count("1")) & 1 else 1.0
        total += sign * get(s)
        s = (s - 1) & T
    return total


def mobius_transform(P) -> np.ndarray:
    """Subset-lattice Moebius inversion in ``O(N 2**N)``.

    Returns ``I`` with ``I[T] = sum_{S subset of T} (-1)^(|T|-|S|) P[S]`` for
    every mask. Leading axis indexes subsets; any trailing axes (e.g.
    detectors) are transformed independently. Accumulates in ``np.longdouble``.
    """
    work = np.array(P, dtype=np.longdouble)
    size = work.shape[0] if work.ndim else 0
    if size == 0 or size & (size - 1):
        raise ValueError(f"P must have a power-of-two length, got {size}")
    n = size.bit_length() - 1
    for i in range(n):
        view = work.reshape(-1, 2, 1 << i, *work.shape[1:])
        view[:, 1] -= view[:, 0]
    return work.astype(float)


@dataclass
class InterferenceReport:
    """Interference terms for every nonempty subset, one row per detector.

    ``terms[d, T]`` is ``I(T)`` at the ``d``-th reported detector (column 0 is
    ``I(empty)``, kept only for indexing). ``max_abs_by_order[r]`` is the
    largest ``|I(T)|`` over ``|T| = r`` and all reported detectors.
    """

    n_slits: int
    terms: np.ndarray
    detectors: list[int] = dc_field(default_factory=lambda: [0])
    tol: float = VANISH_TOL

    @property
    def max_abs_by_order(self) -> np.ndarray:
        order = popcounts(self.n_slits)
        out = np.zeros(self.n_slits + 1)
        mags = np.abs(np.atleast_2d(self.terms)).max(axis=0)
        np.maximum.at(out, order, mags)
        out[0] = 0.0
        return out

    def vanishing_orders(self) -> list[int]:
        m = self.max_abs_by_order
        return [r for r in range(1, self.n_slits + 1) if m[r] < self.tol]

    def violated_orders(self) -> list[int]:
        m = self.max_abs_by_order
        return [r for r in range(1, self.n_slits + 1) if m[r] >= self.tol]

    def term(self, T: int, detector_row: int = 0) -> float:
        return float(np.atleast_2d(self.terms)[detector_row, T])


def interference_spectrum_fast(P, n: int | None = None) -> InterferenceReport:
    """All interference terms of one probability table ``P`` (length ``2**N``)."""
    arr = np.asarray(P, dtype=float)
    if n is not None and arr.size != 1 << n:
        raise ValueError(f"P has length {arr.size}, expected 2**{n}")
    terms = mobius_transform(arr)
    n = arr.size.bit_length() - 1
    if n and abs(arr[0]) > 0:
        raise ValueError("P(empty set) must be zero")
    return InterferenceReport(n, terms[None, :])


def subset_probability_table(field: SlitField, recipe=None) -> np.ndarray:
    """``P[S, k]`` for every slit subset ``S`` and detector ``k`` under ``recipe``.

    Each subset is evaluated as a single coherence sector holding the open
    slits' contributions; ``recipe=None`` means Born.
    """
    from .recipes import Born, apply_recipe

    if recipe is None or isinstance(recipe, Born) or getattr(recipe, "epsilon", 0.0) == 0.0:
        return np.abs(subset_amplitudes(field)) ** 2
    n = field.n_slits
    out = np.zeros((1 << n, field.n_detectors))
    for s in range(1, 1 << n):
        keep = [(s >> j) & 1 for j in range(n)]
        sector = field.contrib[np.flatnonzero(keep)]
        out[s] = apply_recipe(sector[None, :, :], recipe).probs
    return out


def sum_rule_report(field: SlitField, recipe=None, k: int | None = None) -> InterferenceReport:
    """Interference spectrum of ``field`` under ``recipe`` at detector ``k``.

    With ``k=None`` every detector is reported and the per-order maxima are
    taken across the whole screen.
    """
    table = subset_probability_table(field, recipe)
    if k is None:
        detectors = list(range(field.n_detectors))
    else:
        if not 0 <= k < field.n_detectors:
            raise IndexError(f"detector index {k} out of range")
        detectors = [k]
    terms = mobius_transform(table[:, detectors]).T
    return InterferenceReport(field.n_slits, terms, detectors)
