"""Multi-slit measure engine.

A :class:`SlitField` holds ``contrib[j, k]``, the amplitude for passing slit
``j`` and arriving at detector point ``k``. Closed slits simply drop out of
the coherent sum; the remaining amplitude is not renormalized, so ``P(S)`` is
an event measure over slit subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .qlinalg import DimensionError, discrete_fourier_unitary


@dataclass(frozen=True)
class SlitMask:
    """Set of open slits, stored as a bitmask (bit ``j`` set = slit ``j`` open)."""

    n_slits: int
    open: int

    def __post_init__(self):
        if self.n_slits < 1:
            raise ValueError("n_slits must be positive")
        if self.open < 0 or self.open >> self.n_slits:
            raise ValueError(f"mask {self.open:#b} exceeds {self.n_slits} slits")

    @classmethod
    def from_indices(cls, n_slits: int, indices: Iterable[int]) -> "SlitMask":
        bits = 0
        for j in indices:
            if not 0 <= j < n_slits:
                raise ValueError(f"slit index {j} out of range for {n_slits} slits")
            bits |= 1 << j
        return cls(n_slits, bits)

    @classmethod
    def all_open(cls, n_slits: int) -> "SlitMask":
        return cls(n_slits, (1 << n_slits) - 1)

    @property
    def indices(self) -> list[int]:
        return [j for j in range(self.n_slits) if self.open >> j & 1]

    def __len__(self) -> int:
        return bin(self.open).count("1")


@dataclass(frozen=True)
class DetectionDistribution:
    """Detection probabilities over detector points.

    ``sector_probs`` (shape ``(n_sectors, n_detectors)``) is kept when the
    distribution came from an incoherent sum of coherence sectors.
    """

    probs: np.ndarray
    sector_probs: np.ndarray | None = None

    @property
    def total(self) -> float:
        return float(np.sum(self.probs))

    def clipped(self) -> np.ndarray:
        """Probabilities with rounding-level negatives (>= -1e-12) set to zero."""
        p = np.asarray(self.probs, dtype=float)
        return np.where((p < 0) & (p >= -1e-12), 0.0, p)


@dataclass(frozen=True)
class SlitField:
    contrib: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.contrib, dtype=complex)
        if c.ndim != 2 or 0 in c.shape:
            raise DimensionError(f"contrib must be a non-empty (slits, detectors) matrix, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("field has non-finite entries")
        object.__setattr__(self, "contrib", c)

    @property
    def n_slits(self) -> int:
        return self.contrib.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.contrib.shape[1]

    def restricted(self, mask: SlitMask) -> np.ndarray:
        """Contributions with closed slits zeroed, shape ``(n_slits, n_detectors)``."""
        _check_mask(self, mask)
        keep = np.array([mask.open >> j & 1 for j in range(self.n_slits)], dtype=bool)
        return np.where(keep[:, None], self.contrib, 0.0)


def _check_mask(field: SlitField, mask: SlitMask) -> None:
    if mask.n_slits != field.n_slits:
        raise DimensionError(f"mask has {mask.n_slits} slits, field has {field.n_slits}")


def field_from_dft(source, n_detectors: int | None = None) -> SlitField:
    """Propagate a slit-basis source through an ``n_detectors``-point DFT.

    ``contrib[j, k] = source[j] * exp(2 pi i j k / m) / sqrt(m)``. Slits are the
    first ``len(source)`` input modes of the DFT; any remaining modes are dark.
    """
    src = np.asarray(source, dtype=complex)
    if src.ndim != 1 or src.size == 0:
        raise DimensionError("source must be a non-empty vector")
    m = src.size if n_detectors is None else int(n_detectors)
    if src.size > m:
        raise DimensionError(f"{src.size} slits do not fit into a {m}-point DFT")
    f = discrete_fourier_unitary(m)[:, : src.size]
    return SlitField(src[:, None] * f.T)


def subset_probability(field: SlitField, mask: SlitMask, k: int) -> float:
    """Born probability ``|sum_{j in mask} a[j, k]|^2`` at detector ``k``."""
    _check_mask(field, mask)
    if not 0 <= k < field.n_detectors:
        raise IndexError(f"detector index {k} out of range [0, {field.n_detectors})")
    amp = sum((field.contrib[j, k] for j in mask.indices), 0j)
    return float(abs(amp) ** 2)


def born_distribution(field: SlitField, mask: SlitMask | None = None) -> DetectionDistribution:
    """Born detection distribution with the slits in ``mask`` open (default: all)."""
    mask = SlitMask.all_open(field.n_slits) if mask is None else mask
    amps = field.restricted(mask).sum(axis=0)
    return DetectionDistribution(np.abs(amps) ** 2)


def subset_amplitudes(field: SlitField) -> np.ndarray:
    """Coherent amplitude sums for every slit subset, shape ``(2**N, n_detectors)``.

    Row ``s`` is the amplitude with exactly the slits of bitmask ``s`` open.
    """
    n = field.n_slits
    masks = np.arange(1 << n)
    sel = (masks[:, None] >> np.arange(n)[None, :]) & 1
    return sel.astype(float) @ field.contrib
