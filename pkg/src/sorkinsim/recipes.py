"""Probability recipes: the Born rule and a third-order deformation of it.

Input to every recipe is a stack of coherence sectors, an array of shape
``(n_sectors, n_paths, n_detectors)`` holding the amplitude each path
contributes at each detector point. Paths inside one sector add coherently;
sectors add incoherently.

The deformed recipe adds ``epsilon * delta_s[k]`` to each sector's Born
pattern, where

    T_s[k] = sum_{p<q<r} Im(a_p conj a_q) Im(a_q conj a_r) Im(a_r conj a_p)
    delta_s[k] = T_s[k] - w_s[k] * sum_m T_s[m],   w_s[k] = Born_s[k] / sum_m Born_s[m]

``T`` is invariant under a global phase, vanishes unless three paths are
present, and ``delta_s`` sums to zero over detectors, so each sector keeps its
Born weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Union

import numpy as np

from .qlinalg import ATOL
from .slits import DetectionDistribution, SlitField, field_from_dft
from .sorkin import sum_rule_report

NEG_TOL = 1e-12


class RecipeOutOfRange(ValueError):
    """Deformation produced a probability below ``-NEG_TOL``."""

    def __init__(self, message: str, detector: int | None = None, value: float | None = None):
        super().__init__(message)
        self.detector = detector
        self.value = value


@dataclass(frozen=True)
class Born:
    kind: str = field(default="born", init=False)

    @property
    def epsilon(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SorkinDeformed:
    epsilon: float
    kind: str = field(default="sorkin3", init=False)

    def __post_init__(self):
        if not np.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")


ProbabilityRecipe = Union[Born, SorkinDeformed]


def recipe_from_spec(kind: str, epsilon: float = 0.0) -> ProbabilityRecipe:
    kind = kind.lower()
    if kind == "born":
        return Born()
    if kind in ("sorkin3", "sorkindeformed", "sorkin_deformed"):
        return SorkinDeformed(float(epsilon))
    raise ValueError(f"unknown recipe kind {kind!r}")


def _as_sectors(sectors) -> np.ndarray:
    s = np.asarray(sectors, dtype=complex)
    if s.ndim == 2:
        s = s[None]
    if s.ndim != 3:
        raise ValueError(f"sectors must have shape (n_sectors, n_paths, n_detectors), got {s.shape}")
    return s


def third_order_invariant(contrib) -> np.ndarray:
    """``T[k]`` for one sector with contributions of shape ``(n_paths, n_detectors)``.

    Triples are taken in ascending path order, which fixes the sign.
    """
    a = np.asarray(contrib, dtype=complex)
    n_paths, n_det = a.shape
    if n_paths < 3:
        return np.zeros(n_det)
    im = np.imag(a[:, None, :] * a.conj()[None, :, :])
    trip = np.array(list(combinations(range(n_paths), 3)))
    p, q, r = trip.T
    return np.sum(im[p, q] * im[q, r] * im[r, p], axis=0)


def sector_born(sectors) -> np.ndarray:
    """Born pattern of each sector, shape ``(n_sectors, n_detectors)``."""
    return np.abs(_as_sectors(sectors).sum(axis=1)) ** 2


def sector_deformation(sectors) -> np.ndarray:
    """Zero-sum deformation ``delta`` of each sector, shape ``(n_sectors, n_detectors)``."""
    s = _as_sectors(sectors)
    born = sector_born(s)
    out = np.zeros_like(born)
    for i, sec in enumerate(s):
        t = third_order_invariant(sec)
        total = born[i].sum()
        if total == 0.0:
            continue
        out[i] = t - born[i] / total * t.sum()
    return out


def apply_recipe(sectors, recipe: ProbabilityRecipe) -> DetectionDistribution:
    """Detection distribution of an incoherent sum of coherence sectors.

    Raises RecipeOutOfRange if a deformed probability drops below -1e-12.
    Negative values are never clamped.
    """
    s = _as_sectors(sectors)
    per_sector = sector_born(s)
    eps = recipe.epsilon
    if isinstance(recipe, SorkinDeformed) and eps != 0.0:
        per_sector = per_sector + eps * sector_deformation(s)
    elif not isinstance(recipe, (Born, SorkinDeformed)):
        raise TypeError(f"unsupported recipe {recipe!r}")
    probs = per_sector.sum(axis=0)
    bad = np.flatnonzero(probs < -NEG_TOL)
    if bad.size:
        k = int(bad[np.argmin(probs[bad])])
        raise RecipeOutOfRange(
            f"recipe {recipe!r} gives probability {probs[k]:.3e} at detector {k}",
            detector=k,
            value=float(probs[k]),
        )
    return DetectionDistribution(probs, per_sector)


@dataclass
class RecipeValidation:
    trials: int
    max_normalization_error: float = 0.0
    max_zero_epsilon_error: float = 0.0
    max_two_path_error: float = 0.0
    min_probability: float = np.inf
    max_third_order: float = 0.0
    out_of_range: int = 0
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.out_of_range == 0
            and self.max_normalization_error <= ATOL
            and self.max_zero_epsilon_error <= ATOL
            and self.max_two_path_error <= ATOL
        )


def random_sector_field(n_slits: int, n_detectors: int, rng: np.random.Generator) -> SlitField:
    """Unit-total random field: a normalized complex source propagated by DFT."""
    src = rng.normal(size=n_slits) + 1j * rng.normal(size=n_slits)
    return field_from_dft(src / np.linalg.norm(src), n_detectors)


def validate_recipe(recipe: ProbabilityRecipe, fields=None, trials: int = 100, seed: int = 0,
                    n_slits: int = 3) -> RecipeValidation:
    """Check a recipe for normalization, reductions and non-negativity.

    ``fields`` defaults to ``trials`` seeded random ``n_slits``-slit DFT fields.
    Violations are collected, never raised.
    """
    rng = np.random.default_rng(seed)
    if fields is None:
        fields = [random_sector_field(n_slits, n_slits, rng) for _ in range(trials)]
    fields = list(fields)
    rep = RecipeValidation(trials=len(fields))
    for fld in fields:
        sec = fld.contrib[None]
        born = apply_recipe(sec, Born()).probs
        try:
            out = apply_recipe(sec, recipe).probs
        except RecipeOutOfRange as exc:
            rep.out_of_range += 1
            rep.min_probability = min(rep.min_probability, exc.value)
            if len(rep.messages) < 10:
                rep.messages.append(str(exc))
            continue
        rep.max_normalization_error = max(rep.max_normalization_error, abs(out.sum() - born.sum()))
        rep.min_probability = min(rep.min_probability, float(out.min()))
        if isinstance(recipe, SorkinDeformed):
            zero = apply_recipe(sec, SorkinDeformed(0.0)).probs
            rep.max_zero_epsilon_error = max(rep.max_zero_epsilon_error, float(np.max(np.abs(zero - born))))
        two = fld.contrib[None, :2]
        diff = apply_recipe(two, recipe).probs - apply_recipe(two, Born()).probs
        rep.max_two_path_error = max(rep.max_two_path_error, float(np.max(np.abs(diff))))
        if fld.n_slits >= 3:
            third = sum_rule_report(SlitField(fld.contrib[:3]), recipe).max_abs_by_order[3]
            rep.max_third_order = max(rep.max_third_order, float(third))
    return rep


def canonical_test_field() -> SlitField:
    """Three unequal slits on a three-point screen, unit-scale amplitudes.

    ``contrib[j, k] = s_j exp(2 pi i j k / 3)`` with
    ``s = (1, 0.8 e^{0.3i}, 0.6 e^{-1.1i})``; no detector is dark, so small
    deformations stay in range on every slit subset.
    """
    src = np.array([1.0, 0.8 * np.exp(0.3j), 0.6 * np.exp(-1.1j)])
    jk = np.outer(np.arange(3), np.arange(3))
    return SlitField(src[:, None] * np.exp(2j * np.pi * jk / 3))
