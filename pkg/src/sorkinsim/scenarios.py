"""Entanglement-based signaling experiments with a multi-slit receiver.

Alice holds a qubit (or a small ``dA``-level system), Bob a ``dB``-mode
particle sent through ``dB`` slits and a DFT onto a ``dB``-point screen. The
state is stored as its amplitude matrix ``amps[a, b]`` (``|Psi> =
sum amps[a, b] |a>|b>``).

Coherence sectors come from Alice's side: once Alice's basis is fixed (by
her measurement context), the B-paths attached to the same A-basis element
interfere with each other and different A elements add incoherently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qlinalg
from .qlinalg import ATOL, DimensionError, discrete_fourier_unitary, hadamard_qubit, trace_distance, total_variation
from .recipes import Born, ProbabilityRecipe, apply_recipe
from .slits import DetectionDistribution

# 2x4 example: three coherent slits plus one incoherent slit.
_B2A_RAW = np.array([0.5, 0.3 + 0.4j, -0.2 + 0.5j, 0.4])
CANONICAL_B2A_ALPHAS = _B2A_RAW / np.linalg.norm(_B2A_RAW)
# 2x3 example; gamma fills the norm.
CANONICAL_A2B = (0.6 + 0j, 0.48 + 0.36j, np.sqrt(1 - 0.36 - 0.36) + 0j)

ZERO_WEIGHT = 1e-15


class DegenerateFringeError(ValueError):
    """A dark Born fringe point receives non-zero probability under the recipe."""


@dataclass(frozen=True)
class BipartiteState:
    amps: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.amps, dtype=complex)
        if m.ndim != 2 or 0 in m.shape:
            raise DimensionError(f"amplitude matrix must be 2-D, got {m.shape}")
        norm2 = float(np.sum(np.abs(m) ** 2))
        if abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"bipartite state is not normalized (norm^2 = {norm2!r})")
        object.__setattr__(self, "amps", m)

    @property
    def dim_a(self) -> int:
        return self.amps.shape[0]

    @property
    def dim_b(self) -> int:
        return self.amps.shape[1]

    @property
    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def density(self) -> np.ndarray:
        return qlinalg.projector(self.vector)

    def reduced_a(self) -> np.ndarray:
        return self.amps @ self.amps.conj().T

    def reduced_b(self) -> np.ndarray:
        return self.amps.T @ self.amps.conj()

    def local(self, u_a=None, u_b=None) -> "BipartiteState":
        """State after local unitaries ``u_a (x) u_b``."""
        m = self.amps
        if u_a is not None:
            m = np.asarray(u_a) @ m
        if u_b is not None:
            m = m @ np.asarray(u_b).T
        return BipartiteState(m)

    @classmethod
    def random(cls, dim_a: int, dim_b: int, rng: np.random.Generator) -> "BipartiteState":
        return cls(qlinalg.random_state(dim_a * dim_b, rng).reshape(dim_a, dim_b))


def build_sorkin_state(alphas) -> BipartiteState:
    """``sum_{j<N} alpha_j |0>|j> + alpha_N |1>|N>`` on a 2 x (N+1) system."""
    a = np.asarray(alphas, dtype=complex)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("need N+1 >= 2 amplitudes")
    norm2 = float(np.sum(np.abs(a) ** 2))
    if abs(norm2 - 1.0) > ATOL:
        raise ValueError(f"alphas are not normalized (norm^2 = {norm2!r})")
    n = a.size - 1
    amps = np.zeros((2, n + 1), dtype=complex)
    amps[0, :n] = a[:n]
    amps[1, n] = a[n]
    return BipartiteState(amps)


def build_a2b_state(alpha, beta, gamma) -> BipartiteState:
    """``|0>(alpha|0> + beta|1>) + gamma|1>|2>``."""
    return build_sorkin_state([alpha, beta, gamma])


@dataclass
class ScreenDecomposition:
    """``(I (x) DFT)|Psi> = sum_k (Y_k|0> + Z_k|1>)|k>`` and ``B_k = |Y_k|^2 + |Z_k|^2``."""

    Y: np.ndarray
    Z: np.ndarray

    @property
    def B(self) -> np.ndarray:
        return np.abs(self.Y) ** 2 + np.abs(self.Z) ** 2

    @property
    def psi(self) -> np.ndarray:
        """Unnormalized Alice states, shape ``(n_detectors, 2)``."""
        return np.stack([self.Y, self.Z], axis=1)


def screen_decomposition(state: BipartiteState) -> ScreenDecomposition:
    if state.dim_a != 2:
        raise DimensionError(f"screen decomposition needs a qubit on A, got dim {state.dim_a}")
    screen = state.amps @ discrete_fourier_unitary(state.dim_b).T
    return ScreenDecomposition(screen[0].copy(), screen[1].copy())


@dataclass
class Ensemble:
    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > ATOL:
            raise ValueError("ensemble weights must be non-negative and sum to 1")

    def density(self) -> np.ndarray:
        return np.einsum("i,ia,ib->ab", self.weights, self.states, self.states.conj())

    def __len__(self) -> int:
        return self.weights.size


def _ensemble_from_unnormalized(vectors: np.ndarray) -> Ensemble:
    w = np.sum(np.abs(vectors) ** 2, axis=1)
    keep = w > ZERO_WEIGHT
    return Ensemble(w[keep], vectors[keep] / np.sqrt(w[keep])[:, None])


def conditional_ensemble(state: BipartiteState, basis: str = "screen") -> Ensemble:
    """Alice's ensemble after Bob measures in the slit or the screen basis.

    Members with zero weight are dropped.
    """
    if basis == "slit":
        cols = state.amps.T
    elif basis == "screen":
        cols = (state.amps @ discrete_fourier_unitary(state.dim_b).T).T
    else:
        raise ValueError(f"basis must be 'slit' or 'screen', got {basis!r}")
    return _ensemble_from_unnormalized(cols)


def hjw_equivalent(e1: Ensemble, e2: Ensemble, atol: float = 1e-10) -> bool:
    """True when both ensembles average to the same density operator."""
    if e1.states.shape[1] != e2.states.shape[1]:
        raise DimensionError("ensembles live in different dimensions")
    return bool(np.max(np.abs(e1.density() - e2.density())) <= atol)


# ---------------------------------------------------------------------------
# coherence sectors and non-Born screen statistics
# ---------------------------------------------------------------------------

def coherence_sectors(state: BipartiteState, u_a=None, b_propagator=None) -> np.ndarray:
    """Sector contributions for Bob's screen, shape ``(dA, dB, n_detectors)``.

    Sector ``a`` collects the B-paths attached to Alice's basis vector
    ``u_a|a>`` (default: computational basis). Path ``j`` contributes
    ``c[a, j] * F[k, j]`` at detector ``k`` with ``F`` the propagator
    (default: DFT of size ``dB``). Paths with zero amplitude are left in
    place; they contribute nothing to either recipe.
    """
    m = state.amps
    if u_a is not None:
        m = np.asarray(u_a, dtype=complex).conj().T @ m
    f = discrete_fourier_unitary(state.dim_b) if b_propagator is None else np.asarray(b_propagator)
    return m[:, :, None] * f.T[None, :, :]


def _compact(sectors: np.ndarray) -> np.ndarray:
    """Drop all-zero paths per sector (keeping ascending order) and pad to equal length."""
    rows = []
    width = 0
    for sec in sectors:
        live = sec[np.any(sec != 0, axis=1)]
        rows.append(live)
        width = max(width, live.shape[0])
    out = np.zeros((len(rows), max(width, 1), sectors.shape[2]), dtype=complex)
    for i, live in enumerate(rows):
        out[i, : live.shape[0]] = live
    return out


def screen_distribution(state: BipartiteState, recipe: ProbabilityRecipe, u_a=None) -> DetectionDistribution:
    """Bob's screen distribution with Alice's coherence sectors fixed by ``u_a``."""
    return apply_recipe(_compact(coherence_sectors(state, u_a)), recipe)


@dataclass
class NonBornMarginals:
    rho_a: np.ndarray
    b_prime: DetectionDistribution
    min_eigenvalue: float


def _rho_from_fringe(dec: ScreenDecomposition, b_prime) -> np.ndarray:
    b = dec.B
    bp = np.asarray(b_prime, dtype=float)
    ratio = np.zeros_like(b)
    for k in range(b.size):
        if b[k] <= ZERO_WEIGHT:
            if abs(bp[k]) > ATOL:
                raise DegenerateFringeError(
                    f"detector {k} is dark under Born (B={b[k]:.3e}) but B'={bp[k]:.3e}"
                )
            continue
        ratio[k] = bp[k] / b[k]
    psi = dec.psi
    return np.einsum("k,ka,kb->ab", ratio, psi, psi.conj())


def nonborn_screen_marginals(state: BipartiteState, recipe: ProbabilityRecipe) -> NonBornMarginals:
    """Alice's state when Bob's screen statistics follow ``recipe``.

    ``rho' = sum_k (B'_k / B_k) |psi_k><psi_k|``: the projected states stay
    Born, only the weights change. ``rho'`` may fail to be positive; its
    smallest eigenvalue is reported.
    """
    dec = screen_decomposition(state)
    bp = screen_distribution(state, recipe)
    rho = _rho_from_fringe(dec, bp.probs)
    return NonBornMarginals(rho, bp, float(qlinalg.hermitian_eigvalsh(rho)[0]))


@dataclass
class RedistributionResult:
    satisfied: bool
    residual: float
    # Residual of <0|rho'|0> for rho' built from the total fringe B'.
    projected_residual: float


def redistribution_check(state: BipartiteState, recipe: ProbabilityRecipe | None = None, *,
                         sector_probs=None, b_prime=None, atol: float = ATOL) -> RedistributionResult:
    """Is Alice's computational-basis marginal unchanged by Bob's screen recipe?

    The Y-sector (paths correlated with ``|0>_A``) may only have its weight
    redistributed among detectors: ``sum_k Y'_k = sum_k |Y_k|^2``. Pass either
    a recipe, explicit per-sector probabilities ``(2, n_detectors)`` or a bare
    total fringe ``b_prime``; for the latter the Y share of each detector is
    taken as ``B'_k |Y_k|^2 / B_k``.
    """
    dec = screen_decomposition(state)
    target = float(np.sum(np.abs(dec.Y) ** 2))
    if b_prime is None:
        if sector_probs is None:
            sector_probs = screen_distribution(state, recipe or Born()).sector_probs
        sector_probs = np.asarray(sector_probs, dtype=float)
        b_prime = sector_probs.sum(axis=0)
        prob0 = float(sector_probs[0].sum())
    else:
        prob0 = None
    projected = float(_rho_from_fringe(dec, b_prime)[0, 0].real)
    if prob0 is None:
        prob0 = projected
    residual = abs(prob0 - target)
    return RedistributionResult(residual <= atol, residual, abs(projected - target))


# ---------------------------------------------------------------------------
# signaling schemes
# ---------------------------------------------------------------------------

@dataclass
class SignalingReport:
    scenario: str
    contexts: tuple[str, str]
    bob_distributions: tuple[np.ndarray, np.ndarray]
    alice_states: tuple[np.ndarray, np.ndarray]
    trace_distance_A: float
    total_variation_B: float
    redistribution_satisfied: bool
    epsilon: float = 0.0
    extra: dict = field(default_factory=dict)


def b2a_signaling(alphas, recipe: ProbabilityRecipe) -> SignalingReport:
    """Bob chooses slit or screen measurement; compare Alice's conditional states.

    In the slit basis each detection sees a single path, so the Born weights
    hold there for any recipe and Alice is left in ``rho_A``.
    """
    state = build_sorkin_state(alphas)
    rho_a = state.reduced_a()
    slit_probs = np.sum(np.abs(state.amps) ** 2, axis=0)
    marg = nonborn_screen_marginals(state, recipe)
    born_screen = screen_decomposition(state).B
    redis = redistribution_check(state, sector_probs=marg.b_prime.sector_probs)
    return SignalingReport(
        scenario="b2a",
        contexts=("slit", "screen"),
        bob_distributions=(slit_probs, marg.b_prime.probs),
        alice_states=(rho_a, marg.rho_a),
        trace_distance_A=trace_distance(rho_a, marg.rho_a),
        total_variation_B=total_variation(born_screen, marg.b_prime.probs),
        redistribution_satisfied=redis.satisfied,
        epsilon=recipe.epsilon,
        extra={
            "born_screen": born_screen,
            "min_eigenvalue_screen_state": marg.min_eigenvalue,
            "redistribution_residual": redis.residual,
            "projected_residual": redis.projected_residual,
        },
    )


def a2b_signaling(alpha, beta, gamma, recipe: ProbabilityRecipe) -> SignalingReport:
    """Alice measures computational or Hadamard; compare Bob's screen patterns.

    Computational context: sectors {slit 0, slit 1} and {slit 2}, at most two
    coherent paths each. Hadamard context: two three-path sectors with
    amplitudes ``(alpha, beta, +-gamma)/sqrt(2)``.
    """
    state = build_a2b_state(alpha, beta, gamma)
    comp = screen_distribution(state, recipe)
    had = screen_distribution(state, recipe, u_a=hadamard_qubit())
    rho_a = state.reduced_a()
    return SignalingReport(
        scenario="a2b",
        contexts=("computational", "hadamard"),
        bob_distributions=(comp.probs, had.probs),
        alice_states=(rho_a, rho_a),
        trace_distance_A=0.0,
        total_variation_B=total_variation(comp.probs, had.probs),
        redistribution_satisfied=True,
        epsilon=recipe.epsilon,
    )


# ---------------------------------------------------------------------------
# context dependence of block measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionSpec:
    blocks: tuple[tuple[int, ...], ...]

    def validate(self, dim_b: int) -> None:
        seen = sorted(i for blk in self.blocks for i in blk)
        if seen != list(range(dim_b)):
            raise ValueError(f"blocks {self.blocks} do not partition range({dim_b}) disjointly")

    @classmethod
    def contiguous(cls, sizes: Sequence[int]) -> "PartitionSpec":
        out, start = [], 0
        for s in sizes:
            out.append(tuple(range(start, start + s)))
            start += s
        return cls(tuple(out))


def contextuality_probe(state: BipartiteState, partition: PartitionSpec, u_a, u_a_prime,
                        recipe: ProbabilityRecipe, b_propagator=None) -> np.ndarray:
    """Block measures ``mu[J_k | context]`` for two choices of Alice's basis.

    Bob's outcomes are the screen points reached through ``b_propagator``
    (default DFT; pass the identity for a direct measurement) and the
    partition groups those outcomes into blocks. Returns shape
    ``(n_blocks, 2)``: column 0 for ``u_a``, column 1 for ``u_a_prime``.
    """
    partition.validate(state.dim_b)
    for u in (u_a, u_a_prime):
        if not qlinalg.is_unitary(u) or np.shape(u)[0] != state.dim_a:
            raise ValueError("context must be a unitary on Alice's space")
    cols = []
    for u in (u_a, u_a_prime):
        sec = coherence_sectors(state, u, b_propagator)
        probs = apply_recipe(_compact(sec), recipe).probs
        cols.append([probs[list(blk)].sum() for blk in partition.blocks])
    return np.array(cols).T
