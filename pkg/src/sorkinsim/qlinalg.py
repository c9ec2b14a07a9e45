"""Dense complex linear algebra for small bipartite systems.

States are 1-D complex arrays, operators and density operators are 2-D
square complex arrays. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

# Single normalization / Hermiticity tolerance used across the package.
ATOL = 1e-12
# Smallest eigenvalue still accepted as "non-negative" for a density operator.
EIG_FLOOR = -1e-10
JACOBI_TOL = 1e-13


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class CompletenessError(ValueError):
    """A Kraus set does not satisfy sum_j E_j^dag E_j = I."""


class NotDensityOperatorError(ValueError):
    """Matrix is not Hermitian, unit-trace and positive semidefinite."""


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def as_state(amps, normalized: bool = True, atol: float = ATOL) -> np.ndarray:
    """Return ``amps`` as a complex state vector, optionally checking the norm."""
    psi = np.asarray(amps, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise DimensionError(f"state vector must be 1-D and non-empty, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state vector has non-finite entries")
    if normalized:
        norm2 = float(np.vdot(psi, psi).real)
        if abs(norm2 - 1.0) > atol:
            raise ValueError(f"state vector is not normalized (norm^2 = {norm2!r})")
    return psi


def as_operator(m) -> np.ndarray:
    mat = np.asarray(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise DimensionError(f"operator must be a non-empty square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("operator has non-finite entries")
    return mat


def is_hermitian(m, atol: float = ATOL) -> bool:
    mat = as_operator(m)
    return bool(np.max(np.abs(mat - mat.conj().T)) <= atol)


def is_unitary(m, atol: float = ATOL) -> bool:
    mat = as_operator(m)
    return bool(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))) <= atol)


def as_density(rho, atol: float = ATOL) -> np.ndarray:
    """Validate ``rho`` as a density operator and return it as a complex array."""
    mat = as_operator(rho)
    if not is_hermitian(mat, atol):
        raise NotDensityOperatorError("matrix is not Hermitian")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > atol:
        raise NotDensityOperatorError(f"trace is {tr!r}, expected 1")
    lo = hermitian_eigvalsh(mat).min()
    if lo < EIG_FLOOR:
        raise NotDensityOperatorError(f"smallest eigenvalue {lo!r} is negative")
    return mat


def check_kraus(ops: Sequence, atol: float = ATOL) -> list[np.ndarray]:
    """Validate a Kraus set and return its operators as complex arrays.

    Raises CompletenessError when sum_j E_j^dag E_j differs from the identity
    by more than ``atol`` in max-norm.
    """
    mats = [as_operator(e) for e in ops]
    if not mats:
        raise CompletenessError("empty Kraus set")
    d = mats[0].shape[0]
    if any(e.shape != (d, d) for e in mats):
        raise DimensionError("Kraus operators have inconsistent dimensions")
    total = sum(e.conj().T @ e for e in mats)
    err = float(np.max(np.abs(total - np.eye(d))))
    if err > atol:
        raise CompletenessError(f"Kraus completeness violated by {err:.3e}")
    return mats


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two states or two operators.

    The first factor is the most significant index, so ``|i> (x) |j>`` lands
    at position ``i * dim(b) + j``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise DimensionError(
            f"tensor_product needs two vectors or two matrices, got ndim {a.ndim} and {b.ndim}"
        )
    return np.kron(a, b)


def partial_trace(rho, dims: tuple[int, int], side: str = "B") -> np.ndarray:
    """Trace out subsystem ``side`` ("A" or "B") of a bipartite operator."""
    d_a, d_b = dims
    mat = as_operator(rho)
    if mat.shape[0] != d_a * d_b:
        raise DimensionError(f"operator dim {mat.shape[0]} != {d_a} * {d_b}")
    t = mat.reshape(d_a, d_b, d_a, d_b)
    if side == "B":
        return np.einsum("ijkj->ik", t)
    if side == "A":
        return np.einsum("jijk->ik", t)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def discrete_fourier_unitary(m: int) -> np.ndarray:
    """The m-point DFT, ``U[k, j] = exp(2 pi i j k / m) / sqrt(m)``."""
    if m < 1:
        raise ValueError("DFT size must be positive")
    jk = np.outer(np.arange(m), np.arange(m)) % m
    return np.exp(2j * np.pi * jk / m) / np.sqrt(m)


def hadamard_qubit() -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def apply_kraus(rho, ops: Sequence, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Apply a Kraus map; with ``dims`` the map acts on subsystem B only."""
    mats = check_kraus(ops)
    rho = as_operator(rho)
    if dims is not None:
        eye_a = np.eye(dims[0])
        mats = [np.kron(eye_a, e) for e in mats]
    if mats[0].shape[0] != rho.shape[0]:
        raise DimensionError("Kraus operators do not match the state dimension")
    return sum(e @ rho @ e.conj().T for e in mats)


# ---------------------------------------------------------------------------
# eigenvalues and distances
# ---------------------------------------------------------------------------

def hermitian_eigvalsh(m, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returned in ascending order. ``tol`` bounds the off-diagonal Frobenius
    norm relative to the full norm at convergence.
    """
    a = np.array(as_operator(m), dtype=complex)
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = a[p, q]
                if abs(z) <= 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2.0 * abs(z), (a[p, p] - a[q, q]).real)
                c, s = np.cos(theta), np.sin(theta)
                ph = z / abs(z)
                # columns p, q <- [c, s conj(ph); -s ph, c] rotation
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp + s * np.conj(ph) * cq
                a[:, q] = -s * ph * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp + s * ph * rq
                a[q, :] = -s * np.conj(ph) * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a).real)


def trace_distance(r1, r2) -> float:
    """Half the trace norm of ``r1 - r2``."""
    a = as_operator(r1)
    b = as_operator(r2)
    if a.shape != b.shape:
        raise DimensionError(f"trace_distance shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.sum(np.abs(hermitian_eigvalsh(a - b))))


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"distribution shape mismatch {p.shape} vs {q.shape}")
    return 0.5 * float(np.sum(np.abs(p - q)))


def povm_marginal_invariance(rho, dims: tuple[int, int], kraus_on_b: Sequence) -> float:
    """Trace distance between Alice's marginal before and after a Kraus map on B.

    Zero (to rounding) for every complete Kraus set; an incomplete set raises
    CompletenessError before anything is computed.
    """
    ops = check_kraus(kraus_on_b)
    if ops[0].shape[0] != dims[1]:
        raise DimensionError("Kraus operators do not act on subsystem B")
    before = partial_trace(rho, dims, "B")
    after = partial_trace(apply_kraus(rho, ops, dims), dims, "B")
    return trace_distance(before, after)


# ---------------------------------------------------------------------------
# seeded random objects
# ---------------------------------------------------------------------------

def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def gram_schmidt(cols) -> np.ndarray:
    """Orthonormalize the columns of ``cols`` (modified Gram-Schmidt, two passes)."""
    q = np.array(cols, dtype=complex)
    for j in range(q.shape[1]):
        for _ in range(2):
            for i in range(j):
                q[:, j] -= np.vdot(q[:, i], q[:, j]) * q[:, i]
        q[:, j] /= np.linalg.norm(q[:, j])
    return q


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return gram_schmidt(g)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Mixed state from tracing out an ancilla of a random pure state."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_kraus(dim: int, n_ops: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Complete Kraus set cut from the first ``dim`` columns of a random unitary."""
    v = random_unitary(dim * n_ops, rng)[:, :dim]
    return [v[j * dim:(j + 1) * dim, :] for j in range(n_ops)]
