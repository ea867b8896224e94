"""Dense matrix-exponential reference for small grids.

The Hamiltonian is assembled from its symbolic form: each monomial becomes a
Kronecker product of lattice matrices (x diagonal, p built from an explicit DFT
matrix rather than an FFT) and Pauli matrices, in the product basis of the
state's stored representations. ``exp(-i H t)`` then comes from a Hermitian
eigendecomposition. Nothing here shares code with the split-step path apart
from the grid definitions.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from . import algebra as alg
from .hamiltonian import HamiltonianSpec
from .state import GridSpec, HybridState, Rep

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleDimensionError(ValueError):
    pass


def dft_matrix(grid: GridSpec) -> np.ndarray:
    """``F[k, j] = exp(-i p_k x_j) / sqrt(n)``: position to momentum amplitudes."""
    return np.exp(-1j * np.outer(grid.momenta, grid.positions)) / np.sqrt(grid.n)


def canonical_matrices(grid: GridSpec, rep: Rep) -> tuple[np.ndarray, np.ndarray]:
    """Lattice ``x`` and ``p`` matrices in the given representation's basis."""
    f = dft_matrix(grid)
    x = np.diag(grid.positions).astype(complex)
    p = np.diag(grid.momenta).astype(complex)
    if rep is Rep.POSITION:
        return x, f.conj().T @ p @ f
    return f @ x @ f.conj().T, p


def _mode_matrix(xm, pm, a: int, b: int) -> np.ndarray:
    return np.linalg.matrix_power(xm, a) @ np.linalg.matrix_power(pm, b)


def operator_matrix(expr: alg.OperatorExpr, grids: tuple[GridSpec, ...],
                    reps: tuple[Rep, ...]) -> np.ndarray:
    """Dense image of ``expr`` on (modes) x qubit1 x qubit2."""
    dim = int(np.prod([g.n for g in grids])) * 4
    if dim > MAX_DIM:
        raise OracleDimensionError(f"dense dimension {dim} exceeds cap {MAX_DIM}")
    if len(grids) == 1 and expr.uses_mode(2):
        raise ValueError("expression uses mode 2 but the state has a single mode")
    canon = [canonical_matrices(g, r) for g, r in zip(grids, reps)]
    out = np.zeros((dim, dim), dtype=complex)
    for mono, coef in expr.items():
        blocks = [_mode_matrix(*canon[0], mono.x1, mono.p1)]
        if len(grids) == 2:
            blocks.append(_mode_matrix(*canon[1], mono.x2, mono.p2))
        blocks += [PAULI_MATRICES[mono.s1], PAULI_MATRICES[mono.s2]]
        out += complex(coef) * reduce(np.kron, blocks)
    return out


def hamiltonian_matrix(h: HamiltonianSpec, grids, reps) -> np.ndarray:
    h.validate(len(grids))
    m = operator_matrix(h.operator(), tuple(grids), tuple(reps))
    defect = np.max(np.abs(m - m.conj().T))
    if defect > HERMITIAN_TOL:
        raise RuntimeError(f"assembled Hamiltonian is not Hermitian (defect {defect:.3e})")
    return m


def expm_hermitian(m: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i M t)`` for Hermitian ``M``."""
    m = 0.5 * (m + m.conj().T)
    evals, evecs = np.linalg.eigh(m)
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def dense_oracle_unitary(h: HamiltonianSpec, grids, reps, t: float) -> np.ndarray:
    return expm_hermitian(hamiltonian_matrix(h, grids, reps), t)


class DenseEvolver:
    """Caches the eigendecomposition so many times cost one diagonalization."""

    def __init__(self, h: HamiltonianSpec, grids, reps):
        self.grids = tuple(grids)
        self.reps = tuple(reps)
        m = hamiltonian_matrix(h, self.grids, self.reps)
        self.evals, self.evecs = np.linalg.eigh(0.5 * (m + m.conj().T))

    def unitary(self, t: float) -> np.ndarray:
        return (self.evecs * np.exp(-1j * t * self.evals)) @ self.evecs.conj().T

    def evolve(self, s: HybridState, t: float) -> HybridState:
        if s.grids != self.grids or s.reps != self.reps:
            raise ValueError("state grids/representations differ from the oracle basis")
        c = self.evecs.conj().T @ s.amplitudes.reshape(-1)
        out = self.evecs @ (np.exp(-1j * t * self.evals) * c)
        return s.replace(out.reshape(s.shape))


def oracle_evolve(s: HybridState, h: HamiltonianSpec, t: float) -> HybridState:
    u = dense_oracle_unitary(h, s.grids, s.reps, t)
    return s.replace((u @ s.amplitudes.reshape(-1)).reshape(s.shape))
