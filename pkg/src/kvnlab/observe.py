"""Observables, reduced qubit states and entanglement diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .hamiltonian import FreeKvN, HamiltonianSpec, QubitCouplingZ
from .oracle import PAULI_MATRICES
from .propagate import factorized_propagator, strang_evolve
from .state import HybridState, Rep, transform_axis

IMAG_TOL = 1e-9
DENSITY_TOL = 1e-10
MAX_OBS_POWER = 2


class UnsupportedObservable(ValueError):
    pass


def _to(amps, reps, s: HybridState, mode: int, rep: Rep):
    if reps[mode] is not rep:
        amps = transform_axis(amps, mode, s.grids[mode], reps[mode], rep)
        reps[mode] = rep
    return amps


def _multiply(amps, s: HybridState, mode: int, rep: Rep, power: int):
    shape = [1] * amps.ndim
    shape[mode] = s.grids[mode].n
    return amps * (s.grids[mode].values(rep) ** power).reshape(shape)


def apply_operator(s: HybridState, op: alg.OperatorExpr) -> np.ndarray:
    """Amplitudes of ``op |s>`` in ``s``'s own representations."""
    if s.n_modes == 1 and op.uses_mode(2):
        raise UnsupportedObservable("operator acts on mode 2 of a single-mode state")
    total = np.zeros_like(s.amplitudes)
    for mono, coef in op.items():
        amps = s.amplitudes
        if mono.s2 != "I":
            amps = amps @ PAULI_MATRICES[mono.s2].T
        if mono.s1 != "I":
            amps = PAULI_MATRICES[mono.s1] @ amps
        reps = list(s.reps)
        # rightmost factor acts first: p before x within a mode
        for mode, (xp, pp) in enumerate(((mono.x1, mono.p1), (mono.x2, mono.p2))[: s.n_modes]):
            if pp:
                amps = _to(amps, reps, s, mode, Rep.MOMENTUM)
                amps = _multiply(amps, s, mode, Rep.MOMENTUM, pp)
            if xp:
                amps = _to(amps, reps, s, mode, Rep.POSITION)
                amps = _multiply(amps, s, mode, Rep.POSITION, xp)
        for mode, rep in enumerate(s.reps):
            amps = _to(amps, reps, s, mode, rep)
        total = total + complex(coef) * amps
    return total


def expectation(s: HybridState, obs: alg.OperatorExpr) -> float:
    if obs.max_power() > MAX_OBS_POWER:
        raise UnsupportedObservable(f"powers above {MAX_OBS_POWER} are not supported")
    if not obs.is_hermitian():
        raise UnsupportedObservable(f"observable {obs} is not Hermitian")
    val = np.vdot(s.amplitudes, apply_operator(s, obs))
    if abs(val.imag) > IMAG_TOL:
        raise RuntimeError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def position_marginal(s: HybridState, mode: int = 0) -> np.ndarray:
    amps = s.amplitudes
    if s.reps[mode] is not Rep.POSITION:
        amps = transform_axis(amps, mode, s.grids[mode], s.reps[mode], Rep.POSITION)
    axes = tuple(i for i in range(amps.ndim) if i != mode)
    return np.sum(np.abs(amps) ** 2, axis=axes)


def position_variance(s: HybridState, mode: int = 0) -> float:
    """Variance of the position marginal measured around its circular mean.

    Lattice sites are unwrapped onto the window of length L centred on the
    circular mean, so a packet that has been carried across the torus seam
    keeps the variance it had before.
    """
    w = position_marginal(s, mode)
    n = w.size
    j = np.arange(n)
    centre = np.angle(np.sum(w * np.exp(2j * np.pi * j / n))) * n / (2 * np.pi)
    offsets = (j - centre + n / 2) % n - n / 2
    d = offsets * s.grids[mode].dx
    total = w.sum()
    mean = np.sum(w * d) / total
    return float(np.sum(w * d * d) / total - mean**2)


def _single_position(obs: alg.OperatorExpr) -> int | None:
    for mode, mono in ((0, alg.Monomial(x1=1)), (1, alg.Monomial(x2=1))):
        if len(obs) == 1 and obs.coefficient(mono) == 1:
            return mode
    return None


def variance(s: HybridState, obs: alg.OperatorExpr) -> float:
    """``<A^2> - <A>^2``; bare positions use :func:`position_variance`."""
    mode = _single_position(obs)
    if mode is not None and mode < s.n_modes:
        return position_variance(s, mode)
    mean = expectation(s, obs)
    sq = np.vdot(apply_operator(s, obs), apply_operator(s, obs)).real
    v = float(sq - mean**2)
    if v < -DENSITY_TOL:
        raise RuntimeError(f"negative variance {v:.3e}")
    return max(v, 0.0)


@dataclass(frozen=True)
class QubitPairDensity:
    """Two-qubit density matrix in the basis ``|q1 q2>`` = 00, 01, 10, 11."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("two-qubit density matrix must be 4x4")
        if abs(np.trace(rho) - 1.0) > DENSITY_TOL:
            raise ValueError(f"trace {np.trace(rho).real:.12f} differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        evals, evecs = np.linalg.eigh(rho)
        if evals.min() < -DENSITY_TOL:
            raise ValueError(f"density matrix has eigenvalue {evals.min():.3e}")
        if evals.min() < 0:
            evals = np.clip(evals, 0.0, None)
            evals /= evals.sum()
            rho = (evecs * evals) @ evecs.conj().T
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def partial_transpose(self) -> np.ndarray:
        """Transpose on qubit 2."""
        return self.rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def reduce_to_qubits(s: HybridState) -> QubitPairDensity:
    psi = s.amplitudes.reshape(-1, 4)
    return QubitPairDensity(psi.T @ psi.conj())


def negativity(rho: QubitPairDensity) -> float:
    """``(||rho^T2||_1 - 1) / 2``; zero exactly for separable two-qubit states."""
    evals = np.linalg.eigvalsh(rho.partial_transpose())
    return max(0.0, float((np.sum(np.abs(evals)) - 1.0) / 2.0))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits."""
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    evals = evals[evals > 1e-15]
    return max(0.0, float(-np.sum(evals * np.log2(evals))))


def entanglement_entropy(s: HybridState, cut: str) -> float:
    """Entropy of the reduced state on ``cut``: "qubit1", "qubit2" or "qubit-pair"."""
    psi = s.amplitudes.reshape(-1, 2, 2)
    if cut == "qubit1":
        rho = np.einsum("mab,mcb->ac", psi, psi.conj())
    elif cut == "qubit2":
        rho = np.einsum("mab,mac->bc", psi, psi.conj())
    elif cut == "qubit-pair":
        rho = reduce_to_qubits(s).rho
    else:
        raise ValueError(f"unknown cut {cut!r}")
    return von_neumann_entropy(rho)


def bloch_vector(s: HybridState, qubit: int) -> np.ndarray:
    return np.array([expectation(s, alg.pauli(qubit, p)) for p in "XYZ"])


@dataclass(frozen=True)
class ConservationAudit:
    quantity: alg.OperatorExpr
    times: tuple[float, ...]
    series: tuple[float, ...]

    @property
    def max_drift(self) -> float:
        return max(abs(v - self.series[0]) for v in self.series)


def _is_koopman_coupled(h: HamiltonianSpec) -> tuple[float, float] | None:
    terms = h.terms
    if (len(terms) == 2 and isinstance(terms[0], FreeKvN) and type(terms[1]) is QubitCouplingZ
            and set(terms[1].qubits) == {1, 2}):
        return terms[0].m, terms[1].lam
    return None


def evolution_series(h: HamiltonianSpec, s0: HybridState, t_grid: Sequence[float],
                     steps_per_unit: int = 256) -> list[HybridState]:
    """States at every time in ``t_grid`` (which must start at 0 and increase).

    The exact three-factor propagator is used when ``h`` is the Koopman-coupled
    Hamiltonian; otherwise Strang steps of width at most ``1/steps_per_unit``.
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid or t_grid[0] != 0.0 or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("time grid must start at 0 and increase strictly")
    exact = _is_koopman_coupled(h) if s0.n_modes == 2 else None
    out = [s0]
    s = s0
    for a, b in zip(t_grid, t_grid[1:]):
        if exact:
            s = factorized_propagator(s0, exact[0], exact[1], b)
        else:
            s = strang_evolve(s, h, b - a, max(1, math.ceil((b - a) * steps_per_unit)))
        out.append(s)
    return out


def conservation_drift(h: HamiltonianSpec, c: alg.OperatorExpr, s0: HybridState,
                       t_grid: Sequence[float], steps_per_unit: int = 256,
                       evolve: Callable[[HybridState, float], HybridState] | None = None
                       ) -> ConservationAudit:
    """Track ``<C>(t)`` along the evolution of ``s0`` under ``h``.

    ``evolve(s0, t)`` overrides the built-in propagation (e.g. with the dense
    oracle).
    """
    if evolve is None:
        states = evolution_series(h, s0, t_grid, steps_per_unit)
    else:
        states = [s0 if t == 0 else evolve(s0, t) for t in t_grid]
    series = tuple(expectation(s, c) for s in states)
    return ConservationAudit(c, tuple(float(t) for t in t_grid), series)
