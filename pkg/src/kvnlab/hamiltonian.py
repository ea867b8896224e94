"""Hamiltonian terms for split-step evolution.

Each factor knows three things: the representation per mode in which it acts
pointwise, how to apply ``exp(-i H t)`` there exactly, and its symbolic form as
an :class:`~kvnlab.algebra.OperatorExpr` (used by the dense oracle and the
conservation checks, so the two code paths share no numerics).

``EntanglerAlpha`` is the one term that is not pointwise in any product
representation; it splits into two pointwise pieces that only
:func:`~kvnlab.propagate.strang_evolve` composes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from . import algebra as alg
from .state import GridSpec, Rep

POS, MOM = Rep.POSITION, Rep.MOMENTUM
_Z = np.array([1.0, -1.0])  # sigma_z eigenvalues for qubit basis 0, 1
MAX_POLY_DEGREE = 4


def _exact(c):
    # keep rationals exact in the symbolic form
    return Fraction(c) if isinstance(c, Rational) else float(c)


def _poly(coeffs, var: alg.OperatorExpr) -> alg.OperatorExpr:
    out = alg.OperatorExpr()
    for j, c in enumerate(coeffs):
        if c:
            out = out + _exact(c) * var**j
    return out


def _axis(values: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = values.size
    return values.reshape(shape)


def sigma_z_sum(qubits=(1, 2)) -> np.ndarray:
    """Eigenvalues of the selected sigma_z sum on the (q1, q2) block."""
    z1 = _Z if 1 in qubits else np.zeros(2)
    z2 = _Z if 2 in qubits else np.zeros(2)
    return z1[:, None] + z2[None, :]


class Factor:
    """Base class for a pointwise Hamiltonian term.

    ``reps`` lists the representation each mode must be in (``None`` when the
    term does not touch that mode); ``modes`` is the number of continuous modes
    the term is defined for.
    """

    reps: tuple[Rep | None, ...] = ()
    modes: tuple[int, ...] = (1, 2)

    def pieces(self) -> tuple["Factor", ...]:
        return (self,)

    def operator(self) -> alg.OperatorExpr:
        raise NotImplementedError

    def eigenvalues(self, grids: tuple[GridSpec, ...]) -> np.ndarray:
        raise NotImplementedError

    def validate(self, n_modes: int) -> None:
        if n_modes not in self.modes:
            raise ValueError(f"{type(self).__name__} is not defined for a {n_modes}-mode state")

    def required_reps(self, n_modes: int) -> tuple[Rep | None, ...]:
        r = tuple(self.reps) + (None,) * n_modes
        return r[:n_modes]

    def apply(self, amps: np.ndarray, grids: tuple[GridSpec, ...], t: float) -> np.ndarray:
        """``exp(-i H t)`` on amplitudes already in :meth:`required_reps`."""
        return amps * np.exp(-1j * t * self.eigenvalues(grids))

    def _mode_values(self, grids, mode: int) -> np.ndarray:
        ndim = len(grids) + 2
        return _axis(grids[mode].values(self.reps[mode]), mode, ndim)

    def _qubit_block(self, grids, block: np.ndarray) -> np.ndarray:
        return block.reshape((1,) * len(grids) + (2, 2))


@dataclass(frozen=True)
class FreeKvN(Factor):
    """``p1 p2 / m``: inertial motion of the encoded classical particle."""

    m: float = 1.0
    reps = (MOM, MOM)
    modes = (2,)

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")

    def operator(self):
        return alg.P1 * alg.P2 / _exact(self.m)

    def eigenvalues(self, grids):
        return self._mode_values(grids, 0) * self._mode_values(grids, 1) / self.m


@dataclass(frozen=True)
class HarmonicKvN(Factor):
    """``k x1 x2``: harmonic force on the encoded particle."""

    k: float = 1.0
    reps = (POS, POS)
    modes = (2,)

    def operator(self):
        return _exact(self.k) * alg.X1 * alg.X2

    def eigenvalues(self, grids):
        return self.k * self._mode_values(grids, 0) * self._mode_values(grids, 1)


@dataclass(frozen=True)
class PotentialKvN(Factor):
    """``V'(x1) x2`` with ``V'(x) = sum_j coeffs[j] x^j``."""

    coeffs: tuple[float, ...] = ()
    reps = (POS, POS)
    modes = (2,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) > MAX_POLY_DEGREE + 1:
            raise ValueError(f"polynomial degree above {MAX_POLY_DEGREE}")

    def operator(self):
        return _poly(self.coeffs, alg.X1) * alg.X2

    def eigenvalues(self, grids):
        x1 = self._mode_values(grids, 0)
        return np.polynomial.polynomial.polyval(x1, self.coeffs) * self._mode_values(grids, 1)


@dataclass(frozen=True)
class QubitCouplingZ(Factor):
    """``lam x1 (sigma_z on the listed qubits)``."""

    lam: float = 1.0
    qubits: tuple[int, ...] = (1, 2)
    reps = (POS,)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not set(self.qubits) <= {1, 2} or not self.qubits:
            raise ValueError(f"qubits must be drawn from (1, 2), got {self.qubits!r}")

    def operator(self):
        zsum = sum((alg.pauli(q, "Z") for q in self.qubits), alg.OperatorExpr())
        return _exact(self.lam) * alg.X1 * zsum

    def eigenvalues(self, grids):
        return self.lam * self._mode_values(grids, 0) * self._qubit_block(grids, sigma_z_sum(self.qubits))


@dataclass(frozen=True)
class _AlphaX1P2(Factor):
    alpha: float = 1.0
    reps = (POS, MOM)
    modes = (2,)

    def operator(self):
        return _exact(self.alpha) * alg.X1 * alg.P2

    def eigenvalues(self, grids):
        return self.alpha * self._mode_values(grids, 0) * self._mode_values(grids, 1)


@dataclass(frozen=True)
class _AlphaP1X2(Factor):
    alpha: float = 1.0
    reps = (MOM, POS)
    modes = (2,)

    def operator(self):
        return _exact(self.alpha) * alg.P1 * alg.X2

    def eigenvalues(self, grids):
        return self.alpha * self._mode_values(grids, 0) * self._mode_values(grids, 1)


@dataclass(frozen=True)
class EntanglerAlpha(Factor):
    """``alpha (x1 p2 + p1 x2)``; engages the hidden variables p1 and x2."""

    alpha: float = 1.0
    modes = (2,)

    def pieces(self):
        return (_AlphaX1P2(self.alpha), _AlphaP1X2(self.alpha))

    def operator(self):
        return sum((p.operator() for p in self.pieces()), alg.OperatorExpr())

    def apply(self, amps, grids, t):
        raise ValueError("EntanglerAlpha is not pointwise in any representation; use strang_evolve")


@dataclass(frozen=True)
class EntanglerX1(Factor):
    """``lam1 sigma_x^(1) x1``, applied as an exact 2x2 rotation at each x1."""

    lam1: float = 1.0
    reps = (POS,)

    def operator(self):
        return _exact(self.lam1) * alg.X1 * alg.SX1

    def apply(self, amps, grids, t):
        theta = self.lam1 * t * grids[0].positions
        theta = theta.reshape((-1,) + (1,) * (amps.ndim - 1 - 2) + (1,))
        c, s = np.cos(theta), np.sin(theta)
        a0, a1 = amps[..., 0, :], amps[..., 1, :]
        out = np.empty_like(amps)
        out[..., 0, :] = c * a0 - 1j * s * a1
        out[..., 1, :] = c * a1 - 1j * s * a0
        return out


@dataclass(frozen=True)
class EntanglerP2(Factor):
    """``lam2 sigma_z^(2) p2``."""

    lam2: float = 1.0
    reps = (None, MOM)
    modes = (2,)

    def operator(self):
        return _exact(self.lam2) * alg.P2 * alg.SZ2

    def eigenvalues(self, grids):
        return self.lam2 * self._mode_values(grids, 1) * self._qubit_block(grids, sigma_z_sum((2,)))


@dataclass(frozen=True)
class QuantumKinetic(Factor):
    """``p^2 / 2m`` for an ordinary single-mode quantum mediator."""

    m: float = 1.0
    reps = (MOM,)
    modes = (1,)

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")

    def operator(self):
        return alg.P1 * alg.P1 / (2 * _exact(self.m))

    def eigenvalues(self, grids):
        return self._mode_values(grids, 0) ** 2 / (2 * self.m)


@dataclass(frozen=True)
class QuantumPotential(Factor):
    """``V(x) = sum_j coeffs[j] x^j`` for a single-mode quantum mediator."""

    coeffs: tuple[float, ...] = ()
    reps = (POS,)
    modes = (1,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) > MAX_POLY_DEGREE + 1:
            raise ValueError(f"polynomial degree above {MAX_POLY_DEGREE}")

    def operator(self):
        return _poly(self.coeffs, alg.X1)

    def eigenvalues(self, grids):
        return np.polynomial.polynomial.polyval(self._mode_values(grids, 0), self.coeffs)


@dataclass(frozen=True)
class QuantumQubitCoupling(QubitCouplingZ):
    """``lam x (sigma_z^(1) + sigma_z^(2))`` on a single-mode quantum mediator."""

    modes = (1,)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Ordered list of terms; the order fixes the splitting sequence."""

    terms: tuple[Factor, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")

    def validate(self, n_modes: int) -> None:
        for term in self.terms:
            term.validate(n_modes)

    def pieces(self) -> tuple[Factor, ...]:
        return tuple(p for term in self.terms for p in term.pieces())

    def operator(self) -> alg.OperatorExpr:
        return sum((t.operator() for t in self.terms), alg.OperatorExpr())


def koopman_coupled(m: float, lam: float) -> HamiltonianSpec:
    """``p1 p2 / m + lam x1 (sz1 + sz2)``: classical mediator, local couplings."""
    return HamiltonianSpec((FreeKvN(m), QubitCouplingZ(lam)))


def entangling(m: float, alpha: float, lam1: float, lam2: float, lam: float = 0.0) -> HamiltonianSpec:
    """Free KvN particle plus the hidden-variable entangler.

    The optional ``lam`` adds the classical sigma_z coupling as well.
    """
    terms: list[Factor] = [FreeKvN(m)]
    if lam:
        terms.append(QubitCouplingZ(lam))
    if alpha:
        terms.append(EntanglerAlpha(alpha))
    if lam1:
        terms.append(EntanglerX1(lam1))
    if lam2:
        terms.append(EntanglerP2(lam2))
    return HamiltonianSpec(tuple(terms))


def quantum_mediator(m: float, potential: tuple[float, ...], lam: float) -> HamiltonianSpec:
    terms: list[Factor] = [QuantumKinetic(m), QuantumPotential(tuple(potential))]
    if lam:
        terms.append(QuantumQubitCoupling(lam))
    return HamiltonianSpec(tuple(terms))
