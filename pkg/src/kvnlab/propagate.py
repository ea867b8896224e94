"""Time evolution by exact pointwise factors.

Every factor is applied in the representation where it is diagonal (or, for
the sigma_x coupling, a pointwise 2x2 rotation), so single factors are exact
and unitary to rounding. Non-commuting Hamiltonians are composed with
symmetric Strang splitting. For the Koopman-coupled Hamiltonian
``p1 p2 / m + lam x1 S`` with ``S = sz1 + sz2`` the propagator factorizes
exactly because ``[p1 p2, x1 S] = -i p2 S`` is central:

    exp(-i H t) = exp(-i p1 p2 t / m) exp(-i lam x1 S t) exp(-i lam t^2 p2 S / 2m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import Factor, HamiltonianSpec, sigma_z_sum
from .state import GridSpec, HybridState, Rep, LATTICE_TOL, transform_axis

THIRD_FACTOR_EXPONENTS = ("zassenhaus", "linear")


class _Work:
    """Mutable amplitude buffer that tracks per-mode representations."""

    def __init__(self, s: HybridState):
        self.amps = np.array(s.amplitudes)
        self.reps = list(s.reps)
        self.grids = s.grids

    def to(self, mode: int, rep: Rep | None):
        if rep is None or self.reps[mode] is rep:
            return
        self.amps = transform_axis(self.amps, mode, self.grids[mode], self.reps[mode], rep)
        self.reps[mode] = rep

    def apply(self, factor: Factor, t: float):
        for mode, rep in enumerate(factor.required_reps(len(self.grids))):
            self.to(mode, rep)
        self.amps = factor.apply(self.amps, self.grids, t)

    def finish(self, reps) -> HybridState:
        for mode, rep in enumerate(reps):
            self.to(mode, rep)
        return HybridState(self.amps, tuple(reps), self.grids)


def apply_factor(s: HybridState, factor: Factor, t: float) -> HybridState:
    """``exp(-i H_factor t)`` applied exactly; the result keeps ``s``'s tags."""
    factor.validate(s.n_modes)
    if len(factor.pieces()) != 1:
        raise ValueError(f"{type(factor).__name__} has no single diagonal representation; "
                         "use strang_evolve")
    w = _Work(s)
    w.apply(factor, t)
    return w.finish(s.reps)


def strang_evolve(s: HybridState, h: HamiltonianSpec, t: float, steps: int) -> HybridState:
    """Second-order symmetric splitting over ``steps`` equal sub-intervals.

    Within a step the pieces are applied as A1/2 ... A(n-1)/2 An A(n-1)/2 ... A1/2.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h.validate(s.n_modes)
    pieces = h.pieces()
    dt = t / steps
    w = _Work(s)
    if len(pieces) == 1:
        w.apply(pieces[0], t)
        return w.finish(s.reps)
    head, last = pieces[:-1], pieces[-1]
    for _ in range(steps):
        for p in head:
            w.apply(p, dt / 2)
        w.apply(last, dt)
        for p in reversed(head):
            w.apply(p, dt / 2)
    return w.finish(s.reps)


def factorized_propagator(s: HybridState, m: float, lam: float, t: float,
                          third: str = "zassenhaus") -> HybridState:
    """Exact evolution under ``p1 p2 / m + lam x1 (sz1 + sz2)`` as three factors.

    ``third`` selects the exponent of the p2-qubit factor: ``"zassenhaus"``
    uses ``lam t^2 / 2m`` (the exact value), ``"linear"`` uses ``lam t / m``
    and exists only so the two can be compared against the dense oracle.
    """
    if s.n_modes != 2:
        raise ValueError("factorized propagator needs two continuous modes")
    if third not in THIRD_FACTOR_EXPONENTS:
        raise ValueError(f"third must be one of {THIRD_FACTOR_EXPONENTS}")
    g1, g2 = s.grids
    zsum = sigma_z_sum()[None, None, :, :]
    w = _Work(s)

    w.to(1, Rep.MOMENTUM)
    p2 = g2.momenta[None, :, None, None]
    third_coef = lam * t * t / (2 * m) if third == "zassenhaus" else lam * t / m
    w.amps = w.amps * np.exp(-1j * third_coef * p2 * zsum)

    w.to(0, Rep.POSITION)
    x1 = g1.positions[:, None, None, None]
    w.amps = w.amps * np.exp(-1j * lam * t * x1 * zsum)

    w.to(0, Rep.MOMENTUM)
    p1 = g1.momenta[:, None, None, None]
    w.amps = w.amps * np.exp(-1j * t * p1 * p2 / m)
    return w.finish(s.reps)


@dataclass(frozen=True)
class BoostParams:
    a: float = 0.0
    v: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        if not all(np.isfinite((self.a, self.v, self.m))):
            raise ValueError("boost parameters must be finite")


def _lattice_steps(value: float, spacing: float, what: str) -> int:
    k = value / spacing
    j = int(round(k))
    if abs(k - j) > LATTICE_TOL:
        raise ValueError(f"{what} {value!r} is not a multiple of the lattice spacing {spacing!r}")
    return j


def galilean_boost(s: HybridState, b: BoostParams) -> HybridState:
    """Shift ``<x1>`` by ``a`` and ``<p2>`` by ``-m v``.

    The translation is generated by p1 and the boost by x2, which commute, so
    both act as exact lattice permutations in any order.
    """
    if s.n_modes != 2:
        raise ValueError("Galilean boost acts on the two-mode Koopman encoding")
    g1, g2 = s.grids
    j = _lattice_steps(b.a, g1.dx, "displacement")
    k = _lattice_steps(b.m * b.v, g2.dp, "boost")
    w = _Work(s)
    w.to(0, Rep.POSITION)
    w.amps = np.roll(w.amps, j, axis=0)
    w.to(1, Rep.MOMENTUM)
    # momentum axis is in FFT order, which is cyclic in the lattice index
    w.amps = np.roll(w.amps, -k, axis=1)
    return w.finish(s.reps)


def _translate(psi: np.ndarray, grid: GridSpec, a: float, axis: int = 0) -> np.ndarray:
    """``exp(i a p)`` on position amplitudes: ``psi(x) -> psi(x + a)``."""
    return np.roll(psi, -_lattice_steps(a, grid.dx, "displacement"), axis=axis)


def _kick(psi: np.ndarray, grid: GridSpec, q: float, axis: int = 0) -> np.ndarray:
    """``exp(-i q x)`` on position amplitudes."""
    _lattice_steps(q, grid.dp, "boost")
    shape = [1] * psi.ndim
    shape[axis] = grid.n
    return psi * np.exp(-1j * q * grid.positions).reshape(shape)


def weyl_phase_defect(a: float, m: float, v: float, grid: GridSpec,
                      pair: str = "quantum", seed: int = 0) -> float:
    """Global phase ``theta`` with ``B U psi = exp(i theta) U B psi``.

    ``U = exp(i a p)`` and ``B = exp(-i m v x)``. For the ``"quantum"`` pair
    both act on one mode and ``theta = a m v (mod 2 pi)``. For the
    ``"koopman"`` pair U acts through p1 and B through x2 on two copies of
    ``grid``, and the operators commute (``theta = 0``).
    """
    rng = np.random.default_rng(seed)
    q = m * v
    if pair == "quantum":
        psi = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
        ub = _translate(_kick(psi, grid, q), grid, a)
        bu = _kick(_translate(psi, grid, a), grid, q)
    elif pair == "koopman":
        psi = rng.normal(size=(grid.n, grid.n)) + 1j * rng.normal(size=(grid.n, grid.n))
        ub = _translate(_kick(psi, grid, q, axis=1), grid, a, axis=0)
        bu = _kick(_translate(psi, grid, a, axis=0), grid, q, axis=1)
    else:
        raise ValueError(f"pair must be 'quantum' or 'koopman', got {pair!r}")
    overlap = np.vdot(ub, bu) / np.vdot(ub, ub)
    if abs(abs(overlap) - 1.0) > 1e-9:
        raise RuntimeError("operators differ by more than a global phase")
    theta = float(np.angle(overlap))
    return 0.0 if abs(theta) < 1e-15 else theta
