"""Discretized Hilbert space for the hybrid system: one or two continuous
modes on periodic grids, tensored with two qubits.

Amplitude tensors are laid out modes first, then qubit 1, then qubit 2, so a
two-mode state has shape ``(n1, n2, 2, 2)`` and a single-mode state has shape
``(n, 2, 2)``. Qubit basis index 0 is the ``+1`` eigenvector of sigma_z.

Units are hbar = 1. Momentum lattices are stored in FFT bin order
(``0, 1, ..., n/2 - 1, -n/2, ..., -1`` times ``2 pi / L``) so that phases that
are diagonal in momentum index directly onto transformed amplitudes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

LATTICE_TOL = 1e-9
NORM_TOL = 1e-10


class Rep(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"

    def other(self) -> "Rep":
        return Rep.MOMENTUM if self is Rep.POSITION else Rep.POSITION


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic lattice for a single continuous mode."""

    n: int
    length: float

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 4 or n & (n - 1):
            raise ValueError(f"grid point count must be a power of two >= 4, got {n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"grid length must be positive, got {self.length!r}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def positions(self) -> np.ndarray:
        return _readonly(-0.5 * self.length + self.dx * np.arange(self.n))

    @cached_property
    def momenta(self) -> np.ndarray:
        return _readonly(2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx))

    @cached_property
    def _fourier_phase(self) -> np.ndarray:
        # e^{-i p_k x_0}; absorbs the lattice offset x_0 = -L/2 into the FFT
        return _readonly(np.exp(-1j * self.momenta * self.positions[0]))

    def values(self, rep: Rep) -> np.ndarray:
        return self.positions if rep is Rep.POSITION else self.momenta

    def index_of(self, value: float, rep: Rep) -> int:
        """Lattice index of ``value`` in the given representation.

        Raises ValueError when ``value`` is not a lattice point.
        """
        vals = self.values(rep)
        idx = int(np.argmin(np.abs(vals - value)))
        if abs(vals[idx] - value) > LATTICE_TOL:
            step = self.dx if rep is Rep.POSITION else self.dp
            raise ValueError(
                f"{value!r} is not on the {rep.value} lattice (spacing {step!r})"
            )
        return idx


def make_grid(n: int, length: float) -> GridSpec:
    if int(n) != n:
        raise ValueError(f"grid point count must be an integer, got {n!r}")
    return GridSpec(int(n), float(length))


# Standard single-qubit vectors.
ZERO = _readonly(np.array([1.0, 0.0], dtype=complex))
ONE = _readonly(np.array([0.0, 1.0], dtype=complex))
PLUS = _readonly(np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0))
MINUS = _readonly(np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0))
PLUS_I = _readonly(np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0))

NAMED_QUBITS = {"0": ZERO, "1": ONE, "+": PLUS, "-": MINUS, "+i": PLUS_I,
                "zero": ZERO, "one": ONE, "plus": PLUS, "minus": MINUS, "plus_i": PLUS_I}


@dataclass(frozen=True)
class InitialCondition:
    """Initial data for :func:`make_state`.

    ``x0`` must lie on the mode-1 position lattice and ``p0`` on the mode-2
    momentum lattice. ``profile`` shapes mode 1 (``"delta"`` or ``"gaussian"``
    with width ``sigma``, amplitude ``exp(-(x - x0)^2 / (2 sigma^2))``);
    ``sigma_p`` optionally replaces the mode-2 momentum delta with a Gaussian of
    that width, which keeps the conjugate hidden variable localized.
    """

    x0: float = 0.0
    p0: float = 0.0
    profile: str = "delta"
    sigma: float | None = None
    sigma_p: float | None = None
    qubit1: np.ndarray = field(default_factory=lambda: PLUS)
    qubit2: np.ndarray = field(default_factory=lambda: PLUS)

    def __post_init__(self):
        if self.profile not in ("delta", "gaussian"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.profile == "gaussian" and self.sigma is None:
            raise ValueError("gaussian profile requires a width")
        for name in ("qubit1", "qubit2"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (2,):
                raise ValueError(f"{name} must have two components")
            if abs(np.vdot(v, v).real - 1.0) > 1e-12:
                raise ValueError(f"{name} is not normalized")
            object.__setattr__(self, name, _readonly(v.copy()))


@dataclass(frozen=True)
class HybridState:
    amplitudes: np.ndarray
    reps: tuple[Rep, ...]
    grids: tuple[GridSpec, ...]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if len(self.reps) != len(self.grids) or len(self.grids) not in (1, 2):
            raise ValueError("need one representation tag and one grid per mode (1 or 2 modes)")
        expected = tuple(g.n for g in self.grids) + (2, 2)
        if amps.shape != expected:
            raise ValueError(f"amplitude shape {amps.shape} does not match grids {expected}")
        sq = np.vdot(amps, amps).real
        if abs(sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {sq:.12g})")
        object.__setattr__(self, "amplitudes", _readonly(amps))
        object.__setattr__(self, "reps", tuple(self.reps))
        object.__setattr__(self, "grids", tuple(self.grids))

    @property
    def n_modes(self) -> int:
        return len(self.grids)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.amplitudes.shape

    def replace(self, amplitudes: np.ndarray, reps: tuple[Rep, ...] | None = None) -> "HybridState":
        return HybridState(amplitudes, self.reps if reps is None else reps, self.grids)


def _mode1_profile(grid: GridSpec, ic: InitialCondition) -> np.ndarray:
    i0 = grid.index_of(ic.x0, Rep.POSITION)
    if ic.profile == "delta":
        amp = np.zeros(grid.n, dtype=complex)
        amp[i0] = 1.0
        return amp
    sigma = ic.sigma
    if not (2 * grid.dx < sigma < grid.length / 8):
        raise ValueError(
            f"gaussian width {sigma!r} outside ({2 * grid.dx!r}, {grid.length / 8!r})"
        )
    amp = np.exp(-((grid.positions - ic.x0) ** 2) / (2 * sigma**2)).astype(complex)
    return amp / np.linalg.norm(amp)


def _mode2_profile(grid: GridSpec, ic: InitialCondition) -> np.ndarray:
    k0 = grid.index_of(ic.p0, Rep.MOMENTUM)
    if ic.sigma_p is None:
        amp = np.zeros(grid.n, dtype=complex)
        amp[k0] = 1.0
        return amp
    span = grid.n * grid.dp
    if not (2 * grid.dp < ic.sigma_p < span / 8):
        raise ValueError(
            f"momentum width {ic.sigma_p!r} outside ({2 * grid.dp!r}, {span / 8!r})"
        )
    amp = np.exp(-((grid.momenta - ic.p0) ** 2) / (2 * ic.sigma_p**2)).astype(complex)
    return amp / np.linalg.norm(amp)


def make_state(g1: GridSpec, g2: GridSpec | None, ic: InitialCondition) -> HybridState:
    """Product initial state: mode 1 in position, mode 2 (if any) in momentum.

    With a single grid the state describes one ordinary quantum mediator in the
    position representation; ``p0`` then acts as a momentum kick ``e^{i p0 x}``.
    """
    qubits = np.multiply.outer(ic.qubit1, ic.qubit2)
    psi1 = _mode1_profile(g1, ic)
    if g2 is None:
        psi1 = psi1 * np.exp(1j * ic.p0 * g1.positions)
        psi1 /= np.linalg.norm(psi1)
        return HybridState(np.multiply.outer(psi1, qubits), (Rep.POSITION,), (g1,))
    psi2 = _mode2_profile(g2, ic)
    amps = np.multiply.outer(np.multiply.outer(psi1, psi2), qubits)
    return HybridState(amps, (Rep.POSITION, Rep.MOMENTUM), (g1, g2))


def transform_axis(amps: np.ndarray, axis: int, grid: GridSpec, source: Rep, target: Rep) -> np.ndarray:
    """Unitary change of basis along one axis (kernel ``e^{-i p x} / sqrt(n)``)."""
    if source is target:
        return amps
    shape = [1] * amps.ndim
    shape[axis] = grid.n
    phase = grid._fourier_phase.reshape(shape)
    if target is Rep.MOMENTUM:
        return phase * np.fft.fft(amps, axis=axis, norm="ortho")
    return np.fft.ifft(np.conj(phase) * amps, axis=axis, norm="ortho")


def to_representation(s: HybridState, mode: int, target: Rep) -> HybridState:
    if not 0 <= mode < s.n_modes:
        raise IndexError(f"mode {mode} out of range for a {s.n_modes}-mode state")
    if s.reps[mode] is target:
        return s
    amps = transform_axis(s.amplitudes, mode, s.grids[mode], s.reps[mode], target)
    reps = list(s.reps)
    reps[mode] = target
    return s.replace(amps, tuple(reps))


def align(s: HybridState, reps: tuple[Rep, ...]) -> HybridState:
    for mode, rep in enumerate(reps):
        s = to_representation(s, mode, rep)
    return s


def norm(s: HybridState) -> float:
    return float(np.linalg.norm(s.amplitudes))


def inner_product(a: HybridState, b: HybridState) -> complex:
    """``<a|b>``, transforming ``b`` into ``a``'s representation first."""
    if a.shape != b.shape or a.grids != b.grids:
        raise ValueError(f"incompatible states: shapes {a.shape} and {b.shape}")
    b = align(b, a.reps)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: HybridState, b: HybridState) -> float:
    return abs(inner_product(a, b)) ** 2


def random_state(grids: tuple[GridSpec, ...], rng: np.random.Generator,
                 reps: tuple[Rep, ...] | None = None) -> HybridState:
    """Normalized state with i.i.d. complex Gaussian amplitudes."""
    shape = tuple(g.n for g in grids) + (2, 2)
    amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    amps /= np.linalg.norm(amps)
    if reps is None:
        reps = (Rep.POSITION, Rep.MOMENTUM)[: len(grids)]
    return HybridState(amps, reps, grids)
