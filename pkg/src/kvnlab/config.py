"""Flat ``key = value`` scenario configuration.

Format::

    # comment
    scenario = free_particle
    grid.n1 = 64
    init.p0 = 8dp        # multiples of the lattice spacing are allowed
    init.qubit1 = plus   # or "0.6, 0.8j"

Every key must be one of :data:`SCHEMA`; anything else is rejected with the
line it appeared on. Values for ``init.x0`` / ``init.sigma`` may carry a ``dx``
suffix and ``init.p0`` / ``init.sigma_p`` a ``dp`` suffix, resolved against
the scenario's grid after parsing.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .state import NAMED_QUBITS

SCENARIOS = (
    "free_particle",
    "harmonic",
    "no_entanglement",
    "entangling",
    "conservation",
    "static_compare",
)


class ConfigError(ValueError):
    """Malformed configuration text; the message names the line and key."""


def _floats(text: str) -> tuple[float, ...]:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    return tuple(float(s) for s in items)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def parse_qubit(text: str) -> np.ndarray:
    """A named qubit (``zero``, ``one``, ``plus``, ``minus``, ``plus_i``) or two complex numbers."""
    key = text.strip().lower()
    if key in NAMED_QUBITS:
        return NAMED_QUBITS[key].copy()
    parts = [p.strip().replace(" ", "") for p in key.split(",")]
    if len(parts) != 2:
        raise ValueError(f"qubit must be a name or two complex amplitudes, got {text!r}")
    v = np.array([complex(p) for p in parts])
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"qubit amplitudes have norm {nrm:.12f}, expected 1")
    return v


_SPACING = re.compile(r"^\s*([-+0-9.eE]*)\s*(dx|dp)\s*$")


@dataclass(frozen=True)
class LatticeValue:
    """A real number, optionally a multiple of ``dx`` or ``dp``."""

    value: float
    unit: str | None = None

    @classmethod
    def parse(cls, text: str) -> "LatticeValue":
        m = _SPACING.match(text)
        if m:
            coef = m.group(1)
            coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            return cls(coef, m.group(2))
        return cls(float(text))

    def resolve(self, dx: float, dp: float) -> float:
        if self.unit is None:
            return self.value
        return self.value * (dx if self.unit == "dx" else dp)

    def __str__(self):
        return f"{self.value!r}{self.unit or ''}"


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    doc: str


SCHEMA: dict[str, Key] = {
    "scenario": Key(str, None, "one of " + ", ".join(SCENARIOS)),
    "grid.n1": Key(_pos_int, 64, "points on mode 1 (power of two)"),
    "grid.n2": Key(_pos_int, 64, "points on mode 2 (power of two)"),
    "grid.length": Key(float, 20.0, "period L of both modes"),
    "grid.length2": Key(float, None, "period of mode 2 (defaults to grid.length)"),
    "phys.m": Key(float, 1.0, "mass"),
    "phys.k": Key(float, 1.0, "harmonic constant of k x1 x2"),
    "phys.lam": Key(float, 1.0, "coupling of lam x1 (sz1 + sz2)"),
    "phys.alpha": Key(float, 1.0, "alpha of alpha (x1 p2 + p1 x2)"),
    "phys.lam1": Key(float, 1.0, "coupling of lam1 sx1 x1"),
    "phys.lam2": Key(float, 1.0, "coupling of lam2 sz2 p2"),
    "phys.vprime": Key(_floats, (), "polynomial coefficients of V'(x1), lowest first"),
    "phys.potential": Key(_floats, (0.0, 0.0, 0.5), "quantum mediator V(x) coefficients"),
    "init.x0": Key(LatticeValue.parse, LatticeValue(0.0), "initial position (on the x1 lattice)"),
    "init.p0": Key(LatticeValue.parse, LatticeValue(0.0), "initial momentum (on the p2 lattice)"),
    "init.profile": Key(str, "delta", "delta or gaussian"),
    "init.sigma": Key(LatticeValue.parse, LatticeValue(1.0), "Gaussian width in x1"),
    "init.sigma_p": Key(LatticeValue.parse, None, "Gaussian width in p2 (delta when unset)"),
    "init.qubit1": Key(parse_qubit, NAMED_QUBITS["plus"], "qubit 1 state"),
    "init.qubit2": Key(parse_qubit, NAMED_QUBITS["plus"], "qubit 2 state"),
    "time.t_max": Key(float, 1.0, "last sample time"),
    "time.samples": Key(_pos_int, 11, "number of sample times including t = 0"),
    "time.dts": Key(_floats, (1e-3, 5e-4, 2.5e-4), "step sizes for rate measurements"),
    "trotter.steps": Key(_pos_int, 512, "Strang steps over [0, t_max]"),
    "tol.exact": Key(float, 1e-9, "exact-arithmetic checks"),
    "tol.negativity": Key(float, 1e-10, "ceiling for 'no entanglement'"),
    "tol.entangle": Key(float, 0.01, "floor for 'entangled'"),
    "tol.fidelity": Key(float, 1e-5, "1 - F ceiling against the dense oracle"),
    "tol.drift": Key(float, 1e-9, "ceiling for conserved quantities"),
    "tol.backreaction": Key(float, 0.01, "floor for sigma_z drift under the entangler"),
    "tol.rate": Key(float, 0.01, "relative error of first-order rates"),
    "tol.norm": Key(float, 1e-10, "norm preservation"),
    "sweep.draws": Key(_pos_int, 20, "randomized draws"),
    "sweep.seed": Key(int, 42, "seed for randomized draws"),
    "out.dir": Key(str, None, "output directory"),
    "out.plot": Key(_bool, False, "write plot.svg"),
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "free_particle": (),
    "harmonic": ("phys.k",),
    "no_entanglement": ("phys.lam",),
    "entangling": ("phys.alpha", "phys.lam1", "phys.lam2"),
    "conservation": ("phys.lam", "phys.lam1"),
    "static_compare": ("phys.lam",),
}


def _attr(key: str) -> str:
    return key.replace(".", "_")


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed configuration; field names are the keys with dots replaced by underscores."""

    scenario: str
    grid_n1: int = 64
    grid_n2: int = 64
    grid_length: float = 20.0
    grid_length2: float | None = None
    phys_m: float = 1.0
    phys_k: float = 1.0
    phys_lam: float = 1.0
    phys_alpha: float = 1.0
    phys_lam1: float = 1.0
    phys_lam2: float = 1.0
    phys_vprime: tuple[float, ...] = ()
    phys_potential: tuple[float, ...] = (0.0, 0.0, 0.5)
    init_x0: LatticeValue = LatticeValue(0.0)
    init_p0: LatticeValue = LatticeValue(0.0)
    init_profile: str = "delta"
    init_sigma: LatticeValue = LatticeValue(1.0)
    init_sigma_p: LatticeValue | None = None
    init_qubit1: np.ndarray = field(default_factory=lambda: NAMED_QUBITS["plus"].copy())
    init_qubit2: np.ndarray = field(default_factory=lambda: NAMED_QUBITS["plus"].copy())
    time_t_max: float = 1.0
    time_samples: int = 11
    time_dts: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4)
    trotter_steps: int = 512
    tol_exact: float = 1e-9
    tol_negativity: float = 1e-10
    tol_entangle: float = 0.01
    tol_fidelity: float = 1e-5
    tol_drift: float = 1e-9
    tol_backreaction: float = 0.01
    tol_rate: float = 0.01
    tol_norm: float = 1e-10
    sweep_draws: int = 20
    sweep_seed: int = 42
    out_dir: str | None = None
    out_plot: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.init_profile not in ("delta", "gaussian"):
            raise ConfigError(f"init.profile must be delta or gaussian, got {self.init_profile!r}")
        if not self.time_t_max >= 0 or not math.isfinite(self.time_t_max):
            raise ConfigError("time.t_max must be finite and >= 0")
        if self.time_t_max == 0 and self.time_samples != 1:
            raise ConfigError("time.t_max = 0 needs time.samples = 1")
        if any(not dt > 0 for dt in self.time_dts):
            raise ConfigError("time.dts must be positive")

    @property
    def length2(self) -> float:
        return self.grid_length if self.grid_length2 is None else self.grid_length2

    def times(self) -> np.ndarray:
        """Sample times from 0 to ``t_max`` inclusive, strictly increasing."""
        if self.time_samples == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.time_t_max, self.time_samples)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def echo(self) -> dict[str, Any]:
        """JSON-friendly copy of every field."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = [[c.real, c.imag] for c in v.tolist()]
            elif isinstance(v, LatticeValue):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


def parse_config(text: str) -> ScenarioConfig:
    """Parse configuration text; raises :class:`ConfigError` with the offending line."""
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: key {key!r} already set on line {lines[key]}")
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        try:
            values[key] = SCHEMA[key].parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = lineno
    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario'")
    scenario = values["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"line {lines['scenario']}: unknown scenario {scenario!r}")
    missing = [k for k in REQUIRED[scenario] if k not in values]
    if missing:
        raise ConfigError(f"scenario {scenario!r} requires {', '.join(missing)}")
    try:
        return ScenarioConfig(**{_attr(k): v for k, v in values.items()})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def schema_doc() -> str:
    """One line per key: name, default, description."""
    rows = []
    for key, spec in SCHEMA.items():
        default = "(required)" if key == "scenario" else spec.default
        if isinstance(default, np.ndarray):
            default = "plus"
        rows.append(f"{key:<16} {str(default):<22} {spec.doc}")
    return "\n".join(rows)
