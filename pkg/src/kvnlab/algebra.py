"""Exact operator algebra over polynomials in x1, p1, x2, p2 tensored with
Pauli operators on two qubits.

Every term is stored in the normal order ``x1^a p1^b x2^c p2^d (x) s1 (x) s2``
with ``[x_i, p_j] = i delta_ij`` (hbar = 1). Products are brought back into
normal order with

    p^b x^c = sum_k (-i)^k k! C(b, k) C(c, k) x^(c-k) p^(b-k),

so two expressions are equal exactly when their coefficient maps agree.

Coefficients built from ints and Fractions stay exact (Gaussian rationals);
floats or complex numbers switch that coefficient to floating point, where
magnitudes below :data:`ZERO_TOL` count as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from numbers import Complex, Rational
from typing import Iterable, Mapping, NamedTuple

ZERO_TOL = 1e-12
MAX_POWER = 8


class ExponentGuardError(ValueError):
    """A product produced a power above :data:`MAX_POWER`."""


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number ``re + i im`` with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def _lift(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, Rational):
            return GaussianRational(Fraction(other))
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            if not isinstance(other, Complex):
                return NotImplemented
            return complex(self) + complex(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, (Complex, GaussianRational)):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            if not isinstance(other, Complex):
                return NotImplemented
            return complex(self) * complex(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            if not isinstance(other, Complex):
                return NotImplemented
            return complex(self) / complex(other)
        den = o.re * o.re + o.im * o.im
        return self * GaussianRational(o.re / den, -o.im / den)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return isinstance(other, Complex) and complex(self) == complex(other)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        def frac(q):
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        if not self.im:
            return frac(self.re)
        if not self.re:
            return f"{frac(self.im)}i"
        return f"({frac(self.re)}{'+' if self.im > 0 else '-'}{frac(abs(self.im))}i)"

    __repr__ = __str__


I = GaussianRational(0, 1)
_NEG_I_POWERS = (GaussianRational(1), GaussianRational(0, -1),
                 GaussianRational(-1), GaussianRational(0, 1))


def _coerce(c):
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, bool):
        return GaussianRational(int(c))
    if isinstance(c, Rational):
        return GaussianRational(Fraction(c))
    if isinstance(c, Complex):
        return complex(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _is_zero(c) -> bool:
    if isinstance(c, GaussianRational):
        return not c
    return abs(c) < ZERO_TOL


def _conj(c):
    return c.conjugate()


# Single-qubit Pauli products: (a, b) -> (phase, c) with a b = phase * c.
_PAULI_TABLE: dict[tuple[str, str], tuple[GaussianRational, str]] = {}
for _p in "IXYZ":
    _PAULI_TABLE[("I", _p)] = (GaussianRational(1), _p)
    _PAULI_TABLE[(_p, "I")] = (GaussianRational(1), _p)
    _PAULI_TABLE[(_p, _p)] = (GaussianRational(1), "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PAULI_TABLE[(_a, _b)] = (I, _c)
    _PAULI_TABLE[(_b, _a)] = (-I, _c)


class Monomial(NamedTuple):
    """Normal-ordered ``x1^x1 p1^p1 x2^x2 p2^p2`` times Paulis ``s1``, ``s2``."""

    x1: int = 0
    p1: int = 0
    x2: int = 0
    p2: int = 0
    s1: str = "I"
    s2: str = "I"

    @property
    def powers(self) -> tuple[int, int, int, int]:
        return (self.x1, self.p1, self.x2, self.p2)

    def is_identity(self) -> bool:
        return self == IDENTITY_MONOMIAL

    def __str__(self):
        parts = []
        for name, k in zip(("x1", "p1", "x2", "p2"), self.powers):
            if k == 1:
                parts.append(name)
            elif k > 1:
                parts.append(f"{name}^{k}")
        if self.s1 != "I":
            parts.append(f"{self.s1}1")
        if self.s2 != "I":
            parts.append(f"{self.s2}2")
        return " ".join(parts) if parts else "1"


IDENTITY_MONOMIAL = Monomial()


def _check_guard(m: Monomial) -> Monomial:
    if max(m.powers) > MAX_POWER:
        raise ExponentGuardError(f"power above {MAX_POWER} in {m}")
    return m


def _reorder_mode(a: int, b: int, c: int, d: int) -> list[tuple[GaussianRational, int, int]]:
    """Normal-order ``x^a p^b x^c p^d`` for a single mode."""
    out = []
    for k in range(min(b, c) + 1):
        coef = _NEG_I_POWERS[k % 4] * (factorial(k) * comb(b, k) * comb(c, k))
        out.append((coef, a + c - k, b + d - k))
    return out


def _multiply_monomials(m1: Monomial, m2: Monomial) -> list[tuple[object, Monomial]]:
    phase1, s1 = _PAULI_TABLE[(m1.s1, m2.s1)]
    phase2, s2 = _PAULI_TABLE[(m1.s2, m2.s2)]
    phase = phase1 * phase2
    out = []
    for c1, x1, p1 in _reorder_mode(m1.x1, m1.p1, m2.x1, m2.p1):
        for c2, x2, p2 in _reorder_mode(m1.x2, m1.p2, m2.x2, m2.p2):
            out.append((phase * c1 * c2, _check_guard(Monomial(x1, p1, x2, p2, s1, s2))))
    return out


class OperatorExpr:
    """Finite linear combination of normal-ordered monomials.

    Instances are immutable. ``A * B`` is the operator product when both
    sides are expressions and scaling when one side is a number.
    """

    __slots__ = ("_terms",)
    __hash__ = None

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: dict[Monomial, object] = {}
        for mono, coef in (terms or {}).items():
            mono = _check_guard(Monomial(*mono))
            coef = _coerce(coef)
            if not _is_zero(coef):
                clean[mono] = coef
        self._terms = clean

    @classmethod
    def scalar(cls, c) -> "OperatorExpr":
        return cls({IDENTITY_MONOMIAL: c})

    @property
    def terms(self) -> dict[Monomial, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    # -- linear structure --
    def _accumulate(self, pairs: Iterable[tuple[Monomial, object]]) -> "OperatorExpr":
        acc: dict[Monomial, object] = {}
        for mono, coef in pairs:
            acc[mono] = acc[mono] + coef if mono in acc else coef
        return OperatorExpr(acc)

    def __add__(self, other):
        if not isinstance(other, OperatorExpr):
            other = OperatorExpr.scalar(other)
        return self._accumulate(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            pairs = []
            for m1, c1 in self._terms.items():
                for m2, c2 in other._terms.items():
                    for c, m in _multiply_monomials(m1, m2):
                        pairs.append((m, c1 * c2 * c))
            return self._accumulate(pairs)
        c = _coerce(other)
        return OperatorExpr({m: v * c for m, v in self._terms.items()})

    def __rmul__(self, other):
        c = _coerce(other)
        return OperatorExpr({m: c * v for m, v in self._terms.items()})

    def __truediv__(self, other):
        c = _coerce(other)
        if isinstance(c, GaussianRational):
            return self * (GaussianRational(1) / c)
        return self * (1.0 / c)

    def __pow__(self, k: int):
        out = OperatorExpr.scalar(1)
        for _ in range(k):
            out = out * self
        return out

    def dagger(self) -> "OperatorExpr":
        out = OperatorExpr()
        for m, c in self._terms.items():
            # (x^a p^b)^dagger = p^b x^a per mode; Paulis are Hermitian
            term = OperatorExpr.scalar(_conj(c))
            term = term * _mono(p1=m.p1) * _mono(x1=m.x1) * _mono(p2=m.p2) * _mono(x2=m.x2)
            term = term * _mono(s1=m.s1, s2=m.s2)
            out = out + term
        return out

    def is_hermitian(self) -> bool:
        return is_zero(self - self.dagger())

    def max_power(self) -> int:
        return max((max(m.powers) for m in self._terms), default=0)

    def uses_mode(self, mode: int) -> bool:
        if mode == 1:
            return any(m.x1 or m.p1 for m in self._terms)
        return any(m.x2 or m.p2 for m in self._terms)

    def coefficient(self, mono: Monomial):
        return self._terms.get(mono, GaussianRational(0))

    def __eq__(self, other):
        if not isinstance(other, OperatorExpr):
            if isinstance(other, Complex):
                other = OperatorExpr.scalar(other)
            else:
                return NotImplemented
        return is_zero(self - other)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=lambda m: (sum(m.powers), m)):
            c = self._terms[m]
            cs = str(c) if isinstance(c, GaussianRational) else f"({c.real:.6g}{c.imag:+.6g}i)"
            parts.append(cs if m.is_identity() else f"{cs}*{m}")
        return " + ".join(parts)

    def __repr__(self):
        return f"OperatorExpr({self})"


def _mono(**powers) -> OperatorExpr:
    return OperatorExpr({Monomial(**powers): 1})


IDENTITY = OperatorExpr.scalar(1)
X1 = _mono(x1=1)
P1 = _mono(p1=1)
X2 = _mono(x2=1)
P2 = _mono(p2=1)


def pauli(qubit: int, name: str) -> OperatorExpr:
    """Pauli ``name`` in {"I", "X", "Y", "Z"} acting on qubit 1 or 2."""
    if name not in "IXYZ" or len(name) != 1:
        raise ValueError(f"unknown Pauli {name!r}")
    if qubit == 1:
        return _mono(s1=name)
    if qubit == 2:
        return _mono(s2=name)
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


SX1, SY1, SZ1 = (pauli(1, s) for s in "XYZ")
SX2, SY2, SZ2 = (pauli(2, s) for s in "XYZ")
SIGMA_Z_SUM = SZ1 + SZ2


def commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return a * b - b * a


def is_zero(a: OperatorExpr) -> bool:
    return all(_is_zero(c) for _, c in a.items())


def equals(a: OperatorExpr, b: OperatorExpr) -> bool:
    return is_zero(a - b)


def heisenberg_rhs(h: OperatorExpr, a: OperatorExpr) -> OperatorExpr:
    """Right-hand side of ``dA/dt = i [H, A]``."""
    return I * commutator(h, a)


class ZassenhausResult(NamedTuple):
    factor: OperatorExpr
    central: bool


def zassenhaus_central_factor(x: OperatorExpr, y: OperatorExpr) -> ZassenhausResult:
    """Third exponent ``C`` in ``e^(X+Y) = e^X e^Y e^C``.

    When ``W = [X, Y]`` commutes with both ``X`` and ``Y`` the factorization is
    exact with ``C = -W/2`` and ``central`` is True. Otherwise the returned
    ``C`` is only the leading correction.
    """
    w = commutator(x, y)
    central = is_zero(commutator(x, w)) and is_zero(commutator(y, w))
    return ZassenhausResult(w * Fraction(-1, 2), central)


def conserves(h: OperatorExpr, c: OperatorExpr) -> bool:
    return is_zero(commutator(h, c))
