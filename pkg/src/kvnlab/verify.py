"""Symbolic identity checks and the factorization-vs-oracle trials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import algebra as alg
from .hamiltonian import entangling, koopman_coupled
from .oracle import DenseEvolver
from .propagate import factorized_propagator
from .report import Verdict, below, holds
from .scenarios import completion_of_square
from .state import HybridState, Rep, fidelity, make_grid

F = Fraction
_GENERATORS = (alg.X1, alg.P1, alg.X2, alg.P2, alg.SX1, alg.SZ1, alg.SY2, alg.SZ2)


def random_expr(rng: np.random.Generator, terms: int = 3, degree: int = 2) -> alg.OperatorExpr:
    """Sum of a few random products of generators with small rational coefficients."""
    out = alg.OperatorExpr()
    for _ in range(terms):
        mono = alg.IDENTITY
        for _ in range(int(rng.integers(1, degree + 1))):
            mono = mono * _GENERATORS[int(rng.integers(len(_GENERATORS)))]
        coef = alg.GaussianRational(F(int(rng.integers(-4, 5)), int(rng.integers(1, 4))),
                                    F(int(rng.integers(-2, 3)), int(rng.integers(1, 3))))
        out = out + coef * mono
    return out


def jacobi_leibniz(n: int = 100, seed: int = 7) -> tuple[int, int, int]:
    """Counts of randomized triples satisfying Jacobi, Leibniz and antisymmetry."""
    rng = np.random.default_rng(seed)
    jac = leib = anti = 0
    c = alg.commutator
    for _ in range(n):
        a, b, d = (random_expr(rng) for _ in range(3))
        jac += alg.is_zero(c(a, c(b, d)) + c(b, c(d, a)) + c(d, c(a, b)))
        leib += alg.equals(c(a, b * d), c(a, b) * d + b * c(a, d))
        anti += alg.equals(c(a, b), -c(b, a))
    return jac, leib, anti


def zassenhaus_exponents(lam=F(2, 3), t=F(3, 2), m=F(5, 4)):
    """The central factor for the Koopman-coupled split, and which closed form it matches."""
    x = alg.GaussianRational(0, -t) * alg.P1 * alg.P2 / m
    y = alg.GaussianRational(0, -t) * lam * alg.X1 * alg.SIGMA_Z_SUM
    res = alg.zassenhaus_central_factor(x, y)
    derived = alg.GaussianRational(0, -lam * t * t / (2 * m)) * alg.P2 * alg.SIGMA_Z_SUM
    linear = alg.GaussianRational(0, -lam * t / m) * alg.P2 * alg.SIGMA_Z_SUM
    return res, alg.equals(res.factor, derived), alg.equals(res.factor, linear)


def algebra_identities(triples: int = 100, seed: int = 7) -> list[Verdict]:
    c, X1, P1, X2, P2 = alg.commutator, alg.X1, alg.P1, alg.X2, alg.P2
    m, k = F(2), F(3)
    vprime = (F(1, 3), F(2), F(0), F(1, 2))
    v_x1 = sum((co * X1**j for j, co in enumerate(vprime) if co), alg.OperatorExpr())
    h_pot = P1 * P2 / m + v_x1 * X2
    h = koopman_coupled(m, F(1)).operator()
    h_ent = entangling(F(1), F(1), F(1), F(1)).operator()
    res, derived, linear = zassenhaus_exponents()
    jac, leib, anti = jacobi_leibniz(triples, seed)
    sq_derived, sq_schematic = completion_of_square()
    return [
        holds("[x1, p2] = 0", alg.is_zero(c(X1, P2))),
        holds("[x2, p1] = 0", alg.is_zero(c(X2, P1))),
        holds("[x1, p1] = i", alg.equals(c(X1, P1), alg.I * alg.IDENTITY)),
        holds("[x2, p2] = i", alg.equals(c(X2, P2), alg.I * alg.IDENTITY)),
        holds("dx1/dt = p2/m under p1 p2/m + V'(x1) x2", alg.equals(alg.heisenberg_rhs(h_pot, X1), P2 / m)),
        holds("dp2/dt = -V'(x1) under p1 p2/m + V'(x1) x2", alg.equals(alg.heisenberg_rhs(h_pot, P2), -v_x1)),
        holds("dp2/dt = -k x1 under p1 p2/m + k x1 x2",
              alg.equals(alg.heisenberg_rhs(P1 * P2 / m + k * X1 * X2, P2), -k * X1)),
        holds("[H, sz1] = 0 for H = p1 p2/m + lam x1 (sz1 + sz2)", alg.conserves(h, alg.SZ1)),
        holds("[H_ENT, sz1] != 0", not alg.conserves(h_ent, alg.SZ1)),
        holds("Zassenhaus commutator is central", res.central),
        holds("third factor exponent is -i lam t^2 p2 (sz1 + sz2) / 2m", derived,
              f"C = {res.factor}"),
        holds("linear exponent -i lam t p2 (sz1 + sz2) / m rejected", not linear),
        holds(f"Jacobi identity on {triples} random triples", jac == triples, f"{jac}/{triples}"),
        holds(f"Leibniz rule on {triples} random triples", leib == triples, f"{leib}/{triples}"),
        holds(f"antisymmetry on {triples} random triples", anti == triples, f"{anti}/{triples}"),
        holds("x^2 + x S = (x + S/2)^2 - 1/2 - sz1 sz2/2", sq_derived),
        holds("schematic (x + S)^2 - sz1 sz2 is not an identity", not sq_schematic),
    ]


@dataclass(frozen=True)
class FactorizationTrial:
    lam: float
    t: float
    m: float
    infidelity_derived: float
    infidelity_linear: float


def smooth_trial_state(rng: np.random.Generator, g1, g2) -> HybridState:
    """Band-limited mode 1 (Gaussian with a kick) times random mode-2 and qubit amplitudes.

    Mode 1 must stay well inside its lattice band: the Zassenhaus identity is
    exact only where the lattice x1 and p1 obey the canonical commutator.
    """
    x = g1.positions
    centre, sigma, kick = rng.uniform(-1, 1), rng.uniform(1.0, 1.5), rng.uniform(-1, 1)
    m1 = np.exp(-((x - centre) ** 2) / (2 * sigma**2) + 1j * kick * x)
    m2 = rng.normal(size=g2.n) + 1j * rng.normal(size=g2.n)
    q = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q1, q2 = q[0] / np.linalg.norm(q[0]), q[1] / np.linalg.norm(q[1])
    amps = np.einsum("i,j,k,l->ijkl", m1, m2, q1, q2)
    return HybridState(amps / np.linalg.norm(amps), (Rep.POSITION, Rep.MOMENTUM), (g1, g2))


def factorization_trials(n: int = 10, seed: int = 42, n1: int = 32, length1: float = 16.0,
                         n2: int = 4, length2: float = 40.0) -> list[FactorizationTrial]:
    """Three-factor propagator vs dense oracle, for both candidate third-factor exponents."""
    rng = np.random.default_rng(seed)
    g1, g2 = make_grid(n1, length1), make_grid(n2, length2)
    out = []
    for _ in range(n):
        lam, t, m = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.5, 2.0)
        s = smooth_trial_state(rng, g1, g2)
        exact = DenseEvolver(koopman_coupled(m, lam), s.grids, s.reps).evolve(s, t)
        errs = [1.0 - fidelity(factorized_propagator(s, m, lam, t, third=k), exact)
                for k in ("zassenhaus", "linear")]
        out.append(FactorizationTrial(lam, t, m, *errs))
    return out


def factorization_verdicts(trials: list[FactorizationTrial], tol: float = 1e-8) -> list[Verdict]:
    worst = max(tr.infidelity_derived for tr in trials)
    linear_best = min(tr.infidelity_linear for tr in trials)
    return [
        below(f"factorized (t^2/2 exponent) vs dense oracle, {len(trials)} trials: max 1 - F",
              worst, tol),
        Verdict("linear-in-t exponent vs dense oracle: min 1 - F (expected to miss)",
                linear_best > tol, linear_best, tol, ">"),
    ]
