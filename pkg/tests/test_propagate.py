import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kvnlab.hamiltonian import (
    EntanglerAlpha,
    EntanglerX1,
    FreeKvN,
    HamiltonianSpec,
    HarmonicKvN,
    QuantumKinetic,
    QubitCouplingZ,
    entangling,
    koopman_coupled,
)
from kvnlab.observe import expectation, negativity, position_variance, reduce_to_qubits
from kvnlab import algebra as alg
from kvnlab.oracle import (
    DenseEvolver,
    OracleDimensionError,
    dense_oracle_unitary,
    hamiltonian_matrix,
    oracle_evolve,
)
from kvnlab.propagate import (
    BoostParams,
    apply_factor,
    factorized_propagator,
    galilean_boost,
    strang_evolve,
    weyl_phase_defect,
)
from kvnlab.state import (
    ONE,
    PLUS,
    ZERO,
    InitialCondition,
    Rep,
    fidelity,
    make_grid,
    make_state,
    norm,
    random_state,
)
from kvnlab.verify import factorization_trials

POS, MOM = Rep.POSITION, Rep.MOMENTUM


@pytest.fixture
def tiny():
    g = make_grid(8, 8.0)
    return g, g


def test_apply_factor_zero_time_is_identity(rng, tiny):
    s = random_state(tiny, rng)
    for f in (FreeKvN(1.0), QubitCouplingZ(0.7), HarmonicKvN(2.0), EntanglerX1(1.3)):
        out = apply_factor(s, f, 0.0)
        assert np.max(np.abs(out.amplitudes - s.amplitudes)) < 1e-12


def test_free_factor_relocates_delta_exactly():
    g = make_grid(64, 20.0)
    p0 = 8 * g.dp
    t = 4 * g.dx / p0
    s = make_state(g, g, InitialCondition(x0=0.0, p0=p0))
    out = apply_factor(s, FreeKvN(1.0), t)
    w = np.sum(np.abs(out.amplitudes) ** 2, axis=(1, 2, 3))
    assert w[g.index_of(4 * g.dx, POS)] == pytest.approx(1.0, abs=1e-12)
    assert expectation(out, alg.X1) == pytest.approx(4 * g.dx, abs=1e-12)


def test_apply_factor_rejects_composite_and_wrong_modes(rng, tiny):
    s = random_state(tiny, rng)
    with pytest.raises(ValueError):
        apply_factor(s, EntanglerAlpha(1.0), 0.1)
    with pytest.raises(ValueError):
        apply_factor(s, QuantumKinetic(1.0), 0.1)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), t=st.floats(-3, 3))
def test_factors_are_unitary(seed, t):
    g = make_grid(8, 6.0)
    s = random_state((g, g), np.random.default_rng(seed))
    for f in (FreeKvN(1.3), QubitCouplingZ(0.4, (1,)), HarmonicKvN(0.5), EntanglerX1(2.0)):
        assert abs(norm(apply_factor(s, f, t)) - 1) < 1e-12


def test_factorized_zero_time_is_identity(rng, tiny):
    s = random_state(tiny, rng)
    out = factorized_propagator(s, 1.0, 1.0, 0.0)
    assert np.max(np.abs(out.amplitudes - s.amplitudes)) < 1e-12


def test_factorized_matches_dense_oracle():
    trials = factorization_trials(4, seed=3)
    assert max(tr.infidelity_derived for tr in trials) < 1e-8
    assert min(tr.infidelity_linear for tr in trials) > 1e-8


def test_factorized_on_z_eigenstates_keeps_qubits_product(tiny):
    g1, g2 = tiny
    for q1, q2 in ((ZERO, ONE), (ONE, ONE), (ZERO, ZERO)):
        s = make_state(g1, g2, InitialCondition(x0=1.0, p0=g2.dp, qubit1=q1, qubit2=q2))
        out = factorized_propagator(s, 1.0, 1.0, 0.7)
        assert negativity(reduce_to_qubits(out)) < 1e-12
        assert reduce_to_qubits(out).purity() == pytest.approx(1.0, abs=1e-12)


def test_factorized_validates_inputs(rng, tiny):
    s = random_state(tiny, rng)
    with pytest.raises(ValueError):
        factorized_propagator(s, 1.0, 1.0, 0.5, third="other")
    g = make_grid(8, 8.0)
    single = make_state(g, None, InitialCondition())
    with pytest.raises(ValueError):
        factorized_propagator(single, 1.0, 1.0, 0.5)


def test_strang_single_factor_is_exact(rng, tiny):
    s = random_state(tiny, rng)
    h = HamiltonianSpec((FreeKvN(1.0),))
    a = strang_evolve(s, h, 0.9, 3)
    b = apply_factor(s, FreeKvN(1.0), 0.9)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12


def test_strang_is_step_independent_for_central_commutator():
    # [p1 p2, x1 S] is central, so the Strang error terms [A,[A,B]] and [B,[A,B]]
    # vanish and any step count reproduces the factorized result up to the
    # lattice floor; the x4-per-doubling behaviour is checked on the entangler
    g = make_grid(32, 16.0)
    s = make_state(g, g, InitialCondition(profile="gaussian", sigma=1.1, sigma_p=0.9))
    h = koopman_coupled(2.0, 1.0)
    exact = factorized_propagator(s, 2.0, 1.0, 1.0)
    assert 1 - fidelity(strang_evolve(s, h, 1.0, 64), exact) < 1e-4
    coarse, fine = (strang_evolve(s, h, 1.0, n) for n in (16, 128))
    assert np.linalg.norm(coarse.amplitudes - fine.amplitudes) < 1e-6


def test_strang_entangler_matches_oracle(tiny):
    s = make_state(*tiny, InitialCondition(qubit1=ZERO, qubit2=PLUS))
    h = entangling(1, 1, 1, 1)
    out = strang_evolve(s, h, 0.5, 256)
    assert fidelity(out, oracle_evolve(s, h, 0.5)) >= 1 - 1e-5


def test_strang_order_on_entangler(rng, tiny):
    s = random_state(tiny, rng)
    h = entangling(1, 1, 1, 1)
    exact = oracle_evolve(s, h, 0.5).amplitudes
    errs = [np.linalg.norm(strang_evolve(s, h, 0.5, n).amplitudes - exact) for n in (16, 32, 64, 128)]
    for a, b in zip(errs, errs[1:]):
        assert 1.7 <= math.log2(a / b) <= 2.3


def test_strang_rejects_zero_steps(rng, tiny):
    with pytest.raises(ValueError):
        strang_evolve(random_state(tiny, rng), koopman_coupled(1, 1), 1.0, 0)


def test_strang_is_unitary(rng, tiny):
    s = random_state(tiny, rng)
    out = strang_evolve(s, entangling(1, 1, 1, 1, lam=0.5), 2.0, 300)
    assert abs(norm(out) - 1) < 1e-10


def test_oracle_zero_time_and_hermiticity(tiny):
    for h in (koopman_coupled(1, 1), entangling(1, 1, 1, 1), entangling(2, 0.5, 0.3, 0.1, lam=1)):
        m = hamiltonian_matrix(h, tiny, (POS, MOM))
        assert np.max(np.abs(m - m.conj().T)) < 1e-10
        u = dense_oracle_unitary(h, tiny, (POS, MOM), 0.0)
        assert np.max(np.abs(u - np.eye(u.shape[0]))) < 1e-12
        u = dense_oracle_unitary(h, tiny, (POS, MOM), 1.3)
        assert np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) < 1e-9


def test_oracle_matches_single_factors(rng, tiny):
    s = make_state(*tiny, InitialCondition(x0=1.0, qubit1=PLUS, qubit2=PLUS))
    for f in (QubitCouplingZ(0.8), EntanglerX1(1.1)):
        a = apply_factor(s, f, 0.6)
        b = oracle_evolve(s, HamiltonianSpec((f,)), 0.6)
        assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-10
    r = random_state(tiny, rng)
    for f in (FreeKvN(0.7), HarmonicKvN(1.5)):
        a = apply_factor(r, f, 0.6)
        b = oracle_evolve(r, HamiltonianSpec((f,)), 0.6)
        assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-10


def test_dense_evolver_caches_and_checks_basis(rng, tiny):
    s = random_state(tiny, rng)
    ev = DenseEvolver(entangling(1, 1, 1, 1), tiny, (POS, MOM))
    a = ev.evolve(s, 0.4)
    b = oracle_evolve(s, entangling(1, 1, 1, 1), 0.4)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-10
    with pytest.raises(ValueError):
        DenseEvolver(entangling(1, 1, 1, 1), tiny, (MOM, MOM)).evolve(s, 0.4)


def test_oracle_dimension_cap():
    g = make_grid(64, 8.0)
    with pytest.raises(OracleDimensionError):
        hamiltonian_matrix(koopman_coupled(1, 1), (g, g), (POS, MOM))


def test_boost_identity_and_shifts():
    g = make_grid(64, 20.0)
    s = make_state(g, g, InitialCondition(x0=0.0, p0=4 * g.dp, qubit1=ZERO, qubit2=PLUS))
    same = galilean_boost(s, BoostParams(0.0, 0.0, 1.0))
    assert np.max(np.abs(same.amplitudes - s.amplitudes)) == 0.0
    moved = galilean_boost(s, BoostParams(a=3 * g.dx))
    assert expectation(moved, alg.X1) - expectation(s, alg.X1) == pytest.approx(3 * g.dx, abs=1e-12)
    boosted = galilean_boost(s, BoostParams(v=2 * g.dp, m=1.0))
    assert expectation(boosted, alg.P2) - expectation(s, alg.P2) == pytest.approx(-2 * g.dp, abs=1e-12)
    heavy = galilean_boost(s, BoostParams(v=g.dp, m=2.0))
    assert expectation(heavy, alg.P2) - expectation(s, alg.P2) == pytest.approx(-2 * g.dp, abs=1e-12)


def test_boost_and_translation_commute(rng):
    g = make_grid(16, 10.0)
    s = random_state((g, g), rng)
    a, mv = 5 * g.dx, 3 * g.dp
    ab = galilean_boost(galilean_boost(s, BoostParams(a=a)), BoostParams(v=mv))
    ba = galilean_boost(galilean_boost(s, BoostParams(v=mv)), BoostParams(a=a))
    assert np.max(np.abs(ab.amplitudes - ba.amplitudes)) < 1e-12


def test_boost_rejects_off_lattice(rng):
    g = make_grid(16, 10.0)
    s = random_state((g, g), rng)
    with pytest.raises(ValueError):
        galilean_boost(s, BoostParams(a=0.1))
    with pytest.raises(ValueError):
        galilean_boost(s, BoostParams(v=0.1))
    with pytest.raises(ValueError):
        BoostParams(a=math.inf)


def test_weyl_phase_defect():
    g = make_grid(64, 20.0)
    assert weyl_phase_defect(0.0, 1.0, 3 * g.dp, g) == 0.0
    # a m v = 4 dx * 4 dp = 16 * 2 pi / 64 = pi / 2
    assert weyl_phase_defect(4 * g.dx, 1.0, 4 * g.dp, g) == pytest.approx(math.pi / 2, abs=1e-9)
    assert weyl_phase_defect(4 * g.dx, 1.0, 4 * g.dp, g, pair="koopman") == 0.0
    with pytest.raises(ValueError):
        weyl_phase_defect(0.1, 1.0, g.dp, g)
    with pytest.raises(ValueError):
        weyl_phase_defect(g.dx, 1.0, g.dp, g, pair="other")


@settings(max_examples=25, deadline=None)
@given(j=st.integers(-20, 20), k=st.integers(-20, 20))
def test_weyl_phase_equals_amv_mod_2pi(j, k):
    g = make_grid(32, 12.0)
    a, mv = j * g.dx, k * g.dp
    theta = weyl_phase_defect(a, 1.0, mv, g)
    diff = (theta - a * mv + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 1e-9
    assert weyl_phase_defect(a, 1.0, mv, g, pair="koopman") == 0.0


@settings(max_examples=15, deadline=None)
@given(t=st.floats(0.0, 1.2), k=st.integers(-6, 6))
def test_no_spreading_gaussian(t, k):
    g = make_grid(64, 20.0)
    s = make_state(g, g, InitialCondition(p0=k * g.dp, profile="gaussian", sigma=1.0))
    assert abs(k * g.dp * t) < g.length / 4
    out = apply_factor(s, FreeKvN(1.0), t)
    assert abs(position_variance(out) - position_variance(s)) < 1e-9
