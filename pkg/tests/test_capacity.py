import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecap.capacity import (
    Ensemble,
    _CoherentInformation,
    bias_lower_bound,
    bloch_density,
    classical_bounds,
    coherent_information,
    density_parametrize,
    density_unparametrize,
    f_lower_bound,
    factor_density,
    holevo_capacity,
    holevo_quantity,
    q1,
    q1_search,
    quantum_bounds,
    radial_bloch_density,
)
from gecap.erasure import generalized_erasure
from gecap.exceptions import DimensionMismatchError, DomainError, InvalidOperationError
from gecap.linalg import binary_entropy, von_neumann_entropy
from gecap.operations import (
    KrausMap,
    compose,
    identity_map,
    pdl_operation,
    random_channel,
    random_density,
    random_operation,
    random_unitary,
)
from gecap.pdl import solve_q1_pdl

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


def gamma_pdl(p_h, p_v):
    return generalized_erasure(pdl_operation(p_h, p_v))


def test_ensemble_validation():
    with pytest.raises(DomainError):
        Ensemble(np.array([0.6, 0.6]), (KET0, KET1))
    with pytest.raises(DimensionMismatchError):
        Ensemble(np.array([0.5, 0.5]), (KET0, np.eye(3) / 3))


def test_holevo_single_state_is_zero(rng):
    ens = Ensemble.from_pairs([(1.0, random_density(rng, 2))])
    assert holevo_quantity(identity_map(2), ens) == pytest.approx(0.0, abs=1e-12)


def test_holevo_orthogonal_states_identity():
    ens = Ensemble.from_pairs([(0.5, KET0), (0.5, KET1)])
    assert holevo_quantity(identity_map(2), ens) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.8, 1.0])
def test_holevo_erasure_binary_ensemble(p):
    ens = Ensemble.from_pairs([(0.5, KET0), (0.5, KET1)])
    assert holevo_quantity(gamma_pdl(p, p), ens) == pytest.approx(p, abs=1e-12)


def test_holevo_quantity_requires_channel():
    ens = Ensemble.from_pairs([(0.5, KET0), (0.5, KET1)])
    with pytest.raises(InvalidOperationError):
        holevo_quantity(pdl_operation(0.5, 0.5), ens)


@pytest.mark.parametrize("seed", range(5))
def test_holevo_quantity_between_zero_and_average_entropy(seed):
    g = np.random.default_rng(seed)
    ch = random_channel(g, 2, 3)
    w = g.dirichlet(np.ones(3))
    ens = Ensemble(w, tuple(random_density(g, 2) for _ in range(3)))
    chi = holevo_quantity(ch, ens)
    assert -1e-9 <= chi <= von_neumann_entropy(ch(ens.average)) + 1e-9


def test_holevo_capacity_identity():
    assert holevo_capacity(identity_map(2), restarts=4) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("p", [0.25, 0.6])
def test_holevo_capacity_erasure(p):
    assert holevo_capacity(gamma_pdl(p, p), restarts=4) == pytest.approx(p, abs=1e-3)


def test_holevo_capacity_pdl_in_bracket():
    f = f_lower_bound(0.19, 0.7)
    c = holevo_capacity(gamma_pdl(0.7, 0.19), restarts=4)
    assert f - 1e-6 <= c <= 0.7 + f + 1e-9


def test_coherent_information_examples(rng):
    assert coherent_information(identity_map(2), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert coherent_information(gamma_pdl(1, 1), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    ch = random_channel(rng, 2, 3)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    assert coherent_information(ch, np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_fast_evaluator_matches_reference(seed):
    g = np.random.default_rng(seed)
    gamma = generalized_erasure(random_operation(g, 3))
    rho = random_density(g, 3)
    assert _CoherentInformation(gamma.channel)(rho) == pytest.approx(coherent_information(gamma, rho), abs=1e-12)


@pytest.mark.parametrize("p", [0.5, 0.6, 0.75, 1.0])
def test_q1_erasure_channel(p):
    assert q1(gamma_pdl(p, p), restarts=6) == pytest.approx(max(0.0, 2 * p - 1), abs=1e-5)


def test_q1_zero_when_antidegradable():
    assert q1(gamma_pdl(0.4, 0.3), restarts=6) == pytest.approx(0.0, abs=1e-12)


def test_q1_matches_exact_pdl_solution():
    assert q1(gamma_pdl(0.7, 0.19), restarts=8) == pytest.approx(solve_q1_pdl(0.7, 0.19).q1, abs=1e-6)


def test_q1_factor_parametrization_on_qubit():
    value = q1(gamma_pdl(0.8, 0.8), restarts=6, parametrization="factor")
    assert value == pytest.approx(0.6, abs=1e-5)


def test_q1_qutrit_erasure():
    op = KrausMap(np.sqrt(0.8) * np.eye(3))
    assert q1(generalized_erasure(op), restarts=4) == pytest.approx(0.6 * np.log2(3), abs=1e-4)


def test_q1_unitary_invariance():
    rng = np.random.default_rng(7)
    op = pdl_operation(0.8, 0.35)
    u = random_unitary(rng, 2)
    rotated = compose(op, KrausMap(u))
    assert q1(generalized_erasure(rotated), restarts=8) == pytest.approx(q1(generalized_erasure(op), restarts=8),
                                                                          abs=1e-5)


def test_q1_warm_start_is_always_a_candidate():
    gamma = gamma_pdl(0.9, 0.9)
    value, rho = q1_search(gamma, restarts=0, warm_starts=[np.eye(2) / 2])
    assert value == pytest.approx(0.8, abs=1e-12)
    np.testing.assert_allclose(rho, np.eye(2) / 2)


def test_q1_is_deterministic():
    gamma = gamma_pdl(0.7, 0.3)
    assert q1(gamma, restarts=3, seed=5) == q1(gamma, restarts=3, seed=5)


@pytest.mark.parametrize("seed", range(3))
def test_monotone_under_concatenation(seed):
    g = np.random.default_rng(seed)
    lam2 = random_operation(g, 2, kraus_count=1, scale=0.95)
    theta = random_operation(g, 2, kraus_count=1, scale=0.9)
    lam1 = compose(theta, lam2)
    c1 = holevo_capacity(generalized_erasure(lam1), restarts=3)
    c2 = holevo_capacity(generalized_erasure(lam2), restarts=3)
    assert c1 <= c2 + 1e-3
    assert q1(generalized_erasure(lam1), restarts=4) <= q1(generalized_erasure(lam2), restarts=4) + 1e-3


def test_density_parametrize_bloch_examples():
    np.testing.assert_allclose(density_parametrize([0, 0, 0]), np.eye(2) / 2)
    np.testing.assert_allclose(density_parametrize([0, 0, 1]), KET0)
    np.testing.assert_allclose(bloch_density([0, 0, 3]), KET0)


@settings(max_examples=40)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_factor_density_is_a_state(d, seed):
    theta = np.random.default_rng(seed).normal(size=d * d)
    rho = factor_density(theta, d)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_density_unparametrize_round_trip(rng, d):
    rho = random_density(rng, d)
    np.testing.assert_allclose(factor_density(density_unparametrize(rho), d), rho, atol=1e-9)


def test_density_unparametrize_singular_state():
    rho = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    np.testing.assert_allclose(factor_density(density_unparametrize(rho), 4), rho, atol=1e-9)


def test_bloch_unparametrize_round_trip(rng):
    rho = random_density(rng, 2)
    np.testing.assert_allclose(bloch_density(density_unparametrize(rho, "bloch")), rho, atol=1e-12)


def test_radial_bloch_stays_inside_ball():
    rho = radial_bloch_density([0, 0, 40.0])
    assert np.linalg.eigvalsh(rho).min() >= 0
    np.testing.assert_allclose(radial_bloch_density([0, 0, 0]), np.eye(2) / 2)


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 1.0])
def test_f_equal_arguments(p):
    assert f_lower_bound(p, p) == 0.0


def test_f_zero_one():
    assert f_lower_bound(0.0, 1.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("p", [0.1, 0.35, 0.7, 0.99])
def test_f_brewster_closed_form(p):
    expected = np.log2(1 + p * (1 - p) ** ((1 - p) / p))
    assert f_lower_bound(0.0, p) == pytest.approx(expected, abs=1e-12)


def test_f_rejects_bad_order():
    with pytest.raises(DomainError):
        f_lower_bound(0.7, 0.2)


def test_f_is_best_binary_holevo_quantity():
    # oracle: brute-force the binary ensemble of |H>, |V> through the classical channel
    p_min, p_max = 0.19, 0.7
    best = 0.0
    for q in np.linspace(0, 1, 200001):
        avg = q * p_max + (1 - q) * p_min
        best = max(best, binary_entropy(avg) - q * binary_entropy(p_max) - (1 - q) * binary_entropy(p_min))
    assert f_lower_bound(p_min, p_max) == pytest.approx(best, abs=1e-9)


def test_f_symmetry_at_fixed_bias():
    b = 0.3
    for x in np.linspace(0, 0.5 - b / 2, 11):
        lhs = f_lower_bound(0.5 + x - b / 2, 0.5 + x + b / 2)
        rhs = f_lower_bound(0.5 - x - b / 2, 0.5 - x + b / 2)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_bias_bound_below_f(rng):
    for _ in range(200):
        p_min, p_max = np.sort(rng.uniform(size=2))
        assert bias_lower_bound(p_max - p_min) <= f_lower_bound(p_min, p_max) + 1e-12


def test_classical_bounds_brewster():
    report = classical_bounds(pdl_operation(0.6, 0.0))
    assert report.lower == pytest.approx(f_lower_bound(0.0, 0.6))
    assert report.upper == pytest.approx(0.6)
    assert not report.diagnostics


def test_classical_bounds_perfect_brewster():
    report = classical_bounds(pdl_operation(1.0, 0.0))
    assert report.lower == pytest.approx(1.0) and report.upper == pytest.approx(1.0)


def test_classical_bounds_unbiased_holevo_bracket_collapses():
    report = classical_bounds(pdl_operation(0.4, 0.4), holevo=True, restarts=3)
    assert report.extras["F"] == 0.0
    assert report.extras["holevo_gamma_lower"] == pytest.approx(report.extras["holevo_gamma_upper"], abs=1e-12)
    assert report.extras["holevo_gamma_lower"] == pytest.approx(0.4, abs=1e-3)


def test_quantum_bounds_pdl_example():
    report = quantum_bounds(pdl_operation(0.7, 0.19), restarts=4)
    assert report.upper == pytest.approx(0.4, abs=1e-9)
    assert report.lower == 0.0
    assert report.extras["sandwich"][0] == pytest.approx(-0.62, abs=1e-4)
    assert report.extras["degradable"] is False and report.extras["antidegradable"] is False


def test_quantum_bounds_antidegradable():
    report = quantum_bounds(pdl_operation(0.4, 0.3), restarts=2)
    assert report.upper == 0.0
    assert report.extras["antidegradable"] is True


def test_quantum_bounds_identity():
    report = quantum_bounds(pdl_operation(1.0, 1.0), restarts=4)
    assert report.lower == pytest.approx(1.0, abs=1e-5)
    assert report.upper == pytest.approx(1.0, abs=1e-9)


def test_quantum_bounds_degradable_annotation():
    report = quantum_bounds(pdl_operation(0.7, 0.6), restarts=4)
    assert report.extras["annotation"] == "degradable: Q = Q1"
    assert report.lower == pytest.approx(solve_q1_pdl(0.7, 0.6).q1, abs=1e-5)


def test_quantum_bounds_higher_rank_note(rng):
    report = quantum_bounds(random_operation(rng, 2, kraus_count=2), restarts=2)
    assert "unsupported rank" in report.extras["degradability"]
    assert report.lower <= report.upper + 1e-9


@pytest.mark.parametrize("p_h, p_v", [(0.9, 0.3), (0.6, 0.55), (0.95, 0.05), (0.3, 0.8)])
def test_exact_q1_inside_quantum_bounds(p_h, p_v):
    report = quantum_bounds(pdl_operation(p_h, p_v), restarts=3)
    exact = solve_q1_pdl(p_h, p_v).q1
    assert report.lower - 1e-6 <= exact <= report.upper + 1e-9


def test_bounds_report_flags_violation():
    from gecap.capacity import BoundsReport

    report = BoundsReport(1.0, 0.5, "a", "b")
    assert report.diagnostics


@pytest.mark.parametrize("p", [0.2, 0.5, 0.77])
def test_f_nearly_equal_arguments(p):
    # small-gap expansion: F ~ gap^2 / (8 ln2 p (1 - p))
    gap = 1e-5
    expected = gap ** 2 / (8 * np.log(2) * p * (1 - p))
    assert f_lower_bound(p - gap / 2, p + gap / 2) == pytest.approx(expected, rel=1e-4)
