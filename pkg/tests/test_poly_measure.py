import mpmath as mp
import numpy as np
import pytest

from src.core.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    InvalidPolynomial,
    PreconditionError,
    StatesParallel,
)
from src.core.poly_measure import (
    HomogeneousPolynomial,
    c_l1_pure,
    check_rank_deficient_vanishing,
    evaluate,
    g_measure,
    g_polynomial,
    l1_polynomial,
    superposition_poly,
    zero_coherence_witness,
)
from src.core.quantum_state import PureState, basis_state, permutation_unitary, validate_state
from src.core.sampling import haar_state, random_orthogonal_pair, random_overlapping_pair
from src.core.symmetry_twirl import max_coherent

SQRT_HALF = 2 ** -0.5


def minus_state(d):
    amps = np.zeros(d, dtype=complex)
    amps[0], amps[1] = SQRT_HALF, -SQRT_HALF
    return PureState(amps)


class TestConstructors:
    def test_g_polynomial_qubit(self):
        P = g_polynomial(2)
        assert P.terms == (((1, 1), 1 + 0j),)
        assert P.degree == 2 and P.power == 1.0

    def test_g_polynomial_higher(self):
        P = g_polynomial(3)
        assert P.terms == (((1, 1, 1), 1 + 0j),)
        assert P.power == pytest.approx(2 / 3)
        assert g_polynomial(4).degree == 4

    def test_dimension_too_small(self):
        with pytest.raises(DimensionTooSmall):
            g_polynomial(1)

    def test_invalid_multi_index(self):
        with pytest.raises(InvalidPolynomial):
            HomogeneousPolynomial(dim=2, degree=2, power=1.0, terms={(2, 1): 1.0})
        with pytest.raises(InvalidPolynomial):
            HomogeneousPolynomial(dim=2, degree=2, power=1.0, terms={(1, 1): 0.0})

    def test_canonical_order_and_merge(self):
        P = HomogeneousPolynomial(dim=2, degree=2, power=1.0,
                                  terms=[((2, 0), 1.0), ((0, 2), 2.0), ((2, 0), 0.5j)])
        assert [key for key, _ in P.terms] == [(0, 2), (2, 0)]
        assert P.to_dict()["terms"][1] == {"exponents": [2, 0], "coeff": [1.0, 0.5]}
        again = HomogeneousPolynomial.from_dict(P.to_dict())
        assert again.terms == P.terms


class TestEvaluate:
    @pytest.mark.parametrize("d", range(2, 9))
    def test_maximally_coherent_is_one(self, d):
        assert evaluate(g_polynomial(d), max_coherent(d), d) == pytest.approx(1.0, abs=1e-12)

    def test_partial_support_vanishes(self):
        psi = validate_state([SQRT_HALF, SQRT_HALF, 0])
        assert evaluate(g_polynomial(3), psi, 3) == 0.0

    def test_against_high_precision(self):
        psi = validate_state(np.sqrt([0.5, 0.3, 0.2]))
        with mp.workdps(30):
            expected = float(3 * mp.cbrt(mp.mpf("0.5") * mp.mpf("0.3") * mp.mpf("0.2")))
        assert evaluate(g_polynomial(3), psi, 3) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.932170, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            evaluate(g_polynomial(3), max_coherent(2), 3)

    def test_measure_object(self):
        assert g_measure(4)(max_coherent(4)) == pytest.approx(1.0, abs=1e-12)


class TestL1:
    def test_examples(self):
        assert c_l1_pure(max_coherent(2)) == pytest.approx(1.0, abs=1e-15)
        assert c_l1_pure(validate_state([0.6, 0.8])) == pytest.approx(0.96, abs=1e-15)
        assert c_l1_pure(basis_state(2, 0)) == 0.0

    def test_rejects_qutrit(self):
        with pytest.raises(DimensionMismatch, match="l1 polynomial form defined for d=2 only"):
            c_l1_pure(max_coherent(3))

    def test_agrees_with_g_measure(self, rng):
        for _ in range(1000):
            psi = haar_state(2, rng)
            assert abs(c_l1_pure(psi) - evaluate(g_polynomial(2), psi, 2)) <= 1e-12
            assert abs(c_l1_pure(psi) - evaluate(l1_polynomial(), psi, 2)) <= 1e-12


class TestInvariance:
    def test_homogeneity(self, rng):
        P = HomogeneousPolynomial(dim=3, degree=3, power=1.0,
                                  terms={(1, 1, 1): 1.0, (3, 0, 0): 0.5 - 1j, (0, 1, 2): 2j})
        for _ in range(20):
            v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            kappa = complex(rng.standard_normal(), rng.standard_normal())
            lhs = abs(P.value(kappa * v))
            rhs = abs(kappa) ** 3 * abs(P.value(v))
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_permutation_and_phase_invariance(self, rng):
        P = g_polynomial(4)
        for _ in range(50):
            psi = haar_state(4, rng)
            base = evaluate(P, psi, 4)
            permuted = PureState(permutation_unitary(rng.permutation(4)) @ psi.amplitudes)
            phased = PureState(np.exp(2j * np.pi * rng.uniform(size=4)) * psi.amplitudes)
            assert abs(evaluate(P, permuted, 4) - base) <= 1e-12
            assert abs(evaluate(P, phased, 4) - base) <= 1e-12

    @pytest.mark.parametrize("d", range(2, 7))
    def test_maximally_coherent_is_maximal(self, d, rng):
        P = g_polynomial(d)
        values = [evaluate(P, haar_state(d, rng), d) for _ in range(500)]
        assert max(values) <= 1 + 1e-9


class TestSuperpositionPoly:
    def test_orthogonal_basis_states(self):
        q = superposition_poly(l1_polynomial(), basis_state(2, 0), basis_state(2, 1))
        np.testing.assert_allclose(q.coefficients, [0, 1, 0], atol=1e-12)

    def test_plus_minus(self):
        q = superposition_poly(l1_polynomial(), max_coherent(2), minus_state(2))
        np.testing.assert_allclose(q.coefficients, [0.5, 0, -0.5], atol=1e-12)

    def test_g_qutrit(self):
        q = superposition_poly(g_polynomial(3), max_coherent(3), minus_state(3))
        expected = np.array([1 / 3, 0, -1 / 2, 0]) / np.sqrt(3)
        np.testing.assert_allclose(q.coefficients, expected, atol=1e-12)

    def test_top_coefficient(self, rng):
        P = g_polynomial(4)
        for _ in range(20):
            psi1, psi2 = random_orthogonal_pair(4, rng)
            q = superposition_poly(P, psi1, psi2)
            assert abs(q.coefficients[-1] - P.value(psi2.amplitudes)) <= 1e-9


class TestWitness:
    def test_g_qutrit_two_witnesses(self):
        found = zero_coherence_witness(g_polynomial(3), max_coherent(3), minus_state(3), 3)
        omegas = sorted(w.omega.real for w in found)
        np.testing.assert_allclose(omegas, [-np.sqrt(2 / 3), np.sqrt(2 / 3)], atol=1e-9)
        assert all(w.value < 1e-10 for w in found)

    def test_basis_pair(self):
        found = zero_coherence_witness(l1_polynomial(), basis_state(2, 0), basis_state(2, 1))
        assert len(found) == 1
        assert abs(found[0].omega) <= 1e-12
        assert abs(abs(found[0].state.inner(basis_state(2, 0))) - 1) <= 1e-12

    def test_constant_family_returns_second_state(self):
        psi1 = validate_state([SQRT_HALF, SQRT_HALF, 0])
        psi2 = minus_state(3)
        found = zero_coherence_witness(g_polynomial(3), psi1, psi2, 3)
        assert len(found) == 1
        assert found[0].omega is None
        assert found[0].state is psi2

    def test_zero_second_state_with_finite_root(self):
        found = zero_coherence_witness(l1_polynomial(), validate_state([0.6, 0.8]), basis_state(2, 1), 2)
        assert len(found) == 1
        assert found[0].omega == pytest.approx(-0.8, abs=1e-12)

    def test_parallel_states(self):
        psi = max_coherent(3)
        with pytest.raises(StatesParallel):
            zero_coherence_witness(g_polynomial(3), psi, psi)
        with pytest.raises(StatesParallel):
            zero_coherence_witness(g_polynomial(3), psi, PureState(1j * psi.amplitudes))

    def test_fractional_power_witnesses_are_reported_at_full_precision(self, rng):
        P = HomogeneousPolynomial(
            dim=3, degree=2, power=0.25,
            terms={(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): -0.5, (1, 1, 0): 0.3},
        )
        for _ in range(20):
            psi1, psi2 = random_orthogonal_pair(3, rng)
            found = zero_coherence_witness(P, psi1, psi2)
            assert found
            for w in found:
                assert w.value < 1e-8
                # complex128 rounding alone leaves |P| ~ 1e-16, i.e. C_p ~ 1e-4 at m = 1/4
                assert abs(P.value(w.state.amplitudes)) <= 1e-12

    def test_scale_must_be_positive(self):
        with pytest.raises(PreconditionError):
            zero_coherence_witness(g_polynomial(3), max_coherent(3), minus_state(3), 0.0)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_soundness_on_random_pairs(self, d, rng):
        P = g_polynomial(d)
        for i in range(40):
            if i % 2:
                psi1, psi2 = random_overlapping_pair(d, 0.9, rng)
            else:
                psi1, psi2 = random_orthogonal_pair(d, rng)
            found = zero_coherence_witness(P, psi1, psi2, d)
            assert found
            assert all(w.value < 1e-8 for w in found)

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_soundness_acceptance(self, d, rng):
        P = g_polynomial(d)
        for i in range(200):
            if i % 2:
                psi1, psi2 = random_overlapping_pair(d, 0.9, rng)
            else:
                psi1, psi2 = random_orthogonal_pair(d, rng)
            found = zero_coherence_witness(P, psi1, psi2, d)
            if evaluate(P, psi2, d) > 0:
                assert found
            assert all(w.value < 1e-8 for w in found)


class TestVanishingCheck:
    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_g_measure_vanishes(self, d):
        report = check_rank_deficient_vanishing(g_polynomial(d), d, 200, rng_seed=3)
        assert report.max_value == 0.0
        assert not report.violated

    def test_square_polynomial_is_flagged(self):
        P = HomogeneousPolynomial(dim=2, degree=2, power=1.0, terms={(2, 0): 1.0})
        assert evaluate(P, basis_state(2, 0)) == pytest.approx(1.0)
        report = check_rank_deficient_vanishing(P, 1.0, 50, rng_seed=0)
        assert report.violated
        assert report.max_value == pytest.approx(1.0, abs=1e-12)

    def test_requires_trials(self):
        with pytest.raises(PreconditionError):
            check_rank_deficient_vanishing(g_polynomial(3), 3, 0, rng_seed=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_acceptance_batch(self, d):
        report = check_rank_deficient_vanishing(g_polynomial(d), d, 10_000, rng_seed=11)
        assert report.max_value == 0.0
