from dataclasses import replace

import numpy as np
import pytest

from src.core.convex_roof import (
    Decomposition,
    SolverConfig,
    _objective,
    _pack,
    _polar,
    _spectral_basis,
    audit,
    average_measure,
    decomposition_from_isometry,
    local_refine,
    minimize_convex_roof,
)
from src.core.errors import (
    DimensionMismatch,
    InvalidState,
    NotAnIsometry,
    PreconditionError,
    RankDeficientSpectrumMismatch,
)
from src.core.poly_measure import HomogeneousPolynomial, evaluate, g_polynomial, weighted_measure
from src.core.quantum_state import DensityMatrix, basis_state, eig_hermitian, pure_density
from src.core.sampling import haar_state, haar_unitary, random_density
from src.core.symmetry_twirl import (
    SymmetricState,
    cg_lower_bound,
    cg_symmetric,
    max_coherent,
    optimal_symmetric_decomposition,
    symmetric_state,
    twirl,
)

MIXED_QUADRATIC = HomogeneousPolynomial(
    dim=3, degree=2, power=0.25,
    terms={(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): -0.5, (1, 1, 0): 0.3},
)

QUICK = SolverConfig(restarts=4, seed=1, max_iterations=120)
ACCURATE = SolverConfig(restarts=8, seed=7)


def g_roof(rho, cfg=QUICK):
    return minimize_convex_roof(rho, g_polynomial(rho.dim), rho.dim, cfg)


class TestDecomposition:
    def test_validation(self):
        psi = basis_state(2, 0)
        with pytest.raises(InvalidState):
            Decomposition(np.array([0.5]), (psi, psi))
        with pytest.raises(InvalidState):
            Decomposition(np.array([1.5, -0.5]), (psi, psi))
        with pytest.raises(InvalidState):
            Decomposition(np.array([0.5, 0.4]), (psi, psi))
        with pytest.raises(DimensionMismatch):
            Decomposition(np.array([0.5, 0.5]), (psi, basis_state(3, 0)))

    def test_from_rows_drops_empty_rows(self):
        rows = np.array([[0.6, 0.0], [0.0, 0.8], [0.0, 0.0]])
        dec = Decomposition.from_rows(rows)
        assert dec.size == 2
        np.testing.assert_allclose(dec.probabilities, [0.36, 0.64])
        np.testing.assert_allclose(dec.density(), np.diag([0.36, 0.64]), atol=1e-15)

    def test_dict_form(self, rng):
        dec = decomposition_from_isometry(eig_hermitian(random_density(3, 2, rng)), haar_unitary(4, rng)[:, :2])
        again = Decomposition.from_dict(dec.to_dict())
        np.testing.assert_allclose(again.rows(), dec.rows(), atol=1e-15)


class TestIsometry:
    def test_identity_gives_eigendecomposition(self, rng):
        rho = random_density(3, 3, rng)
        spectrum = eig_hermitian(rho)
        dec = decomposition_from_isometry(spectrum, np.eye(3))
        np.testing.assert_allclose(dec.probabilities, spectrum.eigenvalues, atol=1e-14)
        for k, psi in enumerate(dec.states):
            np.testing.assert_allclose(psi.amplitudes, spectrum.eigenvectors[:, k], atol=1e-12)
        assert dec.reconstruction_error(rho) <= 1e-12

    def test_rank_one_states_are_all_the_same_ray(self, rng):
        psi = haar_state(3, rng)
        spectrum = eig_hermitian(pure_density(psi))
        dec = decomposition_from_isometry(spectrum, haar_unitary(3, rng)[:, :1])
        for state in dec.states:
            assert abs(state.inner(psi)) == pytest.approx(1.0, abs=1e-10)

    def test_hadamard_mix_of_symmetric_qubit(self):
        rho = symmetric_state(2, 0.5).density()
        hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        dec = decomposition_from_isometry(eig_hermitian(rho), hadamard)
        np.testing.assert_allclose(dec.probabilities, [0.5, 0.5], atol=1e-12)
        assert dec.reconstruction_error(rho) <= 1e-12

    def test_rejects_non_isometry(self, rng):
        spectrum = eig_hermitian(random_density(3, 2, rng))
        with pytest.raises(NotAnIsometry):
            decomposition_from_isometry(spectrum, np.eye(3))
        with pytest.raises(NotAnIsometry):
            decomposition_from_isometry(spectrum, np.ones((4, 2)))


class TestAverageMeasure:
    def test_single_state(self, rng):
        psi = haar_state(4, rng)
        dec = Decomposition(np.array([1.0]), (psi,))
        assert average_measure(dec, g_polynomial(4), 4) == pytest.approx(evaluate(g_polynomial(4), psi, 4))

    def test_basis_decomposition_is_incoherent(self):
        dec = Decomposition(np.array([0.2, 0.3, 0.5]), tuple(basis_state(3, i) for i in range(3)))
        assert average_measure(dec, g_polynomial(3), 3) == 0.0


class TestSolverConfig:
    def test_validation(self):
        with pytest.raises(PreconditionError):
            SolverConfig(restarts=0)
        with pytest.raises(PreconditionError):
            SolverConfig(max_iterations=0)
        with pytest.raises(PreconditionError):
            SolverConfig(smoothing=())
        with pytest.raises(PreconditionError):
            SolverConfig(smoothing=(1e-3, 0.0))
        with pytest.raises(PreconditionError):
            SolverConfig(size_ladder=(-1,))
        with pytest.raises(PreconditionError):
            SolverConfig(decomposition_size=0)

    def test_size_for_rank(self):
        assert SolverConfig().size_for_rank(3) == 5
        assert SolverConfig().size_for_rank(3, restart=1) == 7
        assert SolverConfig().size_for_rank(3, restart=2) == 5
        assert SolverConfig(decomposition_size=7).size_for_rank(3) == 7
        assert SolverConfig(decomposition_size=7).size_for_rank(3, restart=1) == 7


class TestMinimize:
    def test_pure_state(self, rng):
        psi = haar_state(3, rng)
        result = g_roof(pure_density(psi))
        assert result.decomposition.size == 1
        assert result.value == pytest.approx(evaluate(g_polynomial(3), psi, 3), abs=1e-10)

    def test_maximally_coherent_pure_state(self):
        result = g_roof(SymmetricState.from_overlap(3, 1.0).density())
        assert result.value == pytest.approx(1.0, abs=1e-10)

    def test_support_excluding_a_basis_vector_gives_zero(self):
        rho = DensityMatrix(np.diag([0.5, 0.5, 0.0]))
        result = g_roof(rho)
        assert result.value == 0.0

    @pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 0.95])
    def test_qubit_symmetric_states(self, p):
        state = symmetric_state(2, p)
        result = g_roof(state.density(), replace(QUICK, restarts=8))
        assert result.value == pytest.approx(max(1 - 2 * (1 - state.overlap), 0.0), abs=1e-4)

    def test_result_is_audited_upper_bound(self, rng):
        rho = random_density(3, 3, rng)
        result = g_roof(rho)
        recon, value_error = audit(result, rho, g_polynomial(3), 3)
        assert recon <= 1e-9
        assert value_error <= 1e-12
        assert result.value >= cg_lower_bound(rho) - 1e-9
        assert len(result.restart_values) == QUICK.restarts
        assert result.value == min(result.restart_values)
        assert result.restart_values[result.restart_index] == result.value

    def test_threads_do_not_change_result(self, rng):
        rho = random_density(3, 2, rng)
        single = g_roof(rho, replace(QUICK, threads=1))
        pooled = g_roof(rho, replace(QUICK, threads=3))
        assert single.value == pooled.value
        assert single.restart_values == pooled.restart_values
        assert np.array_equal(single.decomposition.rows(), pooled.decomposition.rows())

    def test_size_smaller_than_rank(self, rng):
        with pytest.raises(RankDeficientSpectrumMismatch):
            g_roof(random_density(3, 3, rng), replace(QUICK, decomposition_size=2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            minimize_convex_roof(DensityMatrix(np.eye(2) / 2), g_polynomial(3), 3, QUICK)

    def test_scale_must_be_positive(self):
        with pytest.raises(PreconditionError):
            minimize_convex_roof(DensityMatrix(np.eye(3) / 3), g_polynomial(3), 0.0, QUICK)

    @pytest.mark.parametrize("d,K", [
        (2, 0.75), (3, 1 / 3), (3, 0.5), (3, 0.9), (4, 0.4), (4, 0.775), (4, 0.95),
    ])
    def test_symmetric_states_match_closed_form(self, d, K):
        rho = SymmetricState.from_overlap(d, K).density()
        result = g_roof(rho, ACCURATE)
        gap = result.value - cg_symmetric(d, K)
        assert -1e-9 <= gap <= 1e-3
        recon, value_error = audit(result, rho, g_polynomial(d), d)
        assert recon <= 1e-8 and value_error <= 1e-12

    def test_lower_bound_holds_on_random_qutrits(self, rng):
        cfg = SolverConfig(restarts=1, seed=3, max_iterations=40, smoothing=(1e-3,))
        for i in range(50):
            rho = random_density(3, 2 + i % 2, rng)
            assert g_roof(rho, cfg).value >= cg_lower_bound(rho) - 1e-9

    @pytest.mark.parametrize("rank", [2, 3])
    def test_twirl_does_not_increase_the_roof(self, rank, rng):
        rho = random_density(3, rank, rng)
        twirled = twirl(rho)
        before = g_roof(rho, ACCURATE).value
        after = g_roof(twirled, ACCURATE).value
        assert after <= before + 1e-3
        assert after <= cg_lower_bound(twirled) + 1e-3

    def test_larger_decompositions_never_do_worse(self):
        rho = symmetric_state(2, 0.6).density()
        values = [g_roof(rho, replace(ACCURATE, decomposition_size=n)).value for n in (2, 3, 4)]
        for smaller, larger in zip(values, values[1:]):
            assert larger <= smaller + 1e-4

    @pytest.mark.slow
    @pytest.mark.parametrize("K", [0.8, 0.9, 0.95])
    def test_random_restarts_never_beat_the_bound(self, K, rng):
        rho = SymmetricState.from_overlap(4, K).density()
        unitary = np.diag(np.exp(2j * np.pi * rng.uniform(size=4)))
        rotated = DensityMatrix(unitary @ rho.entries @ unitary.conj().T)
        result = minimize_convex_roof(rotated, g_polynomial(4), 4, SolverConfig(restarts=8, seed=2))
        assert result.value >= cg_symmetric(4, K) - 1e-9


class TestLocalRefine:
    def test_optimal_basis_decomposition_unchanged(self):
        rho = DensityMatrix(np.diag([0.2, 0.3, 0.5]))
        dec = decomposition_from_isometry(eig_hermitian(rho), np.eye(3))
        refined = local_refine(dec, g_polynomial(3), 3, QUICK)
        assert average_measure(refined, g_polynomial(3), 3) == 0.0

    def test_value_never_increases(self, rng):
        rho = SymmetricState.from_overlap(3, 0.95).density()
        spectrum = eig_hermitian(rho)
        P = g_polynomial(3)
        for _ in range(3):
            start = decomposition_from_isometry(spectrum, haar_unitary(5, rng)[:, :3])
            refined = local_refine(start, P, 3, QUICK)
            assert average_measure(refined, P, 3) <= average_measure(start, P, 3)
            assert refined.reconstruction_error(rho) <= 1e-9

    def test_analytic_start_stays_optimal(self):
        d, K = 4, 0.9
        entries = optimal_symmetric_decomposition(d, K)
        start = Decomposition(np.array([p for p, _ in entries]), tuple(psi for _, psi in entries))
        refined = local_refine(start, g_polynomial(d), d, QUICK)
        assert average_measure(refined, g_polynomial(d), d) == pytest.approx(cg_symmetric(d, K), abs=1e-6)

    def test_dimension_mismatch(self):
        dec = Decomposition(np.array([1.0]), (max_coherent(2),))
        with pytest.raises(DimensionMismatch):
            local_refine(dec, g_polynomial(3), 3, QUICK)


class TestObjective:
    @pytest.mark.parametrize("P,scale", [(g_polynomial(3), 3.0), (MIXED_QUADRATIC, 1.0)])
    def test_gradient_matches_finite_differences(self, P, scale, rng):
        basis = _spectral_basis(eig_hermitian(random_density(3, 3, rng)))
        X = haar_unitary(5, rng)[:, :3] + 0.1 * (rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))
        x = _pack(X)
        _, grad = _objective(x, X.shape, basis, P, scale, 1e-3)
        step = 1e-6
        numeric = np.array([
            (_objective(x + step * e, X.shape, basis, P, scale, 1e-3)[0]
             - _objective(x - step * e, X.shape, basis, P, scale, 1e-3)[0]) / (2 * step)
            for e in np.eye(x.size)
        ])
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-7)

    def test_vanishing_smoothing_gives_the_true_average(self, rng):
        basis = _spectral_basis(eig_hermitian(random_density(3, 3, rng)))
        X = haar_unitary(5, rng)[:, :3] * 1.3
        value, _ = _objective(_pack(X), X.shape, basis, g_polynomial(3), 3.0, 1e-300)
        expected = float(np.sum(weighted_measure(g_polynomial(3), _polar(X) @ basis, 3.0)))
        assert value == pytest.approx(expected, rel=1e-10)
