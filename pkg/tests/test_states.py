"""Tests for density operators, pure states and their bipartite algebra."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings as hypothesis_settings
from hypothesis import strategies as st

from entanglement.space import harmonic_space
from entanglement.states import (
    DensityOperator,
    PureState,
    apply_unitary,
    basis_state,
    bell_state,
    is_npt,
    mix,
    partial_trace_a,
    partial_trace_b,
    partial_transpose_a,
    phi_plus,
    product_state,
    project_to_cutoff,
    pure_trace_distance,
    random_density,
    random_local_unitary,
    random_pure_state,
    random_separable,
    restrict_to_block,
    schmidt_decompose,
    tensor_power,
    tensor_power_pure,
    trace_norm_distance,
)
from shared.errors import InvalidArgumentError, InvalidStateError, ResourceLimitError

pytestmark = pytest.mark.unit

dimensions = st.integers(min_value=2, max_value=4)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestDensityOperator:
    def test_rejects_non_square(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.ones((2, 3)) / 2)

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(InvalidStateError):
            DensityOperator(m)

    def test_rejects_wrong_trace(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.eye(2) * 0.6)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_matrix_is_read_only(self, bell):
        rho = bell.density()
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0

    def test_purity(self, bell):
        assert bell.density().is_pure()
        assert not DensityOperator(np.eye(4) / 4).is_pure()

    def test_dominant_vector_recovers_pure_state(self, bell):
        psi = bell.density().dominant_vector()
        assert abs(psi.overlap(bell)) == pytest.approx(1.0, abs=1e-12)


class TestPureState:
    def test_small_norm_deviation_renormalised(self):
        psi = PureState(np.array([1.0 + 5e-7, 0.0]))
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_normalised_vector_kept_bit_for_bit(self, qutrits, rng):
        for _ in range(50):
            z = rng.normal(size=9) + 1j * rng.normal(size=9)
            v = z / np.linalg.norm(z)
            assert np.array_equal(PureState(v).amplitudes, v)

    def test_large_norm_deviation_rejected(self):
        with pytest.raises(InvalidStateError):
            PureState(np.array([1.0, 1.0]))

    def test_product_state_normalises_factors(self):
        psi = product_state(np.array([3.0, 0.0]), np.array([1.0, 1.0]))
        assert np.allclose(psi.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])


class TestSchmidt:
    def test_bell_coefficients(self, qubits, bell):
        schmidt = schmidt_decompose(bell, qubits)
        assert np.allclose(schmidt.coefficients, [0.5, 0.5])
        assert schmidt.rank() == 2

    def test_coefficients_invariant_under_local_unitaries(self, rng):
        space = harmonic_space(2, 3)
        for _ in range(100):
            psi = random_pure_state(space, rng)
            rotated = apply_unitary(psi, random_local_unitary(space, rng))
            assert np.allclose(
                schmidt_decompose(rotated, space).coefficients,
                schmidt_decompose(psi, space).coefficients,
                atol=1e-12,
            )

    def test_product_state_has_rank_one(self, qutrits, rng):
        psi = product_state(rng.normal(size=3), rng.normal(size=3))
        assert schmidt_decompose(psi, qutrits).rank() == 1

    @seed(11)
    @hypothesis_settings(deadline=None, max_examples=50)
    @given(d_a=dimensions, d_b=dimensions, state_seed=seeds)
    def test_reconstruction(self, d_a, d_b, state_seed):
        space = harmonic_space(d_a, d_b)
        psi = random_pure_state(space, np.random.default_rng(state_seed))
        schmidt = schmidt_decompose(psi, space)
        assert np.allclose(schmidt.reconstruct(), psi.amplitudes, atol=1e-12)
        assert schmidt.coefficients.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(schmidt.coefficients) <= 1e-15)


class TestPartialOperations:
    def test_bell_marginals_are_maximally_mixed(self, qubits, bell):
        assert np.allclose(partial_trace_b(bell, qubits).matrix, np.eye(2) / 2)
        assert np.allclose(partial_trace_a(bell, qubits).matrix, np.eye(2) / 2)

    def test_marginals_of_product(self):
        space = harmonic_space(2, 3)
        a = np.array([1.0, 1.0j]) / math.sqrt(2)
        b = np.array([0.0, 1.0, 0.0])
        psi = product_state(a, b)
        assert np.allclose(partial_trace_b(psi, space).matrix, np.outer(a, a.conj()))
        assert np.allclose(partial_trace_a(psi, space).matrix, np.outer(b, b.conj()))

    @seed(12)
    @hypothesis_settings(deadline=None, max_examples=50)
    @given(d_a=dimensions, d_b=dimensions, state_seed=seeds)
    def test_marginals_share_spectrum_for_pure_states(self, d_a, d_b, state_seed):
        space = harmonic_space(d_a, d_b)
        psi = random_pure_state(space, np.random.default_rng(state_seed))
        spectrum_a = np.sort(partial_trace_b(psi, space).spectrum)[::-1]
        spectrum_b = np.sort(partial_trace_a(psi, space).spectrum)[::-1]
        r = min(d_a, d_b)
        assert np.allclose(spectrum_a[:r], spectrum_b[:r], atol=1e-12)

    def test_partial_transpose_of_bell(self, qubits, bell):
        witness = np.linalg.eigvalsh(partial_transpose_a(bell, qubits))[0]
        assert witness == pytest.approx(-0.5)
        npt, value = is_npt(bell, qubits, 1e-12)
        assert npt and value == pytest.approx(-0.5)

    def test_partial_transpose_is_an_involution(self, qutrits, rng):
        m = random_density(qutrits, rng).matrix
        twice = partial_transpose_a(partial_transpose_a(m, qutrits), qutrits)
        assert np.allclose(twice, m)

    def test_separable_states_are_ppt(self, qutrits, rng):
        for _ in range(20):
            npt, _ = is_npt(random_separable(qutrits, rng, terms=3), qutrits, 1e-10)
            assert not npt

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.5, 0.75, 1.0])
    def test_werner_partial_transpose_spectrum(self, werner, qubits, p):
        smallest = np.linalg.eigvalsh(partial_transpose_a(werner(p), qubits))[0]
        assert smallest == pytest.approx((1 - 3 * p) / 4, abs=1e-12)

    def test_werner_threshold_is_ppt(self, werner, qubits):
        npt, witness = is_npt(werner(1 / 3), qubits, 1e-9)
        assert not npt
        assert witness == pytest.approx(0.0, abs=1e-12)

    def test_partial_trace_is_contractive(self, rng):
        space = harmonic_space(2, 3)
        for _ in range(200):
            rho, sigma = random_density(space, rng), random_density(space, rng)
            reduced = trace_norm_distance(partial_trace_b(rho, space), partial_trace_b(sigma, space))
            assert reduced <= trace_norm_distance(rho, sigma) + 1e-12

    def test_npt_tolerance_must_be_positive(self, qubits, bell):
        with pytest.raises(InvalidArgumentError):
            is_npt(bell, qubits, 0.0)


class TestDistances:
    def test_orthogonal_pure_states_at_distance_two(self, qubits):
        assert trace_norm_distance(basis_state(qubits, 0, 0), basis_state(qubits, 1, 1)) == pytest.approx(2.0)

    def test_pure_fast_path_matches_matrix_path(self, qutrits, rng):
        psi, phi = random_pure_state(qutrits, rng), random_pure_state(qutrits, rng)
        assert pure_trace_distance(psi, phi) == pytest.approx(trace_norm_distance(psi, phi), abs=1e-10)

    def test_symmetry_and_triangle_inequality(self, qutrits, rng):
        for _ in range(100):
            x, y, z = (random_density(qutrits, rng) for _ in range(3))
            assert trace_norm_distance(x, y) == pytest.approx(trace_norm_distance(y, x), abs=1e-12)
            assert trace_norm_distance(x, z) <= trace_norm_distance(x, y) + trace_norm_distance(y, z) + 1e-12

    def test_identical_states_at_distance_zero(self, bell):
        assert pure_trace_distance(bell, bell) == 0.0

    def test_mixture_distance_is_linear_in_weight(self, qubits, bell):
        ground = basis_state(qubits, 0, 0)
        rho = mix([ground, bell], [0.9, 0.1])
        assert trace_norm_distance(ground, rho) == pytest.approx(0.1 * trace_norm_distance(ground, bell))

    def test_mix_rejects_bad_weights(self, bell):
        with pytest.raises(InvalidArgumentError):
            mix([bell, bell], [0.7, 0.7])


class TestBlocksAndCutoffs:
    def test_restrict_to_block(self):
        space = harmonic_space(5, 5)
        block, block_space = restrict_to_block(phi_plus(space, 2), space, (2, 3))
        assert block_space.dims == (2, 2)
        assert block_space.spec_a.levels == (2.0, 3.0)
        assert np.allclose(block, bell_state(harmonic_space(2, 2)).density().matrix)

    def test_project_to_cutoff_is_unnormalised(self):
        space = harmonic_space(4, 4)
        rho = mix([basis_state(space, 0, 0), basis_state(space, 3, 3)], [0.75, 0.25])
        projected = project_to_cutoff(rho, space, 3)
        assert np.trace(projected).real == pytest.approx(0.75)


class TestTensorPower:
    def test_power_space_is_energy_sorted(self, qutrits):
        power = tensor_power(basis_state(qutrits, 0, 0), qutrits, 2)
        levels = power.space.spec_a.levels
        assert power.space.dims == (9, 9)
        assert list(levels) == sorted(levels)
        assert levels[:3] == (0.0, 1.0, 1.0)

    def test_pure_and_dense_paths_agree(self, qubits, bell):
        dense = tensor_power(bell, qubits, 2)
        pure = tensor_power_pure(bell, qubits, 2)
        assert np.allclose(dense.state.matrix, pure.state.density().matrix)

    def test_bell_power_is_two_ebits_of_schmidt_weight(self, qubits, bell):
        power = tensor_power_pure(bell, qubits, 2)
        assert np.allclose(schmidt_decompose(power.state, power.space).coefficients, [0.25] * 4)

    def test_caps(self, qutrits, bell):
        psi = basis_state(qutrits, 0, 0)
        with pytest.raises(ResourceLimitError, match="TENSOR_POWER_CAP"):
            tensor_power(psi, qutrits, 4)
        with pytest.raises(ResourceLimitError, match="PURE_POWER_CAP"):
            tensor_power_pure(psi, qutrits, 7)

    def test_zero_copies_rejected(self, qubits, bell):
        with pytest.raises(InvalidArgumentError):
            tensor_power(bell, qubits, 0)
