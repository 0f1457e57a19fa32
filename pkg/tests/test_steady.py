import numpy as np
import pytest
import scipy.linalg

from helpers import random_model, single_space
from meq.hilbert import Operator, identity_operator, transition
from meq.steady import (
    CapacityError,
    DegeneracyError,
    check_uniqueness,
    spectrum,
    steady_dense,
    steady_linsolve,
    steady_sparse,
)
from meq.superspace import LindbladModel, build_liouvillian, liouvillian_oracle


def qubit_decay_model(rate=1.0):
    layout = single_space(2, "q")
    hamiltonian = Operator(layout, np.zeros((2, 2)))
    jump = Operator(layout, transition(2, 1, 2))
    return LindbladModel(hamiltonian, [(rate, jump)])


def driven_qubit_model(omega, rate):
    layout = single_space(2, "q")
    hamiltonian = Operator(layout, omega * (transition(2, 1, 2) + transition(2, 2, 1)))
    jump = Operator(layout, transition(2, 1, 2))
    return LindbladModel(hamiltonian, [(rate, jump)])


def degenerate_model():
    # no dissipation, diagonal H: every diagonal state is steady
    layout = single_space(2, "q")
    return LindbladModel(Operator(layout, np.diag([0.0, 1.0])))


ALL_METHODS = [steady_dense, steady_sparse, steady_linsolve]


class TestQubitDecay:
    @pytest.mark.parametrize("method", ALL_METHODS)
    def test_decays_to_ground(self, method):
        liouv = build_liouvillian(qubit_decay_model())
        result = method(liouv)
        assert np.allclose(result.rho.to_dense(), np.diag([1.0, 0.0]), atol=1e-10)
        assert result.rho.trace() == pytest.approx(1.0, abs=1e-14)
        assert result.residual < 1e-10

    def test_linsolve_trace_by_construction(self):
        liouv = build_liouvillian(qubit_decay_model())
        result = steady_linsolve(liouv)
        assert result.trace_before_normalization == pytest.approx(1.0, abs=1e-14)
        assert result.rho.trace() == 1.0

    def test_methods_report_provenance(self):
        liouv = build_liouvillian(qubit_decay_model())
        assert steady_dense(liouv).method == "dense-eig"
        assert steady_sparse(liouv).method == "sparse-eig"
        assert steady_linsolve(liouv).method == "linsolve"


class TestDrivenQubit:
    @pytest.mark.parametrize("omega,rate", [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)])
    def test_analytic_excited_population(self, omega, rate):
        liouv = build_liouvillian(driven_qubit_model(omega, rate))
        expected = omega**2 / (rate**2 + 2 * omega**2)
        for method in ALL_METHODS:
            rho = method(liouv).rho.to_dense()
            assert rho[1, 1].real == pytest.approx(expected, abs=1e-10)

    def test_nullspace_oracle(self):
        # independent route: elementwise-formula generator + SVD kernel
        model = driven_qubit_model(1.0, 1.0)
        oracle = liouvillian_oracle(model).to_dense()
        kernel = scipy.linalg.null_space(oracle)
        assert kernel.shape[1] == 1
        rho = kernel[:, 0].reshape(2, 2, order="F")
        rho = rho / np.trace(rho)
        assert rho[1, 1].real == pytest.approx(1.0 / 3.0, abs=1e-10)
        result = steady_dense(build_liouvillian(model))
        assert np.abs(result.rho.to_dense() - rho).max() < 1e-10


class TestInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_result_is_a_density_matrix(self, seed):
        rng = np.random.default_rng(30 + seed)
        model = random_model(rng, int(rng.integers(2, 6)), int(rng.integers(1, 3)))
        liouv = build_liouvillian(model)
        for method in ALL_METHODS:
            result = method(liouv)
            rho = result.rho.to_dense()
            assert result.residual < 1e-8 * liouv.norm_inf()
            assert abs(np.trace(rho) - 1) < 1e-12
            assert np.abs(rho - rho.conj().T).max() < 1e-10
            eigenvalues = np.linalg.eigvalsh(rho)
            assert eigenvalues.min() > -1e-10 * np.abs(eigenvalues).max()

    @pytest.mark.parametrize("seed", range(5))
    def test_cross_method_agreement(self, seed):
        rng = np.random.default_rng(40 + seed)
        model = random_model(rng, int(rng.integers(2, 7)), int(rng.integers(1, 4)))
        liouv = build_liouvillian(model)
        assert check_uniqueness(liouv).unique
        dense = steady_dense(liouv).rho.to_dense()
        sparse = steady_sparse(liouv).rho.to_dense()
        solve = steady_linsolve(liouv).rho.to_dense()
        assert np.abs(dense - sparse).max() < 1e-8
        assert np.abs(dense - solve).max() < 1e-8

    def test_gamma_invariance(self):
        liouv = build_liouvillian(driven_qubit_model(1.0, 1.0))
        reference = steady_linsolve(liouv, gamma=1.0).rho.to_dense()
        for gamma in (1e-3, 1e3):
            other = steady_linsolve(liouv, gamma=gamma).rho.to_dense()
            assert np.abs(other - reference).max() < 1e-9

    def test_row_choice_invariance(self):
        liouv = build_liouvillian(driven_qubit_model(1.3, 0.7))
        reference = steady_linsolve(liouv, l=1).rho.to_dense()
        other = steady_linsolve(liouv, l=2).rho.to_dense()
        assert np.abs(other - reference).max() < 1e-9

    def test_linsolve_argument_validation(self):
        liouv = build_liouvillian(qubit_decay_model())
        with pytest.raises(ValueError):
            steady_linsolve(liouv, l=0)
        with pytest.raises(ValueError):
            steady_linsolve(liouv, l=3)
        with pytest.raises(ValueError):
            steady_linsolve(liouv, gamma=-1.0)


class TestDegeneracy:
    def test_dense_detects_degenerate_kernel(self):
        liouv = build_liouvillian(degenerate_model())
        with pytest.raises(DegeneracyError):
            steady_dense(liouv)

    def test_sparse_detects_degenerate_kernel(self):
        liouv = build_liouvillian(degenerate_model())
        with pytest.raises(DegeneracyError):
            steady_sparse(liouv)

    def test_linsolve_detects_degenerate_kernel(self):
        liouv = build_liouvillian(degenerate_model())
        with pytest.raises(DegeneracyError):
            steady_linsolve(liouv)

    def test_linsolve_sparse_storage_degenerate(self):
        liouv = build_liouvillian(degenerate_model()).with_storage("sparse")
        with pytest.raises(DegeneracyError):
            steady_linsolve(liouv)

    def test_capacity_guard(self):
        liouv = build_liouvillian(qubit_decay_model())
        with pytest.raises(CapacityError, match="steady_sparse"):
            steady_dense(liouv, max_dim=3)


class TestSpectrum:
    def test_qubit_decay_rates(self):
        liouv = build_liouvillian(qubit_decay_model())
        values = spectrum(liouv, 4).eigenvalues
        assert np.allclose(sorted(values.real), [-2, -1, -1, 0], atol=1e-12)
        assert np.abs(values.imag).max() < 1e-12

    def test_sorted_descending(self):
        rng = np.random.default_rng(50)
        liouv = build_liouvillian(random_model(rng, 4, 2))
        values = spectrum(liouv, 16).eigenvalues
        assert all(a.real >= b.real - 1e-12 for a, b in zip(values, values[1:]))

    def test_conjugate_pair_closure(self):
        rng = np.random.default_rng(51)
        liouv = build_liouvillian(random_model(rng, 3, 1))
        values = spectrum(liouv, 9).eigenvalues
        # the full spectrum must be closed under conjugation
        for value in values:
            assert any(abs(np.conj(value) - other) < 1e-8 for other in values)

    def test_tie_break_descending_imaginary(self):
        layout = single_space(2, "q")
        # H = sigma_z rotation: eigenvalues 0, 0, +2i, -2i, all real parts 0
        model = LindbladModel(Operator(layout, np.diag([-1.0, 1.0])))
        values = spectrum(build_liouvillian(model), 4).eigenvalues
        assert np.allclose(values.imag, [2.0, 0.0, 0.0, -2.0], atol=1e-12)

    def test_sparse_matches_dense(self):
        rng = np.random.default_rng(52)
        liouv = build_liouvillian(random_model(rng, 4, 2))
        dense = spectrum(liouv, 4, method="dense").eigenvalues
        sparse = spectrum(liouv, 4, method="sparse").eigenvalues
        assert np.allclose(dense, sparse, atol=1e-8)

    def test_k_range(self):
        liouv = build_liouvillian(qubit_decay_model())
        with pytest.raises(ValueError):
            spectrum(liouv, 0)
        with pytest.raises(ValueError):
            spectrum(liouv, 5)


class TestSparseStorage:
    @pytest.mark.parametrize("method", ALL_METHODS)
    def test_methods_accept_sparse_generators(self, method):
        liouv = build_liouvillian(driven_qubit_model(1.0, 1.0), storage="sparse")
        assert liouv.storage == "sparse"
        rho = method(liouv).rho.to_dense()
        assert rho[1, 1].real == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_cascade_sparse_reports_zero_eigenvalue(self, cascade_sparse):
        result, _ = cascade_sparse
        assert abs(result.eigenvalue) < 1e-10

    def test_cascade_sparse_lr_spectrum(self, cascade_liouvillian):
        # Arnoldi largest-real-part iteration at full size, against the
        # dense-route values
        values = spectrum(cascade_liouvillian, 5, method="sparse").eigenvalues
        assert np.allclose(
            values.real, [0.0, -1.0631, -1.5594, -1.5594, -1.5596], atol=5e-3
        )
        assert abs(values[0]) < 1e-10
        assert sorted(np.round(np.abs(values.imag), 2)) == pytest.approx(
            [0.0, 0.0, 20.62, 20.62, 20.62], abs=0.01
        )


class TestUniqueness:
    def test_qubit_decay_unique(self):
        report = check_uniqueness(build_liouvillian(qubit_decay_model()))
        assert report.unique
        assert abs(report.lambda0) < 1e-12
        assert report.lambda1.real == pytest.approx(-1.0, abs=1e-10)

    def test_cascade_benchmark_unique(self, cascade_liouvillian):
        report = check_uniqueness(cascade_liouvillian, method="sparse")
        assert report.unique
        assert abs(report.lambda0) < 1e-10
        assert report.lambda1.real == pytest.approx(-1.0631, abs=5e-3)

    def test_hamiltonian_only_never_unique(self):
        rng = np.random.default_rng(53)
        from helpers import random_hermitian

        layout = single_space(3, "q")
        model = LindbladModel(Operator(layout, random_hermitian(rng, 3)))
        report = check_uniqueness(build_liouvillian(model))
        assert not report.unique
