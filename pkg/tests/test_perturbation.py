import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infobounds.bounds import generalized_qfi_expanded, mandelstam_tamm_modified, margolus_levitin_modified, expectation_inputs
from infobounds.hilbert import FockOperator, StateVector, coherent_state, expectation, oscillator_hamiltonian, position_op
from infobounds.nonlocal_model import hamiltonians
from infobounds.perturbation import (
    DegeneracyError,
    DeformedOperator,
    DeformedState,
    FirstOrderWarning,
    assemble_deformed_density,
    check_eta,
    deformed_variance,
    modified_variation,
    rayleigh_first_order,
    variance_parts,
)

from instances import halving_ratio, qfi_oracle, random_hermitian, random_instance, variance_oracle


def test_undeformed_limit_gives_zero_rho1():
    d = assemble_deformed_density([0.7, 0.3], [0, 0], np.eye(2), np.zeros((2, 2)))
    np.testing.assert_array_equal(d.rho1, np.zeros((2, 2)))


def test_pure_state_rotation_rho1():
    eps = 0.3
    corr = np.zeros((3, 3), dtype=complex)
    corr[1, 0] = eps
    d = assemble_deformed_density([1, 0, 0], [0, 0, 0], np.eye(3), corr)
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = eps
    np.testing.assert_allclose(d.rho1, expected, atol=1e-15)


def test_gauge_projection_makes_rho1_traceless():
    rng = np.random.default_rng(5)
    corr = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    p1 = np.array([0.1, -0.05, -0.05, 0.0])
    d = assemble_deformed_density([0.4, 0.3, 0.2, 0.1], p1, np.eye(4), corr)
    assert abs(np.trace(d.rho1)) <= 1e-10
    np.testing.assert_allclose(np.diag(d.basis.conj().T @ d.basis_corrections), 0, atol=1e-15)


def test_rho1_reproduced_from_parts():
    rng = np.random.default_rng(6)
    dden, _ = random_instance(rng, 5, 1e-3)
    rebuilt = np.zeros((5, 5), dtype=complex)
    for i in range(5):
        v, v1 = dden.basis[:, i], dden.basis_corrections[:, i]
        rebuilt += dden.probs[i] * (np.outer(v, v1.conj()) + np.outer(v1, v.conj()))
        rebuilt += dden.prob_corrections[i] * np.outer(v, v.conj())
    assert np.max(np.abs(rebuilt - dden.rho1)) <= 1e-12


def test_rejects_bad_inputs():
    with pytest.raises(ValueError, match="sum to 0"):
        assemble_deformed_density([0.5, 0.5], [0.1, 0.0], np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ValueError, match="orthonormal"):
        assemble_deformed_density([0.5, 0.5], [0, 0], np.array([[1, 1], [0, 1]]), np.zeros((2, 2)))


def test_modified_variation_trivial_cases():
    rng = np.random.default_rng(7)
    K = FockOperator(random_hermitian(rng, 3))
    d = assemble_deformed_density([0.5, 0.3, 0.2], [0, 0, 0], np.eye(3), np.zeros((3, 3)))
    dK, d1K1 = modified_variation(DeformedOperator(K, FockOperator.zeros(3), 0.1), d)
    np.testing.assert_array_equal(d1K1.entries, 0)
    np.testing.assert_allclose(dK.entries, K.entries - np.trace(d.rho.entries @ K.entries) * np.eye(3))

    dden, _ = random_instance(rng, 4, 1e-3)
    ident = FockOperator.identity(4)
    dK, d1K1 = modified_variation(DeformedOperator(ident, ident, 0.01), dden)
    assert np.max(np.abs(dK.entries)) <= 1e-12
    assert np.max(np.abs(d1K1.entries)) <= 1e-12


def test_modified_variation_quartic_on_vacuum():
    dim = 16
    x = position_op(dim)
    H = oscillator_hamiltonian(dim)
    p = np.zeros(dim)
    p[0] = 1
    d = assemble_deformed_density(p, np.zeros(dim), np.eye(dim), np.zeros((dim, dim)))
    _, d1K1 = modified_variation(DeformedOperator(H, (x ** 4) * 0.5, 0.01), d)
    np.testing.assert_allclose(d1K1.entries, ((x ** 4) * 0.5).entries - 0.375 * np.eye(dim), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_modified_variation_affine_in_k1(seed, a, b):
    # the Tr(rho1 K) shift does not depend on K1, so subtract the K1 = 0 value
    rng = np.random.default_rng(seed)
    dden, dop = random_instance(rng, 4, 1e-3, hermitian_k1=False)
    K1p = FockOperator(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))

    def d1(K1):
        return modified_variation(DeformedOperator(dop.K, K1, dop.eta), dden)[1].entries

    zero = d1(FockOperator.zeros(4))
    np.testing.assert_allclose(zero, -np.trace(dden.rho1 @ dop.K.entries) * np.eye(4), atol=1e-12)
    mix = d1(dop.K1 * a + K1p * b) - zero
    np.testing.assert_allclose(mix, a * (d1(dop.K1) - zero) + b * (d1(K1p) - zero), atol=1e-10)


def test_deformed_variance_eta_zero_is_plain_variance():
    rng = np.random.default_rng(8)
    dden, dop = random_instance(rng, 5, 0.0)
    assert deformed_variance(dop, dden) == pytest.approx(variance_oracle(dden.rho.entries, dop.K.entries), rel=1e-12)


def test_deformed_variance_k1_proportional_to_k():
    rng = np.random.default_rng(9)
    K = random_hermitian(rng, 4)
    d = assemble_deformed_density([0.4, 0.3, 0.2, 0.1], [0] * 4, np.eye(4), np.zeros((4, 4)))
    c, eta = 0.7, 0.01
    var = variance_oracle(d.rho.entries, K)
    got = deformed_variance(DeformedOperator(FockOperator(K), FockOperator(c * K), eta), d)
    assert got == pytest.approx(var + 2 * eta * c * var, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_deformed_variance_first_order_against_bruteforce(seed):
    rng = np.random.default_rng(100 + seed)
    dden, dop = random_instance(rng, 6, 1e-3)

    def residual(eta):
        exact = variance_oracle(dden.assembled(eta), dop.K.entries + eta * dop.K1.entries)
        return deformed_variance(dop.with_eta(eta), dden) - exact

    assert 3.5 <= halving_ratio(residual, 1e-3) <= 4.5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1e-2, 1e-2))
def test_trace_preserved(seed, eta):
    dden, _ = random_instance(np.random.default_rng(seed), 5, eta)
    assert abs(np.trace(dden.assembled(eta)) - 1) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5))
def test_gauge_invariance(seed, gamma):
    rng = np.random.default_rng(seed)
    dden, dop = random_instance(rng, 4, 1e-3)
    shifted = assemble_deformed_density(
        dden.probs, dden.prob_corrections, dden.basis, dden.basis_corrections + 1j * gamma * dden.basis
    )
    assert variance_parts(dop, shifted).total == pytest.approx(variance_parts(dop, dden).total, abs=1e-10)
    assert generalized_qfi_expanded(shifted, dop) == pytest.approx(generalized_qfi_expanded(dden, dop), abs=1e-10)
    assert mandelstam_tamm_modified(variance_parts(dop, shifted), dop.eta) == pytest.approx(
        mandelstam_tamm_modified(variance_parts(dop, dden), dop.eta), abs=1e-10
    )
    np.testing.assert_allclose(expectation_inputs(dop, shifted), expectation_inputs(dop, dden), atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_first_order_consistency_with_rediagonalized_density(seed):
    rng = np.random.default_rng(200 + seed)
    dden, dop = random_instance(rng, 5, 1e-3)

    def residual(eta):
        oracle = qfi_oracle(dden.assembled(eta), dop.K.entries + eta * dop.K1.entries)
        return generalized_qfi_expanded(dden, dop.with_eta(eta)) - oracle

    assert halving_ratio(residual, 1e-3) >= 3.5


def test_eta_guard_warns():
    rng = np.random.default_rng(10)
    dden, dop = random_instance(rng, 4, 0.5)
    with pytest.warns(FirstOrderWarning):
        check_eta(dop, dden)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_eta(dop.with_eta(1e-4), dden)


def test_deformed_state_density_matches_outer_products():
    psi = coherent_state(0.8, 24)
    rng = np.random.default_rng(11)
    psi1 = StateVector(rng.normal(size=24) * 0.1 + 1j * rng.normal(size=24) * 0.1)
    ds = DeformedState(psi, psi1, 1e-3)
    d = ds.density()
    v = psi.amplitudes
    w = psi1.amplitudes - np.vdot(v, psi1.amplitudes) * v
    expected = np.outer(v, w.conj()) + np.outer(w, v.conj())
    np.testing.assert_allclose(d.rho1, expected, atol=1e-12)
    # the deformed basis stays orthonormal to first order
    vg = d.deformed_basis(1e-4)
    assert np.max(np.abs(vg.conj().T @ vg - np.eye(24))) < 1e-6


def test_rayleigh_trivial_cases():
    H = oscillator_hamiltonian(9)
    np.testing.assert_array_equal(rayleigh_first_order(H, FockOperator.zeros(9)), 0)
    diag = FockOperator(np.diag(np.linspace(0, 1, 9)))
    np.testing.assert_allclose(rayleigh_first_order(H, diag), 0, atol=1e-15)


def test_rayleigh_nonlocal_hermitian_part():
    dim = 24
    H, H1 = hamiltonians(dim)
    h1 = FockOperator(H1.hermitian_part)
    corr = rayleigh_first_order(H, h1)
    vac = StateVector.basis(0, dim)
    # first-order ground shift equals the plain expectation
    assert expectation(h1, vac).real == pytest.approx(0.375, abs=1e-12)
    # eigenvectors of H + eta h1 agree with |i> + eta |i_1> to O(eta^2)
    from infobounds.hilbert import hermitian_eigendecompose

    V = hermitian_eigendecompose(H).eigenvectors

    def residual(eta):
        w, U = np.linalg.eigh(H.entries + eta * h1.entries)
        u0 = U[:, 0] * np.exp(-1j * np.angle(U[0, 0]))
        approx = V[:, 0] + eta * corr[:, 0]
        approx = approx / np.linalg.norm(approx)
        approx = approx * np.exp(-1j * np.angle(approx[0]))
        return np.linalg.norm(u0 - approx)

    assert 3.5 <= halving_ratio(residual, 1e-4) <= 4.5


def test_rayleigh_raises_on_coupled_degeneracy():
    H = FockOperator(np.diag([0.0, 1.0, 1.0]))
    V = np.zeros((3, 3))
    V[1, 2] = V[2, 1] = 0.5
    with pytest.raises(DegeneracyError) as info:
        rayleigh_first_order(H, FockOperator(V))
    assert info.value.gap == 0
