import math

import numpy as np
import pytest

from clockwalk.lattice_walk import (
    SQRT2,
    DecomposedField,
    LatticeParams,
    phi_step,
    point_source_phi,
)
from clockwalk.spectral_limit import (
    PSI_DENSITY_CALIBRATION,
    SpectralField,
    assemble_psi,
    continuum_propagator,
    eigenvalue_leading_order,
    eigenvalues,
    fresnel_kernel,
    from_spectral,
    momentum_grid,
    spectral_l2_norm,
    spectral_step,
    stroboscopic_power,
    to_spectral,
    transfer_matrix,
)
from clockwalk.reference_solutions import fit_convergence_order


def params_for(n=64, delta=0.1, alpha=1.0):
    return LatticeParams(delta=delta, epsilon=delta * delta, site_count=n, alpha=alpha)


class TestMomentumGrid:
    def test_structure(self):
        params = params_for(n=8, delta=0.1)
        p = momentum_grid(params)
        assert p.shape == (8,)
        assert 0.0 in p
        spacing = 2.0 * math.pi / (8 * 0.1)
        np.testing.assert_allclose(np.diff(p), spacing, rtol=1e-15)
        assert p[0] == -4 * spacing  # most negative, Nyquist side

    def test_rejects_odd(self):
        with pytest.raises(ValueError):
            momentum_grid(LatticeParams(0.1, 0.01, 7))


class TestTransforms:
    def test_delta_at_origin_is_flat(self):
        params = params_for(n=16)
        phi = np.zeros((2, 16))
        phi[1, 0] = 1.0
        sf = to_spectral(phi, params)
        np.testing.assert_allclose(sf.values[0], 0.0, atol=0)
        np.testing.assert_allclose(sf.values[1], 1.0, rtol=0, atol=1e-14)

    def test_uniform_concentrates_at_zero_momentum(self):
        params = params_for(n=16)
        phi = np.zeros((2, 16))
        phi[0] = 1.0
        sf = to_spectral(phi, params)
        i0 = int(np.where(sf.p == 0.0)[0][0])
        assert abs(sf.values[0, i0] - 16.0) < 1e-12
        off = np.delete(sf.values[0], i0)
        assert np.max(np.abs(off)) < 1e-12

    def test_roundtrip(self):
        params = params_for(n=32)
        rng = np.random.default_rng(0)
        phi = rng.random((2, 32)) - 0.5
        back = from_spectral(to_spectral(phi, params), params)
        np.testing.assert_allclose(back, phi, rtol=0, atol=1e-12)

    def test_matches_explicit_dft(self):
        """Brute-force O(N^2) transform with the same sign convention."""
        params = params_for(n=16, delta=0.3)
        rng = np.random.default_rng(1)
        phi = rng.random((2, 16)) - 0.5
        sf = to_spectral(phi, params)
        m = np.arange(16)
        for row in range(2):
            for j, pj in enumerate(sf.p):
                explicit = np.sum(phi[row] * np.exp(-1j * pj * m * params.delta))
                assert abs(sf.values[row, j] - explicit) < 1e-10

    def test_real_field_has_hermitian_spectrum(self):
        params = params_for(n=16)
        rng = np.random.default_rng(2)
        phi = rng.random((2, 16)) - 0.5
        sf = to_spectral(phi, params)
        # p and -p entries are conjugate; index N/2 + j holds p_j
        n = 16
        for j in range(1, n // 2):
            plus = sf.values[:, n // 2 + j]
            minus = sf.values[:, n // 2 - j]
            np.testing.assert_allclose(minus, np.conj(plus), rtol=0, atol=1e-12)

    def test_rejects_wrong_shape(self):
        params = params_for(n=16)
        with pytest.raises(ValueError):
            to_spectral(np.zeros((2, 8)), params)
        with pytest.raises(ValueError):
            to_spectral(np.zeros((3, 16)), params)


class TestTransferMatrix:
    def test_step_commutes_with_transform(self):
        """One position step then transform equals transform then matrix step."""
        for alpha in (1.0, SQRT2):
            params = params_for(n=32, alpha=alpha)
            rng = np.random.default_rng(3)
            phi = rng.random((2, 32)) - 0.5
            lhs = to_spectral(phi_step(phi, params), params).values
            sf = to_spectral(phi, params)
            rhs = spectral_step(sf.values, sf.p, params.delta, alpha)
            np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_matrix_matches_vectorized_step(self):
        params = params_for(n=16, alpha=SQRT2)
        p = momentum_grid(params)
        rng = np.random.default_rng(4)
        values = rng.random((2, 16)) + 1j * rng.random((2, 16))
        stepped = spectral_step(values, p, params.delta, SQRT2)
        for j, pj in enumerate(p):
            tm = transfer_matrix(float(pj), params.delta, SQRT2)
            np.testing.assert_allclose(tm.matrix @ values[:, j], stepped[:, j], rtol=0, atol=1e-13)

    def test_zero_momentum_is_eighth_root(self):
        tm = transfer_matrix(0.0, 0.1, SQRT2)
        # quarter turn after two steps, identity after eight
        sq = tm.matrix @ tm.matrix
        np.testing.assert_allclose(sq, [[0.0, -1.0], [1.0, 0.0]], rtol=0, atol=1e-15)
        np.testing.assert_allclose(stroboscopic_power(tm, 8), np.eye(2), rtol=0, atol=1e-14)

    def test_unitary_at_sqrt2(self):
        for p in np.linspace(-3.0, 3.0, 101):
            tm = transfer_matrix(float(p), 0.1, SQRT2)
            resid = tm.matrix.conj().T @ tm.matrix - np.eye(2)
            assert np.max(np.abs(resid)) <= 1e-14

    def test_halved_gram_at_alpha_one(self):
        tm = transfer_matrix(0.7, 0.1, 1.0)
        resid = tm.matrix.conj().T @ tm.matrix - 0.5 * np.eye(2)
        assert np.max(np.abs(resid)) <= 1e-15


class TestEigenvalues:
    def test_zero_momentum_eighth_roots_of_unity(self):
        tm = transfer_matrix(0.0, 0.1, SQRT2)
        lam_p, lam_m = eigenvalues(tm)
        assert abs(lam_p - np.exp(1j * math.pi / 4)) < 1e-15
        assert abs(lam_m - np.exp(-1j * math.pi / 4)) < 1e-15

    def test_constant_modulus(self):
        for alpha in (1.0, SQRT2, 0.7):
            for p in (-2.0, 0.0, 0.3, 1.9):
                lam_p, lam_m = eigenvalues(transfer_matrix(p, 0.1, alpha))
                assert abs(abs(lam_p) - alpha / SQRT2) < 1e-15
                assert abs(abs(lam_m) - alpha / SQRT2) < 1e-15

    def test_satisfy_characteristic_polynomial(self):
        for p in (-1.2, 0.0, 0.8, 2.5):
            tm = transfer_matrix(p, 0.2, SQRT2)
            tr = complex(np.trace(tm.matrix))
            det = complex(np.linalg.det(tm.matrix))
            for lam in eigenvalues(tm):
                assert abs(lam * lam - tr * lam + det) < 1e-12

    def test_product_is_determinant(self):
        for alpha in (1.0, SQRT2):
            tm = transfer_matrix(1.1, 0.15, alpha)
            lam_p, lam_m = eigenvalues(tm)
            assert abs(lam_p * lam_m - 0.5 * alpha * alpha) < 1e-14

    def test_expansion_residual_is_fourth_order(self):
        deltas = [0.2, 0.1, 0.05]
        errs = []
        for d in deltas:
            lam, _ = eigenvalues(transfer_matrix(1.0, d, SQRT2))
            errs.append(abs(lam - eigenvalue_leading_order(1.0, d, SQRT2)))
        order = fit_convergence_order(deltas, errs)
        assert order >= 3.8


class TestStroboscopicPower:
    def test_zero_power_identity(self):
        tm = transfer_matrix(0.9, 0.1, SQRT2)
        np.testing.assert_allclose(stroboscopic_power(tm, 0), np.eye(2), rtol=0, atol=0)

    def test_rejects_non_multiple_of_eight(self):
        tm = transfer_matrix(0.9, 0.1, SQRT2)
        for s in (1, 7, 12):
            with pytest.raises(ValueError):
                stroboscopic_power(tm, s)

    def test_sixteen_is_square_of_eight(self):
        tm = transfer_matrix(0.9, 0.1, SQRT2)
        t8 = stroboscopic_power(tm, 8)
        np.testing.assert_allclose(stroboscopic_power(tm, 16), t8 @ t8, rtol=0, atol=1e-14)

    def test_trace_and_determinant_from_eigenvalues(self):
        tm = transfer_matrix(0.6, 0.1, SQRT2)
        lam_p, lam_m = eigenvalues(tm)
        ts = stroboscopic_power(tm, 24)
        assert abs(np.trace(ts) - (lam_p**24 + lam_m**24)) < 1e-10
        assert abs(np.linalg.det(ts) - (lam_p * lam_m) ** 24) < 1e-10

    def test_decaying_branch_shrinks(self):
        tm = transfer_matrix(0.6, 0.1, 1.0)
        ts = stroboscopic_power(tm, 32)
        assert np.max(np.abs(ts)) < 2.0 * 0.5**16


class TestContinuumPropagator:
    def test_zero_time_identity(self):
        np.testing.assert_allclose(continuum_propagator(1.3, 0.5, 0.0), np.eye(2), rtol=0, atol=0)

    def test_group_property(self):
        a = continuum_propagator(0.8, 0.5, 1.0)
        b = continuum_propagator(0.8, 0.5, 2.5)
        c = continuum_propagator(0.8, 0.5, 3.5)
        np.testing.assert_allclose(a @ b, c, rtol=0, atol=1e-14)

    def test_rotation_angle(self):
        p, D, t = 1.5, 0.5, 2.0
        r = continuum_propagator(p, D, t)
        th = p * p * D * t
        np.testing.assert_allclose(r, [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], rtol=0, atol=1e-15)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            continuum_propagator(1.0, 0.5, -0.1)


class TestAssemblePsi:
    def test_point_source_splits_evenly(self):
        plus, minus = assemble_psi(np.array([0.0]), np.array([SQRT2]))
        assert abs(plus[0] - 1.0 / SQRT2) < 1e-15
        assert abs(minus[0] - 1.0 / SQRT2) < 1e-15

    def test_invertible(self):
        rng = np.random.default_rng(5)
        phi1 = rng.random(16) - 0.5
        phi2 = rng.random(16) - 0.5
        plus, minus = assemble_psi(phi1, phi2)
        np.testing.assert_allclose(plus + minus, phi2, rtol=0, atol=1e-15)
        np.testing.assert_allclose(-1j * (plus - minus), phi1, rtol=0, atol=1e-15)

    def test_calibration_constant_matches_point_source_sum(self):
        """Sum of psi+ is 1/sqrt(2) for the unit source and is preserved
        at stroboscopic times, which fixes the density calibration."""
        params = params_for(n=64, alpha=SQRT2)
        phi = point_source_phi(params, 32).phi
        for _ in range(16):
            phi = phi_step(phi, params)
        plus, _ = assemble_psi(phi[0], phi[1])
        assert abs(plus.sum() - 1.0 / SQRT2) < 1e-12
        assert abs(PSI_DENSITY_CALIBRATION - SQRT2) == 0.0


class TestFresnelKernel:
    def test_constant_modulus(self):
        x = np.linspace(-10, 10, 201)
        k = fresnel_kernel(x, 2.0, 0.5)
        np.testing.assert_allclose(np.abs(k), 1.0 / math.sqrt(4.0 * math.pi), rtol=1e-14)

    def test_branches_conjugate(self):
        x = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(
            fresnel_kernel(x, 1.5, 0.3, "-"), np.conj(fresnel_kernel(x, 1.5, 0.3, "+")), rtol=0, atol=0
        )

    def test_origin_phase(self):
        k = fresnel_kernel(np.array([0.0]), 1.0, 0.25)
        expect = np.exp(-1j * math.pi / 4.0) / math.sqrt(math.pi)
        assert abs(k[0] - expect) < 1e-15

    def test_validates(self):
        with pytest.raises(ValueError):
            fresnel_kernel([0.0], 0.0, 0.5)
        with pytest.raises(ValueError):
            fresnel_kernel([0.0], 1.0, -0.5)
        with pytest.raises(ValueError):
            fresnel_kernel([0.0], 1.0, 0.5, branch="x")


class TestNormBehaviour:
    def test_norm_invariant_at_sqrt2(self):
        """L2 drift below 1e-10 over 1024 steps of the rotating branch."""
        params = params_for(n=256, delta=0.1, alpha=SQRT2)
        p = momentum_grid(params)
        rng = np.random.default_rng(6)
        values = rng.random((2, 256)) + 1j * rng.random((2, 256))
        norm0 = spectral_l2_norm(values)
        for _ in range(1024):
            values = spectral_step(values, p, params.delta, SQRT2)
        assert abs(spectral_l2_norm(values) - norm0) <= 1e-10 * norm0

    def test_per_step_decay_at_alpha_one(self):
        """Each bare-walk step scales the L2 norm by exactly 1/sqrt(2)."""
        params = params_for(n=128, delta=0.1, alpha=1.0)
        p = momentum_grid(params)
        rng = np.random.default_rng(7)
        values = rng.random((2, 128)) + 1j * rng.random((2, 128))
        for _ in range(50):
            before = spectral_l2_norm(values)
            values = spectral_step(values, p, params.delta, 1.0)
            ratio = spectral_l2_norm(values) / before
            assert abs(ratio - 1.0 / SQRT2) <= 1e-12

    def test_position_and_spectral_evolution_agree(self):
        params = params_for(n=128, delta=0.1, alpha=SQRT2)
        rng = np.random.default_rng(8)
        phi = rng.random((2, 128)) - 0.5
        sf = to_spectral(phi, params)
        values = sf.values
        pos = phi
        for _ in range(256):
            pos = phi_step(pos, params)
            values = spectral_step(values, sf.p, params.delta, SQRT2)
        back = from_spectral(SpectralField(sf.p, values, 256), params)
        assert np.max(np.abs(back - pos)) <= 1e-10
