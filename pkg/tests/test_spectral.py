"""Spectral machinery: basis identities, decomposition, metric, reconstruction."""

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmcov.spectral import (
    DensityGrid,
    SpectralConfig,
    SpectralError,
    Spectrum,
    basis_eval,
    basis_grad,
    basis_matrix,
    decompose_density,
    ergodic_metric,
    lambda_weight,
    normalizer,
    reconstruct,
    reconstruct_display,
    trajectory_spectrum,
    uniform_grid,
    uniform_spectrum,
)

from oracles import (
    basis_value_direct,
    decompose_by_quadrature,
    metric_direct,
    normalizer_by_quadrature,
    pair_quadrature,
)

# frozen via the standalone summation oracle (direct formula, K=10, v=2, q=1)
STATIONARY_CENTER_METRIC = 0.7857860401774526


class TestBasisEval:
    def test_constant_term_is_one(self, cfg5):
        assert basis_eval((0, 0), (0.3, 0.7), cfg5) == pytest.approx(1.0)

    def test_node_of_first_mode(self, cfg5):
        assert basis_eval((1, 0), (0.5, 0.5), cfg5) == pytest.approx(0.0, abs=1e-15)

    def test_derived_value_with_quadrature_normalizer(self, cfg5):
        # oracle: direct scalar evaluation, h from quadrature
        h = normalizer_by_quadrature((2, 1))
        expected = np.cos(2 * np.pi * 0.25) * np.cos(np.pi * 1.0) / h
        assert expected == pytest.approx(0.0, abs=1e-12)  # cos(pi/2) node
        assert basis_eval((2, 1), (0.25, 1.0), cfg5) == pytest.approx(expected, abs=1e-12)

    def test_bounded_by_reciprocal_normalizer(self, cfg5, rng):
        for _ in range(50):
            k = tuple(rng.integers(0, 5, 2))
            x = rng.random(2)
            assert abs(basis_eval(k, x, cfg5)) <= 1.0 / normalizer(k, cfg5) + 1e-12

    def test_dimension_mismatch_rejected(self, cfg5):
        with pytest.raises(SpectralError):
            basis_eval((1, 0, 0), (0.5, 0.5), cfg5)
        with pytest.raises(SpectralError):
            basis_eval((1, 0), (0.5, 0.5, 0.5), cfg5)

    def test_outside_points_clamped_to_box(self, cfg5):
        assert basis_eval((2, 1), (1.2, -0.3), cfg5) == basis_eval((2, 1), (1.0, 0.0), cfg5)


class TestBasisGrad:
    def test_constant_term_gradient_zero(self, cfg5):
        assert np.allclose(basis_grad((0, 0), (0.37, 0.91), cfg5), 0.0)

    def test_first_mode_at_node(self, cfg5):
        g = basis_grad((1, 0), (0.5, 0.5), cfg5)
        assert g[0] == pytest.approx(-np.pi / normalizer((1, 0), cfg5))
        assert g[1] == pytest.approx(0.0, abs=1e-15)

    def test_matches_finite_differences(self, cfg5, rng):
        eps = 1e-6
        for _ in range(100):
            k = tuple(rng.integers(0, 5, 2))
            x = rng.uniform(0.05, 0.95, 2)
            g = basis_grad(k, x, cfg5)
            for d in range(2):
                e = np.zeros(2)
                e[d] = eps
                fd = (basis_eval(k, x + e, cfg5) - basis_eval(k, x - e, cfg5)) / (2 * eps)
                if abs(fd) > 1e-8:
                    assert abs(g[d] - fd) / abs(fd) < 1e-6
                else:
                    assert abs(g[d] - fd) < 1e-6


class TestNormalizer:
    def test_trivial_values(self, cfg5):
        assert normalizer((0, 0), cfg5) == pytest.approx(1.0)
        assert normalizer((1, 0), cfg5) == pytest.approx(np.sqrt(0.5))
        assert normalizer((3, 2), cfg5) == pytest.approx(0.5)

    def test_closed_form_vs_quadrature(self, cfg5):
        for k in product(range(5), repeat=2):
            q = normalizer_by_quadrature(k)
            assert abs(normalizer(k, cfg5) - q) / q < 1e-6


class TestLambdaWeight:
    def test_values(self, cfg5):
        assert lambda_weight((0, 0), cfg5) == pytest.approx(1.0)
        assert lambda_weight((1, 0), cfg5) == pytest.approx(2 ** (-1.5))
        assert lambda_weight((1, 1), cfg5) == 3 ** (-1.5)

    def test_nonincreasing_in_norm(self, cfg10):
        vals = {k: lambda_weight(k, cfg10) for k in product(range(10), repeat=2)}
        for k, v in vals.items():
            assert 0 < v <= 1.0
            for kp, vp in vals.items():
                if sum(x * x for x in kp) >= sum(x * x for x in k):
                    assert vp <= v + 1e-15


class TestDecompose:
    def test_uniform_grid(self, cfg10):
        s = decompose_density(uniform_grid(50, cfg10), cfg10)
        assert s[(0, 0)] == pytest.approx(1.0, abs=1e-9)
        assert np.abs(s.coeffs[1:]).max() < 1e-6

    def test_rejects_unnormalized(self, cfg5):
        grid = DensityGrid(np.full((20, 20), 2.0))
        with pytest.raises(SpectralError, match="normalize"):
            decompose_density(grid, cfg5)

    def test_point_mass_matches_pointwise_basis(self, cfg5):
        # single hot cell: phi_k ~= F_k(center) * mass
        n = 51
        values = np.zeros((n, n))
        values[25, 25] = 1.0
        grid = DensityGrid(values).normalized()
        s = decompose_density(grid, cfg5)
        center = ((25 + 0.5) / n, (25 + 0.5) / n)
        expected = np.array(
            [basis_value_direct(k, center) for k in product(range(5), repeat=2)]
        )
        assert np.allclose(s.coeffs, expected, atol=1e-9)

    def test_matches_quadrature_oracle_on_smooth_density(self, cfg5, rng):
        n = 40
        ax = (np.arange(n) + 0.5) / n
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        values = np.exp(-((gx - 0.3) ** 2 + (gy - 0.6) ** 2) / 0.02)
        grid = DensityGrid(values).normalized()
        s = decompose_density(grid, cfg5)
        expected = decompose_by_quadrature(grid.values, cfg5)
        assert np.linalg.norm(s.coeffs - expected) / np.linalg.norm(expected) < 1e-12

    def test_gaussian_density_converges_with_resolution(self, cfg10):
        # refined-grid quadrature as the oracle for the default resolution
        def gaussian(n):
            ax = (np.arange(n) + 0.5) / n
            gx, gy = np.meshgrid(ax, ax, indexing="ij")
            v = np.exp(-((gx - 0.4) ** 2 + (gy - 0.7) ** 2) / 0.02)
            return DensityGrid(v).normalized()

        coarse = decompose_density(gaussian(50), cfg10)
        fine = decompose_density(gaussian(200), cfg10)
        rel = np.linalg.norm(coarse.coeffs - fine.coeffs) / np.linalg.norm(fine.coeffs)
        assert rel < 1e-3


class TestTrajectorySpectrum:
    def test_stationary_matches_pointwise_basis(self, cfg5):
        p = np.array([0.5, 0.5])
        s = trajectory_spectrum(np.tile(p, (7, 1)), 0.1, cfg5)
        assert s[(1, 0)] == pytest.approx(0.0, abs=1e-14)
        assert s[(0, 0)] == pytest.approx(1.0, rel=1e-13)
        rows = basis_matrix(p[None, :], cfg5)[0]
        assert np.allclose(s.coeffs, rows, rtol=1e-13, atol=1e-15)

    def test_refined_sampling_oracle(self, cfg5):
        # sinusoidal sweep, coarse Riemann sum vs 10x refined oracle;
        # the left-Riemann error is O(dt), so dt is sized for the 1e-3 bound
        t_coarse = np.arange(0, 5000) * 0.002
        t_fine = np.arange(0, 50000) * 0.0002

        def sweep(t):
            return np.stack(
                [0.5 + 0.4 * np.sin(0.7 * t), 0.5 + 0.4 * np.cos(1.3 * t)], axis=1
            )

        coarse = trajectory_spectrum(sweep(t_coarse), 0.002, cfg5)
        fine = trajectory_spectrum(sweep(t_fine), 0.0002, cfg5)
        rel = np.linalg.norm(coarse.coeffs - fine.coeffs) / np.linalg.norm(fine.coeffs)
        assert rel < 1e-3

    def test_concatenation_equals_mean_of_parts(self, cfg5, rng):
        # joint statistics of equal-duration pieces = mean of piece statistics
        parts = [rng.random((100, 2)) for _ in range(3)]
        joint = trajectory_spectrum(np.concatenate(parts), 0.1, cfg5)
        mean = sum(trajectory_spectrum(p, 0.1, cfg5).coeffs for p in parts) / 3
        assert np.abs(joint.coeffs - mean).max() < 1e-12

    def test_empty_and_zero_duration_rejected(self, cfg5):
        with pytest.raises(SpectralError):
            trajectory_spectrum(np.empty((0, 2)), 0.1, cfg5)
        with pytest.raises(SpectralError):
            trajectory_spectrum(np.array([[0.5, 0.5]]), 0.0, cfg5)


class TestErgodicMetric:
    def test_zero_iff_equal(self, cfg5, rng):
        c = Spectrum(cfg5, rng.normal(size=cfg5.size))
        assert ergodic_metric(c, c) == 0.0
        other = Spectrum(cfg5, c.coeffs + 1e-3)
        assert ergodic_metric(c, other) > 0.0

    def test_stationary_center_vs_uniform_frozen_value(self, cfg10):
        c = trajectory_spectrum(np.array([[0.5, 0.5]]), 0.1, cfg10)
        phi = uniform_spectrum(cfg10)
        assert ergodic_metric(c, phi) == pytest.approx(STATIONARY_CENTER_METRIC, rel=1e-12)

    def test_scales_linearly_in_weight(self, rng):
        a = SpectralConfig(num_coeffs=5, metric_weight=1.0)
        b = SpectralConfig(num_coeffs=5, metric_weight=2.0)
        coeffs = rng.normal(size=a.size)
        phi = rng.normal(size=a.size)
        m1 = ergodic_metric(Spectrum(a, coeffs), Spectrum(a, phi))
        m2 = ergodic_metric(Spectrum(b, coeffs), Spectrum(b, phi))
        assert m2 == pytest.approx(2 * m1, rel=1e-15)

    def test_matches_direct_recomputation(self, cfg10, rng):
        c = rng.normal(size=cfg10.size)
        phi = rng.normal(size=cfg10.size)
        got = ergodic_metric(Spectrum(cfg10, c), Spectrum(cfg10, phi))
        want = metric_direct(c, phi, cfg10, cfg10.metric_weight)
        assert got == pytest.approx(want, rel=1e-12)

    def test_config_mismatch_rejected(self, cfg5, cfg10):
        with pytest.raises(SpectralError):
            ergodic_metric(uniform_spectrum(cfg5), uniform_spectrum(cfg10))


class TestReconstruct:
    def test_uniform_round_trip(self, cfg10):
        s = decompose_density(uniform_grid(50, cfg10), cfg10)
        grid = reconstruct(s, 25)
        assert np.allclose(grid.values, 1.0, atol=1e-6)

    def test_single_coefficient_reproduces_basis(self, cfg5):
        coeffs = np.zeros(cfg5.size)
        coeffs[cfg5.flat_index((1, 0))] = 1.0
        grid = reconstruct(Spectrum(cfg5, coeffs), 16)
        for i in (0, 7, 15):
            for j in (0, 9):
                center = ((i + 0.5) / 16, (j + 0.5) / 16)
                assert grid.values[i, j] == pytest.approx(
                    basis_value_direct((1, 0), center), rel=1e-12
                )

    def test_error_shrinks_with_more_coefficients(self):
        n = 60
        ax = (np.arange(n) + 0.5) / n
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        target = DensityGrid(np.exp(-((gx - 0.5) ** 2 + (gy - 0.4) ** 2) / 0.05)).normalized()

        def l2_err(K):
            cfg = SpectralConfig(num_coeffs=K)
            recon = reconstruct(decompose_density(target, cfg), n)
            return np.linalg.norm(recon.values - target.values)

        assert l2_err(10) < l2_err(5)

    def test_zero_resolution_rejected(self, cfg5):
        with pytest.raises(SpectralError):
            reconstruct(uniform_spectrum(cfg5), 0)

    def test_display_variant_nonnegative_unit_mass(self, cfg10):
        # a spiky density rings below zero; display variant must not
        values = np.zeros((50, 50))
        values[10, 40] = 1.0
        s = decompose_density(DensityGrid(values).normalized(), cfg10)
        raw = reconstruct(s, 50)
        assert raw.values.min() < 0
        disp = reconstruct_display(s, 50)
        assert disp.values.min() >= 0
        assert disp.mass == pytest.approx(1.0, abs=1e-9)


class TestOrthonormality:
    def test_all_pairs_k_up_to_5(self, cfg5):
        for k in product(range(5), repeat=2):
            for kp in product(range(5), repeat=2):
                val = pair_quadrature(k, kp, cfg5)
                expected = 1.0 if k == kp else 0.0
                assert abs(val - expected) < 1e-4, (k, kp, val)


class TestDensityGrid:
    def test_negative_values_rejected(self):
        with pytest.raises(SpectralError):
            DensityGrid(np.array([[1.0, -0.1], [0.2, 0.3]]))

    def test_normalization(self, rng):
        grid = DensityGrid(rng.random((30, 30)) + 0.1)
        normed = grid.normalized()
        assert normed.mass == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    px=st.floats(0.0, 1.0, allow_nan=False),
    py=st.floats(0.0, 1.0, allow_nan=False),
    n=st.integers(1, 30),
)
def test_stationary_identity_property(px, py, n):
    cfg = SpectralConfig(num_coeffs=4)
    p = np.array([px, py])
    s = trajectory_spectrum(np.tile(p, (n, 1)), 0.25, cfg)
    rows = basis_matrix(p[None, :], cfg)[0]
    assert np.allclose(s.coeffs, rows, rtol=1e-12, atol=1e-13)
